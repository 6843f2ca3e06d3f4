//! `species-ent`: sweeps, eigenvalue densities, critical-point report and
//! exact-diagonalization cross-checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use species_entanglement::entanglement::Size;
use species_entanglement::modes::Parity;
use species_entanglement::sweep::{self, Format, SweepConfig};
use species_entanglement::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "species-ent",
    version,
    about = "Up/down-spin species entanglement of the transverse-field Ising chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ε(x) and its derivatives over an x grid for several chain lengths
    Sweep(SweepArgs),
    /// Integrated eigenvalue density g(p, x)
    Density(DensityArgs),
    /// Jump of ε′ at x = 1 and power-law fit of ε″ (JSON)
    Critical(CriticalArgs),
    /// Exact diagonalization against the mode formulas
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SectorArg {
    Even,
    Odd,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Finite-difference step
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated even sizes and/or `inf`
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<String>>,
    #[arg(long, value_enum)]
    sector: Option<SectorArg>,
    /// Insert samples geometrically close to x = ±1 (default on)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    refine_critical: Option<bool>,
    /// Skip ε′ and ε″ columns
    #[arg(long)]
    no_derivatives: bool,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated couplings x
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xs: Option<Vec<f64>>,
    #[arg(long)]
    p_steps: Option<usize>,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[command(flatten)]
    common: Common,
    /// Fit window `a,b` for ε″ with 0 < a < b < 1
    #[arg(long, value_delimiter = ',', num_args = 2)]
    fit_window: Option<Vec<f64>>,
    #[arg(long)]
    fit_points: Option<usize>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated even chain lengths (at most 12)
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated couplings x
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xs: Option<Vec<f64>>,
}

fn base_config(common: &Common) -> Result<SweepConfig> {
    let mut cfg = match &common.config {
        Some(path) => SweepConfig::from_json_file(path)?,
        None => SweepConfig::default(),
    };
    if let Some(f) = common.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(p) = &common.out {
        cfg.output_path = Some(p.clone());
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    if let Some(t) = common.quad_tol {
        cfg.quad_tol = t;
    }
    if let Some(s) = common.step {
        cfg.derivative_step = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let mut cfg = base_config(&args.common)?;
            if let Some(v) = args.x_min {
                cfg.x_min = v;
            }
            if let Some(v) = args.x_max {
                cfg.x_max = v;
            }
            if let Some(v) = args.steps {
                cfg.x_steps = v;
            }
            if let Some(v) = &args.sizes {
                cfg.sizes = v.iter().map(|s| s.parse::<Size>()).collect::<Result<_>>()?;
            }
            if let Some(s) = args.sector {
                cfg.sector = match s {
                    SectorArg::Even => Parity::Even,
                    SectorArg::Odd => Parity::Odd,
                };
            }
            if let Some(v) = args.refine_critical {
                cfg.refine_critical = v;
            }
            if args.no_derivatives {
                cfg.derivatives = false;
            }
            cfg.validate()?;
            let rows = sweep::cmd_sweep(&cfg)?;
            sweep::write_output(
                cfg.output_path.as_deref(),
                &sweep::render(&rows, cfg.format)?,
            )
        }
        Command::Density(args) => {
            let mut cfg = base_config(&args.common)?;
            if let Some(v) = args.xs {
                cfg.density_xs = v;
            }
            if let Some(v) = args.p_steps {
                cfg.p_steps = v;
            }
            cfg.validate()?;
            let rows = sweep::cmd_density(&cfg.density_xs, cfg.p_steps)?;
            sweep::write_output(
                cfg.output_path.as_deref(),
                &sweep::render(&rows, cfg.format)?,
            )
        }
        Command::Critical(args) => {
            let mut cfg = base_config(&args.common)?;
            if let Some(w) = args.fit_window {
                cfg.fit_window = (w[0], w[1]);
            }
            if let Some(k) = args.fit_points {
                cfg.fit_points = k;
            }
            let report = sweep::cmd_critical(&cfg)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            sweep::write_output(cfg.output_path.as_deref(), &text)
        }
        Command::Oracle(args) => {
            let mut cfg = base_config(&args.common)?;
            if let Some(v) = args.sizes {
                cfg.oracle_sizes = v;
            }
            if let Some(v) = args.xs {
                cfg.oracle_xs = v;
            }
            cfg.validate()?;
            let rows = sweep::cmd_oracle(&cfg.oracle_sizes, &cfg.oracle_xs, cfg.jobs)?;
            sweep::write_output(
                cfg.output_path.as_deref(),
                &sweep::render(&rows, cfg.format)?,
            )?;
            sweep::oracle_verdict(&rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
