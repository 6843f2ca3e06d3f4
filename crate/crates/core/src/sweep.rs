//! Parameter sweeps and table export behind the `species-ent` tool.
//!
//! Every subcommand produces a list of rows; rows are computed on a bounded
//! rayon pool and collected in input order, so the output does not depend on
//! the worker count. Files are written to a temporary sibling and renamed
//! into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{
    critical_report, epsilon_derivative_at, safe_side, CriticalParams, CriticalReport, Side,
};
use crate::ed::{
    energy_cross_check, ground_state, momentum_entropy_ed, species_entropy_ed, SpinHamiltonian,
    DEFAULT_RESIDUAL_TOL,
};
use crate::entanglement::{epsilon_at, epsilon_finite, g_of_p, EigenvalueDensitySample, Size};
use crate::modes::Parity;
use crate::{Error, Result};

/// Largest `|x|` at which the oracle is expected to agree.
pub const ORACLE_X_LIMIT: f64 = 0.95;
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Settings for every subcommand. Built-in defaults are overridden by a JSON
/// config file, which is overridden by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub x_steps: usize,
    pub sizes: Vec<Size>,
    pub sector: Parity,
    pub quad_tol: f64,
    pub derivative_step: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub refine_critical: bool,
    pub derivatives: bool,
    pub jobs: Option<usize>,
    pub density_xs: Vec<f64>,
    pub p_steps: usize,
    pub oracle_sizes: Vec<usize>,
    pub oracle_xs: Vec<f64>,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            x_steps: 81,
            sizes: vec![Size::Finite(10), Size::Finite(20), Size::Infinite],
            sector: Parity::Even,
            quad_tol: 1e-8,
            derivative_step: crate::criticality::DEFAULT_STEP,
            output_path: None,
            format: Format::Csv,
            refine_critical: true,
            derivatives: true,
            jobs: None,
            density_xs: vec![0.8, 0.9, 1.0, 3.0],
            p_steps: 101,
            oracle_sizes: vec![2, 4, 6, 8, 10],
            oracle_xs: vec![-0.9, -0.5, -0.2, 0.2, 0.5, 0.9],
            fit_window: (0.90, 0.99),
            fit_points: 12,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| config_err(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(config_err("x range must be finite"));
        }
        if self.x_min > self.x_max {
            return Err(config_err(format!(
                "x_min {} exceeds x_max {}",
                self.x_min, self.x_max
            )));
        }
        // a degenerate range [a, a] is allowed and yields x_steps copies of a
        if self.x_steps < 2 {
            return Err(config_err("x_steps must be at least 2"));
        }
        if self.sizes.is_empty() {
            return Err(config_err("sizes must not be empty"));
        }
        if let Some(Size::Finite(n)) = self
            .sizes
            .iter()
            .find(|s| matches!(s, Size::Finite(n) if *n < 2 || n % 2 != 0))
        {
            return Err(config_err(format!("size {n} must be even and at least 2")));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(config_err("quad_tol must be positive"));
        }
        if !(self.derivative_step > 0.0 && self.derivative_step < 0.1) {
            return Err(config_err("derivative_step must lie in (0, 0.1)"));
        }
        if self.jobs == Some(0) {
            return Err(config_err("jobs must be at least 1"));
        }
        if self.p_steps < 2 {
            return Err(config_err("p_steps must be at least 2"));
        }
        if self.density_xs.iter().any(|x| !x.is_finite())
            || self.oracle_xs.iter().any(|x| !x.is_finite())
        {
            return Err(config_err("x lists must be finite"));
        }
        if let Some(n) = self
            .oracle_sizes
            .iter()
            .find(|&&n| !(2..=crate::ed::MAX_SITES).contains(&n) || n % 2 != 0)
        {
            return Err(config_err(format!(
                "oracle size {n} must be even and in 2..=12"
            )));
        }
        Ok(())
    }

    /// Requested grid, plus geometric refinement toward `±1` when enabled.
    pub fn x_grid(&self) -> Vec<f64> {
        let (a, b, k) = (self.x_min, self.x_max, self.x_steps);
        let mut xs: Vec<f64> = (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect();
        if self.refine_critical && a < b {
            for c in crate::criticality::CRITICAL_POINTS {
                if !(a < c && c < b) {
                    continue;
                }
                xs.push(c);
                for d in REFINEMENT_OFFSETS {
                    xs.extend([c - d, c + d].into_iter().filter(|y| a <= *y && *y <= b));
                }
            }
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|p, q| (*p - *q).abs() <= 1e-12);
        }
        xs
    }

    pub fn critical_params(&self) -> CriticalParams {
        CriticalParams {
            step: self.derivative_step,
            quad_tol: derivative_quad_tol(self.quad_tol, self.derivative_step),
            fit_window: self.fit_window,
            fit_points: self.fit_points,
        }
    }
}

/// Offsets `0.1 · 10^(-k/2)`, `k = 0..=6`, inserted on both sides of `±1`.
pub const REFINEMENT_OFFSETS: [f64; 7] = [
    1e-1,
    3.162_277_660_168_379e-2,
    1e-2,
    3.162_277_660_168_379e-3,
    1e-3,
    3.162_277_660_168_379e-4,
    1e-4,
];

/// Quadrature tolerance used under finite differences: tight enough that
/// quadrature noise divided by `step²` stays small.
pub fn derivative_quad_tol(quad_tol: f64, step: f64) -> f64 {
    (quad_tol * step * step).max(1e-13)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| config_err(format!("worker pool: {e}")))
}

fn run_ordered<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    pool(jobs)?.install(|| items.par_iter().map(&f).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub size: Size,
    pub epsilon: f64,
    pub eps_d1: Option<f64>,
    pub eps_d2: Option<f64>,
    pub deriv_side: Option<Side>,
}

/// `ε` (and optionally `ε′`, `ε″`) for every size and `x`, size-major.
pub fn cmd_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let xs = config.x_grid();
    let items: Vec<(Size, f64)> = config
        .sizes
        .iter()
        .flat_map(|&s| xs.iter().map(move |&x| (s, x)))
        .collect();
    let step = config.derivative_step;
    let dtol = derivative_quad_tol(config.quad_tol, step);
    run_ordered(config.jobs, &items, |&(size, x)| {
        let epsilon = epsilon_at(x, size, config.sector, config.quad_tol)?;
        let (eps_d1, eps_d2, deriv_side) = if config.derivatives {
            let side = safe_side(x, step);
            (
                Some(epsilon_derivative_at(x, size, 1, step, side, dtol)?),
                Some(epsilon_derivative_at(x, size, 2, step, side, dtol)?),
                Some(side),
            )
        } else {
            (None, None, None)
        };
        Ok(SweepRow {
            x,
            size,
            epsilon,
            eps_d1,
            eps_d2,
            deriv_side,
        })
    })
}

/// `g(p, x)` on an even `p` grid over `[0, 1]` for each `x`, x-major.
pub fn cmd_density(x_list: &[f64], p_steps: usize) -> Result<Vec<EigenvalueDensitySample>> {
    if p_steps < 2 {
        return Err(config_err("p_steps must be at least 2"));
    }
    let mut rows = Vec::with_capacity(x_list.len() * p_steps);
    for &x in x_list {
        for i in 0..p_steps {
            let p = i as f64 / (p_steps - 1) as f64;
            rows.push(EigenvalueDensitySample {
                p,
                x,
                g: g_of_p(p, x)?,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_critical(config: &SweepConfig) -> Result<CriticalReport> {
    config.validate()?;
    critical_report(&config.critical_params())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: usize,
    pub x: f64,
    pub eps_modes: f64,
    /// Shannon entropy per site of the exact `σᶻ`-basis distribution.
    pub eps_ed: f64,
    pub abs_diff: f64,
    pub energy_rel_diff: f64,
    /// Mode-sum entropy with `p_q` measured from the exact state.
    pub eps_ed_momentum: f64,
    pub momentum_abs_diff: f64,
    /// Whether the exact solve was restricted to the even sector.
    pub sector_projected: bool,
}

/// Exact diagonalization against the mode formulas on every `(n, x)`.
pub fn cmd_oracle(n_list: &[usize], x_list: &[f64], jobs: Option<usize>) -> Result<Vec<OracleRow>> {
    let items: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| x_list.iter().map(move |&x| (n, x)))
        .collect();
    run_ordered(jobs, &items, |&(n, x)| {
        let eps_modes = epsilon_finite(x, n, Parity::Even)?.epsilon;
        let projected = x.abs() > ORACLE_X_LIMIT;
        let ham = SpinHamiltonian::from_ratio(n, x)?;
        let gs = ground_state(
            &ham,
            projected.then_some(Parity::Even),
            DEFAULT_RESIDUAL_TOL,
        )?;
        let eps_ed = species_entropy_ed(&gs);
        let eps_ed_momentum = momentum_entropy_ed(&gs)?;
        Ok(OracleRow {
            n,
            x,
            eps_modes,
            eps_ed,
            abs_diff: (eps_ed - eps_modes).abs(),
            energy_rel_diff: energy_cross_check(x, n)?,
            eps_ed_momentum,
            momentum_abs_diff: (eps_ed_momentum - eps_modes).abs(),
            sector_projected: projected,
        })
    })
}

/// Fails with [`Error::OracleDisagreement`] if any row with `|x| <= 0.95`
/// differs by more than `1e-9`.
pub fn oracle_verdict(rows: &[OracleRow]) -> Result<()> {
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| {
            r.x.abs() <= ORACLE_X_LIMIT && (r.abs_diff > ORACLE_TOLERANCE || r.abs_diff.is_nan())
        })
        .map(|r| format!("(n={}, x={}): |Δε| = {:.3e}", r.n, r.x, r.abs_diff))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::OracleDisagreement(format!(
            "{} of {} rows: {}",
            bad.len(),
            rows.len(),
            bad.join("; ")
        )))
    }
}

/// A row that can be rendered as a CSV record.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

/// 17 significant digits, `.` decimal separator.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

impl CsvRow for SweepRow {
    const HEADER: &'static [&'static str] =
        &["x", "size", "epsilon", "eps_d1", "eps_d2", "deriv_side"];

    fn cells(&self) -> Vec<String> {
        let side = match self.deriv_side {
            Some(Side::Central) => "central",
            Some(Side::Left) => "left",
            Some(Side::Right) => "right",
            None => "",
        };
        vec![
            fmt_real(self.x),
            self.size.to_string(),
            fmt_real(self.epsilon),
            fmt_opt(self.eps_d1),
            fmt_opt(self.eps_d2),
            side.to_string(),
        ]
    }
}

impl CsvRow for EigenvalueDensitySample {
    const HEADER: &'static [&'static str] = &["p", "x", "g"];

    fn cells(&self) -> Vec<String> {
        vec![fmt_real(self.p), fmt_real(self.x), fmt_real(self.g)]
    }
}

impl CsvRow for OracleRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "x",
        "eps_modes",
        "eps_ed",
        "abs_diff",
        "energy_rel_diff",
        "eps_ed_momentum",
        "momentum_abs_diff",
        "sector_projected",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_real(self.x),
            fmt_real(self.eps_modes),
            fmt_real(self.eps_ed),
            fmt_real(self.abs_diff),
            fmt_real(self.energy_rel_diff),
            fmt_real(self.eps_ed_momentum),
            fmt_real(self.momentum_abs_diff),
            self.sector_projected.to_string(),
        ]
    }
}

pub fn to_csv<R: CsvRow>(rows: &[R]) -> String {
    let mut out = R::HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.cells().join(","));
    }
    out
}

pub fn render<R: CsvRow + Serialize>(rows: &[R], format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(to_csv(rows)),
        Format::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
    }
}

/// Writes `text` to `path` via a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_configs() {
        let ok = SweepConfig::default();
        assert!(ok.validate().is_ok());
        let cases = [
            SweepConfig {
                x_min: 1.0,
                x_max: 0.0,
                ..ok.clone()
            },
            SweepConfig {
                x_steps: 1,
                ..ok.clone()
            },
            SweepConfig {
                sizes: vec![Size::Finite(3)],
                ..ok.clone()
            },
            SweepConfig {
                sizes: vec![],
                ..ok.clone()
            },
            SweepConfig {
                quad_tol: 0.0,
                ..ok.clone()
            },
            SweepConfig {
                jobs: Some(0),
                ..ok.clone()
            },
            SweepConfig {
                oracle_sizes: vec![14],
                ..ok.clone()
            },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn refinement_brackets_critical_points() {
        let c = SweepConfig {
            x_min: 0.0,
            x_max: 2.0,
            x_steps: 5,
            ..Default::default()
        };
        let xs = c.x_grid();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert!(xs.contains(&1.0));
        assert!(xs.iter().any(|x| (0.9999..1.0).contains(x)));
        assert!(xs.iter().any(|&x| x > 1.0 && x <= 1.0001));
        assert!(xs.iter().all(|&x| x.abs() != 1.0 || x == 1.0));
        let plain = SweepConfig {
            refine_critical: false,
            ..c
        };
        assert_eq!(plain.x_grid(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn degenerate_range_is_all_zero() {
        let c = SweepConfig {
            x_min: 0.0,
            x_max: 0.0,
            x_steps: 3,
            sizes: vec![Size::Finite(4), Size::Infinite],
            ..Default::default()
        };
        let rows = cmd_sweep(&c).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.epsilon == 0.0));
    }

    #[test]
    fn csv_layout() {
        let rows = cmd_density(&[1.0], 3).unwrap();
        let text = to_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,x,g");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[3],
            "1.0000000000000000e0,1.0000000000000000e0,5.0000000000000000e-1"
        );
    }

    #[test]
    fn oracle_verdict_ignores_projected_rows() {
        let row = OracleRow {
            n: 4,
            x: 1.5,
            eps_modes: 0.1,
            eps_ed: 0.2,
            abs_diff: 0.1,
            energy_rel_diff: 0.0,
            eps_ed_momentum: 0.1,
            momentum_abs_diff: 0.0,
            sector_projected: true,
        };
        assert!(oracle_verdict(&[row]).is_ok());
        let inside = OracleRow { x: 0.5, ..row };
        assert!(matches!(
            oracle_verdict(&[inside]),
            Err(Error::OracleDisagreement(_))
        ));
    }
}
