//! Brute-force exact diagonalization of the periodic chain in the `σᶻ` basis.
//!
//! Site `i` is bit `i` of the configuration index; a set bit is spin up
//! (`σᶻ = +1`), which is also an occupied Jordan-Wigner fermion. The
//! Hamiltonian is real symmetric in this basis and is applied matrix-free.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entanglement::binary_entropy;
use crate::modes::{build_grid, mode_spectrum, Coupling, Parity};
use crate::{Error, Result};

pub const MAX_SITES: usize = 12;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

const KRYLOV_DIM: usize = 96;
const MAX_RESTARTS: usize = 60;

/// `H = -J Σᵢ σˣᵢ σˣᵢ₊₁ - h Σᵢ σᶻᵢ` on a ring of `n` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinHamiltonian {
    n: usize,
    coupling: Coupling,
    diagonal: Vec<f64>,
    bond_masks: Vec<usize>,
}

impl SpinHamiltonian {
    pub fn new(n: usize, coupling: Coupling) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&n) {
            return Err(Error::Config(format!(
                "exact diagonalization needs 2 <= n <= {MAX_SITES}, got {n}"
            )));
        }
        let h = coupling.h();
        let diagonal = (0..1usize << n)
            .map(|s| -h * (2.0 * s.count_ones() as f64 - n as f64))
            .collect();
        // every bond kept literally; for n = 2 the two bonds share a mask
        let bond_masks = (0..n).map(|i| (1 << i) | (1 << ((i + 1) % n))).collect();
        Ok(Self {
            n,
            coupling,
            diagonal,
            bond_masks,
        })
    }

    pub fn from_ratio(n: usize, x: f64) -> Result<Self> {
        Self::new(n, Coupling::from_ratio(x)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn apply(&self, state: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(state, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, state: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.dim();
        for len in [state.len(), out.len()] {
            if len != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: len,
                });
            }
        }
        let j = self.coupling.j();
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = self.diagonal[s] * state[s];
            for &m in &self.bond_masks {
                acc -= j * state[s ^ m];
            }
            *o = acc;
        }
        Ok(())
    }

    /// Eigenvalue `±1` of `Π σᶻ` on configuration `s`.
    pub fn parity_of(&self, s: usize) -> f64 {
        if (self.n - s.count_ones() as usize).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn apply_parity(&self, state: &[f64]) -> Vec<f64> {
        state
            .iter()
            .enumerate()
            .map(|(s, v)| self.parity_of(s) * v)
            .collect()
    }

    fn project(&self, state: &mut [f64], sector: Parity) {
        let keep = match sector {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        for (s, v) in state.iter_mut().enumerate() {
            if self.parity_of(s) != keep {
                *v = 0.0;
            }
        }
    }
}

/// Convenience wrapper around [`SpinHamiltonian::apply`].
pub fn apply_hamiltonian(state: &[f64], ham: &SpinHamiltonian) -> Result<Vec<f64>> {
    ham.apply(state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateED {
    pub n: usize,
    pub x: f64,
    pub energy: f64,
    /// Real amplitudes in the `σᶻ` basis, largest-magnitude entry positive.
    pub amplitudes: Vec<f64>,
    /// Sector of `Π σᶻ`, with the all-up state even.
    pub parity: Parity,
    /// `⟨Π σᶻ⟩`; `±1` for a state of definite parity.
    pub parity_expectation: f64,
    pub residual: f64,
}

impl GroundStateED {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
///
/// With a sector the start vector and every Krylov vector are projected onto
/// it. Convergence is judged on `‖Hv - Ev‖`, not on eigenvalue changes.
pub fn ground_state(
    ham: &SpinHamiltonian,
    sector: Option<Parity>,
    residual_tol: f64,
) -> Result<GroundStateED> {
    let dim = ham.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7f1a_u64 ^ ham.n() as u64);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(sec) = sector {
        ham.project(&mut start, sec);
    }
    let s = norm(&start);
    start.iter_mut().for_each(|v| *v /= s);

    let krylov = KRYLOV_DIM.min(dim);
    let mut residual = f64::INFINITY;
    let mut w = vec![0.0; dim];
    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(krylov);
        let mut betas: Vec<f64> = Vec::with_capacity(krylov);
        loop {
            let k = basis.len() - 1;
            ham.apply_into(&basis[k], &mut w)?;
            if let Some(sec) = sector {
                ham.project(&mut w, sec);
            }
            let alpha = dot(&w, &basis[k]);
            alphas.push(alpha);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    axpy(-c, b, &mut w);
                }
            }
            let beta = norm(&w);
            if basis.len() == krylov || beta <= 1e-12 * alpha.abs().max(1.0) {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|v| v / beta).collect());
        }

        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty Krylov space");
        let y = eig.eigenvectors.column(idx);
        let mut ritz = vec![0.0; dim];
        for (coef, b) in y.iter().zip(&basis) {
            axpy(*coef, b, &mut ritz);
        }
        let s = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= s);

        ham.apply_into(&ritz, &mut w)?;
        if let Some(sec) = sector {
            ham.project(&mut w, sec);
        }
        let rayleigh = dot(&w, &ritz);
        axpy(-rayleigh, &ritz, &mut w);
        residual = norm(&w);
        if residual <= residual_tol {
            return Ok(finish(ham, ritz, rayleigh, residual, sector));
        }
        start = ritz;
    }
    Err(Error::EigensolverNotConverged {
        residual,
        iterations: MAX_RESTARTS * krylov,
    })
}

fn finish(
    ham: &SpinHamiltonian,
    mut v: Vec<f64>,
    energy: f64,
    residual: f64,
    sector: Option<Parity>,
) -> GroundStateED {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    let parity_expectation: f64 = v
        .iter()
        .enumerate()
        .map(|(s, a)| ham.parity_of(s) * a * a)
        .sum();
    let parity = sector.unwrap_or(if parity_expectation >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    });
    GroundStateED {
        n: ham.n(),
        x: ham.coupling().x(),
        energy,
        amplitudes: v,
        parity,
        parity_expectation,
        residual,
    }
}

/// Species entanglement per site: Shannon entropy of the `σᶻ`-basis
/// distribution `|ψ(u)|²`, divided by `n`.
pub fn species_entropy_ed(gs: &GroundStateED) -> f64 {
    let s: f64 = gs
        .amplitudes
        .iter()
        .map(|a| a * a)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s / gs.n as f64
}

/// Pair weights `p_q = 1 - ⟨c_q† c_q⟩` on the antiperiodic grid, measured
/// from the ground-state wave function through Jordan-Wigner correlators
/// `⟨c_i† c_j⟩`. Requires a state of even fermion parity.
pub fn mode_weights_ed(gs: &GroundStateED) -> Result<Vec<(f64, f64)>> {
    let n = gs.n;
    if !n.is_multiple_of(2)
        || gs.parity != Parity::Even
        || (gs.parity_expectation - 1.0).abs() > 1e-8
    {
        return Err(Error::WrongSector("even"));
    }
    let amp = &gs.amplitudes;
    let mut corr = vec![0.0; n * n];
    for (s, &a) in amp.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for j in 0..n {
            if s >> j & 1 == 0 {
                continue;
            }
            corr[j * n + j] += a * a;
            for i in 0..n {
                if i == j || s >> i & 1 == 1 {
                    continue;
                }
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let between = (s >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1);
                let sign = if between.count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let t = s ^ (1 << i) ^ (1 << j);
                corr[i * n + j] += sign * amp[t] * a;
            }
        }
    }
    let grid = build_grid(n, Parity::Even)?;
    Ok(grid
        .q_positive()
        .iter()
        .map(|&q| {
            let occ: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (q * (i as f64 - j as f64)).cos() * corr[i * n + j])
                .sum::<f64>()
                / n as f64;
            (q, 1.0 - occ)
        })
        .collect())
}

/// `(1/n) Σ_{q>0} H(p_q)` with `p_q` measured by [`mode_weights_ed`].
pub fn momentum_entropy_ed(gs: &GroundStateED) -> Result<f64> {
    let weights = mode_weights_ed(gs)?;
    let total = weights
        .iter()
        .map(|&(_, p)| binary_entropy(p.clamp(0.0, 1.0)))
        .sum::<Result<f64>>()?;
    Ok(total / gs.n as f64)
}

/// Relative discrepancy between the even-sector exact ground energy and
/// `-2 Σ_{q>0} Λ_q` (with `h = 1`).
pub fn energy_cross_check(x: f64, n: usize) -> Result<f64> {
    let ham = SpinHamiltonian::from_ratio(n, x)?;
    let gs = ground_state(&ham, Some(Parity::Even), DEFAULT_RESIDUAL_TOL)?;
    let modes = mode_spectrum(x, &build_grid(n, Parity::Even)?)?.ground_energy();
    Ok((gs.energy - modes).abs() / gs.energy.abs())
}
