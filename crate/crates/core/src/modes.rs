//! Couplings, momentum grids and per-mode amplitudes of the fermionized chain.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exchange `j` and transverse field `h`. Everything downstream depends on
/// the pair only through the ratio `x = j / h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    j: f64,
    h: f64,
}

impl Coupling {
    pub fn new(j: f64, h: f64) -> Result<Self> {
        if !j.is_finite() || !h.is_finite() {
            return Err(Error::InvalidCoupling(format!(
                "non-finite (j, h) = ({j}, {h})"
            )));
        }
        if h == 0.0 {
            return Err(Error::InvalidCoupling(
                "h = 0 has no ratio x = j/h; the h -> 0 limit differs from h = 0".into(),
            ));
        }
        Ok(Self { j, h })
    }

    /// Coupling with `h = 1`, `j = x`.
    pub fn from_ratio(x: f64) -> Result<Self> {
        Self::new(x, 1.0)
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self) -> f64 {
        self.j / self.h
    }
}

/// Fermion-number parity sector. The even sector carries the antiperiodic
/// momenta `(2k - 1)π/n`, the odd sector the periodic ones `2kπ/n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

/// Allowed momenta of an `n`-site periodic chain in one parity sector.
///
/// Only `0 < q < π` is stored; each stored `q` stands for the pair `±q`.
/// The odd sector's unpaired momenta `0` and `π` are kept in `endpoints`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    n: usize,
    sector: Parity,
    q_positive: Vec<f64>,
    endpoints: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(n: usize, sector: Parity) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidSize(n));
        }
        let nf = n as f64;
        let (q_positive, endpoints) = match sector {
            Parity::Even => (
                (1..=n / 2).map(|k| (2 * k - 1) as f64 * PI / nf).collect(),
                vec![],
            ),
            Parity::Odd => (
                (1..n / 2).map(|k| (2 * k) as f64 * PI / nf).collect(),
                vec![0.0, PI],
            ),
        };
        Ok(Self {
            n,
            sector,
            q_positive,
            endpoints,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sector(&self) -> Parity {
        self.sector
    }

    /// Momenta in `(0, π)`, ascending.
    pub fn q_positive(&self) -> &[f64] {
        &self.q_positive
    }

    /// Unpaired momenta `{0, π}` of the odd sector; empty for the even sector.
    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }
}

/// Shorthand for [`MomentumGrid::new`].
pub fn build_grid(n: usize, sector: Parity) -> Result<MomentumGrid> {
    MomentumGrid::new(n, sector)
}

/// Per-mode quantities at one momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub q: f64,
    /// `√(1 + x² + 2x cos q)`, the single-mode energy scale in units of `h`.
    pub lambda: f64,
    /// `|1 + x cos q| / lambda`.
    pub zeta: f64,
    /// Weight `|a_q|² = (1 - zeta) / 2` of the empty pair `(q, -q)`.
    pub p: f64,
}

impl Mode {
    pub fn new(x: f64, q: f64) -> Self {
        let sin_q = q.sin();
        // 1 + x cos q, written so that x = ±1 near q = π or 0 does not cancel
        let half = 0.5 * q;
        let u = if x >= 0.0 {
            (1.0 - x) + 2.0 * x * half.cos().powi(2)
        } else {
            (1.0 + x) - 2.0 * x * half.sin().powi(2)
        };
        // u² + x² sin² q == 1 + x² + 2x cos q, without cancellation near u = 0
        let lambda = u.hypot(x * sin_q);
        // 0/0 only at x = ±1 with q ∈ {0, π}; the band limit there is ζ = 0
        let zeta = if lambda == 0.0 {
            0.0
        } else {
            (u.abs() / lambda).min(1.0)
        };
        Self {
            q,
            lambda,
            zeta,
            p: 0.5 * (1.0 - zeta),
        }
    }

    /// Weight `|b_q|² = 1 - p` of the doubly occupied pair.
    pub fn occupied_weight(&self) -> f64 {
        1.0 - self.p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    x: f64,
    grid: MomentumGrid,
    modes: Vec<Mode>,
}

impl ModeSpectrum {
    pub fn new(coupling: Coupling, grid: MomentumGrid) -> Self {
        let x = coupling.x();
        let modes = grid.q_positive().iter().map(|&q| Mode::new(x, q)).collect();
        Self { x, grid, modes }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn p_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.p)
    }

    /// Smallest `1 - 2p` over the band, i.e. the observed gap between the
    /// `p` and `1 - p` bands.
    pub fn observed_gap(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.zeta)
            .fold(f64::INFINITY, f64::min)
    }

    /// Ground-state energy `-2h Σ_{q>0} Λ_q` of the even sector, in units of `h`.
    pub fn ground_energy(&self) -> f64 {
        -2.0 * self.modes.iter().map(|m| m.lambda).sum::<f64>()
    }
}

/// Mode spectrum at ratio `x`.
pub fn mode_spectrum(x: f64, grid: &MomentumGrid) -> Result<ModeSpectrum> {
    Ok(ModeSpectrum::new(Coupling::from_ratio(x)?, grid.clone()))
}

/// Gap `√(1 - x²)` between the two eigenvalue bands, zero for `|x| >= 1`.
pub fn gap(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - x * x).sqrt()
    } else {
        0.0
    }
}
