//! Species entanglement per site: finite-size mode sums, the integrated
//! eigenvalue density `g(p, x)`, and the thermodynamic-limit integral.
//!
//! All entropies are in nats.

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::modes::{build_grid, mode_spectrum, Mode, ModeSpectrum, Parity};
use crate::quadrature;
use crate::{Error, Result};

/// Probabilities this far outside `[0, 1]` are treated as rounding noise.
pub const PROBABILITY_SLACK: f64 = 1e-12;
/// Support and angle-domain excursions this small are rounding noise.
pub const DOMAIN_SLACK: f64 = 1e-12;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Chain length: an even number of sites or the thermodynamic limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Size {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Finite(n) => write!(f, "{n}"),
            Size::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Size {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Size::Infinite);
        }
        let n: usize = s
            .parse()
            .map_err(|_| Error::Config(format!("size `{s}` is neither an integer nor \"inf\"")))?;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "size {n} must be even and at least 2"
            )));
        }
        Ok(Size::Finite(n))
    }
}

impl Serialize for Size {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Size::Finite(n) => serializer.serialize_u64(*n as u64),
            Size::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Size {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Int(n) => n.to_string(),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// One sample of `ε(x)` with optional first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementPoint {
    pub x: f64,
    pub size: Size,
    pub epsilon: f64,
    pub eps_d1: Option<f64>,
    pub eps_d2: Option<f64>,
}

impl EntanglementPoint {
    fn bare(x: f64, size: Size, epsilon: f64) -> Self {
        Self {
            x,
            size,
            epsilon,
            eps_d1: None,
            eps_d2: None,
        }
    }
}

/// `g(p, x)` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueDensitySample {
    pub p: f64,
    pub x: f64,
    pub g: f64,
}

/// Shannon binary entropy `-p ln p - (1-p) ln(1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.ln() - (1.0 - p) * (-p).ln_1p())
}

/// Entropy per site `(1/n) Σ_{q>0} H(p_q)` of a mode spectrum.
pub fn spectrum_entropy(spectrum: &ModeSpectrum) -> f64 {
    let n = spectrum.grid().n() as f64;
    // p_q ∈ [0, 1/2] by construction
    spectrum
        .p_values()
        .map(|p| binary_entropy(p).expect("mode weight in [0, 1/2]"))
        .sum::<f64>()
        / n
}

pub fn epsilon_finite(x: f64, n: usize, sector: Parity) -> Result<EntanglementPoint> {
    let spectrum = mode_spectrum(x, &build_grid(n, sector)?)?;
    Ok(EntanglementPoint::bare(
        x,
        Size::Finite(n),
        spectrum_entropy(&spectrum),
    ))
}

/// Angles `(Φ₋, Φ₊)` whose difference gives the band-edge count at `ζ`:
///
/// `cos Φ± = (ζ² - 1 ± ζ sgn(x) √(ζ² + x² - 1)) / x`.
///
/// Evaluated as `atan2(2√(AB), A - B)` with `A = x(1 + cos Φ)` and
/// `B = x(1 - cos Φ)`; for `x > 0`, `s = 1 - ζ²` and `r = √(x² - s)`,
///
/// `A₊ = x - s + ζr`, `A₊A₋ = s(x - 1)²`, `B₋ = x + s + ζr`, `B₊B₋ = s(x + 1)²`,
///
/// so no term cancels near `cos Φ = ±1` where `arccos` loses half its digits.
/// Negative `x` uses `Φ±(x) = π - Φ∓(|x|)`.
pub fn phi_pm(zeta: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 || !x.is_finite() || !zeta.is_finite() {
        return Err(Error::InvalidCoupling(format!(
            "phi_pm needs finite x != 0, got x = {x}"
        )));
    }
    let a = x.abs();
    let z = zeta.abs();
    let s = (1.0 - z) * (1.0 + z);
    // ζ² + x² - 1, exact in sign for |x| >= 1
    let disc = z * z + (a - 1.0) * (a + 1.0);
    if disc < -DOMAIN_SLACK {
        return Err(Error::OutOfSupport { zeta, x });
    }
    let zr = z * disc.max(0.0).sqrt();
    let a_plus = (a - s) + zr;
    let b_minus = a + s + zr;
    if a_plus < -DOMAIN_SLACK * a {
        return Err(Error::AngleDomain((a_plus / a) - 1.0));
    }
    let a_plus = a_plus.max(0.0);
    let a_minus = if a_plus > 0.0 {
        s * (a - 1.0).powi(2) / a_plus
    } else {
        0.0
    };
    let b_plus = s * (a + 1.0).powi(2) / b_minus;
    let angle = |p: f64, m: f64| (2.0 * (p * m).sqrt()).atan2(p - m);
    let minus = angle(a_minus, b_minus);
    let plus = angle(a_plus, b_plus);
    if x > 0.0 {
        Ok((minus, plus))
    } else {
        Ok((PI - plus, PI - minus))
    }
}

/// Lower end `√(1 - x²)` of the `ζ` support, zero for `|x| >= 1`.
fn support_floor(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - x * x).sqrt()
    } else {
        0.0
    }
}

/// Integrated density of reduced-density-matrix eigenvalues in the
/// thermodynamic limit: the fraction of sites' worth of modes with `p_q < p`.
///
/// `g = 1/2 - (Φ₋ - Φ₊)/2π` on the support `ζ² + x² >= 1` with `ζ = 1 - 2p`,
/// and `1/2` above the band edge.
pub fn g_of_p(p: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    if !x.is_finite() {
        return Err(Error::InvalidCoupling(format!("non-finite x = {x}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let zeta = 1.0 - 2.0 * p;
    // x = 0: every p_q = 0, so any p > 0 counts the whole band
    if zeta <= 0.0 || x == 0.0 || zeta < support_floor(x) {
        return Ok(0.5);
    }
    let (minus, plus) = phi_pm(zeta, x)?;
    Ok((0.5 - (minus - plus) / (2.0 * PI)).clamp(0.0, 0.5))
}

/// Value of `ε(x)` in the thermodynamic limit,
/// `(1/4π) ∫_{ζ₀}^1 dζ ln((1+ζ)/(1-ζ)) (Φ₋ - Φ₊)`, to absolute error `quad_tol`.
pub fn epsilon_infinite_value(x: f64, quad_tol: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidCoupling(format!("non-finite x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let failure = RefCell::new(None);
    let integrand = |zeta: f64| match phi_pm(zeta, x) {
        Ok((minus, plus)) => 2.0 * zeta.atanh() * (minus - plus),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = quadrature::integrate(integrand, support_floor(x), 1.0, 4.0 * PI * quad_tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result?.value / (4.0 * PI))
}

pub fn epsilon_infinite(x: f64, quad_tol: f64) -> Result<EntanglementPoint> {
    Ok(EntanglementPoint::bare(
        x,
        Size::Infinite,
        epsilon_infinite_value(x, quad_tol)?,
    ))
}

/// Thermodynamic limit taken directly over momenta,
/// `(1/2π) ∫₀^π H(p(q)) dq`. Shares no code with the `Φ±` route.
pub fn epsilon_mode_integral(x: f64, quad_tol: f64) -> Result<f64> {
    let integrand = |q: f64| {
        let p = Mode::new(x, q).p;
        binary_entropy(p).unwrap_or(f64::NAN)
    };
    Ok(quadrature::integrate(integrand, 0.0, PI, 2.0 * PI * quad_tol)?.value / (2.0 * PI))
}

/// `ε` at a finite size or in the thermodynamic limit.
pub fn epsilon_at(x: f64, size: Size, sector: Parity, quad_tol: f64) -> Result<f64> {
    match size {
        Size::Finite(n) => Ok(epsilon_finite(x, n, sector)?.epsilon),
        Size::Infinite => epsilon_infinite_value(x, quad_tol),
    }
}

/// `ε(x)` for `|x| >= 1`: `ln 2 - 1/2`.
pub const EPSILON_ORDERED: f64 = LN_2 - 0.5;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binary_entropy_edges() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), LN_2, epsilon = 1e-16);
        assert_eq!(binary_entropy(-1e-13).unwrap(), 0.0);
        assert!(binary_entropy(-1e-9).is_err());
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn binary_entropy_critical_mode() {
        // reference from 40-digit evaluation of the formula at p = (1 - 1/√2)/2
        let p = 0.5 * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
        assert_abs_diff_eq!(
            binary_entropy(p).unwrap(),
            0.416_495_530_699_687,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            binary_entropy(0.146_446_6).unwrap(),
            0.416_495_514_118_007,
            epsilon = 1e-14
        );
    }

    #[test]
    fn finite_examples() {
        assert_eq!(epsilon_finite(0.0, 10, Parity::Even).unwrap().epsilon, 0.0);
        let two = epsilon_finite(1.0, 2, Parity::Even).unwrap().epsilon;
        assert_abs_diff_eq!(two, 0.416_495_530_699_687 / 2.0, epsilon = 1e-14);
        let a = epsilon_finite(0.5, 4, Parity::Even).unwrap().epsilon;
        let b = epsilon_finite(-0.5, 4, Parity::Even).unwrap().epsilon;
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        assert!(epsilon_finite(0.5, 5, Parity::Even).is_err());
    }

    #[test]
    fn phi_pm_endpoints() {
        for x in [0.3, 1.0, 4.0] {
            let (m, p) = phi_pm(1.0, x).unwrap();
            assert_abs_diff_eq!(m, PI, epsilon = 1e-7);
            assert_abs_diff_eq!(p, 0.0, epsilon = 1e-7);
        }
        let x: f64 = 0.6;
        let (m, p) = phi_pm((1.0 - x * x).sqrt(), x).unwrap();
        assert_abs_diff_eq!(m, p, epsilon = 1e-7);
        assert!(matches!(phi_pm(0.1, 0.5), Err(Error::OutOfSupport { .. })));
    }

    #[test]
    fn phi_pm_large_coupling_trend() {
        // cos Φ± -> ∓ζ as x -> ∞; the gap to the limit shrinks like 1/x
        let mut last = f64::INFINITY;
        for x in [1e2, 1e4, 1e6] {
            let (m, p) = phi_pm(0.5, x).unwrap();
            let miss = (m - (-0.5f64).acos()).abs() + (p - 0.5f64.acos()).abs();
            assert!(miss < last);
            last = miss;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn phi_minus_dominates() {
        for &x in &[-3.0, -1.0, -0.7, 0.7, 1.0, 3.0] {
            for k in 0..=20 {
                let zeta = support_floor(x) + (1.0 - support_floor(x)) * k as f64 / 20.0;
                let (m, p) = phi_pm(zeta, x).unwrap();
                assert!(m >= p - 1e-12, "x = {x}, zeta = {zeta}");
            }
        }
    }

    #[test]
    fn density_edges() {
        assert_eq!(g_of_p(0.6, 0.8).unwrap(), 0.5);
        assert_eq!(g_of_p(0.5, 0.8).unwrap(), 0.5);
        assert_eq!(g_of_p(0.0, 0.8).unwrap(), 0.0);
        assert!(g_of_p(1e-9, 0.8).unwrap() < 1e-4);
        // above the band edge (1 - Δ)/2 = 0.2 for x = 0.6
        assert_eq!(g_of_p(0.25, 0.6).unwrap(), 0.5);
        assert!(g_of_p(1.5, 0.8).is_err());
    }

    #[test]
    fn infinite_edges() {
        assert_eq!(epsilon_infinite(0.0, 1e-8).unwrap().epsilon, 0.0);
        let one = epsilon_infinite(1.0, 1e-10).unwrap().epsilon;
        assert_abs_diff_eq!(one, EPSILON_ORDERED, epsilon = 1e-9);
        assert!(epsilon_infinite(f64::NAN, 1e-8).is_err());
    }

    #[test]
    fn size_parsing() {
        assert_eq!("inf".parse::<Size>().unwrap(), Size::Infinite);
        assert_eq!(" 10 ".parse::<Size>().unwrap(), Size::Finite(10));
        assert!("7".parse::<Size>().is_err());
        assert!("ten".parse::<Size>().is_err());
        let v: Vec<Size> = serde_json::from_str(r#"[4, "inf", "8"]"#).unwrap();
        assert_eq!(v, vec![Size::Finite(4), Size::Infinite, Size::Finite(8)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[4,"inf",8]"#);
    }
}
