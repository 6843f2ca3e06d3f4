//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below the absolute tolerance. Nodes never touch the
//! interval endpoints, so integrable endpoint singularities (the logarithm in
//! the entanglement integrand at `ζ = 1`) are handled by geometric refinement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_MAX_SUBDIVISIONS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    integrate_with_limit(f, a, b, tol, DEFAULT_MAX_SUBDIVISIONS)
}

pub fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_subdivisions: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            subdivisions: 0,
        });
    }
    let first = gk15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    // segments too narrow to bisect further; their error is final
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut error = first.error;
    let mut evaluations = 15;
    let mut subdivisions = 0;
    heap.push(first);

    while error > tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                tol,
                estimate: error,
                subdivisions,
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        subdivisions += 1;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::NonFinite(format!(
                "integrand on [{}, {}]",
                worst.a, worst.b
            )));
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if error <= tol {
            break;
        }
        // re-sum occasionally so the running estimate does not drift
        if subdivisions % 64 == 0 {
            error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
        }
    }

    let value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
    error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
    if error > tol {
        return Err(Error::QuadratureNotConverged {
            tol,
            estimate: error,
            subdivisions,
        });
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x.powi(5) - 2.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(q.value, 64.0 / 6.0 - 16.0 / 3.0, epsilon = 1e-13);
        assert_eq!(q.subdivisions, 0);
    }

    #[test]
    fn logarithmic_endpoint() {
        // ∫₀¹ ln x dx = -1
        let q = integrate(f64::ln, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(q.value, -1.0, epsilon = 1e-12);
        // ∫₀¹ atanh(z) dz = ln 2
        let q = integrate(f64::atanh, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(q.value, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn square_root_edge() {
        // ∫₀¹ √x dx = 2/3
        let q = integrate(f64::sqrt, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(q.value, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn reports_exhausted_budget() {
        let r = integrate_with_limit(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 3);
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-9).unwrap().value, 0.0);
    }
}
