//! Finite differences of `ε(x)` and the critical signatures at `|x| = 1`:
//! the jump of `ε′` and the growth of `ε″` on the disordered side.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::entanglement::{epsilon_at, Size};
use crate::modes::Parity;
use crate::quadrature;
use crate::{Error, Result};

pub const CRITICAL_POINTS: [f64; 2] = [-1.0, 1.0];
pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Central,
    Left,
    Right,
}

impl Side {
    /// Stencil offsets in units of the step and the matching weights for
    /// the first and second derivative.
    fn stencil(self, order: u8) -> (&'static [f64], &'static [f64], i32) {
        match (self, order) {
            (Side::Central, 1) => (
                &[-2.0, -1.0, 1.0, 2.0],
                &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
                1,
            ),
            (Side::Central, _) => (
                &[-2.0, -1.0, 0.0, 1.0, 2.0],
                &[
                    -1.0 / 12.0,
                    16.0 / 12.0,
                    -30.0 / 12.0,
                    16.0 / 12.0,
                    -1.0 / 12.0,
                ],
                2,
            ),
            (Side::Right, 1) => (
                &[0.0, 1.0, 2.0, 3.0],
                &[-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0],
                1,
            ),
            (Side::Right, _) => (&[0.0, 1.0, 2.0, 3.0], &[2.0, -5.0, 4.0, -1.0], 2),
            (Side::Left, 1) => (
                &[0.0, -1.0, -2.0, -3.0],
                &[11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0],
                1,
            ),
            (Side::Left, _) => (&[0.0, -1.0, -2.0, -3.0], &[2.0, -5.0, 4.0, -1.0], 2),
        }
    }

    fn span(self) -> (f64, f64) {
        match self {
            Side::Central => (-2.0, 2.0),
            Side::Left => (-3.0, 0.0),
            Side::Right => (0.0, 3.0),
        }
    }
}

/// Finite-difference derivative of `f` at `x`.
///
/// Central stencils use five points (`O(h⁴)`), one-sided stencils four
/// points (`O(h³)` for the first derivative, `O(h²)` for the second).
pub fn derivative<F>(f: F, x: f64, order: u8, step: f64, side: Side) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(order == 1 || order == 2) {
        return Err(Error::Config(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!(
            "derivative step must be positive, got {step}"
        )));
    }
    let (offsets, weights, power) = side.stencil(order);
    let mut acc = 0.0;
    for (&k, &w) in offsets.iter().zip(weights) {
        if w != 0.0 {
            acc += w * f(x + k * step)?;
        }
    }
    Ok(acc / step.powi(power))
}

fn check_stencil(x: f64, step: f64, side: Side) -> Result<()> {
    let (lo, hi) = side.span();
    let (lo, hi) = (x + lo * step, x + hi * step);
    for c in CRITICAL_POINTS {
        if lo < c && c < hi {
            return Err(Error::StencilCrossesCritical { x, critical: c });
        }
    }
    Ok(())
}

/// Derivative of `ε` at one size. Errors if the stencil straddles `x = ±1`.
pub fn epsilon_derivative_at(
    x: f64,
    size: Size,
    order: u8,
    step: f64,
    side: Side,
    quad_tol: f64,
) -> Result<f64> {
    check_stencil(x, step, side)?;
    derivative(
        |y| epsilon_at(y, size, Parity::Even, quad_tol),
        x,
        order,
        step,
        side,
    )
}

/// Derivative of the thermodynamic-limit `ε`.
pub fn epsilon_derivative(x: f64, order: u8, step: f64, side: Side, quad_tol: f64) -> Result<f64> {
    epsilon_derivative_at(x, Size::Infinite, order, step, side, quad_tol)
}

/// Side a sweep should use at `x` so the stencil stays on one side of `±1`.
pub fn safe_side(x: f64, step: f64) -> Side {
    let reach = 2.0 * step;
    for c in CRITICAL_POINTS {
        if (x - c).abs() < reach {
            // stay on the side of c that x is on; x == c picks the disordered side
            let inside = x.abs() < 1.0 || x == c;
            return match (c > 0.0, inside) {
                (true, true) | (false, false) => Side::Left,
                _ => Side::Right,
            };
        }
    }
    Side::Central
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpMethod {
    NumericLimit,
    ClosedFormIntegral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEstimate {
    pub method: JumpMethod,
    /// `ε′(1⁻)`.
    pub left_derivative: f64,
    /// `ε′(1⁺)`, from a right-sided stencil at `x = 1`.
    pub right_derivative: f64,
    pub jump: f64,
    /// `(δ, ε′(1 - δ))` samples behind a numeric limit; empty otherwise.
    pub ladder: Vec<(f64, f64)>,
    pub extrapolated: bool,
}

/// Parameters shared by the critical-point estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalParams {
    pub step: f64,
    pub quad_tol: f64,
    pub fit_window: (f64, f64),
    pub fit_points: usize,
}

impl Default for CriticalParams {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            quad_tol: 1e-13,
            fit_window: (0.90, 0.99),
            fit_points: 12,
        }
    }
}

pub const JUMP_LADDER: [f64; 3] = [1e-2, 0.003_162_277_660_168_379_4, 1e-3];
/// Spread of the ladder above which a linear-in-δ extrapolation is applied.
pub const EXTRAPOLATION_THRESHOLD: f64 = 0.01;

/// `(1/2π) ∫₀¹ ln((1+ζ)/(1-ζ)) √(1-ζ²)/ζ dζ`: the loss of the `Φ₋`
/// contribution to `ε′` when `x` crosses 1 from below.
pub fn closed_form_jump(quad_tol: f64) -> Result<f64> {
    let integrand = |z: f64| {
        if z == 0.0 {
            2.0
        } else {
            2.0 * z.atanh() * (1.0 - z * z).sqrt() / z
        }
    };
    Ok(quadrature::integrate(integrand, 0.0, 1.0, 2.0 * PI * quad_tol)?.value / (2.0 * PI))
}

pub fn jump_estimate(method: JumpMethod, params: &CriticalParams) -> Result<JumpEstimate> {
    let right = epsilon_derivative(1.0, 1, params.step, Side::Right, params.quad_tol)?;
    match method {
        JumpMethod::ClosedFormIntegral => {
            let jump = closed_form_jump(params.quad_tol)?;
            Ok(JumpEstimate {
                method,
                left_derivative: right + jump,
                right_derivative: right,
                jump,
                ladder: vec![],
                extrapolated: false,
            })
        }
        JumpMethod::NumericLimit => {
            let ladder = JUMP_LADDER
                .iter()
                .map(|&d| {
                    Ok((
                        d,
                        epsilon_derivative(1.0 - d, 1, params.step, Side::Left, params.quad_tol)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let (lo, hi) = ladder
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
                    (lo.min(v), hi.max(v))
                });
            let (d1, v1) = ladder[ladder.len() - 2];
            let (d2, v2) = ladder[ladder.len() - 1];
            let extrapolated = hi - lo > EXTRAPOLATION_THRESHOLD;
            let left = if extrapolated {
                (v2 * d1 - v1 * d2) / (d1 - d2)
            } else {
                v2
            };
            Ok(JumpEstimate {
                method,
                left_derivative: left,
                right_derivative: right,
                jump: left - right,
                ladder,
                extrapolated,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFit {
    pub window: (f64, f64),
    /// Slope `s` of `ln ε″` against `ln(1 - x)`, i.e. `ε″ ~ (1 - x)^s`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `ln ε″`.
    pub residual: f64,
    /// `(x, ε″(x))` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Power-law fit of the left-sided `ε″` on `n_points` evenly spaced `x` in
/// the closed window.
pub fn divergence_exponent(
    window: (f64, f64),
    n_points: usize,
    params: &CriticalParams,
) -> Result<DivergenceFit> {
    let (a, b) = window;
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(Error::Config(format!(
            "fit window ({a}, {b}) must lie strictly inside (0, 1)"
        )));
    }
    if n_points < 2 {
        return Err(Error::Config("fit needs at least two points".into()));
    }
    let samples = (0..n_points)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (n_points - 1) as f64;
            let d2 = epsilon_derivative(x, 2, params.step, Side::Left, params.quad_tol)?;
            if !(d2.is_finite() && d2 > 0.0) {
                return Err(Error::NonFinite(format!(
                    "ε″({x}) = {d2} cannot enter a log fit"
                )));
            }
            Ok((x, d2))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, d2)| ((1.0 - x).ln(), d2.ln()))
        .collect();
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(DivergenceFit {
        window,
        slope,
        intercept,
        residual,
        samples,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub jump_left_derivative: f64,
    pub jump_right_derivative: f64,
    pub jump_value: f64,
    pub numeric_limit: JumpEstimate,
    pub closed_form: JumpEstimate,
    /// `|numeric - closed form|` jump.
    pub method_gap: f64,
    pub divergence_exponent: f64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    pub divergence: DivergenceFit,
    /// `(x, ε′(x))` on the ordered side.
    pub ordered_side_derivatives: Vec<(f64, f64)>,
}

pub const ORDERED_SIDE_PROBES: [f64; 3] = [1.1, 1.5, 2.0];

pub fn critical_report(params: &CriticalParams) -> Result<CriticalReport> {
    let closed_form = jump_estimate(JumpMethod::ClosedFormIntegral, params)?;
    let numeric_limit = jump_estimate(JumpMethod::NumericLimit, params)?;
    let divergence = divergence_exponent(params.fit_window, params.fit_points, params)?;
    let ordered_side_derivatives = ORDERED_SIDE_PROBES
        .iter()
        .map(|&x| {
            Ok((
                x,
                epsilon_derivative(x, 1, params.step, Side::Central, params.quad_tol)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalReport {
        jump_left_derivative: closed_form.left_derivative,
        jump_right_derivative: closed_form.right_derivative,
        jump_value: closed_form.jump,
        method_gap: (numeric_limit.jump - closed_form.jump).abs(),
        divergence_exponent: divergence.slope,
        fit_window: divergence.window,
        fit_residual: divergence.residual,
        numeric_limit,
        closed_form,
        divergence,
        ordered_side_derivatives,
    })
}
