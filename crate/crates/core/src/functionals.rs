//! Curvature integrals that predict the NP spectral asymptotics: Willmore
//! energy, the Gauss–Bonnet Euler characteristic, the principal symbol and
//! the Weyl coefficients `A`, `A_+`, `A_-`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{principal_curvatures, surface_integral, QuadratureGrid, SurfaceFrame};
use crate::numerics::CompensatedSum;

/// Largest distance from an integer tolerated for the Gauss–Bonnet estimate.
pub const TOPOLOGY_TOLERANCE: f64 = 1e-3;

/// How the angular integral `∫_0^{2π} [(k1 cos²θ + k2 sin²θ)_∓]² dθ` is
/// evaluated at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularRule {
    /// Closed form, split at the zeros of the curvature form.
    Exact,
    /// Periodic trapezoidal rule with the given number of points.
    Trapezoid(usize),
}

impl AngularRule {
    fn validate(self) -> Result<()> {
        match self {
            AngularRule::Trapezoid(n) if n < 16 => {
                Err(Error::config("angular_resolution", format!("at least 16 angular points are required, got {n}")))
            }
            _ => Ok(()),
        }
    }
}

/// Predicted Weyl coefficients of a surface together with the integrals
/// they are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCoefficients {
    /// `(3W − 2πχ) / (128π)`.
    pub a_total: f64,
    /// Coefficient of the positive eigenvalues.
    pub a_plus: f64,
    /// Coefficient of the negative eigenvalues.
    pub a_minus: f64,
    pub willmore: f64,
    /// Gauss–Bonnet estimate, not rounded.
    pub euler_char: f64,
    pub angular_rule: AngularRule,
}

/// `W = ∫ H² dS`, summed over all components.
pub fn willmore_energy(grid: &QuadratureGrid) -> Result<f64> {
    surface_integral(grid, |f| principal_curvatures(f).mean.powi(2))
}

/// `(1/2π) ∫ K dS`. Fails with a topology error when the estimate is
/// farther than [`TOPOLOGY_TOLERANCE`] from an integer.
pub fn euler_characteristic(grid: &QuadratureGrid) -> Result<f64> {
    let chi = surface_integral(grid, |f| principal_curvatures(f).gauss)? / (2.0 * PI);
    check_integer(chi)
}

fn check_integer(value: f64) -> Result<f64> {
    let distance = (value - value.round()).abs();
    if distance.is_nan() || distance > TOPOLOGY_TOLERANCE {
        return Err(Error::Topology { value, distance });
    }
    Ok(value)
}

/// Principal symbol of the NP operator at a frame, evaluated on the
/// covector `xi`:
/// `−(L ξ2² − 2M ξ1ξ2 + N ξ1²) / (4 det g (g^{jk} ξj ξk)^{3/2})`.
pub fn principal_symbol(frame: &SurfaceFrame, xi: (f64, f64)) -> Result<f64> {
    let (x1, x2) = xi;
    if !(x1.is_finite() && x2.is_finite()) || (x1 == 0.0 && x2 == 0.0) {
        return Err(Error::Domain(format!("principal symbol needs a finite nonzero covector, got ({x1}, {x2})")));
    }
    let det = frame.metric_det();
    let dual = (frame.g * x1 * x1 - 2.0 * frame.f * x1 * x2 + frame.e * x2 * x2) / det;
    let second = frame.l * x2 * x2 - 2.0 * frame.m * x1 * x2 + frame.n * x1 * x1;
    Ok(-second / (4.0 * det * dual.powf(1.5)))
}

/// `(3W − 2πχ) / (128π)` with the unrounded Gauss–Bonnet estimate.
pub fn weyl_coefficient_total(grid: &QuadratureGrid) -> Result<f64> {
    let w = willmore_energy(grid)?;
    let chi = euler_characteristic(grid)?;
    Ok(total_from(w, chi))
}

fn total_from(willmore: f64, euler_char: f64) -> f64 {
    (3.0 * willmore - 2.0 * PI * euler_char) / (128.0 * PI)
}

/// `A_±`, where `A_+` collects the negative part of the curvature form and
/// `A_-` the positive part:
/// `A_± = (1/128π²) ∫ dS ∫_0^{2π} [(k1 cos²θ + k2 sin²θ)_∓]² dθ`.
pub fn weyl_coefficients_signed(grid: &QuadratureGrid, rule: AngularRule) -> Result<WeylCoefficients> {
    rule.validate()?;
    let mut plus = CompensatedSum::new();
    let mut minus = CompensatedSum::new();
    for (node, (frame, &w)) in grid.frames().iter().zip(grid.weights()).enumerate() {
        let c = principal_curvatures(frame);
        let (neg, pos) = match rule {
            AngularRule::Exact => angular_parts_exact(c.k1, c.k2),
            AngularRule::Trapezoid(n) => angular_parts_trapezoid(c.k1, c.k2, n),
        };
        if !(neg.is_finite() && pos.is_finite()) {
            return Err(Error::Numerical { context: "angular curvature integral", node });
        }
        plus.add(neg * w);
        minus.add(pos * w);
    }
    let scale = 1.0 / (128.0 * PI * PI);
    let willmore = willmore_energy(grid)?;
    let euler_char = euler_characteristic(grid)?;
    Ok(WeylCoefficients {
        a_total: total_from(willmore, euler_char),
        a_plus: plus.value() * scale,
        a_minus: minus.value() * scale,
        willmore,
        euler_char,
        angular_rule: rule,
    })
}

/// Positive and negative parts, `max(x, 0)` and `max(−x, 0)`.
pub fn signed_parts(x: f64) -> (f64, f64) {
    (x.max(0.0), (-x).max(0.0))
}

/// `k1 cos²θ + k2 sin²θ`.
pub fn curvature_form(k1: f64, k2: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    k1 * c * c + k2 * s * s
}

/// `(∫ [x_−]² dθ, ∫ [x_+]² dθ)` over one period, in closed form.
///
/// With `x = α + β cos φ`, `φ = 2θ`, `α = (k1+k2)/2`, `β = (k1−k2)/2`, the
/// integral over θ ∈ [0, 2π] equals `2 ∫_0^π (α + β cos φ)² dφ` restricted
/// to the arc of the required sign. The antiderivative of the square is
/// `F(φ) = (α² + β²/2) φ + 2αβ sin φ + (β²/4) sin 2φ`.
pub fn angular_parts_exact(k1: f64, k2: f64) -> (f64, f64) {
    let (k1, k2) = if k1 >= k2 { (k1, k2) } else { (k2, k1) };
    let alpha = 0.5 * (k1 + k2);
    let beta = 0.5 * (k1 - k2);
    let full = 2.0 * PI * (alpha * alpha + 0.5 * beta * beta);
    // x ranges over [α − β, α + β]
    if alpha + beta <= 0.0 {
        return (full, 0.0);
    }
    if alpha - beta >= 0.0 {
        return (0.0, full);
    }
    let f = |phi: f64| {
        (alpha * alpha + 0.5 * beta * beta) * phi
            + 2.0 * alpha * beta * phi.sin()
            + 0.25 * beta * beta * (2.0 * phi).sin()
    };
    // β > 0 here, and x ≥ 0 exactly on φ ∈ [0, φ0]
    let phi0 = (-alpha / beta).clamp(-1.0, 1.0).acos();
    let pos = 2.0 * f(phi0);
    let neg = 2.0 * (f(PI) - f(phi0));
    (neg, pos)
}

/// Same pair as [`angular_parts_exact`] by the `n`-point periodic
/// trapezoidal rule.
pub fn angular_parts_trapezoid(k1: f64, k2: f64, n: usize) -> (f64, f64) {
    let h = 2.0 * PI / n as f64;
    let mut neg = CompensatedSum::new();
    let mut pos = CompensatedSum::new();
    for i in 0..n {
        let (p, m) = signed_parts(curvature_form(k1, k2, i as f64 * h));
        pos.add(p * p);
        neg.add(m * m);
    }
    (neg.value() * h, pos.value() * h)
}
