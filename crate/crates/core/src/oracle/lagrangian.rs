//! The action as a direct time integral of the Lagrangian along the
//! solved classical path.

use serde::Serialize;

use crate::classical::{solve_modes, trajectory, Endpoints, PhasePoint};
use crate::error::{Error, Result};
use crate::model::{DerivedFrequencies, OscillatorConfig};

/// Relative accuracy requested from the quadrature.
const RELATIVE_TARGET: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionQuadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// L = ½m|v|² − ½m(ω₁²x² + ω₂²y²) + (mω₀/2)(xẏ − yẋ).
pub fn lagrangian(p: &PhasePoint, config: &OscillatorConfig) -> f64 {
    let m = config.m;
    0.5 * m * (p.vx * p.vx + p.vy * p.vy)
        - 0.5 * m * (config.omega1.powi(2) * p.x * p.x + config.omega2.powi(2) * p.y * p.y)
        + 0.5 * m * config.omega0 * (p.x * p.vy - p.y * p.vx)
}

/// ∫₀ᵗ L dt' by double-exponential quadrature.
pub fn lagrangian_action(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<ActionQuadrature> {
    let mc = solve_modes(ep, df, config)?;
    let integrand = |s: f64| lagrangian(&trajectory(&mc, df, config, s), config);
    let scale = (0..=16)
        .map(|k| {
            let p = trajectory(&mc, df, config, ep.t * k as f64 / 16.0);
            let m = config.m;
            0.5 * m * (p.vx * p.vx + p.vy * p.vy)
                + 0.5 * m * (config.omega1.powi(2) * p.x * p.x + config.omega2.powi(2) * p.y * p.y)
                + 0.5 * m * config.omega0 * (p.x * p.vy).abs().max((p.y * p.vx).abs())
        })
        .fold(0.0, f64::max)
        * ep.t;
    let target = RELATIVE_TARGET * scale.max(f64::MIN_POSITIVE);
    let out = quadrature::double_exponential::integrate(integrand, 0.0, ep.t, target);
    if !(out.error_estimate <= 1e3 * target) {
        return Err(Error::NonConvergence("Lagrangian quadrature", out.num_function_evaluations as usize));
    }
    Ok(ActionQuadrature {
        value: out.integral,
        error_estimate: out.error_estimate,
        evaluations: out.num_function_evaluations as usize,
    })
}
