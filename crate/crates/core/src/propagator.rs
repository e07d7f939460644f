//! Van Vleck amplitude, the complex kernel and gauge changes.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{action_form, check_caustic, coefficients, first_caustic};
use crate::calibration::SHIPPED_CROSS_FACTOR;
use crate::classical::Endpoints;
use crate::error::{Error, Result};
use crate::model::{DerivedFrequencies, OscillatorConfig, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GaugeTag {
    /// A = B₀(−ω₂y, ω₁x)/(ω₁+ω₂).
    Weighted,
    /// A = B₀(−y, x)/2.
    #[default]
    Symmetric,
}

impl GaugeTag {
    /// (α, β) with (q/c)A = (−αy, βx).
    pub fn potential_coefficients(self, config: &OscillatorConfig) -> (f64, f64) {
        let mw0 = config.m * config.omega0;
        match self {
            GaugeTag::Symmetric => (0.5 * mw0, 0.5 * mw0),
            GaugeTag::Weighted => {
                let sum = config.omega1 + config.omega2;
                (mw0 * config.omega2 / sum, mw0 * config.omega1 / sum)
            }
        }
    }
}

impl std::str::FromStr for GaugeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(GaugeTag::Symmetric),
            "weighted" => Ok(GaugeTag::Weighted),
            other => Err(Error::InvalidArgument(format!("unknown gauge '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub amplitude: Complex64,
    /// S/ħ, including any gauge phase.
    pub phase: f64,
    pub value: Complex64,
}

impl KernelValue {
    fn new(amplitude: Complex64, phase: f64) -> Self {
        Self {
            amplitude,
            phase,
            value: amplitude * Complex64::from_polar(1.0, phase),
        }
    }
}

/// 1/(2πiħ) with the branch √(1/i) = e^{−iπ/4} per axis.
fn two_pi_i_hbar_inv(hbar: f64) -> Complex64 {
    Complex64::new(0.0, -1.0 / (2.0 * PI * hbar))
}

/// Mixed second derivatives ∂²S/∂(x₁,y₁)∂(x₂,y₂), laid out as
/// [[∂x₁∂x₂, ∂y₁∂x₂], [∂x₁∂y₂, ∂y₁∂y₂]].
pub fn vanvleck_matrix(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<Matrix2<f64>> {
    Ok(action_form(df, config, ep.t, SHIPPED_CROSS_FACTOR)?.mixed_hessian(config.m))
}

fn check_window(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Result<()> {
    check_caustic(df, config, t)?;
    let first = first_caustic(df, config);
    if t > first {
        return Err(Error::PastFirstCaustic { time: t, first });
    }
    Ok(())
}

/// A(t) = (m/2πiħ)√(ω₁ω₂Ω₊Ω₋/D(t)), or the product of two 1D factors in
/// the decoupled regime. Valid on (0, first caustic).
pub fn amplitude(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Result<Complex64> {
    check_window(df, config, t)?;
    let (w1, w2) = (config.omega1, config.omega2);
    let radicand = match df.regime {
        Regime::Coupled => w1 * w2 * df.omega_plus * df.omega_minus / coefficients(df, config, t).big_d,
        Regime::Decoupled => w1 * w2 / ((w1 * t).sin() * (w2 * t).sin()),
    };
    Ok(config.m * radicand.sqrt() * two_pi_i_hbar_inv(config.hbar))
}

/// |A(t)| from the D(t) form and from the explicit sine form
/// (mΩ₊Ω₋/2πħ)√(ω₁ω₂/[(ω₁+ω₂)²Ω₋² sin²(Ω₊t/2) − (ω₁−ω₂)²Ω₊² sin²(Ω₋t/2)]).
pub fn amplitude_modulus_forms(df: &DerivedFrequencies, config: &OscillatorConfig, t: f64) -> Result<(f64, f64)> {
    check_window(df, config, t)?;
    if !df.is_coupled() {
        return Err(Error::DecoupledRegime("explicit amplitude form"));
    }
    let (w1, w2) = (config.omega1, config.omega2);
    let (op, om) = (df.omega_plus, df.omega_minus);
    let scale = config.m / (2.0 * PI * config.hbar);
    let from_d = scale * (w1 * w2 * op * om / coefficients(df, config, t).big_d).sqrt();
    let den = ((w1 + w2) * om * (0.5 * op * t).sin()).powi(2) - ((w1 - w2) * op * (0.5 * om * t).sin()).powi(2);
    let explicit = scale * op * om * (w1 * w2 / den).sqrt();
    Ok((from_d, explicit))
}

/// (1/2πiħ)√det M with M the mixed Hessian of the action.
pub fn amplitude_vanvleck(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig) -> Result<Complex64> {
    check_window(df, config, ep.t)?;
    let det = vanvleck_matrix(ep, df, config)?.determinant();
    Ok(det.sqrt() * two_pi_i_hbar_inv(config.hbar))
}

/// G(x₁,y₁ → x₂,y₂; t) in the requested gauge.
pub fn kernel(ep: &Endpoints, df: &DerivedFrequencies, config: &OscillatorConfig, gauge: GaugeTag) -> Result<KernelValue> {
    let amp = amplitude(df, config, ep.t)?;
    let form = action_form(df, config, ep.t, SHIPPED_CROSS_FACTOR)?;
    let phase = form.evaluate(ep, config.m_over_hbar());
    let sym = KernelValue::new(amp, phase);
    Ok(gauge_transform(sym, ep, config, GaugeTag::Symmetric, gauge))
}

/// χ(x, y)/ħ where (q/c)(A_weighted − A_symmetric) = ∇χ.
pub fn gauge_function(config: &OscillatorConfig, x: f64, y: f64) -> f64 {
    let ratio = (config.omega1 - config.omega2) / (config.omega1 + config.omega2);
    0.5 * config.m_over_hbar() * config.omega0 * ratio * x * y
}

pub fn gauge_transform(
    value: KernelValue,
    ep: &Endpoints,
    config: &OscillatorConfig,
    from: GaugeTag,
    to: GaugeTag,
) -> KernelValue {
    let delta = gauge_function(config, ep.x2, ep.y2) - gauge_function(config, ep.x1, ep.y1);
    let shift = match (from, to) {
        (GaugeTag::Symmetric, GaugeTag::Weighted) => delta,
        (GaugeTag::Weighted, GaugeTag::Symmetric) => -delta,
        _ => return value,
    };
    KernelValue {
        amplitude: value.amplitude,
        phase: value.phase + shift,
        value: value.value * Complex64::from_polar(1.0, shift),
    }
}

/// Kernel from a fixed source to every target in `targets` (data-parallel).
pub fn kernel_slice(
    source: (f64, f64),
    targets: &[(f64, f64)],
    t: f64,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    gauge: GaugeTag,
) -> Result<Vec<KernelValue>> {
    check_window(df, config, t)?;
    targets
        .par_iter()
        .map(|&(x2, y2)| kernel(&Endpoints::new(source.0, source.1, x2, y2, t), df, config, gauge))
        .collect()
}

/// Relative L2 residual ‖iħ∂ₜG − Ĥ₂G‖/‖∂ₜG‖ over `samples`, with Ĥ₂ acting
/// on the target point in `gauge` and all derivatives by centred differences.
pub fn schrodinger_residual(
    samples: &[Endpoints],
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    gauge: GaugeTag,
    h: f64,
    tau: f64,
) -> Result<f64> {
    let (alpha, beta) = gauge.potential_coefficients(config);
    let (m, hbar) = (config.m, config.hbar);
    let i = Complex64::i();
    let terms: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|ep| -> Result<(f64, f64)> {
            let g = |x2: f64, y2: f64, t: f64| {
                kernel(&Endpoints::new(ep.x1, ep.y1, x2, y2, t), df, config, gauge).map(|k| k.value)
            };
            let (x, y, t) = (ep.x2, ep.y2, ep.t);
            let c = g(x, y, t)?;
            let dt = (g(x, y, t + tau)? - g(x, y, t - tau)?) / (2.0 * tau);
            let (xp, xm) = (g(x + h, y, t)?, g(x - h, y, t)?);
            let (yp, ym) = (g(x, y + h, t)?, g(x, y - h, t)?);
            let lap = (xp + xm + yp + ym - 4.0 * c) / (h * h);
            let dx = (xp - xm) / (2.0 * h);
            let dy = (yp - ym) / (2.0 * h);
            let potential = 0.5 * (alpha * alpha * y * y + beta * beta * x * x) / m
                + 0.5 * m * (config.omega1.powi(2) * x * x + config.omega2.powi(2) * y * y);
            let h_g = -hbar * hbar / (2.0 * m) * lap - i * hbar / m * (alpha * y * dx - beta * x * dy) + potential * c;
            let lhs = i * hbar * dt;
            Ok(((lhs - h_g).norm_sqr(), lhs.norm_sqr()))
        })
        .collect::<Result<_>>()?;
    let (num, den) = terms.iter().fold((0.0, 0.0), |(a, b), (n, d)| (a + n, b + d));
    Ok((num / den).sqrt())
}
