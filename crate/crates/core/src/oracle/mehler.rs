use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// √(m/2πiħt)·e^{im(x₂−x₁)²/2ħt}.
pub fn free_kernel(m: f64, hbar: f64, x1: f64, x2: f64, t: f64) -> Complex64 {
    let pref = (m / (2.0 * PI * hbar * t)).sqrt() * Complex64::from_polar(1.0, -PI / 4.0);
    pref * Complex64::from_polar(1.0, m * (x2 - x1).powi(2) / (2.0 * hbar * t))
}

/// The 1D oscillator propagator
/// √(mω/2πiħ sin ωt)·exp{(imω/2ħ sin ωt)[(x₁²+x₂²) cos ωt − 2x₁x₂]},
/// continued through conjugate points with the Maslov phase e^{−iπ/2} per
/// crossing.
pub fn mehler_kernel(omega: f64, m: f64, hbar: f64, x1: f64, x2: f64, t: f64) -> Result<Complex64> {
    if !(t > 0.0 && omega >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t > 0 and ω ≥ 0, got t = {t}, ω = {omega}")));
    }
    if omega * t < 1e-10 {
        return Ok(free_kernel(m, hbar, x1, x2, t));
    }
    let (s, c) = (omega * t).sin_cos();
    let crossings = (omega * t / PI).floor();
    if s.abs() < 1e-12 || (omega * t / PI - crossings.round()).abs() < 1e-12 {
        return Err(Error::Caustic {
            time: t,
            nearby: vec![crossings.round().max(1.0) * PI / omega],
        });
    }
    let pref = (m * omega / (2.0 * PI * hbar * s.abs())).sqrt()
        * Complex64::from_polar(1.0, -PI / 4.0 - crossings * PI / 2.0);
    let phase = m * omega / (2.0 * hbar * s) * ((x1 * x1 + x2 * x2) * c - 2.0 * x1 * x2);
    Ok(pref * Complex64::from_polar(1.0, phase))
}
