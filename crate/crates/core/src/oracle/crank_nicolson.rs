//! Crank–Nicolson stepping (1 + iaH)ψₙ₊₁ = (1 − iaH)ψₙ with a = dt/2ħ.
//!
//! Each step solves the Hermitian positive system (1 + a²H²)ψₙ₊₁ =
//! (1 − iaH)²ψₙ by conjugate gradients.

use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::evolve::WaveField;
use crate::model::{derive, OscillatorConfig};
use crate::propagator::GaugeTag;
use crate::stencil::StencilOrder;

/// dt·Ω₁ may not exceed this.
pub const MAX_STEP_TIMES_OMEGA: f64 = 1e-3;
const SOLVE_TOLERANCE: f64 = 1e-14;
const MAX_SOLVE_ITERATIONS: usize = 1000;

pub fn evolve_reference(psi: &WaveField, config: &OscillatorConfig, t: f64, dt: f64) -> Result<WaveField> {
    evolve_reference_with(psi, config, t, dt, GaugeTag::Symmetric, StencilOrder::DEFAULT)
}

pub fn evolve_reference_with(
    psi: &WaveField,
    config: &OscillatorConfig,
    t: f64,
    dt: f64,
    gauge: GaugeTag,
    order: StencilOrder,
) -> Result<WaveField> {
    let df = derive(config)?;
    let limit = MAX_STEP_TIMES_OMEGA / df.big_omega1;
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::InvalidArgument(format!("time step {dt} must lie in (0, {limit}]")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time must be non-negative, got {t}")));
    }
    let h = SparseHamiltonian::new(config, psi.grid(), gauge, order)?;
    let steps = (t / dt).ceil() as usize;
    let mut v = psi.values().to_vec();
    if steps > 0 {
        let a = 0.5 * (t / steps as f64) / config.hbar;
        for _ in 0..steps {
            v = step(&h, &v, a)?;
        }
    }
    WaveField::new(*psi.grid(), v)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.par_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sq(a: &[Complex64]) -> f64 {
    a.par_iter().map(|x| x.norm_sqr()).sum()
}

/// (1 − iaH)v
fn explicit_half(h: &SparseHamiltonian, v: &[Complex64], a: f64) -> Result<Vec<Complex64>> {
    let hv = h.apply(v)?;
    let ia = Complex64::new(0.0, a);
    Ok(v.par_iter().zip(&hv).map(|(x, y)| x - ia * y).collect())
}

/// (1 + a²H²)v
fn normal_operator(h: &SparseHamiltonian, v: &[Complex64], a: f64) -> Result<Vec<Complex64>> {
    let hhv = h.apply(&h.apply(v)?)?;
    Ok(v.par_iter().zip(&hhv).map(|(x, y)| x + y * (a * a)).collect())
}

fn step(h: &SparseHamiltonian, v: &[Complex64], a: f64) -> Result<Vec<Complex64>> {
    let rhs = explicit_half(h, &explicit_half(h, v, a)?, a)?;
    let target = SOLVE_TOLERANCE * SOLVE_TOLERANCE * norm_sq(&rhs);
    // Start from the explicit predictor (1 − iaH)v.
    let mut x = explicit_half(h, v, a)?;
    let ax = normal_operator(h, &x, a)?;
    let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let mut p = r.clone();
    let mut rr = norm_sq(&r);
    for _ in 0..MAX_SOLVE_ITERATIONS {
        if rr <= target {
            return Ok(x);
        }
        let ap = normal_operator(h, &p, a)?;
        let alpha = rr / dot(&p, &ap).re;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += pi * alpha);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= api * alpha);
        let rr_new = norm_sq(&r);
        let beta = rr_new / rr;
        p.par_iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + *pi * beta);
        rr = rr_new;
    }
    Err(Error::NonConvergence("Crank-Nicolson linear solve", MAX_SOLVE_ITERATIONS))
}
