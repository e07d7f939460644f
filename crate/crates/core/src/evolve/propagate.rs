//! ψ_t(r₂) = ∫ G(r₁ → r₂, t) ψ₀(r₁) dr₁ by trapezoid quadrature.
//!
//! The kernel phase is a quadratic form, so the four-index sum factorises
//! into per-axis tables. For each target column i₂ the sum over y₁ is a
//! dense matrix product and the sum over x₁ a weighted reduction, giving
//! O(nx·ny²·nx) work dominated by real GEMMs.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{Grid2D, WaveField};
use super::observables::observables;
use crate::action::{action_form, first_caustic, ActionForm};
use crate::calibration::SHIPPED_CROSS_FACTOR;
use crate::classical::{modes_from_initial, trajectory, PhasePoint};
use crate::error::{Error, Result};
use crate::model::{derive, DerivedFrequencies, OscillatorConfig};
use crate::propagator::{amplitude, gauge_function, GaugeTag};

/// Probability fraction in the outer frame above which a field counts as
/// having reached the grid boundary.
pub const ESCAPE_THRESHOLD: f64 = 1e-6;
/// Width of the outer frame, in cells.
pub const ESCAPE_FRAME: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationOptions {
    pub gauge: GaugeTag,
    /// Upper bound on a single kernel step; defaults to half the first
    /// caustic time.
    pub max_step: Option<f64>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            gauge: GaugeTag::Symmetric,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationReport {
    pub time: f64,
    pub substeps: usize,
    pub step: f64,
    /// Largest kernel phase gradient over the source support, in units of
    /// the sampling wavenumber 2π/dx. Above 1 a spurious stationary point
    /// folds back into the support and the quadrature aliases.
    pub chirp_ratio: f64,
    /// Probability in the outer [`ESCAPE_FRAME`] cells after propagation.
    pub edge_probability: f64,
    pub escaped: bool,
    pub aliasing_risk: bool,
    pub norm_before: f64,
    pub norm_after: f64,
    /// Centroid of the classical path through the initial centroid and
    /// kinetic velocity.
    pub centroid_expected: (f64, f64),
    pub centroid_measured: (f64, f64),
}

impl PropagationReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.escaped {
            out.push(format!(
                "probability {:e} reached the outer {ESCAPE_FRAME} grid cells at t = {}",
                self.edge_probability, self.time
            ));
        }
        if self.aliasing_risk {
            out.push(format!(
                "kernel chirp exceeds the grid sampling rate by a factor {:.3} at t = {}",
                self.chirp_ratio, self.time
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub field: WaveField,
    pub report: PropagationReport,
}

/// Exact-kernel propagation in the symmetric gauge.
pub fn propagate(psi: &WaveField, config: &OscillatorConfig, t: f64) -> Result<Propagation> {
    propagate_with(psi, config, t, &PropagationOptions::default())
}

pub fn propagate_with(
    psi: &WaveField,
    config: &OscillatorConfig,
    t: f64,
    options: &PropagationOptions,
) -> Result<Propagation> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("propagation time must be non-negative, got {t}")));
    }
    let df = derive(config)?;
    let start = observables(psi, None, config.hbar)?;
    let centroid = (start.mean_x, start.mean_y);
    let edge = edge_probability(psi);
    if t == 0.0 {
        return Ok(Propagation {
            field: psi.clone(),
            report: PropagationReport {
                time: 0.0,
                substeps: 0,
                step: 0.0,
                chirp_ratio: 0.0,
                edge_probability: edge,
                escaped: edge > ESCAPE_THRESHOLD,
                aliasing_risk: false,
                norm_before: psi.norm(),
                norm_after: psi.norm(),
                centroid_expected: centroid,
                centroid_measured: centroid,
            },
        });
    }

    let t_c = first_caustic(&df, config);
    let max_step = options.max_step.unwrap_or(0.5 * t_c).min(0.5 * t_c);
    let substeps = (t / max_step).ceil().max(1.0) as usize;
    let step = t / substeps as f64;
    let form = action_form(&df, config, step, SHIPPED_CROSS_FACTOR)?;
    let amp = amplitude(&df, config, step)?;

    let mut field = psi.clone();
    let mut chirp_ratio: f64 = 0.0;
    for _ in 0..substeps {
        chirp_ratio = chirp_ratio.max(chirp(&field, &form, config, options.gauge));
        field = apply_kernel(&field, &form, amp, config, options.gauge);
    }

    let end = observables(&field, None, config.hbar)?;
    let expected = classical_centroid(&start, &df, config, options.gauge, t)?;
    let edge = edge_probability(&field);
    let report = PropagationReport {
        time: t,
        substeps,
        step,
        chirp_ratio,
        edge_probability: edge,
        escaped: edge > ESCAPE_THRESHOLD || !inside(field.grid(), expected),
        aliasing_risk: chirp_ratio > 1.0,
        norm_before: start.norm,
        norm_after: end.norm,
        centroid_expected: expected,
        centroid_measured: (end.mean_x, end.mean_y),
    };
    for w in report.warnings() {
        warn!("{w}");
    }
    Ok(Propagation { field, report })
}

fn inside(grid: &Grid2D, p: (f64, f64)) -> bool {
    let (mx, my) = (ESCAPE_FRAME as f64 * grid.dx, ESCAPE_FRAME as f64 * grid.dy);
    p.0 > grid.x_min + mx && p.0 < grid.x_max - mx && p.1 > grid.y_min + my && p.1 < grid.y_max - my
}

/// Classical transport of the centroid with the kinetic velocity
/// (⟨p⟩ − (q/c)A(⟨r⟩))/m.
fn classical_centroid(
    start: &super::observables::Observables,
    df: &DerivedFrequencies,
    config: &OscillatorConfig,
    gauge: GaugeTag,
    t: f64,
) -> Result<(f64, f64)> {
    let (alpha, beta) = gauge.potential_coefficients(config);
    let p0 = PhasePoint {
        x: start.mean_x,
        y: start.mean_y,
        vx: (start.mean_px + alpha * start.mean_y) / config.m,
        vy: (start.mean_py - beta * start.mean_x) / config.m,
    };
    let mc = modes_from_initial(&p0, df, config)?;
    let p = trajectory(&mc, df, config, t);
    Ok((p.x, p.y))
}

fn edge_probability(field: &WaveField) -> f64 {
    let g = field.grid();
    let (wx, wy) = (g.x_weights(), g.y_weights());
    let f = ESCAPE_FRAME;
    let mut edge = 0.0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            if i < f || j < f || i + f >= g.nx || j + f >= g.ny {
                edge += field.at(i, j).norm_sqr() * wx[i] * wy[j];
            }
        }
    }
    edge / field.norm_sq()
}

/// Kernel phase as quadratic-form coefficients in units of 1/length²,
/// with the gauge function folded into the x·y terms.
struct Phase {
    axx: f64,
    ayy: f64,
    bx: f64,
    by: f64,
    cross: f64,
    /// Coefficient of x₂y₂ (and, negated, of x₁y₁).
    mixed: f64,
}

impl Phase {
    fn new(form: &ActionForm, config: &OscillatorConfig, gauge: GaugeTag) -> Self {
        let k = 0.5 * config.m_over_hbar();
        let g = match gauge {
            GaugeTag::Symmetric => 0.0,
            GaugeTag::Weighted => gauge_function(config, 1.0, 1.0),
        };
        Self {
            axx: k * form.axx,
            ayy: k * form.ayy,
            bx: k * form.bx,
            by: k * form.by,
            cross: k * form.cross,
            mixed: k * form.mixed + g,
        }
    }
}

/// max |∂φ/∂x₁|·dx/2π and |∂φ/∂y₁|·dy/2π over the source support and all
/// targets.
fn chirp(field: &WaveField, form: &ActionForm, config: &OscillatorConfig, gauge: GaugeTag) -> f64 {
    let g = field.grid();
    let p = Phase::new(form, config, gauge);
    let peak = field.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = 1e-8 * peak;
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for i in 0..g.nx {
        for j in 0..g.ny {
            if field.at(i, j).norm() > cut {
                x_lo = x_lo.min(g.x(i));
                x_hi = x_hi.max(g.x(i));
                y_lo = y_lo.min(g.y(j));
                y_hi = y_hi.max(g.y(j));
            }
        }
    }
    if x_lo > x_hi {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for x1 in [x_lo, x_hi] {
        for y1 in [y_lo, y_hi] {
            for x2 in [g.x_min, g.x_max] {
                for y2 in [g.y_min, g.y_max] {
                    let gx = 2.0 * p.axx * x1 - 2.0 * p.bx * x2 + p.cross * y2 - p.mixed * y1;
                    let gy = 2.0 * p.ayy * y1 - 2.0 * p.by * y2 - p.cross * x2 - p.mixed * x1;
                    worst = worst.max(gx.abs() * g.dx).max(gy.abs() * g.dy);
                }
            }
        }
    }
    worst / (2.0 * std::f64::consts::PI)
}

fn unit(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Splits a complex table into real and imaginary matrices.
fn split(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut re = DMatrix::zeros(rows, cols);
    let mut im = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = f(r, c);
            re[(r, c)] = v.re;
            im[(r, c)] = v.im;
        }
    }
    (re, im)
}

/// One kernel application on the field's own grid.
pub(crate) fn apply_kernel(field: &WaveField, form: &ActionForm, amp: Complex64, config: &OscillatorConfig, gauge: GaugeTag) -> WaveField {
    let g = *field.grid();
    let p = Phase::new(form, config, gauge);
    let (xs, ys) = (g.xs(), g.ys());
    let (wx, wy) = (g.x_weights(), g.y_weights());
    let (nx, ny) = (g.nx, g.ny);

    // Source factor: weights, field and the source-only part of the phase.
    let (s_re, s_im) = split(nx, ny, |i, j| {
        let (x, y) = (xs[i], ys[j]);
        field.at(i, j) * (wx[i] * wy[j]) * unit(p.axx * x * x + p.ayy * y * y - p.mixed * x * y)
    });
    let eyy = |j1: usize, j2: usize| unit(-2.0 * p.by * ys[j1] * ys[j2]);
    let eyx = |j1: usize, i2: usize| unit(-p.cross * xs[i2] * ys[j1]);
    let exx = |i1: usize, i2: usize| unit(-2.0 * p.bx * xs[i1] * xs[i2]);
    let exy = |i1: usize, j2: usize| unit(p.cross * xs[i1] * ys[j2]);
    let eyy_table: Vec<Complex64> = (0..ny * ny).map(|k| eyy(k / ny, k % ny)).collect();
    let exy_table: Vec<Complex64> = (0..nx * ny).map(|k| exy(k / ny, k % ny)).collect();

    let columns: Vec<Vec<Complex64>> = (0..nx)
        .into_par_iter()
        .map(|i2| {
            // C[j1, j2] = e^{−i cross x₂ y₁} e^{−2i by y₁ y₂}
            let (c_re, c_im) = split(ny, ny, |j1, j2| eyx(j1, i2) * eyy_table[j1 * ny + j2]);
            // D = S · C (complex product from four real GEMMs)
            let d_re = &s_re * &c_re - &s_im * &c_im;
            let d_im = &s_re * &c_im + &s_im * &c_re;
            let x2 = xs[i2];
            (0..ny)
                .map(|j2| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i1 in 0..nx {
                        let d = Complex64::new(d_re[(i1, j2)], d_im[(i1, j2)]);
                        acc += exx(i1, i2) * exy_table[i1 * ny + j2] * d;
                    }
                    let y2 = ys[j2];
                    acc * amp * unit(p.axx * x2 * x2 + p.ayy * y2 * y2 + p.mixed * x2 * y2)
                })
                .collect()
        })
        .collect();
    let values = columns.into_iter().flatten().collect();
    WaveField::new(g, values).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::states::{gaussian, GaussianSpec};
    use std::f64::consts::PI;

    #[test]
    fn zero_time_is_identity() {
        let g = Grid2D::square(32, 5.0).unwrap();
        let psi = gaussian(&g, &GaussianSpec { x0: 0.3, y0: 0.0, px: 1.0, py: 0.0, sigma_x: 0.5, sigma_y: 0.5 }, 1.0)
            .unwrap();
        let out = propagate(&psi, &OscillatorConfig::new(2.0, 2.0, 3.0), 0.0).unwrap();
        assert_eq!(out.field, psi);
        assert_eq!(out.report.substeps, 0);
        assert!(propagate(&psi, &OscillatorConfig::new(2.0, 2.0, 3.0), -1.0).is_err());
    }

    #[test]
    fn decoupled_ground_state_is_stationary() {
        let cfg = OscillatorConfig::new(1.0, 1.5, 0.0);
        let g = Grid2D::square(64, 5.0).unwrap();
        let psi = gaussian(&g, &GaussianSpec::oscillator_ground(1.0, 1.0, 1.0, 1.5), 1.0).unwrap();
        let out = propagate(&psi, &cfg, 0.9).unwrap();
        assert!(out.field.max_modulus_difference(&psi).unwrap() < 1e-6);
        // Phase e^{−iE₀t/ħ} with E₀ = (ω₁ + ω₂)/2.
        let overlap = psi.inner(&out.field).unwrap();
        let expected = unit(-0.5 * (1.0 + 1.5) * 0.9);
        assert!((overlap - expected).norm() < 1e-6, "{overlap}");
    }

    #[test]
    fn unitarity_and_ehrenfest() {
        let cfg = OscillatorConfig::new(3.0, 1.0, 2.0);
        let g = Grid2D::square(96, 6.0).unwrap();
        let psi = gaussian(&g, &GaussianSpec { x0: 0.8, y0: -0.5, px: 0.5, py: 1.0, sigma_x: 0.45, sigma_y: 0.6 }, 1.0)
            .unwrap();
        let out = propagate(&psi, &cfg, 0.7).unwrap();
        let r = &out.report;
        assert!((r.norm_after - 1.0).abs() < 1e-4, "{r:?}");
        assert!(!r.escaped && !r.aliasing_risk, "{r:?}");
        let dist = ((r.centroid_measured.0 - r.centroid_expected.0).powi(2)
            + (r.centroid_measured.1 - r.centroid_expected.1).powi(2))
        .sqrt();
        assert!(dist < 1e-4, "{r:?}");
    }

    #[test]
    fn substeps_reach_past_the_first_caustic() {
        let cfg = OscillatorConfig::new(2.0, 2.0, 3.0);
        let g = Grid2D::square(64, 5.0).unwrap();
        let psi = gaussian(&g, &GaussianSpec { x0: 0.5, y0: 0.0, px: 0.0, py: 0.0, sigma_x: 0.5, sigma_y: 0.5 }, 1.0)
            .unwrap();
        let out = propagate(&psi, &cfg, 2.0 * PI).unwrap();
        assert_eq!(out.report.substeps, 10);
        // Ω₁/Ω₂ = 4: everything returns after 2π.
        assert!(out.field.max_modulus_difference(&psi).unwrap() < 1e-5);
    }

    #[test]
    fn weighted_gauge_is_covariant() {
        // Propagating e^{iχ}ψ with the weighted kernel equals e^{iχ} times the
        // symmetric-gauge propagation of ψ.
        let cfg = OscillatorConfig::new(2.5, 1.0, 1.5);
        let g = Grid2D::square(64, 5.0).unwrap();
        let psi = gaussian(&g, &GaussianSpec { x0: 0.3, y0: 0.2, px: 0.4, py: 0.0, sigma_x: 0.5, sigma_y: 0.5 }, 1.0)
            .unwrap();
        let dress = |f: &WaveField| {
            let gr = *f.grid();
            let values = (0..gr.nx)
                .flat_map(|i| (0..gr.ny).map(move |j| (i, j)))
                .map(|(i, j)| f.at(i, j) * unit(gauge_function(&cfg, gr.x(i), gr.y(j))))
                .collect();
            WaveField::new(gr, values).unwrap()
        };
        let opts = PropagationOptions { gauge: GaugeTag::Weighted, max_step: None };
        let a = propagate_with(&dress(&psi), &cfg, 0.4, &opts).unwrap().field;
        let b = dress(&propagate(&psi, &cfg, 0.4).unwrap().field);
        assert!(a.relative_l2_distance(&b).unwrap() < 1e-12);
    }
}
