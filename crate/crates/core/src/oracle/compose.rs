//! Time-sliced composition G(t) = G(t/n) ∘ … ∘ G(t/n) over intermediate
//! grids.
//!
//! The kernels have constant modulus, so every intermediate integral is
//! damped by a smooth window W(q) = ½erfc((|q| − r₀)/w) per axis with
//! r₀ = half_width − 5w.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::action::{action_form, ActionForm};
use crate::calibration::SHIPPED_CROSS_FACTOR;
use crate::classical::Endpoints;
use crate::error::{Error, Result};
use crate::evolve::{apply_kernel, Grid2D, WaveField};
use crate::model::{derive, OscillatorConfig};
use crate::propagator::{amplitude, GaugeTag};

/// Window edge offset from the grid boundary, in tapers.
const EDGE_TAPERS: f64 = 5.0;
/// Target phase curvature across one taper, φ''w².
const CURVATURE_PER_TAPER: f64 = 1.5;
/// Minimum plateau radius in tapers; edge leakage falls like
/// exp(−(r₀/w)²/4) for strongly chirped integrands.
const PLATEAU_TAPERS: f64 = 8.0;
/// Margin between the endpoints and the window edge, in tapers.
const MARGIN_TAPERS: f64 = 5.0;
/// Largest admissible phase advance per cell, in units of π.
const SAMPLING_TARGET: f64 = 0.8;
/// Distance from the grid edge, in tapers, beyond which the window
/// (below 1e-5) is allowed to alias.
const SAMPLED_TAPERS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionGrid {
    pub points: usize,
    pub half_width: f64,
    pub taper: f64,
}

impl CompositionGrid {
    pub fn window(&self, q: f64) -> f64 {
        0.5 * erfc((q.abs() - (self.half_width - EDGE_TAPERS * self.taper)) / self.taper)
    }

    /// A grid sized for `n_slices` slices between the given endpoints.
    pub fn resolving(ep: &Endpoints, config: &OscillatorConfig, n_slices: usize) -> Result<Self> {
        if n_slices < 2 || !(ep.t > 0.0) {
            return Err(Error::InvalidArgument(format!("need t > 0 and at least 2 slices, got {} and {n_slices}", ep.t)));
        }
        let df = derive(config)?;
        let form = action_form(&df, config, ep.t / n_slices as f64, SHIPPED_CROSS_FACTOR)?;
        let k = 0.5 * config.m_over_hbar();
        let curvature = 4.0 * k * form.axx.abs().min(form.ayy.abs());
        let taper = (CURVATURE_PER_TAPER / curvature).sqrt();
        let reach = [ep.x1, ep.y1, ep.x2, ep.y2].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let plateau = (PLATEAU_TAPERS * taper).max(reach + MARGIN_TAPERS * taper);
        let half_width = plateau + EDGE_TAPERS * taper;
        let probe = Self { points: 0, half_width, taper };
        let per_length = sampling_ratio(&form, k, ep, &probe, 1.0);
        let points = ((2.0 * half_width * per_length / SAMPLING_TARGET).ceil() as usize + 1).max(64);
        Ok(Self { points, half_width, taper })
    }

    fn grid(&self) -> Result<Grid2D> {
        if !(self.taper > 0.0 && self.half_width > EDGE_TAPERS * self.taper) {
            return Err(Error::InvalidArgument(format!(
                "window taper {} does not fit inside half-width {}",
                self.taper, self.half_width
            )));
        }
        Grid2D::square(self.points, self.half_width)
    }
}

/// ∇ of S/ħ with respect to (x₁, y₁, x₂, y₂).
fn phase_gradient(f: &ActionForm, k: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> [f64; 4] {
    [
        k * (2.0 * f.axx * x1 - 2.0 * f.bx * x2 + f.cross * y2 - f.mixed * y1),
        k * (2.0 * f.ayy * y1 - 2.0 * f.by * y2 - f.cross * x2 - f.mixed * x1),
        k * (2.0 * f.axx * x2 - 2.0 * f.bx * x1 - f.cross * y1 + f.mixed * y2),
        k * (2.0 * f.ayy * y2 - 2.0 * f.by * y1 + f.cross * x1 + f.mixed * x2),
    ]
}

/// Largest phase change per cell of an integrand f(r)·G(r → r'), with
/// f itself a kernel image, over the window support, in units of π.
fn sampling_ratio(form: &ActionForm, k: f64, ep: &Endpoints, cg: &CompositionGrid, h: f64) -> f64 {
    let s = cg.half_width - SAMPLED_TAPERS * cg.taper;
    let mut outer = vec![(ep.x1, ep.y1), (ep.x2, ep.y2)];
    for sx in [-s, s] {
        for sy in [-s, s] {
            outer.push((sx, sy));
        }
    }
    let mut worst: f64 = 0.0;
    for &(x, y) in &[(-s, -s), (-s, s), (s, -s), (s, s)] {
        let (mut gin_x, mut gin_y, mut gout_x, mut gout_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(px, py) in &outer {
            let g = phase_gradient(form, k, px, py, x, y);
            gin_x = gin_x.max(g[2].abs());
            gin_y = gin_y.max(g[3].abs());
            let g = phase_gradient(form, k, x, y, px, py);
            gout_x = gout_x.max(g[0].abs());
            gout_y = gout_y.max(g[1].abs());
        }
        worst = worst.max((gin_x + gout_x) * h).max((gin_y + gout_y) * h);
    }
    worst / std::f64::consts::PI
}

/// G(r₁ → r₂, t) in the symmetric gauge, composed from `n_slices` exact
/// kernels of duration t/n.
pub fn composed_short_time_kernel(ep: &Endpoints, config: &OscillatorConfig, n_slices: usize, cg: &CompositionGrid) -> Result<Complex64> {
    if n_slices < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 slices, got {n_slices}")));
    }
    if !(ep.t > 0.0) {
        return Err(Error::InvalidArgument(format!("elapsed time must be positive, got {}", ep.t)));
    }
    let df = derive(config)?;
    let tau = ep.t / n_slices as f64;
    let amp = amplitude(&df, config, tau)?;
    let form = action_form(&df, config, tau, SHIPPED_CROSS_FACTOR)?;
    let grid = cg.grid()?;
    let k = 0.5 * config.m_over_hbar();
    let ratio = sampling_ratio(&form, k, ep, cg, grid.dx);
    if ratio >= 1.0 {
        return Err(Error::GridTooSmall(format!(
            "kernel phase advances {:.3}π per cell; refine beyond {} points",
            ratio, cg.points
        )));
    }
    let mh = config.m_over_hbar();
    let windowed = |x: f64, y: f64| cg.window(x) * cg.window(y);

    let mut field = WaveField::from_fn(grid, |x, y| {
        let s = form.evaluate(&Endpoints::new(ep.x1, ep.y1, x, y, tau), mh);
        amp * Complex64::from_polar(windowed(x, y), s)
    });
    for _ in 2..n_slices {
        let next = apply_kernel(&field, &form, amp, config, GaugeTag::Symmetric);
        let values = next
            .values()
            .iter()
            .enumerate()
            .map(|(r, v)| v * windowed(grid.x(r / grid.ny), grid.y(r % grid.ny)))
            .collect();
        field = WaveField::new(grid, values)?;
    }

    let (wx, wy) = (grid.x_weights(), grid.y_weights());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.ny {
            let y = grid.y(j);
            let s = form.evaluate(&Endpoints::new(x, y, ep.x2, ep.y2, tau), mh);
            acc += field.at(i, j) * Complex64::from_polar(wx[i] * wy[j], s);
        }
    }
    Ok(acc * amp)
}
