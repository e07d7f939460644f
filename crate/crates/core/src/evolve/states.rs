use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{Grid2D, WaveField};
use crate::error::{Error, Result};

/// Half-width, in standard deviations, that every packet must keep inside
/// the grid.
pub const FIT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub x0: f64,
    pub y0: f64,
    #[serde(default)]
    pub px: f64,
    #[serde(default)]
    pub py: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl GaussianSpec {
    /// Ground state of ½mω²q² along each axis: σ² = ħ/2mω.
    pub fn oscillator_ground(m: f64, hbar: f64, omega_x: f64, omega_y: f64) -> Self {
        Self {
            x0: 0.0,
            y0: 0.0,
            px: 0.0,
            py: 0.0,
            sigma_x: (hbar / (2.0 * m * omega_x)).sqrt(),
            sigma_y: (hbar / (2.0 * m * omega_y)).sqrt(),
        }
    }
}

/// One-dimensional cat: two Gaussians of variance σ² centred at ±a₀/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatState1DSpec {
    #[serde(default = "CatState1DSpec::default_separation")]
    pub a0: f64,
    pub sigma2: f64,
}

impl CatState1DSpec {
    /// The Bohr radius ħ²/me², i.e. 1 in atomic units.
    pub fn bohr_radius(hbar: f64, m: f64, charge: f64) -> f64 {
        hbar * hbar / (m * charge * charge)
    }

    fn default_separation() -> f64 {
        Self::bohr_radius(1.0, 1.0, 1.0)
    }

    /// e^{−a₀²/8σ²}, the overlap of the two humps.
    pub fn overlap(&self) -> f64 {
        (-self.a0 * self.a0 / (8.0 * self.sigma2)).exp()
    }

    /// (8πσ²)^{−1/4}(1 + e^{−a₀²/8σ²})^{−1/2}.
    pub fn prefactor(&self) -> f64 {
        (8.0 * PI * self.sigma2).powf(-0.25) / (1.0 + self.overlap()).sqrt()
    }

    pub fn profile(&self, x: f64) -> f64 {
        let s4 = 4.0 * self.sigma2;
        let h = 0.5 * self.a0;
        self.prefactor() * ((-(x - h).powi(2) / s4).exp() + (-(x + h).powi(2) / s4).exp())
    }

    /// ⟨x²⟩ = σ² + (a₀²/4)/(1 + e^{−a₀²/8σ²}).
    pub fn second_moment(&self) -> f64 {
        self.sigma2 + 0.25 * self.a0 * self.a0 / (1.0 + self.overlap())
    }
}

fn gaussian_1d(q: f64, q0: f64, sigma: f64) -> f64 {
    (2.0 * PI * sigma * sigma).powf(-0.25) * (-(q - q0).powi(2) / (4.0 * sigma * sigma)).exp()
}

fn require_fit(grid: &Grid2D, x: (f64, f64), y: (f64, f64), what: &str) -> Result<()> {
    if grid.contains_box(x, y) {
        Ok(())
    } else {
        Err(Error::GridTooSmall(format!(
            "{what} needs [{}, {}] x [{}, {}] but the grid spans [{}, {}] x [{}, {}]",
            x.0, x.1, y.0, y.1, grid.x_min, grid.x_max, grid.y_min, grid.y_max
        )))
    }
}

/// Normalised Gaussian packet with momentum boost e^{i(pₓx + p_y y)/ħ}.
/// The samples are rescaled so the trapezoid norm is 1.
pub fn gaussian(grid: &Grid2D, spec: &GaussianSpec, hbar: f64) -> Result<WaveField> {
    if !(spec.sigma_x > 0.0 && spec.sigma_y > 0.0) {
        return Err(Error::InvalidArgument("packet widths must be positive".into()));
    }
    let (hx, hy) = (FIT_SIGMAS * spec.sigma_x, FIT_SIGMAS * spec.sigma_y);
    require_fit(grid, (spec.x0 - hx, spec.x0 + hx), (spec.y0 - hy, spec.y0 + hy), "gaussian")?;
    let s = *spec;
    let field = WaveField::from_fn(*grid, |x, y| {
        let envelope = gaussian_1d(x, s.x0, s.sigma_x) * gaussian_1d(y, s.y0, s.sigma_y);
        Complex64::from_polar(envelope, (s.px * x + s.py * y) / hbar)
    });
    Ok(field.normalized())
}

/// The cat profile along x, tensored with a centred ground Gaussian of
/// width `sigma_y` along y.
pub fn cat_state(grid: &Grid2D, spec: &CatState1DSpec, sigma_y: f64) -> Result<WaveField> {
    if !(spec.a0 > 0.0 && spec.sigma2 > 0.0 && sigma_y > 0.0) {
        return Err(Error::InvalidArgument("cat separation and widths must be positive".into()));
    }
    let hx = 0.5 * spec.a0 + FIT_SIGMAS * spec.sigma2.sqrt();
    let hy = FIT_SIGMAS * sigma_y;
    require_fit(grid, (-hx, hx), (-hy, hy), "cat state")?;
    let s = *spec;
    let field = WaveField::from_fn(*grid, |x, y| Complex64::new(s.profile(x) * gaussian_1d(y, 0.0, sigma_y), 0.0));
    Ok(field.normalized())
}
