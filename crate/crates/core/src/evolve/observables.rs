use num_complex::Complex64;
use serde::Serialize;

use super::grid::WaveField;
use crate::error::Result;
use crate::stencil::StencilOrder;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_x2: f64,
    pub mean_y2: f64,
    /// Canonical momentum ⟨−iħ∂ₓ⟩.
    pub mean_px: f64,
    pub mean_py: f64,
    /// |⟨ψ_ref|ψ⟩| when a reference is supplied.
    pub autocorrelation: Option<f64>,
}

/// Trapezoid expectation values; moments are divided by the norm².
pub fn observables(psi: &WaveField, reference: Option<&WaveField>, hbar: f64) -> Result<Observables> {
    let g = psi.grid();
    let (wx, wy) = (g.x_weights(), g.y_weights());
    let weights = StencilOrder::DEFAULT.first();
    let v = psi.values();
    let sample = |i: isize, j: isize| -> Complex64 {
        if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
            Complex64::new(0.0, 0.0)
        } else {
            v[g.index(i as usize, j as usize)]
        }
    };

    let (mut x1, mut y1, mut x2, mut y2) = (0.0, 0.0, 0.0, 0.0);
    let (mut px, mut py) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..g.nx {
        let x = g.x(i);
        for j in 0..g.ny {
            let y = g.y(j);
            let w = wx[i] * wy[j];
            let c = v[g.index(i, j)];
            let rho = c.norm_sqr() * w;
            x1 += rho * x;
            y1 += rho * y;
            x2 += rho * x * x;
            y2 += rho * y * y;
            let (ii, jj) = (i as isize, j as isize);
            let mut dx = Complex64::new(0.0, 0.0);
            let mut dy = Complex64::new(0.0, 0.0);
            for (k, wk) in weights.iter().enumerate() {
                let k = (k + 1) as isize;
                dx += (sample(ii + k, jj) - sample(ii - k, jj)) * *wk;
                dy += (sample(ii, jj + k) - sample(ii, jj - k)) * *wk;
            }
            px += c.conj() * dx * (w / g.dx);
            py += c.conj() * dy * (w / g.dy);
        }
    }
    let n = psi.norm_sq();
    let i_hbar = Complex64::new(0.0, -hbar);
    let autocorrelation = match reference {
        Some(r) => Some(r.inner(psi)?.norm()),
        None => None,
    };
    Ok(Observables {
        norm: psi.norm(),
        mean_x: x1 / n,
        mean_y: y1 / n,
        mean_x2: x2 / n,
        mean_y2: y2 / n,
        mean_px: (i_hbar * px).re / n,
        mean_py: (i_hbar * py).re / n,
        autocorrelation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::grid::Grid2D;
    use crate::evolve::states::{cat_state, gaussian, CatState1DSpec, GaussianSpec};

    #[test]
    fn gaussian_moments() {
        let g = Grid2D::square(96, 5.0).unwrap();
        let spec = GaussianSpec { x0: 0.7, y0: -0.4, px: 1.3, py: -0.6, sigma_x: 0.5, sigma_y: 0.6 };
        let psi = gaussian(&g, &spec, 0.8).unwrap();
        let o = observables(&psi, Some(&psi), 0.8).unwrap();
        assert!((o.mean_x - 0.7).abs() < 1e-10);
        assert!((o.mean_y + 0.4).abs() < 1e-10);
        assert!((o.mean_x2 - 0.7f64.powi(2) - 0.25).abs() < 1e-10);
        assert!((o.mean_px - 1.3).abs() < 1e-6);
        assert!((o.mean_py + 0.6).abs() < 1e-6);
        assert!((o.autocorrelation.unwrap() - 1.0).abs() < 1e-14);

        let centred = gaussian(&g, &GaussianSpec { x0: 0.0, y0: 0.0, ..spec }, 1.0).unwrap();
        let o = observables(&centred, None, 1.0).unwrap();
        assert!(o.mean_x.abs() < 1e-14 && o.mean_y.abs() < 1e-14);
        assert!(o.autocorrelation.is_none());
    }

    #[test]
    fn cat_second_moment() {
        let g = Grid2D::new(160, 64, (-7.0, 7.0), (-3.0, 3.0)).unwrap();
        let spec = CatState1DSpec { a0: 3.0, sigma2: 0.3 };
        let psi = cat_state(&g, &spec, 0.4).unwrap();
        let o = observables(&psi, None, 1.0).unwrap();
        assert!(o.mean_x.abs() < 1e-13);
        assert!((o.mean_x2 - spec.second_moment()).abs() < 1e-10);
        // Overlapping humps feel the 1/(1 + ε) correction.
        let close = CatState1DSpec { a0: 1.0, sigma2: 0.3 };
        let psi = cat_state(&g, &close, 0.4).unwrap();
        let o = observables(&psi, None, 1.0).unwrap();
        assert!((o.mean_x2 - close.second_moment()).abs() < 1e-10);
        assert!((o.mean_x2 - (0.3 + 0.25)).abs() > 1e-2);
    }
}
