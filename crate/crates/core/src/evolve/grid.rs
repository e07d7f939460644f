use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub dx: f64,
    pub dy: f64,
}

pub const MIN_POINTS: usize = 16;

impl Grid2D {
    pub fn new(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::GridTooSmall(format!(
                "{nx}x{ny} points, at least {MIN_POINTS} per axis required"
            )));
        }
        for (lo, hi) in [x_range, y_range] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidArgument(format!("invalid grid extent [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            nx,
            ny,
            x_min: x_range.0,
            x_max: x_range.1,
            y_min: y_range.0,
            y_max: y_range.1,
            dx: (x_range.1 - x_range.0) / (nx - 1) as f64,
            dy: (y_range.1 - y_range.0) / (ny - 1) as f64,
        })
    }

    /// n × n points on [−half_width, half_width]².
    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, n, (-half_width, half_width), (-half_width, half_width))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + j as f64 * self.dy
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Row-major with y fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Trapezoid weights along x.
    pub fn x_weights(&self) -> Vec<f64> {
        trapezoid(self.nx, self.dx)
    }

    pub fn y_weights(&self) -> Vec<f64> {
        trapezoid(self.ny, self.dy)
    }

    /// Whether [lo, hi] × [lo', hi'] lies inside the grid.
    pub fn contains_box(&self, x: (f64, f64), y: (f64, f64)) -> bool {
        x.0 >= self.x_min && x.1 <= self.x_max && y.0 >= self.y_min && y.1 <= self.y_max
    }

    pub fn same_as(&self, other: &Grid2D) -> bool {
        self == other
    }
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Complex samples on a [`Grid2D`] with a cached trapezoid norm².
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid2D,
    values: Vec<Complex64>,
    norm_sq: f64,
}

impl WaveField {
    pub fn new(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        let norm_sq = trapezoid_norm_sq(&grid, &values);
        Ok(Self { grid, values, norm_sq })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.nx)
            .flat_map(|i| (0..grid.ny).map(move |j| (i, j)))
            .map(|(i, j)| f(grid.x(i), grid.y(j)))
            .collect();
        Self::new(grid, values).expect("length matches by construction")
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.index(i, j)]
    }

    /// ∫|ψ|² by the trapezoid rule (cached).
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm();
        let values: Vec<Complex64> = self.values.iter().map(|v| v * s).collect();
        let norm_sq = trapezoid_norm_sq(&self.grid, &values);
        Self {
            grid: self.grid,
            values,
            norm_sq,
        }
    }

    /// ⟨self|other⟩ by the trapezoid rule.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        self.check_grid(other)?;
        let (wx, wy) = (self.grid.x_weights(), self.grid.y_weights());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.grid.nx {
            let row = i * self.grid.ny;
            let mut r = Complex64::new(0.0, 0.0);
            for j in 0..self.grid.ny {
                r += self.values[row + j].conj() * other.values[row + j] * wy[j];
            }
            acc += r * wx[i];
        }
        Ok(acc)
    }

    /// ‖self − other‖ / ‖other‖ in the trapezoid norm.
    pub fn relative_l2_distance(&self, other: &WaveField) -> Result<f64> {
        self.check_grid(other)?;
        let diff: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok((trapezoid_norm_sq(&self.grid, &diff) / other.norm_sq).sqrt())
    }

    /// Pointwise max ||self| − |other||.
    pub fn max_modulus_difference(&self, other: &WaveField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max))
    }

    fn check_grid(&self, other: &WaveField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("wave fields live on different grids".into()))
        }
    }
}

fn trapezoid_norm_sq(grid: &Grid2D, values: &[Complex64]) -> f64 {
    let (wx, wy) = (grid.x_weights(), grid.y_weights());
    (0..grid.nx)
        .map(|i| {
            let row = &values[i * grid.ny..(i + 1) * grid.ny];
            wx[i] * row.iter().zip(&wy).map(|(v, w)| v.norm_sqr() * w).sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = Grid2D::new(16, 20, (-1.0, 2.0), (0.0, 1.9)).unwrap();
        assert_eq!(g.dx, 0.2);
        assert!((g.dy - 0.1).abs() < 1e-15);
        assert_eq!(g.x(15), 2.0);
        assert_eq!(g.index(1, 0), 20);
        assert_eq!(g.len(), 320);
        assert!(Grid2D::square(15, 1.0).is_err());
        assert!(Grid2D::new(16, 16, (1.0, 1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn trapezoid_is_exact_for_bilinear() {
        let g = Grid2D::new(17, 33, (0.0, 2.0), (-1.0, 1.0)).unwrap();
        let f = WaveField::from_fn(g, |x, y| Complex64::new((x * (y + 1.0)).sqrt(), 0.0));
        // ∫∫ x(y+1) dx dy = 2 · 2 = 4
        assert!((f.norm_sq() - 4.0).abs() < 1e-12);
        assert!((f.inner(&f).unwrap().re - f.norm_sq()).abs() < 1e-12);
        assert_eq!(f.relative_l2_distance(&f).unwrap(), 0.0);
        let n = f.normalized();
        assert!((n.norm_sq() - 1.0).abs() < 1e-14);
        assert!(WaveField::new(g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}
