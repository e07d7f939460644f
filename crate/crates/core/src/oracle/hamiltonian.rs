//! Finite-difference Hamiltonian
//! H = [(pₓ + αy)² + (p_y − βx)²]/2m + ½m(ω₁²x² + ω₂²y²)
//! on the nodes of a [`Grid2D`] with Dirichlet boundaries.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::Grid2D;
use crate::model::OscillatorConfig;
use crate::propagator::GaugeTag;
use crate::stencil::StencilOrder;

/// Compressed sparse rows; node (i, j) is row `grid.index(i, j)`.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    grid: Grid2D,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseHamiltonian {
    /// The magnetic first-derivative terms use antisymmetric central
    /// weights, so the entry at +k is the conjugate of the one at −k.
    pub fn new(config: &OscillatorConfig, grid: &Grid2D, gauge: GaugeTag, order: StencilOrder) -> Result<Self> {
        config.validate()?;
        let g = *grid;
        let (m, hbar) = (config.m, config.hbar);
        let (alpha, beta) = gauge.potential_coefficients(config);
        let (c0, second) = order.second();
        let first = order.first();
        let (kx, ky) = (-hbar * hbar / (2.0 * m * g.dx * g.dx), -hbar * hbar / (2.0 * m * g.dy * g.dy));
        let reach = first.len();

        let rows: Vec<Vec<(usize, Complex64)>> = (0..g.len())
            .into_par_iter()
            .map(|r| {
                let (i, j) = (r / g.ny, r % g.ny);
                let (x, y) = (g.x(i), g.y(j));
                let potential = 0.5 * m * (config.omega1.powi(2) * x * x + config.omega2.powi(2) * y * y)
                    + (alpha * alpha * y * y + beta * beta * x * x) / (2.0 * m);
                let mut row = Vec::with_capacity(4 * reach + 1);
                row.push((r, Complex64::new(c0 * (kx + ky) + potential, 0.0)));
                for k in 1..=reach {
                    let (ck, fk) = (second[k - 1], first[k - 1]);
                    // −iħ(α y/m) ∂ₓ and +iħ(β x/m) ∂_y
                    let ax = hbar * alpha * y * fk / (m * g.dx);
                    let ay = hbar * beta * x * fk / (m * g.dy);
                    if i >= k {
                        row.push((g.index(i - k, j), Complex64::new(kx * ck, ax)));
                    }
                    if i + k < g.nx {
                        row.push((g.index(i + k, j), Complex64::new(kx * ck, -ax)));
                    }
                    if j >= k {
                        row.push((g.index(i, j - k), Complex64::new(ky * ck, -ay)));
                    }
                    if j + k < g.ny {
                        row.push((g.index(i, j + k), Complex64::new(ky * ck, ay)));
                    }
                }
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();

        let mut row_ptr = Vec::with_capacity(g.len() + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let (mut cols, mut vals) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz));
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { grid: g, row_ptr, cols, vals })
    }

    pub fn dimension(&self) -> usize {
        self.grid.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn entries(&self, row: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// out = H·v
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(r, v);
        }
    }

    fn row_dot(&self, r: usize, v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * v[self.cols[k]];
        }
        acc
    }

    /// Row-parallel H·v.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dimension() {
            return Err(Error::InvalidArgument(format!(
                "vector of length {} for a Hamiltonian of dimension {}",
                v.len(),
                self.dimension()
            )));
        }
        Ok((0..v.len()).into_par_iter().map(|r| self.row_dot(r, v)).collect())
    }

    /// max |H_rc − conj(H_cr)| over all stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        (0..self.dimension())
            .into_par_iter()
            .map(|r| {
                self.entries(r)
                    .map(|(c, v)| (v - self.get(c, r).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// (min, max) Gershgorin bounds on the real spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        (0..self.dimension())
            .into_par_iter()
            .map(|r| {
                let (mut centre, mut radius) = (0.0, 0.0);
                for (c, v) in self.entries(r) {
                    if c == r {
                        centre = v.re;
                    } else {
                        radius += v.norm();
                    }
                }
                (centre - radius, centre + radius)
            })
            .reduce(|| (f64::MAX, f64::MIN), |a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}
