//! Lowest eigenvalues by Chebyshev-filtered subspace iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::evolve::Grid2D;
use crate::model::{derive, OscillatorConfig};
use crate::propagator::GaugeTag;
use crate::stencil::StencilOrder;

/// Points required across one oscillator length √(ħ/mΩ₁).
pub const POINTS_PER_LENGTH: usize = 8;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub gauge: GaugeTag,
    pub order: StencilOrder,
    /// Bound on ‖Hv − λv‖ for unit v.
    pub tolerance: f64,
    pub filter_degree: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            gauge: GaugeTag::Symmetric,
            order: StencilOrder::DEFAULT,
            tolerance: 1e-8,
            filter_degree: 40,
            max_iterations: MAX_ITERATIONS,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    pub vectors: Vec<Vec<Complex64>>,
}

/// Oscillator length √(ħ/mΩ₁) of the fast normal mode.
pub fn oscillator_length(config: &OscillatorConfig) -> Result<f64> {
    let df = derive(config)?;
    Ok((config.hbar / (config.m * df.big_omega1)).sqrt())
}

/// Square grid of `n` points per axis on ±`lengths`·ℓ.
pub fn resolved_grid(config: &OscillatorConfig, n: usize, lengths: f64) -> Result<Grid2D> {
    Grid2D::square(n, lengths * oscillator_length(config)?)
}

fn check_resolution(config: &OscillatorConfig, grid: &Grid2D) -> Result<()> {
    let ell = oscillator_length(config)?;
    let points = (ell / grid.dx.max(grid.dy)).floor() as usize + 1;
    if points < POINTS_PER_LENGTH {
        return Err(Error::GridTooSmall(format!(
            "{points} points per oscillator length {ell}, at least {POINTS_PER_LENGTH} required"
        )));
    }
    Ok(())
}

pub fn eigensolve(config: &OscillatorConfig, grid: &Grid2D, k: usize) -> Result<Eigenpairs> {
    eigensolve_with(config, grid, k, &EigenOptions::default())
}

pub fn eigensolve_with(config: &OscillatorConfig, grid: &Grid2D, k: usize, opts: &EigenOptions) -> Result<Eigenpairs> {
    check_resolution(config, grid)?;
    let h = SparseHamiltonian::new(config, grid, opts.gauge, opts.order)?;
    lowest(&h, k, opts)
}

/// The `k` lowest eigenpairs of a Hermitian sparse operator.
pub fn lowest(h: &SparseHamiltonian, k: usize, opts: &EigenOptions) -> Result<Eigenpairs> {
    let n = h.dimension();
    let block = (2 * k).max(k + 8).min(n);
    if k == 0 || k > block {
        return Err(Error::InvalidArgument(format!("cannot extract {k} eigenvalues of a {n}-dimensional operator")));
    }
    let (_, upper) = h.gershgorin();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = DMatrix::from_fn(n, block, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let mut x = orthonormalize(start);
    let (mut ritz, _) = rayleigh_ritz(h, &mut x);

    for iteration in 1..=opts.max_iterations {
        let cut = ritz[block - 1];
        if cut >= upper {
            return Err(Error::NonConvergence("eigensolver: empty filter interval", iteration));
        }
        x = orthonormalize(filter(h, &x, opts.filter_degree, ritz[0], cut, upper));
        let hx;
        (ritz, hx) = rayleigh_ritz(h, &mut x);
        let residuals: Vec<f64> = (0..k)
            .map(|j| (hx.column(j) - x.column(j) * Complex64::new(ritz[j], 0.0)).norm())
            .collect();
        if residuals.iter().all(|r| *r < opts.tolerance) {
            return Ok(Eigenpairs {
                values: ritz[..k].to_vec(),
                residuals,
                iterations: iteration,
                vectors: (0..k).map(|j| x.column(j).iter().copied().collect()).collect(),
            });
        }
    }
    Err(Error::NonConvergence("eigensolver", opts.max_iterations))
}

fn apply_block(h: &SparseHamiltonian, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = x.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    out.par_chunks_mut(n)
        .zip(x.as_slice().par_chunks(n))
        .for_each(|(o, v)| h.apply_into(v, o));
    DMatrix::from_vec(n, x.ncols(), out)
}

fn orthonormalize(x: DMatrix<Complex64>) -> DMatrix<Complex64> {
    x.qr().q()
}

/// Projects onto span(x), diagonalises, rotates `x` to the Ritz vectors and
/// returns ascending Ritz values with H·x.
fn rayleigh_ritz(h: &SparseHamiltonian, x: &mut DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let hx = apply_block(h, x);
    let mut g = x.adjoint() * &hx;
    // Symmetrise away rounding.
    g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    *x = &*x * &v;
    (values, hx * v)
}

/// Scaled Chebyshev filter damping [cut, upper] relative to `lowest`.
fn filter(h: &SparseHamiltonian, x: &DMatrix<Complex64>, degree: usize, lowest: f64, cut: f64, upper: f64) -> DMatrix<Complex64> {
    let e = 0.5 * (upper - cut);
    let c = 0.5 * (upper + cut);
    let mut sigma = e / (lowest - c);
    let tau = 2.0 / sigma;
    let shift = |y: &DMatrix<Complex64>, hy: DMatrix<Complex64>| hy - y * Complex64::new(c, 0.0);

    let mut prev = x.clone();
    let mut cur = shift(x, apply_block(h, x)) * Complex64::new(sigma / e, 0.0);
    for _ in 1..degree {
        let next_sigma = 1.0 / (tau - sigma);
        let next = shift(&cur, apply_block(h, &cur)) * Complex64::new(2.0 * next_sigma / e, 0.0)
            - &prev * Complex64::new(sigma * next_sigma, 0.0);
        prev = cur;
        cur = next;
        sigma = next_sigma;
    }
    cur
}
