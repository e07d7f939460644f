//! Central finite-difference weights on a uniform grid.

use crate::error::{Error, Result};

/// Accuracy order of a central stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilOrder(usize);

impl StencilOrder {
    pub const DEFAULT: StencilOrder = StencilOrder(8);

    pub fn new(order: usize) -> Result<Self> {
        match order {
            2 | 4 | 6 | 8 => Ok(Self(order)),
            _ => Err(Error::InvalidArgument(format!("stencil order must be 2, 4, 6 or 8, got {order}"))),
        }
    }

    pub fn order(self) -> usize {
        self.0
    }

    /// Weights c₁…c_r of f'(x) ≈ Σ c_k [f(x+kh) − f(x−kh)] / h.
    pub fn first(self) -> &'static [f64] {
        match self.0 {
            2 => &[0.5],
            4 => &[2.0 / 3.0, -1.0 / 12.0],
            6 => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            _ => &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        }
    }

    /// (c₀, [c₁…c_r]) of f''(x) ≈ {c₀f(x) + Σ c_k [f(x+kh) + f(x−kh)]} / h².
    pub fn second(self) -> (f64, &'static [f64]) {
        match self.0 {
            2 => (-2.0, &[1.0]),
            4 => (-5.0 / 2.0, &[4.0 / 3.0, -1.0 / 12.0]),
            6 => (-49.0 / 18.0, &[3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0]),
            _ => (-205.0 / 72.0, &[8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0]),
        }
    }
}

impl Default for StencilOrder {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_polynomials() {
        for order in [2, 4, 6, 8] {
            let s = StencilOrder::new(order).unwrap();
            // Exact up to degree `order` (first) and `order + 1` (second).
            for p in 0..=order as i32 {
                let f = |x: f64| x.powi(p);
                let x0 = 0.3;
                let h = 0.1;
                let d1: f64 = s.first().iter().enumerate().map(|(k, c)| {
                    let k = (k + 1) as f64;
                    c * (f(x0 + k * h) - f(x0 - k * h))
                }).sum::<f64>() / h;
                let exact1 = if p == 0 { 0.0 } else { f64::from(p) * x0.powi(p - 1) };
                assert!((d1 - exact1).abs() < 1e-9, "order {order} p {p}");

                let (c0, cs) = s.second();
                let d2 = (c0 * f(x0) + cs.iter().enumerate().map(|(k, c)| {
                    let k = (k + 1) as f64;
                    c * (f(x0 + k * h) + f(x0 - k * h))
                }).sum::<f64>()) / (h * h);
                let exact2 = if p < 2 { 0.0 } else { f64::from(p * (p - 1)) * x0.powi(p - 2) };
                assert!((d2 - exact2).abs() < 1e-7, "order {order} p {p}");
            }
        }
        assert!(StencilOrder::new(3).is_err());
    }
}
