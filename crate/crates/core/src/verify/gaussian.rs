//! The Gaussian fixed-point density.

use crate::error::{Error, Result};
use serde::Serialize;

/// T*_D(x) = (d / 2 pi D)^{d/2} exp(-d |x|^2 / 2D).
///
/// Unit mass; full second moment D (each axis carries D/d).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianFixedPoint {
    pub dim: usize,
    pub diffusion: f64,
}

impl GaussianFixedPoint {
    pub fn new(dim: usize, diffusion: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("bad dimension {dim}")));
        }
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diffusion constant must be positive and finite, got {diffusion}"
            )));
        }
        Ok(Self { dim, diffusion })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        let r2: f64 = x[..self.dim].iter().map(|c| c * c).sum();
        let norm = (d / (2.0 * std::f64::consts::PI * self.diffusion)).powf(d / 2.0);
        norm * (-d * r2 / (2.0 * self.diffusion)).exp()
    }

    /// Midpoint-rule integral over the centered box [-half, half]^d with
    /// the given spacing.
    pub fn grid_integral(&self, half_width: f64, spacing: f64) -> f64 {
        let n = (2.0 * half_width / spacing).round() as i64;
        let w = spacing.powi(self.dim as i32);
        let mut acc = crate::util::NeumaierSum::new();
        let mut idx = vec![0i64; self.dim];
        loop {
            let x: Vec<f64> = idx
                .iter()
                .map(|&i| -half_width + (i as f64 + 0.5) * spacing)
                .collect();
            acc.add(self.eval(&x) * w);
            // Odometer increment.
            let mut axis = 0;
            loop {
                idx[axis] += 1;
                if idx[axis] < n {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
                if axis == self.dim {
                    return acc.total();
                }
            }
        }
    }
}
