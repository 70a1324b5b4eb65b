//! FFTs on cubic periodic grids.
//!
//! Data layout matches the lattice convention: flat row-major with the x
//! axis fastest, i.e. `index = x + M*y + M^2*z`. Forward transform is
//! unnormalized (`F(k) = sum_x f(x) e^{-2 pi i k.x / M}`); the inverse
//! divides by `M^d`.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct GridFft {
    d: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl GridFft {
    pub fn new(d: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "field size mismatch");
        let m = self.m;
        let mut line = vec![Complex64::default(); m];
        for axis in 0..self.d {
            let stride = m.pow(axis as u32);
            let n_lines = data.len() / m;
            for l in 0..n_lines {
                // Decompose the line index into (inner, outer) around `axis`.
                let inner = l % stride;
                let outer = l / stride;
                let base = inner + outer * stride * m;
                for (i, c) in line.iter_mut().enumerate() {
                    *c = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, c) in line.iter().enumerate() {
                    data[base + i * stride] = *c;
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward.clone());
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse.clone());
        let norm = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
    }

    /// Forward transform of a real field.
    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse_to_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let fft = GridFft::new(2, 8);
        let field: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let spec = fft.forward_real(&field);
        let back = fft.inverse_to_real(spec);
        for (a, b) in field.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_ones() {
        let fft = GridFft::new(1, 16);
        let mut field = vec![0.0; 16];
        field[0] = 1.0;
        let spec = fft.forward_real(&field);
        for c in spec {
            assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_theorem_1d() {
        let m = 32;
        let fft = GridFft::new(1, m);
        let a: Vec<f64> = (0..m).map(|i| (i as f64 * 0.3).cos()).collect();
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut direct = vec![0.0; m];
        for x in 0..m {
            for y in 0..m {
                direct[x] += a[y] * b[(x + m - y) % m];
            }
        }
        let fa = fft.forward_real(&a);
        let fb = fft.forward_real(&b);
        let prod: Vec<Complex64> = fa.iter().zip(fb.iter()).map(|(x, y)| x * y).collect();
        let conv = fft.inverse_to_real(prod);
        for (d, c) in direct.iter().zip(conv.iter()) {
            assert!((d - c).abs() < 1e-10);
        }
    }
}
