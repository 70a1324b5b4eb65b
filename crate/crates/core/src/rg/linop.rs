//! The linear fluctuation operator: one RG step acting on kernel noise.
//!
//! Over a window of L^2 time slices,
//!
//! ```text
//! (L b)(x', y') = sum_{i=0}^{L^2 - 1} sum_{x,y} T^{L^2 - i - 1}(L x' - x) b_i(x, y) T^i(y - L y')
//! ```
//!
//! in plain lattice units (the kernel-density prefactor of the rescaled
//! picture cancels against the integral weights, so plain arrays carry no
//! L^{d-1} factor). T-powers are cached dense fields built by repeated
//! Fourier multiplication.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::rwre::TranslationKernel;
use crate::util::fft::GridFft;
use rustfft::num_complex::Complex64;

/// Dense cached powers T^0 .. T^{max_power} on a periodic box.
pub struct TranslationKernelPowers {
    geometry: LatticeGeometry,
    powers: Vec<Vec<f64>>,
}

impl TranslationKernelPowers {
    pub fn new(
        kernel: &TranslationKernel,
        geometry: &LatticeGeometry,
        max_power: usize,
    ) -> Result<Self> {
        if kernel.dim() != geometry.dim() {
            return Err(Error::GeometryMismatch(
                "kernel and box dimensions differ".into(),
            ));
        }
        let fft = GridFft::new(geometry.dim(), geometry.side());
        let dense = kernel.dense_on(geometry)?;
        let base = fft.forward_real(&dense);
        let mut powers = Vec::with_capacity(max_power + 1);
        let mut current: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); fft.len()];
        powers.push(fft.inverse_to_real(current.clone()));
        for _ in 1..=max_power {
            for (c, b) in current.iter_mut().zip(base.iter()) {
                *c *= b;
            }
            powers.push(fft.inverse_to_real(current.clone()));
        }
        Ok(Self {
            geometry: *geometry,
            powers,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    /// T^p evaluated at the wrapped site difference a - b.
    #[inline]
    pub fn at_diff(&self, p: usize, a: &[i64], b: &[i64]) -> f64 {
        let g = &self.geometry;
        let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.powers[p][g.index(&diff)]
    }

    pub fn power(&self, p: usize) -> &[f64] {
        &self.powers[p]
    }
}

/// Sparse kernel slice: explicit (x, y, value) entries in lattice
/// coordinates.
#[derive(Debug, Clone, Default)]
pub struct SparseKernelSlice {
    pub entries: Vec<(Vec<i64>, Vec<i64>, f64)>,
}

/// One output entry of the operator at coarse point (x', y').
///
/// The window must hold exactly L^2 slices, ordered by time inside the
/// block; linear in the noise.
pub fn linear_l_entry(
    window: &[SparseKernelSlice],
    t_powers: &TranslationKernelPowers,
    l: usize,
    x_prime: &[i64],
    y_prime: &[i64],
) -> Result<f64> {
    let l2 = l * l;
    if window.len() != l2 {
        return Err(Error::InsufficientSlices {
            needed: l2,
            available: window.len(),
        });
    }
    let lx: Vec<i64> = x_prime.iter().map(|c| c * l as i64).collect();
    let ly: Vec<i64> = y_prime.iter().map(|c| c * l as i64).collect();
    let mut acc = 0.0;
    for (i, slice) in window.iter().enumerate() {
        let left = l2 - i - 1;
        for (x, y, v) in &slice.entries {
            acc += t_powers.at_diff(left, &lx, x) * v * t_powers.at_diff(i, y, &ly);
        }
    }
    Ok(acc)
}

/// Full coarse kernel on a (side / L)^d output grid of coarse points.
pub fn linear_l_apply(
    window: &[SparseKernelSlice],
    t_powers: &TranslationKernelPowers,
    l: usize,
) -> Result<Vec<((Vec<i64>, Vec<i64>), f64)>> {
    let g = t_powers.geometry();
    if g.side() % l != 0 {
        return Err(Error::GeometryMismatch(format!(
            "box side {} not divisible by {l}",
            g.side()
        )));
    }
    let coarse_side = g.side() / l;
    let coarse = LatticeGeometry::new(g.dim(), coarse_side.max(2))?;
    let mut out = Vec::new();
    for xp in 0..coarse.sites() {
        let cx = coarse.coords(xp);
        let cxv: Vec<i64> = cx[..g.dim()].to_vec();
        for yp in 0..coarse.sites() {
            let cy = coarse.coords(yp);
            let cyv: Vec<i64> = cy[..g.dim()].to_vec();
            let v = linear_l_entry(window, t_powers, l, &cxv, &cyv)?;
            out.push(((cxv.clone(), cyv), v));
        }
    }
    Ok(out)
}
