//! The deterministic kernel flow in Fourier space.
//!
//! On the scale-n grid the flowed kernel has characteristic function
//! `T-hat(k / L^n)^{L^{2n}}`, which on the M-point dual grid is exactly the
//! plain lattice characteristic function at 2 pi j / M raised to the
//! L^{2n}-th power; the dual-grid exponentiation is exact for periodic
//! geometry, and position kernels come back by inverse FFT.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::rwre::TranslationKernel;
use crate::util::fft::GridFft;
use rustfft::num_complex::Complex64;

/// Diffusion constant D0 = sum_u |u|^2 T(u), exact over the stencil.
pub fn diffusion_constant(kernel: &TranslationKernel) -> f64 {
    kernel.second_moment()
}

/// Box sizing rule: side needed so wrap-around mass stays below 1e-6 at the
/// deepest scale n.
pub fn box_side_min(l: usize, n: u32, d0: f64) -> usize {
    let ln = (l as f64).powi(n as i32);
    let t = (l as f64).powi(2 * n as i32);
    (8.0 * ln * (d0 * t).sqrt()).ceil() as usize
}

/// Kernel at one scale of the flow, sampled on the dual grid.
#[derive(Debug, Clone)]
pub struct FourierKernel {
    pub scale_n: u32,
    pub l_base: usize,
    pub geometry: LatticeGeometry,
    /// T-hat at dual points 2 pi j L^n / M (row-major like the grid).
    pub dual_values: Vec<Complex64>,
    pub d0: f64,
    /// sup over the band |k|_inf <= pi of the distance to the Gaussian
    /// fixed point exp(-D0 k^2 / 2d).
    pub gaussian_band_distance: f64,
}

impl FourierKernel {
    /// Position-space kernel by inverse transform (a periodic field
    /// centered at site 0).
    pub fn position_kernel(&self) -> Vec<f64> {
        let fft = GridFft::new(self.geometry.dim(), self.geometry.side());
        fft.inverse_to_real(self.dual_values.clone())
    }

    /// Round-trip consistency: forward transform of the position kernel
    /// against the stored dual samples.
    pub fn roundtrip_error(&self) -> f64 {
        let fft = GridFft::new(self.geometry.dim(), self.geometry.side());
        let spec = fft.forward_real(&self.position_kernel());
        spec.iter()
            .zip(self.dual_values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PureFlowResult {
    pub kernels: Vec<FourierKernel>,
    pub d0: f64,
    /// Set when |T-hat(k)| >= 1 at some nonzero dual point: the spectral
    /// assumption fails and no convergence is guaranteed.
    pub assumption_v_violated: bool,
}

/// Gaussian fixed-point characteristic function exp(-D0 k^2 / 2d).
fn gaussian_hat(k2: f64, d0: f64, d: usize) -> f64 {
    (-d0 * k2 / (2.0 * d as f64)).exp()
}

/// Flow the kernel n_max scales: scale n holds T-hat(k/L^n)^{L^{2n}} on the
/// dual grid plus its band distance to the Gaussian fixed point. The band
/// sup is taken over a dense k grid in d = 1 and over the dual band
/// otherwise.
pub fn pure_t_flow(
    kernel: &TranslationKernel,
    geometry: &LatticeGeometry,
    l: usize,
    n_max: u32,
) -> Result<PureFlowResult> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("flow base {l} must be >= 2")));
    }
    if geometry.dim() != kernel.dim() {
        return Err(Error::GeometryMismatch(
            "kernel and box dimensions differ".into(),
        ));
    }
    let d = geometry.dim();
    let m = geometry.side();
    let d0 = diffusion_constant(kernel);

    let fft = GridFft::new(d, m);
    let dense = kernel.dense_on(geometry)?;
    let base_spec = fft.forward_real(&dense);
    let assumption_v_violated = base_spec
        .iter()
        .skip(1)
        .any(|c| c.norm() >= 1.0 - 1e-12);

    let mut kernels = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let t_steps = (l as f64).powi(2 * n as i32) as u64;
        if t_steps > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!(
                "flow depth n = {n} needs {t_steps} steps, beyond the supported range"
            )));
        }
        let dual_values: Vec<Complex64> = base_spec
            .iter()
            .map(|c| c.powu(t_steps as u32))
            .collect();
        let gaussian_band_distance =
            band_distance(kernel, d, l, n, m, &dual_values, d0);
        kernels.push(FourierKernel {
            scale_n: n,
            l_base: l,
            geometry: *geometry,
            dual_values,
            d0,
            gaussian_band_distance,
        });
    }
    Ok(PureFlowResult {
        kernels,
        d0,
        assumption_v_violated,
    })
}

fn band_distance(
    kernel: &TranslationKernel,
    d: usize,
    l: usize,
    n: u32,
    m: usize,
    dual_values: &[Complex64],
    d0: f64,
) -> f64 {
    let ln = (l as f64).powi(n as i32);
    let t_steps = (l as f64).powi(2 * n as i32) as u32;
    if d == 1 {
        // Dense closed-form sampling of sup_{|k| <= pi}.
        let samples = 4096;
        let mut worst = 0.0f64;
        for j in 0..=samples {
            let k = std::f64::consts::PI * (2.0 * j as f64 / samples as f64 - 1.0);
            let t_hat = kernel.fourier_at(&[k / ln]);
            let flowed = t_hat.powu(t_steps);
            let gauss = gaussian_hat(k * k, d0, d);
            worst = worst.max((flowed - Complex64::new(gauss, 0.0)).norm());
        }
        worst
    } else {
        // Dual-grid points inside the band |k|_inf <= pi.
        let mut worst = 0.0f64;
        let g = LatticeGeometry::new(d, m).expect("validated");
        for (site, val) in dual_values.iter().enumerate() {
            let c = g.coords(site);
            let mut k2 = 0.0;
            let mut in_band = true;
            for a in 0..d {
                let j = g.centered(c[a]);
                let k = 2.0 * std::f64::consts::PI * j as f64 * ln / m as f64;
                if k.abs() > std::f64::consts::PI + 1e-12 {
                    in_band = false;
                    break;
                }
                k2 += k * k;
            }
            if in_band {
                let gauss = gaussian_hat(k2, d0, d);
                worst = worst.max((val - Complex64::new(gauss, 0.0)).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diffusion_constants_of_reference_kernels() {
        let t1 = TranslationKernel::hopping(1, 0.25).unwrap();
        assert_eq!(diffusion_constant(&t1), 0.5);
        let t2 = TranslationKernel::hopping(2, 0.125).unwrap();
        assert_eq!(diffusion_constant(&t2), 0.5);
        let id = TranslationKernel::identity(1);
        assert_eq!(diffusion_constant(&id), 0.0);
    }

    #[test]
    fn closed_form_flow_matches_formula() {
        // 1-d hopping a = 1/4: flowed kernel is cos^{2 L^{2n}}(k / (2 L^n)).
        let t = TranslationKernel::hopping(1, 0.25).unwrap();
        let g = LatticeGeometry::new(1, 256).unwrap();
        let flow = pure_t_flow(&t, &g, 2, 3).unwrap();
        let k3 = &flow.kernels[2];
        for j in [1usize, 7, 50] {
            let k = 2.0 * std::f64::consts::PI * j as f64 * 8.0 / 256.0;
            let expect = (k / 16.0).cos().powi(2 * 64);
            let got = k3.dual_values[j];
            assert!((got.re - expect).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn flow_approaches_gaussian() {
        let t = TranslationKernel::hopping(1, 0.25).unwrap();
        let g = LatticeGeometry::new(1, 512).unwrap();
        let flow = pure_t_flow(&t, &g, 2, 5).unwrap();
        let dists: Vec<f64> = flow
            .kernels
            .iter()
            .map(|k| k.gaussian_band_distance)
            .collect();
        for w in dists.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "distances {dists:?} not nonincreasing");
        }
        assert!(dists[4] <= 1e-3, "n=5 distance {}", dists[4]);
    }

    #[test]
    fn gaussian_input_is_fixed_point() {
        // Sample exp(-D0 k^2 / 2d) on a fine stencil: one flow step keeps
        // it Gaussian up to grid resampling error.
        let d0 = 0.5f64;
        let g = LatticeGeometry::new(1, 256).unwrap();
        // Build a kernel whose profile is the D0-Gaussian on the lattice.
        let mut entries = Vec::new();
        let mut total = 0.0;
        let r = 40i64;
        for u in -r..=r {
            let x = u as f64;
            let w = (-x * x / (2.0 * d0)).exp();
            total += w;
            entries.push((vec![u], w));
        }
        for e in entries.iter_mut() {
            e.1 /= total;
        }
        let t = TranslationKernel::from_entries(1, entries).unwrap();
        let d0_grid = diffusion_constant(&t);
        let flow = pure_t_flow(&t, &g, 2, 1).unwrap();
        // Fixed point within the resampling error of the coarse grid.
        assert!(
            flow.kernels[0].gaussian_band_distance < 2e-3,
            "distance {}",
            flow.kernels[0].gaussian_band_distance
        );
        assert!((d0_grid - d0).abs() < 0.05);
    }

    #[test]
    fn identity_kernel_flags_assumption_v() {
        let t = TranslationKernel::identity(1);
        let g = LatticeGeometry::new(1, 64).unwrap();
        let flow = pure_t_flow(&t, &g, 2, 1).unwrap();
        assert!(flow.assumption_v_violated);
    }

    #[test]
    fn roundtrip_is_tight() {
        let t = TranslationKernel::hopping(1, 0.25).unwrap();
        let g = LatticeGeometry::new(1, 128).unwrap();
        let flow = pure_t_flow(&t, &g, 2, 2).unwrap();
        for k in &flow.kernels {
            assert!(k.roundtrip_error() < 1e-12);
        }
    }

    #[test]
    fn box_rule_matches_formula() {
        assert_eq!(box_side_min(2, 5, 0.5), (8.0 * 32.0 * 512f64.sqrt()).ceil() as usize);
    }
}
