//! One RG step on quenched kernels: compose L^2 consecutive time slices.
//!
//! The rescaling (S_L on both arguments plus the L^d amplitude) is a
//! bijective relabeling of the composed kernel on the fixed torus, so in
//! plain array units the coarse kernel IS the L^2-fold product, tagged with
//! scale n + 1. Stochasticity is therefore preserved exactly.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::rwre::{StencilSlice, TranslationKernel};

/// Dense kernel p(x, y) on the torus, column-major: `data[x + sites * y]`.
#[derive(Debug, Clone)]
pub struct DenseKernel {
    pub geometry: LatticeGeometry,
    pub scale_n: u32,
    pub data: Vec<f64>,
}

/// Composition work guard: sites^3 per multiply grows fast.
const MAX_DENSE_SITES: usize = 4096;

impl DenseKernel {
    pub fn identity(geometry: LatticeGeometry) -> Self {
        let sites = geometry.sites();
        let mut data = vec![0.0; sites * sites];
        for i in 0..sites {
            data[i + sites * i] = 1.0;
        }
        Self {
            geometry,
            scale_n: 0,
            data,
        }
    }

    pub fn from_stencil(slice: &StencilSlice, geometry: &LatticeGeometry) -> Self {
        let sites = geometry.sites();
        let mut data = vec![0.0; sites * sites];
        for y in 0..sites {
            for x in 0..sites {
                let v = slice.entry(geometry, x, y);
                if v != 0.0 {
                    data[x + sites * y] = v;
                }
            }
        }
        Self {
            geometry: *geometry,
            scale_n: 0,
            data,
        }
    }

    pub fn from_translation(kernel: &TranslationKernel, geometry: &LatticeGeometry) -> Result<Self> {
        if kernel.dim() != geometry.dim() {
            return Err(Error::GeometryMismatch(
                "kernel and box dimensions differ".into(),
            ));
        }
        let sites = geometry.sites();
        let mut data = vec![0.0; sites * sites];
        for y in 0..sites {
            for (u, w) in kernel.entries() {
                let x = geometry.shift(y, u);
                data[x + sites * y] += w;
            }
        }
        Ok(Self {
            geometry: *geometry,
            scale_n: 0,
            data,
        })
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.data[x + self.geometry.sites() * y]
    }

    pub fn max_column_defect(&self) -> f64 {
        let sites = self.geometry.sites();
        let mut worst = 0.0f64;
        for y in 0..sites {
            let s: f64 = (0..sites).map(|x| self.entry(x, y)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// self o other, i.e. (self . other)(x, y) = sum_z self(x, z) other(z, y).
    fn compose(&self, other: &DenseKernel) -> DenseKernel {
        let sites = self.geometry.sites();
        let mut data = vec![0.0; sites * sites];
        for y in 0..sites {
            for z in 0..sites {
                let o = other.entry(z, y);
                if o == 0.0 {
                    continue;
                }
                let col = &self.data[sites * z..sites * (z + 1)];
                let out = &mut data[sites * y..sites * (y + 1)];
                for (dst, src) in out.iter_mut().zip(col.iter()) {
                    *dst += src * o;
                }
            }
        }
        DenseKernel {
            geometry: self.geometry,
            scale_n: self.scale_n,
            data,
        }
    }
}

/// Compose L^2 consecutive slices (earliest first) into the next-scale
/// kernel.
pub fn rg_kernel_step(slices: &[DenseKernel], l: usize) -> Result<DenseKernel> {
    let l2 = l * l;
    if slices.len() < l2 {
        return Err(Error::InsufficientSlices {
            needed: l2,
            available: slices.len(),
        });
    }
    let g = slices[0].geometry;
    if g.sites() > MAX_DENSE_SITES {
        return Err(Error::BudgetExceeded(format!(
            "dense kernel composition on {} sites exceeds the {MAX_DENSE_SITES}-site guard",
            g.sites()
        )));
    }
    let n = slices[0].scale_n;
    for s in &slices[..l2] {
        g.check_matches(&s.geometry, "kernel slices")?;
        if s.scale_n != n {
            return Err(Error::InvalidParameter(
                "kernel slices span different scales".into(),
            ));
        }
    }
    let mut acc = slices[0].clone();
    for s in &slices[1..l2] {
        acc = s.compose(&acc);
    }
    acc.scale_n = n + 1;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ChaoticMapKind, CurrentModel, LocalChaoticMap};
    use crate::rg::pure_t_flow;
    use crate::rwre::linearize_at_zero;
    use crate::srb::SrbSampler;

    #[test]
    fn identity_slices_compose_to_identity() {
        let g = LatticeGeometry::new(1, 8).unwrap();
        let slices = vec![DenseKernel::identity(g); 4];
        let coarse = rg_kernel_step(&slices, 2).unwrap();
        assert_eq!(coarse.scale_n, 1);
        for x in 0..8 {
            for y in 0..8 {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert_eq!(coarse.entry(x, y), expect);
            }
        }
    }

    #[test]
    fn deterministic_slices_match_fourier_flow() {
        let g = LatticeGeometry::new(1, 64).unwrap();
        let t = TranslationKernel::hopping(1, 0.25).unwrap();
        let dense = DenseKernel::from_translation(&t, &g).unwrap();
        let slices = vec![dense; 4];
        let coarse = rg_kernel_step(&slices, 2).unwrap();

        let flow = pure_t_flow(&t, &g, 2, 1).unwrap();
        let pos = flow.kernels[0].position_kernel();
        for y in 0..g.sites() {
            for x in 0..g.sites() {
                let offset = (x + g.sites() - y) % g.sites();
                assert!(
                    (coarse.entry(x, y) - pos[offset]).abs() < 1e-12,
                    "x={x} y={y}"
                );
            }
        }
    }

    #[test]
    fn quenched_composition_stays_stochastic() {
        let g = LatticeGeometry::new(1, 24).unwrap();
        let model = CurrentModel::new(0.25, 0.0625, 1).unwrap();
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, 0.05).unwrap();
        let thetas = SrbSampler::new(map, g, 3).sample_trajectory(0, 8);
        let env = linearize_at_zero(&thetas, &model).unwrap();
        let slices: Vec<DenseKernel> = env
            .slices()
            .iter()
            .map(|s| DenseKernel::from_stencil(s, &g))
            .collect();
        let coarse = rg_kernel_step(&slices, 3).unwrap();
        assert!(coarse.max_column_defect() < 1e-13);
        assert!(coarse.data.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn needs_l_squared_slices() {
        let g = LatticeGeometry::new(1, 8).unwrap();
        let slices = vec![DenseKernel::identity(g); 3];
        assert!(matches!(
            rg_kernel_step(&slices, 2),
            Err(Error::InsufficientSlices { .. })
        ));
    }
}
