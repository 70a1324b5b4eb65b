//! Time-indexed stochastic environment kernels and their binary container.

use crate::error::{Error, Result};
use crate::lattice::{CurrentModel, EnergyField, LatticeGeometry, NoiseObservable};
use std::io::{Read, Write};

/// One time slice of the environment: a column-stochastic kernel supported
/// on the nearest-neighbor stencil, stored struct-of-arrays. All planes are
/// indexed by the source site y: `stay[y] = p(y, y)` and
/// `moves[2*axis + dir][y] = p(y + step, y)` with dir 0 = forward.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSlice {
    pub(crate) stay: Vec<f64>,
    pub(crate) moves: Vec<Vec<f64>>,
}

impl StencilSlice {
    pub fn identity(sites: usize, d: usize) -> Self {
        Self {
            stay: vec![1.0; sites],
            moves: vec![vec![0.0; sites]; 2 * d],
        }
    }

    /// Kernel entry p(x, y); zero off the stencil.
    pub fn entry(&self, geometry: &LatticeGeometry, x: usize, y: usize) -> f64 {
        if x == y {
            return self.stay[y];
        }
        for axis in 0..geometry.dim() {
            if geometry.neighbor(y, axis, true) == x {
                return self.moves[2 * axis][y];
            }
            if geometry.neighbor(y, axis, false) == x {
                return self.moves[2 * axis + 1][y];
            }
        }
        0.0
    }

    /// Max deviation of column sums from 1.
    pub fn max_column_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for y in 0..self.stay.len() {
            let mut s = self.stay[y];
            for plane in &self.moves {
                s += plane[y];
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Renormalize all columns to unit mass.
    pub fn renormalize(&mut self) {
        for y in 0..self.stay.len() {
            let mut s = self.stay[y];
            for plane in &self.moves {
                s += plane[y];
            }
            if s > 0.0 {
                self.stay[y] /= s;
                for plane in self.moves.iter_mut() {
                    plane[y] /= s;
                }
            }
        }
    }

    /// dst(x) = sum_y p(x, y) src(y), gather form.
    pub fn apply(&self, geometry: &LatticeGeometry, src: &[f64], dst: &mut [f64]) {
        let sites = geometry.sites();
        debug_assert_eq!(src.len(), sites);
        debug_assert_eq!(dst.len(), sites);
        for x in 0..sites {
            let mut acc = self.stay[x] * src[x];
            for axis in 0..geometry.dim() {
                let back = geometry.neighbor(x, axis, false);
                let fwd = geometry.neighbor(x, axis, true);
                // Inflow from back along +axis, from fwd along -axis.
                acc += self.moves[2 * axis][back] * src[back];
                acc += self.moves[2 * axis + 1][fwd] * src[fwd];
            }
            dst[x] = acc;
        }
    }

    /// Same gather restricted to sites in [lo, hi] (d = 1 only), for
    /// support-tracked column evolution.
    pub fn apply_window_1d(&self, m: usize, src: &[f64], dst: &mut [f64], lo: usize, hi: usize) {
        let mut x = lo;
        loop {
            let back = if x == 0 { m - 1 } else { x - 1 };
            let fwd = if x + 1 == m { 0 } else { x + 1 };
            dst[x] = self.stay[x] * src[x]
                + self.moves[0][back] * src[back]
                + self.moves[1][fwd] * src[fwd];
            if x == hi {
                break;
            }
            x = if fwd == 0 { 0 } else { fwd };
        }
    }
}

/// Environment kernels p_t(x, y) for t in [0, t_max), time-major.
#[derive(Debug, Clone)]
pub struct EnvironmentKernel {
    geometry: LatticeGeometry,
    model: CurrentModel,
    master_seed: u64,
    slices: Vec<StencilSlice>,
}

impl EnvironmentKernel {
    pub(crate) fn new(
        geometry: LatticeGeometry,
        model: CurrentModel,
        master_seed: u64,
        slices: Vec<StencilSlice>,
    ) -> Self {
        Self {
            geometry,
            model,
            master_seed,
            slices,
        }
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn model(&self) -> &CurrentModel {
        &self.model
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn t_max(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, t: usize) -> Result<&StencilSlice> {
        self.slices.get(t).ok_or(Error::TimeRange {
            t,
            t_max: self.slices.len(),
        })
    }

    pub fn slices(&self) -> &[StencilSlice] {
        &self.slices
    }

    /// Write the documented little-endian binary container.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        let g = &self.geometry;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        w.write_all(&(g.side() as u64).to_le_bytes())?;
        w.write_all(&(self.slices.len() as u64).to_le_bytes())?;
        w.write_all(&self.model.hopping_rate.to_le_bytes())?;
        w.write_all(&self.model.noise_amplitude.to_le_bytes())?;
        let (obs_tag, obs_bias) = match self.model.observable {
            NoiseObservable::SymmetricCos => (0u32, 0.0),
            NoiseObservable::DirectionBiased { bias } => (1u32, bias),
        };
        w.write_all(&obs_tag.to_le_bytes())?;
        w.write_all(&obs_bias.to_le_bytes())?;
        w.write_all(&self.master_seed.to_le_bytes())?;
        for slice in &self.slices {
            write_plane(&mut w, &slice.stay)?;
            for plane in &slice.moves {
                write_plane(&mut w, plane)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::MalformedEnvFile("bad magic".into()));
        }
        let d = read_u32(&mut r)? as usize;
        let m = read_u64(&mut r)? as usize;
        let t_max = read_u64(&mut r)? as usize;
        let geometry = LatticeGeometry::new(d, m)
            .map_err(|e| Error::MalformedEnvFile(format!("bad geometry: {e}")))?;
        let a = read_f64(&mut r)?;
        let eps = read_f64(&mut r)?;
        let obs_tag = read_u32(&mut r)?;
        let bias = read_f64(&mut r)?;
        let observable = match obs_tag {
            0 => NoiseObservable::SymmetricCos,
            1 => NoiseObservable::DirectionBiased { bias },
            t => return Err(Error::MalformedEnvFile(format!("unknown observable tag {t}"))),
        };
        let master_seed = read_u64(&mut r)?;
        let sites = geometry.sites();
        let mut slices = Vec::with_capacity(t_max);
        for _ in 0..t_max {
            let stay = read_plane(&mut r, sites)?;
            let mut moves = Vec::with_capacity(2 * d);
            for _ in 0..2 * d {
                moves.push(read_plane(&mut r, sites)?);
            }
            slices.push(StencilSlice { stay, moves });
        }
        Ok(Self {
            geometry,
            model: CurrentModel::new_unchecked(a, eps, observable),
            master_seed,
            slices,
        })
    }
}

const MAGIC: &[u8; 8] = b"CMLENV01";

fn write_plane<W: Write>(w: &mut W, plane: &[f64]) -> Result<()> {
    for v in plane {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_plane<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Evolve a density t steps through the quenched environment. Mass and
/// positivity are preserved (columns are stochastic and entries
/// nonnegative).
pub fn quenched_evolve(
    energy0: &EnergyField,
    env: &EnvironmentKernel,
    t: usize,
) -> Result<EnergyField> {
    energy0
        .geometry()
        .check_matches(&env.geometry, "profile vs environment")?;
    if t > env.t_max() {
        return Err(Error::TimeRange {
            t,
            t_max: env.t_max(),
        });
    }
    let mut src = energy0.values().to_vec();
    let mut dst = vec![0.0; src.len()];
    for s in 0..t {
        env.slices[s].apply(&env.geometry, &src, &mut dst);
        std::mem::swap(&mut src, &mut dst);
    }
    EnergyField::from_values(*energy0.geometry(), src)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ChaoticMapKind, LocalChaoticMap};
    use crate::rwre::linearize_at_zero;
    use crate::srb::SrbSampler;

    fn small_env(eps: f64, t_max: usize) -> EnvironmentKernel {
        let g = LatticeGeometry::new(1, 16).unwrap();
        let model = CurrentModel::new(0.25, eps, 1).unwrap();
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, 0.05).unwrap();
        let sampler = SrbSampler::new(map, g, 42);
        let thetas = sampler.sample_trajectory(0, t_max - 1);
        linearize_at_zero(&thetas, &model).unwrap()
    }

    #[test]
    fn deterministic_env_is_t_fold_convolution() {
        let env = small_env(0.0, 5);
        let g = *env.geometry();
        let e0 = EnergyField::delta_spike(g, 3, 1.0).unwrap();
        let evolved = quenched_evolve(&e0, &env, 5).unwrap();
        let t = crate::rwre::TranslationKernel::hopping(1, 0.25).unwrap();
        let profile = t.power_profile(&g, 5).unwrap();
        for x in 0..g.sites() {
            let shifted = profile[(x + g.sites() - 3) % g.sites()];
            assert!((evolved.values()[x] - shifted).abs() < 1e-13);
        }
    }

    #[test]
    fn one_step_from_spike_is_kernel_column() {
        let env = small_env(0.05, 3);
        let g = *env.geometry();
        let y = 7;
        let e0 = EnergyField::delta_spike(g, y, 1.0).unwrap();
        let one = quenched_evolve(&e0, &env, 1).unwrap();
        let s = env.slice(0).unwrap();
        for x in 0..g.sites() {
            assert!((one.values()[x] - s.entry(&g, x, y)).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_preserved_through_noisy_environment() {
        let env = small_env(0.0625, 32);
        let g = *env.geometry();
        let vals: Vec<f64> = (0..g.sites()).map(|i| ((i * 13) % 7) as f64 * 0.1).collect();
        let e0 = EnergyField::from_values(g, vals).unwrap();
        let m0 = e0.total_mass();
        let evolved = quenched_evolve(&e0, &env, 32).unwrap();
        assert!((evolved.total_mass() - m0).abs() < 1e-12 * m0);
        assert!(evolved.min_value() >= 0.0);
    }

    #[test]
    fn time_range_errors() {
        let env = small_env(0.0, 4);
        let g = *env.geometry();
        let e0 = EnergyField::delta_spike(g, 0, 1.0).unwrap();
        assert!(quenched_evolve(&e0, &env, 5).is_err());
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let env = small_env(0.0625, 6);
        let mut buf = Vec::new();
        env.write_to(&mut buf).unwrap();
        let back = EnvironmentKernel::read_from(&buf[..]).unwrap();
        assert_eq!(env.geometry(), back.geometry());
        assert_eq!(env.t_max(), back.t_max());
        assert_eq!(env.model(), back.model());
        for t in 0..env.t_max() {
            assert_eq!(env.slices[t], back.slices[t]);
        }
    }

    #[test]
    fn window_apply_matches_full_apply() {
        let env = small_env(0.0625, 1);
        let g = *env.geometry();
        let m = g.sites();
        let src: Vec<f64> = (0..m).map(|i| ((i * 5) % 3) as f64).collect();
        let mut full = vec![0.0; m];
        env.slices[0].apply(&g, &src, &mut full);
        let mut windowed = vec![0.0; m];
        env.slices[0].apply_window_1d(m, &src, &mut windowed, 0, m - 1);
        for (a, b) in full.iter().zip(windowed.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
