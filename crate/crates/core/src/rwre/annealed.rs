//! Annealed statistics: the mean transition kernel over the invariant
//! measure and the averaged current functional with its conductivity fit.

use crate::error::{Error, Result};
use crate::lattice::{CurrentModel, EnergyField, LocalChaoticMap};
use crate::rwre::linearize::slice_from_theta;
use crate::rwre::TranslationKernel;
use crate::srb::SrbSampler;
use crate::util::stats::Running;

#[derive(Debug, Clone)]
pub struct AnnealedKernelEstimate {
    pub kernel: TranslationKernel,
    /// Standard error per stencil entry, keyed like the kernel entries.
    pub stderr: Vec<(Vec<i64>, f64)>,
    /// Largest correction applied by the point-group symmetrization.
    pub symmetrization_correction: f64,
    /// Set when the correction exceeds 3x the entry standard error: the
    /// symmetry assumption looks violated.
    pub symmetry_warning: bool,
    pub n_samples: usize,
}

/// Monte Carlo estimate of T(u) = E[p_0(y + u, y)] over invariant-measure
/// samples, pooled over sites, symmetrized over the lattice point group and
/// renormalized to unit mass. Exact (zero error) when the noise amplitude
/// vanishes.
pub fn annealed_kernel(
    model: &CurrentModel,
    map: &LocalChaoticMap,
    sampler: &SrbSampler,
    n_samples: usize,
) -> Result<AnnealedKernelEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let g = sampler.geometry;
    let d = g.dim();
    debug_assert_eq!(map.components(), sampler.map.components());

    // Offsets: 0, then +-e_axis, in the deterministic order used below.
    let mut offsets: Vec<Vec<i64>> = vec![vec![0; d]];
    for axis in 0..d {
        for sign in [1i64, -1] {
            let mut u = vec![0i64; d];
            u[axis] = sign;
            offsets.push(u);
        }
    }

    let mut stats: Vec<Running> = vec![Running::new(); offsets.len()];
    for rep in 0..n_samples as u64 {
        let theta = sampler.sample(rep);
        let slice = slice_from_theta(&theta, model);
        let sites = g.sites();
        let inv = 1.0 / sites as f64;
        let mut acc = vec![0.0f64; offsets.len()];
        for y in 0..sites {
            acc[0] += slice.stay[y];
            for axis in 0..d {
                acc[1 + 2 * axis] += slice.moves[2 * axis][y];
                acc[2 + 2 * axis] += slice.moves[2 * axis + 1][y];
            }
        }
        for (s, a) in stats.iter_mut().zip(acc.iter()) {
            s.push(a * inv);
        }
    }

    let raw: Vec<(Vec<i64>, f64)> = offsets
        .iter()
        .cloned()
        .zip(stats.iter().map(|s| s.mean()))
        .collect();
    let (kernel, correction) = TranslationKernel::symmetrized_from_samples(d, raw)?;
    let stderr: Vec<(Vec<i64>, f64)> = offsets
        .iter()
        .cloned()
        .zip(stats.iter().map(|s| if n_samples > 1 { s.stderr() } else { 0.0 }))
        .collect();
    let max_se = stderr.iter().map(|(_, s)| *s).fold(0.0, f64::max);
    let symmetry_warning = model.noise_amplitude > 0.0 && correction > 3.0 * max_se;

    Ok(AnnealedKernelEstimate {
        kernel,
        stderr,
        symmetrization_correction: correction,
        symmetry_warning,
        n_samples,
    })
}

#[derive(Debug, Clone)]
pub struct AnnealedDiffusion {
    /// Mean net bond current per (axis, site), axis-major like `divergence`.
    pub current_mean: Vec<f64>,
    pub current_stderr: Vec<f64>,
    /// Conductivity estimate per axis from the linear-response fit
    /// J = kappa (E(x) - E(x + e)).
    pub kappa: Vec<f64>,
    /// sup |mean current| when the profile is constant (should be ~0).
    pub const_current_sup: Option<f64>,
    /// Profile gradients below the Monte Carlo noise floor.
    pub ill_conditioned: bool,
    pub n_samples: usize,
}

/// Monte Carlo estimate of the annealed current on a fixed profile and the
/// conductivity near constant profiles.
pub fn annealed_current(
    model: &CurrentModel,
    map: &LocalChaoticMap,
    sampler: &SrbSampler,
    profile: &EnergyField,
    n_samples: usize,
) -> Result<AnnealedDiffusion> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let g = *profile.geometry();
    g.check_matches(&sampler.geometry, "profile vs sampler")?;
    debug_assert_eq!(map.components(), sampler.map.components());
    let d = g.dim();
    let sites = g.sites();
    let e = profile.values();

    let mut stats: Vec<Running> = vec![Running::new(); d * sites];
    for rep in 0..n_samples as u64 {
        let theta = sampler.sample(rep);
        for axis in 0..d {
            for x in 0..sites {
                let n = g.neighbor(x, axis, true);
                // Net flux across the bond (x, x + e_axis), oriented +axis.
                let c_out = model.bond_coefficient(&theta, x, n, axis, true);
                let c_in = model.bond_coefficient(&theta, n, x, axis, false);
                stats[axis * sites + x].push(c_out * e[x] - c_in * e[n]);
            }
        }
    }

    let current_mean: Vec<f64> = stats.iter().map(|s| s.mean()).collect();
    let current_stderr: Vec<f64> = stats
        .iter()
        .map(|s| if n_samples > 1 { s.stderr() } else { 0.0 })
        .collect();

    let max_grad = (0..d * sites)
        .map(|i| {
            let axis = i / sites;
            let x = i % sites;
            (e[x] - e[g.neighbor(x, axis, true)]).abs()
        })
        .fold(0.0, f64::max);
    let is_constant = max_grad == 0.0;

    let mut kappa = vec![f64::NAN; d];
    let mut ill_conditioned = false;
    if is_constant {
        // No gradient to fit against.
        ill_conditioned = model.noise_amplitude > 0.0;
    } else {
        for axis in 0..d {
            let mut num = 0.0;
            let mut den = 0.0;
            for x in 0..sites {
                let grad = e[x] - e[g.neighbor(x, axis, true)];
                num += current_mean[axis * sites + x] * grad;
                den += grad * grad;
            }
            if den > 0.0 {
                kappa[axis] = num / den;
            }
            let noise = current_stderr[axis * sites..(axis + 1) * sites]
                .iter()
                .copied()
                .fold(0.0, f64::max);
            if den.sqrt() <= noise * (sites as f64).sqrt() {
                ill_conditioned = true;
            }
        }
    }

    let const_current_sup = if is_constant {
        Some(current_mean.iter().map(|v| v.abs()).fold(0.0, f64::max))
    } else {
        None
    };

    Ok(AnnealedDiffusion {
        current_mean,
        current_stderr,
        kappa,
        const_current_sup,
        ill_conditioned,
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ChaoticMapKind, LatticeGeometry};

    fn setup(eps: f64, kappa: f64) -> (CurrentModel, LocalChaoticMap, SrbSampler) {
        let g = LatticeGeometry::new(1, 32).unwrap();
        let model = CurrentModel::new(0.25, eps, 1).unwrap();
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, kappa).unwrap();
        let sampler = SrbSampler::new(map, g, 1234);
        (model, map, sampler)
    }

    #[test]
    fn deterministic_kernel_has_zero_error() {
        let (model, map, sampler) = setup(0.0, 0.0);
        let est = annealed_kernel(&model, &map, &sampler, 4).unwrap();
        assert!((est.kernel.value(&[0]) - 0.5).abs() < 1e-15);
        assert!((est.kernel.value(&[1]) - 0.25).abs() < 1e-15);
        assert!(est.stderr.iter().all(|(_, s)| *s < 1e-15));
        assert!(!est.symmetry_warning);
    }

    #[test]
    fn noisy_kernel_recovers_hopping_within_3_sigma() {
        // Mean-zero observable under kappa = 0 sampling.
        let (model, map, sampler) = setup(0.0625, 0.0);
        let est = annealed_kernel(&model, &map, &sampler, 600).unwrap();
        let se = est
            .stderr
            .iter()
            .find(|(u, _)| u == &vec![1])
            .map(|(_, s)| *s)
            .unwrap();
        assert!((est.kernel.value(&[1]) - 0.25).abs() < 3.0 * se + 1e-12);
        assert!((est.kernel.value(&[0]) - 0.5).abs() < 6.0 * se + 1e-12);
        let total: f64 = est.kernel.entries().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_has_vanishing_current() {
        let (model, map, sampler) = setup(0.0625, 0.05);
        let g = sampler.geometry;
        let profile = EnergyField::constant(g, 0.5).unwrap();
        let r = annealed_current(&model, &map, &sampler, &profile, 50).unwrap();
        // The symmetric observable cancels on constant fields identically.
        assert!(r.const_current_sup.unwrap() < 1e-15);
    }

    #[test]
    fn hopping_conductivity_on_a_ramp_is_exact() {
        let (model, map, sampler) = setup(0.0, 0.0);
        let g = sampler.geometry;
        let m = g.sites();
        // Periodic tent profile: linear ramps up then down.
        let vals: Vec<f64> = (0..m)
            .map(|i| if i <= m / 2 { i as f64 } else { (m - i) as f64 })
            .collect();
        let profile = EnergyField::from_values(g, vals).unwrap();
        let r = annealed_current(&model, &map, &sampler, &profile, 2).unwrap();
        assert!((r.kappa[0] - 0.25).abs() < 1e-12);
        assert!(!r.ill_conditioned);
    }

    #[test]
    fn noisy_conductivity_positive() {
        let (model, map, sampler) = setup(0.0625, 0.05);
        let g = sampler.geometry;
        let m = g.sites();
        let vals: Vec<f64> = (0..m)
            .map(|i| if i <= m / 2 { i as f64 } else { (m - i) as f64 })
            .collect();
        let profile = EnergyField::from_values(g, vals).unwrap();
        let r = annealed_current(&model, &map, &sampler, &profile, 200).unwrap();
        assert!(r.kappa[0] > 0.0);
    }
}
