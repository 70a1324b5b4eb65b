//! Burn-in sampler for the invariant measure of the theta dynamics.

use crate::lattice::{step_theta, LatticeGeometry, LocalChaoticMap, ThetaField};
use crate::util::rng::{derive_rng, StreamRole};

/// Default burn-in: the maps mix at rate >= log 2 per step, so 64 steps
/// push the transient below double-precision resolution.
pub const DEFAULT_BURN_IN: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct SrbSampler {
    pub map: LocalChaoticMap,
    pub geometry: LatticeGeometry,
    /// Burn-in steps B. B = 0 is the documented escape hatch returning raw
    /// Lebesgue draws.
    pub burn_in: usize,
    pub master_seed: u64,
}

impl SrbSampler {
    pub fn new(map: LocalChaoticMap, geometry: LatticeGeometry, master_seed: u64) -> Self {
        Self {
            map,
            geometry,
            burn_in: DEFAULT_BURN_IN,
            master_seed,
        }
    }

    /// Burn-in actually applied: zero when Lebesgue is exactly invariant
    /// (kappa = 0), where iteration would only lose precision.
    pub fn effective_burn_in(&self) -> usize {
        if self.map.lebesgue_invariant() {
            0
        } else {
            self.burn_in
        }
    }

    /// Draw one sample from replica stream `replica`.
    pub fn sample(&self, replica: u64) -> ThetaField {
        let mut rng = derive_rng(self.master_seed, StreamRole::SrbSample, replica);
        let mut theta =
            ThetaField::random_uniform(self.geometry, self.map.components(), &mut rng);
        for _ in 0..self.effective_burn_in() {
            theta = step_theta(&theta, &self.map);
        }
        theta
    }

    /// Draw a sample and keep evolving: returns the trajectory segment
    /// theta_B, ..., theta_{B + extra_steps}.
    pub fn sample_trajectory(&self, replica: u64, extra_steps: usize) -> Vec<ThetaField> {
        let mut out = Vec::with_capacity(extra_steps + 1);
        let mut theta = self.sample(replica);
        out.push(theta.clone());
        for _ in 0..extra_steps {
            theta = step_theta(&theta, &self.map);
            out.push(theta.clone());
        }
        out
    }
}

/// Independent samples from distinct replica streams.
pub fn sample_srb(sampler: &SrbSampler, n_samples: usize) -> Vec<ThetaField> {
    (0..n_samples as u64).map(|i| sampler.sample(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ChaoticMapKind;
    use crate::util::stats::Running;
    use std::f64::consts::TAU;

    fn geometry() -> LatticeGeometry {
        LatticeGeometry::new(1, 16).unwrap()
    }

    #[test]
    fn seed_determinism() {
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, 0.03).unwrap();
        let s = SrbSampler::new(map, geometry(), 99);
        let a = sample_srb(&s, 3);
        let b = sample_srb(&s, 3);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.values(), y.values());
        }
    }

    #[test]
    fn uncoupled_doubling_cos_mean_is_zero() {
        // Lebesgue is invariant, so E cos(2 pi theta) = 0 exactly in law.
        let map = LocalChaoticMap::uncoupled(ChaoticMapKind::Doubling);
        let s = SrbSampler::new(map, geometry(), 7);
        let mut acc = Running::new();
        for theta in sample_srb(&s, 2000) {
            for site in 0..theta.geometry().sites() {
                acc.push((TAU * theta.primary(site)).cos());
            }
        }
        assert!(acc.mean().abs() < 4.0 * acc.stderr());
    }

    #[test]
    fn uncoupled_cat_marginals_uniform() {
        // Kolmogorov-Smirnov on each torus coordinate at the 1% level.
        let map = LocalChaoticMap::uncoupled(ChaoticMapKind::Cat);
        let g = LatticeGeometry::new(1, 8).unwrap();
        let s = SrbSampler::new(map, g, 13);
        let samples = sample_srb(&s, 400);
        for c in 0..2 {
            let mut vals: Vec<f64> = samples
                .iter()
                .flat_map(|t| (0..g.sites()).map(move |x| t.component(x, c)))
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = vals.len() as f64;
            let ks = vals
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let lo = (v - i as f64 / n).abs();
                    let hi = (v - (i + 1) as f64 / n).abs();
                    lo.max(hi)
                })
                .fold(0.0, f64::max);
            // 1% critical value for large n.
            assert!(ks < 1.628 / n.sqrt(), "coordinate {c}: KS = {ks}");
        }
    }

    #[test]
    fn burn_in_zero_returns_raw_draws() {
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, 0.02).unwrap();
        let mut s = SrbSampler::new(map, geometry(), 3);
        s.burn_in = 0;
        let raw = s.sample(0);
        let mut rng = derive_rng(3, StreamRole::SrbSample, 0);
        let expected = ThetaField::random_uniform(geometry(), 1, &mut rng);
        assert_eq!(raw.values(), expected.values());
    }

    #[test]
    fn stationarity_after_burn_in() {
        // Observable means at times B and 2B agree within 4 sigma (coupled
        // map, so real iteration happens).
        let map = LocalChaoticMap::new(ChaoticMapKind::Doubling, 0.05).unwrap();
        let g = LatticeGeometry::new(1, 32).unwrap();
        let s = SrbSampler::new(map, g, 21);
        let b = s.effective_burn_in();
        let mut at_b = Running::new();
        let mut at_2b = Running::new();
        for rep in 0..300u64 {
            let traj = s.sample_trajectory(rep, b);
            for site in 0..g.sites() {
                at_b.push((TAU * traj[0].primary(site)).cos());
                at_2b.push((TAU * traj[b].primary(site)).cos());
            }
        }
        let diff = (at_b.mean() - at_2b.mean()).abs();
        let sigma = (at_b.stderr().powi(2) + at_2b.stderr().powi(2)).sqrt();
        assert!(diff < 4.0 * sigma, "diff {diff} vs sigma {sigma}");
    }
}
