//! Per-site chaotic maps and their nearest-neighbor coupling.

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, ThetaField};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Uncoupled map acting on each site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChaoticMapKind {
    /// Circle doubling, g(theta) = 2 theta mod 1. Expansion factor 2.
    Doubling,
    /// Hyperbolic toral automorphism with matrix [[2,1],[1,1]]:
    /// determinant 1, eigenvalues (3 +- sqrt 5)/2 off the unit circle.
    Cat,
}

impl ChaoticMapKind {
    pub fn components(&self) -> usize {
        match self {
            ChaoticMapKind::Doubling => 1,
            ChaoticMapKind::Cat => 2,
        }
    }
}

/// Chaotic map with coupling strength `kappa`.
///
/// The coupling is nearest-neighbor and acts per coordinate:
///
/// ```text
/// psi_c(x, theta) = (kappa / 2 pi) * sum_{n ~ x} sin(2 pi (theta_c(n) - theta_c(x)))
/// ```
///
/// This form commutes with every lattice point-group element, so the
/// invariant law of the coupled dynamics keeps the reflection and
/// axis-permutation symmetries exactly; its mixed second differences vanish
/// beyond range 1. |psi| <= d * kappa / pi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalChaoticMap {
    pub kind: ChaoticMapKind,
    pub kappa: f64,
}

impl LocalChaoticMap {
    pub fn new(kind: ChaoticMapKind, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling strength must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(Self { kind, kappa })
    }

    pub fn uncoupled(kind: ChaoticMapKind) -> Self {
        Self { kind, kappa: 0.0 }
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    /// With kappa = 0 both map kinds preserve product Lebesgue measure
    /// exactly, which the invariant-measure sampler exploits.
    pub fn lebesgue_invariant(&self) -> bool {
        self.kappa == 0.0
    }
}

#[inline]
fn wrap_unit(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        f - 1.0
    } else {
        f
    }
}

/// One step of the chaotic dynamics: theta'(x) = g(theta(x)) + psi(x, theta),
/// all coordinates mod 1. Reads only the time-t field; never reads energy.
pub fn step_theta(theta: &ThetaField, map: &LocalChaoticMap) -> ThetaField {
    assert_eq!(
        theta.components(),
        map.components(),
        "theta field has {} components but map needs {}",
        theta.components(),
        map.components()
    );
    let g: LatticeGeometry = *theta.geometry();
    let comps = theta.components();
    let sites = g.sites();
    let vals = theta.values();
    let mut out = vec![0.0; vals.len()];

    let coupling = map.kappa / TAU;
    for site in 0..sites {
        let mut psi = [0.0f64; 2];
        if map.kappa != 0.0 {
            for axis in 0..g.dim() {
                for &fwd in &[true, false] {
                    let n = g.neighbor(site, axis, fwd);
                    for (c, p) in psi.iter_mut().enumerate().take(comps) {
                        let diff = vals[n * comps + c] - vals[site * comps + c];
                        *p += coupling * (TAU * diff).sin();
                    }
                }
            }
        }
        match map.kind {
            ChaoticMapKind::Doubling => {
                out[site] = wrap_unit(2.0 * vals[site] + psi[0]);
            }
            ChaoticMapKind::Cat => {
                let t0 = vals[site * 2];
                let t1 = vals[site * 2 + 1];
                out[site * 2] = wrap_unit(2.0 * t0 + t1 + psi[0]);
                out[site * 2 + 1] = wrap_unit(t0 + t1 + psi[1]);
            }
        }
    }
    ThetaField::from_values_unchecked(g, comps, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoupled_doubling() {
        let g = LatticeGeometry::new(1, 8).unwrap();
        let theta = ThetaField::constant(g, 1, 0.3).unwrap();
        let map = LocalChaoticMap::uncoupled(ChaoticMapKind::Doubling);
        let next = step_theta(&theta, &map);
        for site in 0..g.sites() {
            assert!((next.primary(site) - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn uncoupled_cat_matrix() {
        // (0.5, 0.5) -> (2*0.5 + 0.5, 0.5 + 0.5) mod 1 = (0.5, 0.0)
        let g = LatticeGeometry::new(1, 4).unwrap();
        let theta = ThetaField::constant(g, 2, 0.5).unwrap();
        let map = LocalChaoticMap::uncoupled(ChaoticMapKind::Cat);
        let next = step_theta(&theta, &map);
        for site in 0..g.sites() {
            assert!((next.component(site, 0) - 0.5).abs() < 1e-15);
            assert!(next.component(site, 1).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_perturbs_by_at_most_kappa_over_pi_per_axis() {
        let g = LatticeGeometry::new(1, 16).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37) % 1.0).collect();
        let theta = ThetaField::from_values(g, 1, vals).unwrap();
        let kappa = 0.05;
        let coupled = LocalChaoticMap::new(ChaoticMapKind::Doubling, kappa).unwrap();
        let free = LocalChaoticMap::uncoupled(ChaoticMapKind::Doubling);
        let a = step_theta(&theta, &coupled);
        let b = step_theta(&theta, &free);
        let bound = kappa / std::f64::consts::PI + 1e-15;
        for site in 0..g.sites() {
            let mut diff = (a.primary(site) - b.primary(site)).abs();
            diff = diff.min(1.0 - diff);
            assert!(diff <= bound, "site {site}: {diff} > {bound}");
        }
    }

    #[test]
    fn output_stays_in_unit_interval() {
        let g = LatticeGeometry::new(2, 5).unwrap();
        let mut rng = crate::util::derive_rng(7, crate::util::rng::StreamRole::ThetaInit, 0);
        let mut theta = ThetaField::random_uniform(g, 2, &mut rng);
        let map = LocalChaoticMap::new(ChaoticMapKind::Cat, 0.05).unwrap();
        for _ in 0..50 {
            theta = step_theta(&theta, &map);
            assert!(theta.values().iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
}
