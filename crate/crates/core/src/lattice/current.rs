//! Conservative bond currents.
//!
//! Each directed bond (x, n) carries the coefficient
//! `c(x -> n) = a + eps' * w(theta(x), theta(n))`, the fraction of E(x)
//! moved to n in one step. The update
//!
//! ```text
//! E'(x) = (1 - sum_n c(x -> n)) E(x) + sum_n c(n -> x) E(n)
//! ```
//!
//! is a convex redistribution whenever `2d (a + eps') <= 1` and
//! `eps' <= a`, so positivity is exact and the lattice sum telescopes.

use crate::error::{Error, Result};
use crate::lattice::{EnergyField, LatticeGeometry, ThetaField};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Noise observable on a directed bond, mapping the endpoint theta values
/// to [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseObservable {
    /// cos(2 pi (theta_1 - theta_2)) on first coordinates. Symmetric under
    /// endpoint exchange and mean zero under product Lebesgue.
    SymmetricCos,
    /// cos/2 plus a bias of the given sign along the +e_1 direction.
    /// Breaks the lattice point-group symmetry of the annealed kernel on
    /// purpose; exists for validator tests. |bias| <= 1/2.
    DirectionBiased { bias: f64 },
}

impl NoiseObservable {
    /// Evaluate on the directed bond from `from` to `to`.
    ///
    /// `axis1_sign` is +1 when the bond points along +e_1, -1 along -e_1,
    /// 0 on other axes.
    #[inline]
    pub fn eval(&self, theta_from: f64, theta_to: f64, axis1_sign: f64) -> f64 {
        match self {
            NoiseObservable::SymmetricCos => (TAU * (theta_from - theta_to)).cos(),
            NoiseObservable::DirectionBiased { bias } => {
                0.5 * (TAU * (theta_from - theta_to)).cos() + bias * axis1_sign
            }
        }
    }
}

/// Bond-current model: symmetric hopping rate `a` plus a noise term of
/// amplitude `eps_prime` modulated by the chaotic variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentModel {
    pub hopping_rate: f64,
    pub noise_amplitude: f64,
    pub observable: NoiseObservable,
}

impl CurrentModel {
    pub fn new(hopping_rate: f64, noise_amplitude: f64, d: usize) -> Result<Self> {
        Self::with_observable(hopping_rate, noise_amplitude, NoiseObservable::SymmetricCos, d)
    }

    pub fn with_observable(
        hopping_rate: f64,
        noise_amplitude: f64,
        observable: NoiseObservable,
        d: usize,
    ) -> Result<Self> {
        let model = Self {
            hopping_rate,
            noise_amplitude,
            observable,
        };
        model.validate(d)?;
        Ok(model)
    }

    /// Skip parameter validation. Used to build deliberately broken models
    /// for the assumption validators.
    pub fn new_unchecked(
        hopping_rate: f64,
        noise_amplitude: f64,
        observable: NoiseObservable,
    ) -> Self {
        Self {
            hopping_rate,
            noise_amplitude,
            observable,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let a = self.hopping_rate;
        let e = self.noise_amplitude;
        if !(a >= 0.0 && a.is_finite() && e >= 0.0 && e.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "rates must be finite and nonnegative: a={a}, eps'={e}"
            )));
        }
        if 2.0 * d as f64 * (a + e) > 1.0 {
            return Err(Error::InvalidModel(format!(
                "positivity constraint violated: 2d(a + eps') = {} > 1",
                2.0 * d as f64 * (a + e)
            )));
        }
        if e > a {
            return Err(Error::InvalidModel(format!(
                "noise amplitude {e} exceeds hopping rate {a}; bond coefficients could go negative"
            )));
        }
        if let NoiseObservable::DirectionBiased { bias } = self.observable {
            if bias.abs() > 0.5 {
                return Err(Error::InvalidModel(format!(
                    "direction bias {bias} pushes the observable outside [-1, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Coefficient of the directed bond from `from` towards its neighbor
    /// along (axis, forward).
    #[inline]
    pub fn bond_coefficient(
        &self,
        theta: &ThetaField,
        from: usize,
        to: usize,
        axis: usize,
        forward: bool,
    ) -> f64 {
        if self.noise_amplitude == 0.0 {
            return self.hopping_rate;
        }
        let sign = if axis == 0 {
            if forward {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        };
        self.hopping_rate
            + self.noise_amplitude * self.observable.eval(theta.primary(from), theta.primary(to), sign)
    }
}

/// Discrete divergence of a bond field: out(x) = sum_mu (J^mu(x + e_mu) - J^mu(x)).
///
/// `j_values` holds one value per (site, axis), axis-major:
/// `j_values[axis * sites + site]`. The output sums to zero exactly up to
/// rounding because every bond value enters twice with opposite signs.
pub fn divergence(j_values: &[f64], geometry: &LatticeGeometry) -> Result<Vec<f64>> {
    let sites = geometry.sites();
    if j_values.len() != sites * geometry.dim() {
        return Err(Error::GeometryMismatch(format!(
            "bond field has {} values, geometry needs {}",
            j_values.len(),
            sites * geometry.dim()
        )));
    }
    let mut out = vec![0.0; sites];
    for axis in 0..geometry.dim() {
        let plane = &j_values[axis * sites..(axis + 1) * sites];
        for site in 0..sites {
            let fwd = geometry.neighbor(site, axis, true);
            out[site] += plane[fwd] - plane[site];
        }
    }
    Ok(out)
}

/// Linear update with no model validation and no positivity clamp. The
/// assumption validators drive broken models through this path and inspect
/// the raw output, which may go negative.
pub(crate) fn step_energy_raw(
    e: &[f64],
    theta: &ThetaField,
    model: &CurrentModel,
    g: &LatticeGeometry,
) -> Vec<f64> {
    let sites = g.sites();
    let mut out = vec![0.0; sites];
    for x in 0..sites {
        let mut outflow = 0.0;
        let mut inflow = 0.0;
        for axis in 0..g.dim() {
            for &fwd in &[true, false] {
                let n = g.neighbor(x, axis, fwd);
                outflow += model.bond_coefficient(theta, x, n, axis, fwd);
                inflow += model.bond_coefficient(theta, n, x, axis, !fwd) * e[n];
            }
        }
        out[x] = (1.0 - outflow) * e[x] + inflow;
    }
    out
}

/// One energy step. Reads the time-t theta field; conserves total mass to
/// a few ulp and preserves nonnegativity exactly.
pub fn step_energy(
    energy: &EnergyField,
    theta: &ThetaField,
    model: &CurrentModel,
) -> Result<EnergyField> {
    let g = *energy.geometry();
    g.check_matches(theta.geometry(), "energy vs theta")?;
    model.validate(g.dim())?;

    let sites = g.sites();
    let e = energy.values();
    let mut out = vec![0.0; sites];

    for x in 0..sites {
        let mut outflow = 0.0;
        let mut inflow = 0.0;
        for axis in 0..g.dim() {
            for &fwd in &[true, false] {
                let n = g.neighbor(x, axis, fwd);
                outflow += model.bond_coefficient(theta, x, n, axis, fwd);
                inflow += model.bond_coefficient(theta, n, x, axis, !fwd) * e[n];
            }
        }
        let stay = (1.0 - outflow).max(0.0);
        out[x] = stay * e[x] + inflow;
    }
    Ok(EnergyField::from_values_unchecked(g, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::compensated_sum;

    fn theta_random(g: LatticeGeometry, seed: u64) -> ThetaField {
        let mut rng = crate::util::derive_rng(seed, crate::util::rng::StreamRole::ThetaInit, 0);
        ThetaField::random_uniform(g, 1, &mut rng)
    }

    #[test]
    fn divergence_of_constant_is_zero() {
        let g = LatticeGeometry::new(2, 4).unwrap();
        let j = vec![3.7; g.sites() * 2];
        let out = divergence(&j, &g).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_single_bond() {
        // d=1, M=4, J=(0,1,0,0) -> (1,-1,0,0)
        let g = LatticeGeometry::new(1, 4).unwrap();
        let out = divergence(&[0.0, 1.0, 0.0, 0.0], &g).unwrap();
        assert_eq!(out, vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn divergence_telescopes() {
        let g = LatticeGeometry::new(2, 5).unwrap();
        let j: Vec<f64> = (0..g.sites() * 2).map(|i| ((i * 29) % 13) as f64 - 6.0).collect();
        let out = divergence(&j, &g).unwrap();
        assert!(compensated_sum(&out).abs() < 1e-12);
    }

    #[test]
    fn constant_field_is_fixed() {
        let g = LatticeGeometry::new(1, 16).unwrap();
        let e = EnergyField::constant(g, 2.5).unwrap();
        let theta = theta_random(g, 3);
        let model = CurrentModel::new(0.25, 0.0, 1).unwrap();
        let next = step_energy(&e, &theta, &model).unwrap();
        for &v in next.values() {
            assert!((v - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn spike_hops_symmetrically() {
        // mass-1 spike, d=1, a=1/4, eps'=0 -> (1/2, 1/4, 0, ..., 0, 1/4)
        let g = LatticeGeometry::new(1, 8).unwrap();
        let e = EnergyField::delta_spike(g, 0, 1.0).unwrap();
        let theta = theta_random(g, 5);
        let model = CurrentModel::new(0.25, 0.0, 1).unwrap();
        let next = step_energy(&e, &theta, &model).unwrap();
        let v = next.values();
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert!((v[1] - 0.25).abs() < 1e-15);
        assert!((v[7] - 0.25).abs() < 1e-15);
        assert!(v[2..7].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mass_conserved_with_noise() {
        let g = LatticeGeometry::new(2, 6).unwrap();
        let vals: Vec<f64> = (0..g.sites()).map(|i| ((i * 7) % 5) as f64 * 0.3).collect();
        let e = EnergyField::from_values(g, vals).unwrap();
        let mut rng = crate::util::derive_rng(11, crate::util::rng::StreamRole::ThetaInit, 0);
        let theta = ThetaField::random_uniform(g, 1, &mut rng);
        let model = CurrentModel::new(0.125, 0.03125, 2).unwrap();
        let m0 = e.total_mass();
        let next = step_energy(&e, &theta, &model).unwrap();
        let m1 = next.total_mass();
        assert!((m1 - m0).abs() <= 8.0 * f64::EPSILON * m0);
        assert!(next.min_value() >= 0.0);
    }

    #[test]
    fn zero_energy_is_fixed_point() {
        let g = LatticeGeometry::new(1, 10).unwrap();
        let e = EnergyField::zeros(g);
        let theta = theta_random(g, 17);
        let model = CurrentModel::new(0.25, 0.0625, 1).unwrap();
        let next = step_energy(&e, &theta, &model).unwrap();
        assert!(next.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_positivity_violating_model() {
        let g = LatticeGeometry::new(1, 8).unwrap();
        let e = EnergyField::constant(g, 1.0).unwrap();
        let theta = theta_random(g, 23);
        let bad = CurrentModel::new_unchecked(0.4, 0.15, NoiseObservable::SymmetricCos);
        assert!(step_energy(&e, &theta, &bad).is_err());
        assert!(CurrentModel::new(0.4, 0.15, 1).is_err());
        assert!(CurrentModel::new(0.25, 0.3, 1).is_err());
    }

    #[test]
    fn translation_covariance() {
        let g = LatticeGeometry::new(1, 12).unwrap();
        let vals: Vec<f64> = (0..12).map(|i| (i as f64 * 0.21) % 2.0).collect();
        let e = EnergyField::from_values(g, vals).unwrap();
        let theta = theta_random(g, 31);
        let model = CurrentModel::new(0.25, 0.0625, 1).unwrap();
        let v = [5i64];

        let stepped_then_shifted = step_energy(&e, &theta, &model).unwrap().shifted(&v);
        let shifted_then_stepped =
            step_energy(&e.shifted(&v), &theta.shifted(&v), &model).unwrap();
        for (a, b) in stepped_then_shifted
            .values()
            .iter()
            .zip(shifted_then_stepped.values())
        {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
