//! Closed-form linearization of the energy step at E = 0.
//!
//! For the exchange current the derivative dE'(x)/dE(y) is read off
//! directly: the diagonal keeps what is not sent away,
//! `p(y, y) = 1 - sum_n c(y -> n)`, and each neighbor receives its inflow
//! coefficient `p(n, y) = c(y -> n)`. Columns are exactly stochastic by
//! construction; a finite-difference fallback exists as an oracle.

use crate::error::{Error, Result};
use crate::lattice::{CurrentModel, EnergyField, ThetaField};
use crate::rwre::{EnvironmentKernel, StencilSlice};

const COLUMN_DEFECT_TOLERANCE: f64 = 1e-14;

pub(crate) fn slice_from_theta(theta: &ThetaField, model: &CurrentModel) -> StencilSlice {
    let g = *theta.geometry();
    let sites = g.sites();
    let d = g.dim();
    let mut stay = vec![0.0; sites];
    let mut moves = vec![vec![0.0; sites]; 2 * d];
    for y in 0..sites {
        let mut outflow = 0.0;
        for axis in 0..d {
            for (dir, &fwd) in [true, false].iter().enumerate() {
                let n = g.neighbor(y, axis, fwd);
                let c = model.bond_coefficient(theta, y, n, axis, fwd);
                moves[2 * axis + dir][y] = c;
                outflow += c;
            }
        }
        stay[y] = 1.0 - outflow;
    }
    StencilSlice { stay, moves }
}

/// Environment kernels from a theta trajectory: p_t is built from theta_t.
///
/// Errors when a column sum deviates from 1 beyond 1e-14 before the final
/// renormalization (it cannot for the closed-form exchange model; the check
/// guards the invariant).
pub fn linearize_at_zero(
    thetas: &[ThetaField],
    model: &CurrentModel,
) -> Result<EnvironmentKernel> {
    let first = thetas
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty theta trajectory".into()))?;
    let g = *first.geometry();
    let mut slices = Vec::with_capacity(thetas.len());
    for theta in thetas {
        g.check_matches(theta.geometry(), "theta trajectory")?;
        let mut slice = slice_from_theta(theta, model);
        let defect = slice.max_column_defect();
        if defect > COLUMN_DEFECT_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "column sums deviate by {defect} before renormalization"
            )));
        }
        slice.renormalize();
        slices.push(slice);
    }
    Ok(EnvironmentKernel::new(g, *model, 0, slices))
}

pub(crate) fn set_master_seed(env: EnvironmentKernel, seed: u64) -> EnvironmentKernel {
    EnvironmentKernel::new(*env.geometry(), *env.model(), seed, env.slices().to_vec())
}

/// Finite-difference kernel columns (f(h e_y) - f(0)) / h for the listed
/// source sites; the independent oracle for the closed form.
pub fn finite_difference_columns(
    theta: &ThetaField,
    model: &CurrentModel,
    columns: &[usize],
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let g = *theta.geometry();
    let mut out = Vec::with_capacity(columns.len());
    for &y in columns {
        let perturbed = EnergyField::delta_spike(g, y, h)?;
        let stepped = crate::lattice::step_energy(&perturbed, theta, model)?;
        let col: Vec<f64> = stepped.values().iter().map(|v| v / h).collect();
        out.push(col);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ChaoticMapKind, LatticeGeometry, LocalChaoticMap};
    use crate::srb::SrbSampler;

    fn sampler(g: LatticeGeometry, kappa: f64, seed: u64) -> SrbSampler {
        SrbSampler::new(
            LocalChaoticMap::new(ChaoticMapKind::Doubling, kappa).unwrap(),
            g,
            seed,
        )
    }

    #[test]
    fn deterministic_limit_is_hopping_kernel() {
        let g = LatticeGeometry::new(1, 12).unwrap();
        let model = CurrentModel::new(0.25, 0.0, 1).unwrap();
        let theta = sampler(g, 0.0, 1).sample(0);
        let env = linearize_at_zero(&[theta], &model).unwrap();
        let s = env.slice(0).unwrap();
        for y in 0..g.sites() {
            assert!((s.entry(&g, y, y) - 0.5).abs() < 1e-15);
            let up = g.neighbor(y, 0, true);
            let dn = g.neighbor(y, 0, false);
            assert!((s.entry(&g, up, y) - 0.25).abs() < 1e-15);
            assert!((s.entry(&g, dn, y) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn columns_sum_to_one() {
        let g = LatticeGeometry::new(2, 6).unwrap();
        let model = CurrentModel::new(0.125, 0.03125, 2).unwrap();
        let theta = sampler(g, 0.05, 9).sample(0);
        let env = linearize_at_zero(&[theta], &model).unwrap();
        let s = env.slice(0).unwrap();
        assert!(s.max_column_defect() < 1e-15);
    }

    #[test]
    fn closed_form_matches_finite_differences() {
        let g = LatticeGeometry::new(1, 10).unwrap();
        let model = CurrentModel::new(0.25, 0.0625, 1).unwrap();
        let theta = sampler(g, 0.05, 4).sample(0);
        let env = linearize_at_zero(&[theta.clone()], &model).unwrap();
        let s = env.slice(0).unwrap();
        let h = 1e-6;
        let cols = finite_difference_columns(&theta, &model, &[0, 3, 7], h).unwrap();
        for (ci, &y) in [0usize, 3, 7].iter().enumerate() {
            for x in 0..g.sites() {
                let closed = s.entry(&g, x, y);
                let fd = cols[ci][x];
                assert!(
                    (closed - fd).abs() <= 100.0 * h,
                    "x={x} y={y}: closed {closed} fd {fd}"
                );
            }
        }
    }
}
