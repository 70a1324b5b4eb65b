//! Trajectory driver with snapshot schedules and invariant checks.

use crate::error::{Error, Result};
use crate::lattice::{step_energy, step_theta, CurrentModel, EnergyField, LocalChaoticMap, ThetaField};

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: usize,
    pub energy: EnergyField,
    pub theta: ThetaField,
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    /// Upper bound on bytes held by the snapshot schedule.
    pub snapshot_budget_bytes: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            snapshot_budget_bytes: 2 << 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub snapshots: Vec<Snapshot>,
    /// max over steps of |mass(t) - mass(0)| / mass(0) (0 when mass(0) = 0).
    pub max_relative_mass_drift: f64,
    /// min over steps and sites of the energy value.
    pub min_energy_value: f64,
}

/// Iterate the coupled dynamics for `steps` steps, recording snapshots at
/// the requested times (0 = initial state). Both updates within a step read
/// the time-t fields. Deterministic given inputs.
pub fn run_trajectory(
    energy0: &EnergyField,
    theta0: &ThetaField,
    model: &CurrentModel,
    map: &LocalChaoticMap,
    steps: usize,
    snapshot_times: &[usize],
    options: &TrajectoryOptions,
) -> Result<TrajectoryResult> {
    energy0
        .geometry()
        .check_matches(theta0.geometry(), "energy vs theta")?;
    let mut schedule: Vec<usize> = snapshot_times.to_vec();
    schedule.sort_unstable();
    schedule.dedup();
    if let Some(&last) = schedule.last() {
        if last > steps {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {last} beyond trajectory length {steps}"
            )));
        }
    }
    let per_snapshot = energy0.geometry().sites()
        * 8
        * (1 + theta0.components());
    let needed = per_snapshot.saturating_mul(schedule.len());
    if needed > options.snapshot_budget_bytes {
        return Err(Error::BudgetExceeded(format!(
            "snapshot schedule needs {needed} bytes, budget is {}",
            options.snapshot_budget_bytes
        )));
    }

    let mass0 = energy0.total_mass();
    let mut max_drift = 0.0f64;
    let mut min_value = energy0.min_value();
    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut next_snap = schedule.iter().copied().peekable();

    let mut energy = energy0.clone();
    let mut theta = theta0.clone();
    if next_snap.peek() == Some(&0) {
        next_snap.next();
        snapshots.push(Snapshot {
            time: 0,
            energy: energy.clone(),
            theta: theta.clone(),
        });
    }

    for t in 1..=steps {
        let new_energy = step_energy(&energy, &theta, model)?;
        let new_theta = step_theta(&theta, map);
        energy = new_energy;
        theta = new_theta;

        if mass0 > 0.0 {
            let drift = (energy.total_mass() - mass0).abs() / mass0;
            max_drift = max_drift.max(drift);
        }
        min_value = min_value.min(energy.min_value());

        if next_snap.peek() == Some(&t) {
            next_snap.next();
            snapshots.push(Snapshot {
                time: t,
                energy: energy.clone(),
                theta: theta.clone(),
            });
        }
    }

    Ok(TrajectoryResult {
        snapshots,
        max_relative_mass_drift: max_drift,
        min_energy_value: min_value,
    })
}
