//! Deterministic coupled dynamics on a periodic lattice: a nonnegative
//! conserved energy per site redistributed by bond currents whose
//! coefficients are modulated by chaotic per-site variables.

mod current;
mod field;
mod geometry;
mod map;
mod trajectory;

pub(crate) use current::step_energy_raw;
pub use current::{divergence, step_energy, CurrentModel, NoiseObservable};
pub use field::{EnergyField, ThetaField};
pub use geometry::LatticeGeometry;
pub use map::{step_theta, ChaoticMapKind, LocalChaoticMap};
pub use trajectory::{run_trajectory, Snapshot, TrajectoryOptions, TrajectoryResult};
