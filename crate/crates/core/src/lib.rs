//! Energy-conserving coupled map lattices and their diffusive scaling limits.
//!
//! The library has three layers:
//!
//! * [`lattice`] — the deterministic dynamics: a conserved energy field
//!   redistributed by bond currents, driven by chaotic per-site maps.
//! * [`rwre`] — the linearization at zero energy: a random walk in a random
//!   environment, its annealed kernel, fluctuation split, and the runtime
//!   validators for the model assumptions.
//! * [`rg`] and [`verify`] — the renormalization-group flow on transition
//!   kernels and the weak-distance test of the Gaussian fixed point.
//!
//! Supporting modules: [`srb`] (invariant-measure sampling and correlation
//! estimators) and [`norms`] (cell norms, graph length, decay fits).

pub mod error;
pub mod lattice;
pub mod norms;
pub mod rg;
pub mod rwre;
pub mod srb;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{
    ChaoticMapKind, CurrentModel, EnergyField, LatticeGeometry, LocalChaoticMap, NoiseObservable,
    ThetaField,
};
pub use rg::{FourierKernel, RgFlowRecord, ScaledField};
pub use rwre::{EnvironmentKernel, FluctuationField, TranslationKernel};
pub use verify::{GaussianFixedPoint, WeakDistanceReport};
