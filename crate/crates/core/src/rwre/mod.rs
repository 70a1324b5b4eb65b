//! The random walk in a random environment induced by linearizing the
//! energy dynamics at E = 0: environment kernels driven by the chaotic
//! variables, their annealed mean, the mean/fluctuation split, quenched
//! density evolution, and runtime validators for the model assumptions.

mod annealed;
mod env;
mod fluct;
mod kernel;
pub(crate) mod linearize;
mod validate;

pub use annealed::{annealed_current, annealed_kernel, AnnealedDiffusion, AnnealedKernelEstimate};
pub use env::{quenched_evolve, EnvironmentKernel, StencilSlice};
pub use fluct::{fluctuation_split, BondSlice, DeltaSlice, FluctuationField};
pub use kernel::TranslationKernel;
pub use linearize::{finite_difference_columns, linearize_at_zero};
pub use validate::{validate_assumptions, AssumptionCheck, AssumptionReport, ValidationConfig};
