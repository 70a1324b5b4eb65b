//! Renormalization-group flow on transition kernels: the diffusive scaling
//! transformation, the Fourier flow to the Gaussian fixed point, the linear
//! fluctuation operator, kernel composition over time blocks, and
//! diffusion-constant extraction.

mod effective_d;
mod experiment;
mod flow;
mod kernel_step;
mod linop;
mod scaled;

pub use effective_d::{estimate_effective_d, EffectiveDEstimate};
pub use experiment::{
    full_rg_experiment, write_rg_records_csv, RgExperimentConfig, RgFlowRecord,
};
pub use flow::{box_side_min, diffusion_constant, pure_t_flow, FourierKernel, PureFlowResult};
pub use kernel_step::{rg_kernel_step, DenseKernel};
pub use linop::{linear_l_apply, linear_l_entry, SparseKernelSlice, TranslationKernelPowers};
pub use scaled::{scale_field, ScaledField};
