//! Measurable norm apparatus: cell sup-norms on kernels, the graph length
//! tau of a site set, simplified exponentially weighted kernel norms, and
//! exponential decay-rate fits.

mod decay;
mod tau;
mod weighted;

pub use decay::{decay_rate_fit, DecayFit};
pub use tau::{tau, TauResult};
pub use weighted::{weighted_kernel_norm_simplified, CellEntry, WeightMode};
