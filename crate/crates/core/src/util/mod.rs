//! Shared numeric utilities: compensated summation, seed derivation,
//! small-sample statistics, and FFTs on d-dimensional periodic grids.

pub mod fft;
pub mod rng;
pub mod stats;
pub mod sum;

pub use rng::{derive_rng, stream_id};
pub use sum::{compensated_sum, NeumaierSum};
