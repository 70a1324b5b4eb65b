//! Invariant-measure sampling for the chaotic dynamics and empirical
//! mixing diagnostics.
//!
//! Samples are drawn by burn-in from per-site Lebesgue initial data. With
//! zero coupling both map kinds preserve product Lebesgue measure exactly,
//! so the sampler returns fresh draws untouched; this also sidesteps the
//! finite-precision orbit collapse of the doubling map (each doubling step
//! discards one mantissa bit, so 53 uncoupled iterations reach 0 exactly).
//! With coupling the neighbor terms reinject low-order bits every step and
//! long orbits stay nondegenerate.

mod correlation;
mod sampler;

pub use correlation::{
    correlation, product_bound_check, write_correlation_csv, CorrelationConfig,
    CorrelationEstimate, Observable, ProductBoundReport, Separation,
};
pub use sampler::{sample_srb, SrbSampler};
