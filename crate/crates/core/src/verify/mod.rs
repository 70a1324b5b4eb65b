//! Acceptance machinery for the diffusive scaling limit: rescaled evolved
//! profiles are compared against the Gaussian fixed point in weak
//! (test-function) distances.

mod gaussian;
mod scaling;
mod testfns;

pub use gaussian::GaussianFixedPoint;
pub use scaling::{
    pure_convolution_reference, scaling_limit_test, write_distance_csv, DistanceRow,
    ScalingTestConfig, TrendSummary, WeakDistanceReport, WEAK_DISTANCE_FLOOR,
};
pub use testfns::{default_test_functions, TestFunction};
