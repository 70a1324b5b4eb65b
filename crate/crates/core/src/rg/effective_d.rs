//! Diffusion-constant extraction from rescaled profiles.
//!
//! Two routes: the second moment of the normalized profile in rescaled
//! coordinates (for the Gaussian fixed point the full second moment equals
//! D), and a least-squares Gaussian fit of log-density against |x|^2. The
//! spread between them is reported as the uncertainty.

use crate::error::{Error, Result};
use crate::rg::ScaledField;

#[derive(Debug, Clone, Copy)]
pub struct EffectiveDEstimate {
    /// Second-moment estimator.
    pub d_moment: f64,
    /// Log-density Gaussian fit (NaN when the fit failed).
    pub d_fit: f64,
    /// |d_moment - d_fit|; infinite when the fit failed.
    pub uncertainty: f64,
    pub fit_failed: bool,
}

impl EffectiveDEstimate {
    pub fn best(&self) -> f64 {
        self.d_moment
    }
}

/// Estimate D from a nonnegative profile centered at `center`.
pub fn estimate_effective_d(
    profile: &ScaledField,
    center: usize,
) -> Result<EffectiveDEstimate> {
    let g = profile.geometry();
    let d = g.dim();
    let mass = profile.mass();
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "profile mass {mass} is not normalizable"
        )));
    }
    if profile.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidParameter("profile has negative mass".into()));
    }

    let w = profile.spacing().powi(d as i32);
    let mut second = 0.0;
    for site in 0..g.sites() {
        let x = profile.centered_coords(site, center);
        let r2: f64 = x[..d].iter().map(|c| c * c).sum();
        second += r2 * profile.values()[site] * w;
    }
    let d_moment = second / mass;

    // Weighted least squares of ln rho against |x|^2, weights rho, over
    // points carrying at least 1e-8 of the peak.
    let peak = profile.values().iter().copied().fold(0.0, f64::max);
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut n_pts = 0usize;
    for site in 0..g.sites() {
        let v = profile.values()[site];
        if v <= peak * 1e-8 || v <= 0.0 {
            continue;
        }
        let x = profile.centered_coords(site, center);
        let r2: f64 = x[..d].iter().map(|c| c * c).sum();
        let ly = (v / mass).ln();
        sw += v;
        sx += v * r2;
        sy += v * ly;
        sxx += v * r2 * r2;
        sxy += v * r2 * ly;
        n_pts += 1;
    }
    let denom = sw * sxx - sx * sx;
    let (d_fit, fit_failed) = if n_pts < 3 || denom <= 0.0 {
        (f64::NAN, true)
    } else {
        let slope = (sw * sxy - sx * sy) / denom;
        if slope >= 0.0 {
            (f64::NAN, true)
        } else {
            (-(d as f64) / (2.0 * slope), false)
        }
    };

    let uncertainty = if fit_failed {
        f64::INFINITY
    } else {
        (d_moment - d_fit).abs()
    };
    Ok(EffectiveDEstimate {
        d_moment,
        d_fit,
        uncertainty,
        fit_failed,
    })
}
