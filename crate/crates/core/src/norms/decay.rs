//! Exponential decay-rate fits: values ~ C e^{-m r} via least squares on
//! log-values.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted decay rate; m <= 0 means no decay.
    pub rate: f64,
    pub prefactor: f64,
    /// Root-mean-square residual on the log scale.
    pub residual: f64,
    /// All input values were zero; decay is vacuously infinite.
    pub all_zero: bool,
}

/// Fit (r_i, y_i) with y_i > 0 to log y = log C - m r.
///
/// Zero or negative values are dropped; at least 3 distinct distances with
/// positive values are required (the vacuous all-zero input is reported,
/// not an error).
pub fn decay_rate_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.iter().all(|&(_, y)| y == 0.0) && !samples.is_empty() {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            prefactor: 0.0,
            residual: 0.0,
            all_zero: true,
        });
    }
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(_, y)| y > 0.0)
        .map(|&(r, y)| (r, y.ln()))
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need >= 3 distinct distances with positive values, have {}",
            pts.len()
        )));
    }

    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::DegenerateFit("distances are collinear".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|&(r, ly)| {
            let e = ly - (intercept + slope * r);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(DecayFit {
        rate: -slope,
        prefactor: intercept.exp(),
        residual,
        all_zero: false,
    })
}
