//! Simplified exponentially weighted kernel norm.
//!
//! For a kernel given by cell sup-values ||b||_{u,v} the norm is
//!
//! ```text
//! ||b||_lambda = sup_v sum_u ||b||_{u,v} e^{lambda w(u, v)}
//! ```
//!
//! with weight w either the l1 distance |u - v| or the graph length
//! tau({u, v}); the two coincide for pairs and both modes are kept for API
//! stability. This is the single-cell, no-drift-region simplification of
//! the full weighted norm, hence the `_simplified` name.

use crate::norms::tau;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    TwoPointL1,
    GraphLength,
}

/// One cell entry: cell coordinates u, v and the cell sup-value.
#[derive(Debug, Clone)]
pub struct CellEntry {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub value: f64,
}

fn weight(u: &[i64], v: &[i64], mode: WeightMode) -> f64 {
    match mode {
        WeightMode::TwoPointL1 => u
            .iter()
            .zip(v)
            .map(|(a, b)| a.abs_diff(*b) as f64)
            .sum(),
        WeightMode::GraphLength => {
            let sites = vec![u.to_vec(), v.to_vec()];
            tau(&sites).expect("pair tau is always defined").value as f64
        }
    }
}

/// sup over columns v of the exponentially weighted absolute column sum.
pub fn weighted_kernel_norm_simplified(
    entries: &[CellEntry],
    lambda: f64,
    mode: WeightMode,
) -> f64 {
    let mut columns: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for e in entries {
        let w = weight(&e.u, &e.v, mode);
        *columns.entry(e.v.clone()).or_insert(0.0) += e.value.abs() * (lambda * w).exp();
    }
    columns.values().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(u: &[i64], v: &[i64], value: f64) -> CellEntry {
        CellEntry {
            u: u.to_vec(),
            v: v.to_vec(),
            value,
        }
    }

    #[test]
    fn zero_kernel_has_zero_norm() {
        assert_eq!(
            weighted_kernel_norm_simplified(&[], 0.5, WeightMode::TwoPointL1),
            0.0
        );
    }

    #[test]
    fn delta_kernel_is_its_height() {
        let entries = vec![entry(&[2], &[2], -3.5)];
        let n = weighted_kernel_norm_simplified(&entries, 0.7, WeightMode::TwoPointL1);
        assert!((n - 3.5).abs() < 1e-15);
    }

    #[test]
    fn nearest_neighbor_bound() {
        // entries +-eps on the diagonal and both neighbors of one column:
        // norm <= eps (1 + 2 d e^lambda), d = 1.
        let eps = 0.01;
        let lambda = 0.3;
        let entries = vec![
            entry(&[0], &[0], eps),
            entry(&[1], &[0], -eps),
            entry(&[-1], &[0], eps),
        ];
        let n = weighted_kernel_norm_simplified(&entries, lambda, WeightMode::TwoPointL1);
        let direct = eps * (1.0 + 2.0 * lambda.exp());
        assert!((n - direct).abs() < 1e-15);
    }

    #[test]
    fn modes_agree_on_pairs() {
        let entries = vec![
            entry(&[0, 0], &[2, 1], 1.0),
            entry(&[1, 1], &[2, 1], 0.5),
        ];
        let a = weighted_kernel_norm_simplified(&entries, 0.25, WeightMode::TwoPointL1);
        let b = weighted_kernel_norm_simplified(&entries, 0.25, WeightMode::GraphLength);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn monotone_in_lambda() {
        let entries = vec![
            entry(&[0], &[0], 0.4),
            entry(&[3], &[0], 0.2),
            entry(&[1], &[1], 0.9),
        ];
        let n1 = weighted_kernel_norm_simplified(&entries, 0.1, WeightMode::TwoPointL1);
        let n2 = weighted_kernel_norm_simplified(&entries, 0.4, WeightMode::TwoPointL1);
        assert!(n1 <= n2);
    }
}
