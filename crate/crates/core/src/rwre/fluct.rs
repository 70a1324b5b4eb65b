//! Mean/fluctuation split of environment kernels.
//!
//! delta_t = p_t - T is stencil-sparse like p_t. In d = 1 the bond field b
//! with discrete divergence delta is reconstructed in the cumulative-sum
//! gauge anchored below the column: b(., y) is supported on {y, y + 1},
//!
//! ```text
//! b(y, y)     = delta(y - 1, y)
//! b(y + 1, y) = -delta(y + 1, y)
//! ```
//!
//! so that b(x + 1) - b(x) = delta(x) entry by entry (the exclusive prefix
//! sum of the column; columns sum to zero, so the representative is
//! compactly supported and periodically consistent). In d >= 2 the
//! reconstruction is gauge-ambiguous and deliberately not emitted.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::rwre::{EnvironmentKernel, TranslationKernel};

/// delta entries for one time slice, same stencil layout as the kernel.
#[derive(Debug, Clone)]
pub struct DeltaSlice {
    pub stay: Vec<f64>,
    pub moves: Vec<Vec<f64>>,
}

impl DeltaSlice {
    pub fn entry(&self, geometry: &LatticeGeometry, x: usize, y: usize) -> f64 {
        if x == y {
            return self.stay[y];
        }
        for axis in 0..geometry.dim() {
            if geometry.neighbor(y, axis, true) == x {
                return self.moves[2 * axis][y];
            }
            if geometry.neighbor(y, axis, false) == x {
                return self.moves[2 * axis + 1][y];
            }
        }
        0.0
    }

    /// Column sums (all should vanish to rounding).
    pub fn max_column_sum(&self) -> f64 {
        let mut worst = 0.0f64;
        for y in 0..self.stay.len() {
            let mut s = self.stay[y];
            for plane in &self.moves {
                s += plane[y];
            }
            worst = worst.max(s.abs());
        }
        worst
    }
}

/// d = 1 bond field per column: values at x = y and x = y + 1.
#[derive(Debug, Clone)]
pub struct BondSlice {
    pub at_y: Vec<f64>,
    pub at_y_plus_1: Vec<f64>,
}

impl BondSlice {
    /// b(x, y) for arbitrary x (zero off the two-point support).
    pub fn entry(&self, m: usize, x: usize, y: usize) -> f64 {
        if x == y {
            self.at_y[y]
        } else if x == (y + 1) % m {
            self.at_y_plus_1[y]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct FluctuationField {
    geometry: LatticeGeometry,
    deltas: Vec<DeltaSlice>,
    bonds: Option<Vec<BondSlice>>,
}

impl FluctuationField {
    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn deltas(&self) -> &[DeltaSlice] {
        &self.deltas
    }

    /// Present only in d = 1.
    pub fn bonds(&self) -> Option<&[BondSlice]> {
        self.bonds.as_deref()
    }
}

/// Split each environment slice into T plus fluctuation.
pub fn fluctuation_split(
    env: &EnvironmentKernel,
    kernel: &TranslationKernel,
) -> Result<FluctuationField> {
    let g = *env.geometry();
    if kernel.dim() != g.dim() {
        return Err(Error::GeometryMismatch(format!(
            "kernel dimension {} vs environment {}",
            kernel.dim(),
            g.dim()
        )));
    }
    if kernel.support_radius() > 1 {
        return Err(Error::InvalidParameter(
            "fluctuation split expects a nearest-neighbor mean kernel".into(),
        ));
    }
    let t0 = kernel.value(&vec![0; g.dim()]);
    let d = g.dim();
    let sites = g.sites();
    let mut deltas = Vec::with_capacity(env.t_max());
    for slice in env.slices() {
        let mut stay = vec![0.0; sites];
        let mut moves = vec![vec![0.0; sites]; 2 * d];
        for y in 0..sites {
            stay[y] = slice.stay[y] - t0;
            for axis in 0..d {
                let mut unit = vec![0i64; d];
                unit[axis] = 1;
                let t_fwd = kernel.value(&unit);
                unit[axis] = -1;
                let t_bwd = kernel.value(&unit);
                moves[2 * axis][y] = slice.moves[2 * axis][y] - t_fwd;
                moves[2 * axis + 1][y] = slice.moves[2 * axis + 1][y] - t_bwd;
            }
        }
        deltas.push(DeltaSlice { stay, moves });
    }

    let bonds = if d == 1 {
        Some(
            deltas
                .iter()
                .map(|delta| {
                    let mut at_y = vec![0.0; sites];
                    let mut at_y1 = vec![0.0; sites];
                    for y in 0..sites {
                        // delta(y - 1, y) is the backward-move entry.
                        at_y[y] = delta.moves[1][y];
                        at_y1[y] = -delta.moves[0][y];
                    }
                    BondSlice {
                        at_y,
                        at_y_plus_1: at_y1,
                    }
                })
                .collect(),
        )
    } else {
        None
    };

    Ok(FluctuationField {
        geometry: g,
        deltas,
        bonds,
    })
}
