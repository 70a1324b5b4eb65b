//! Periodic cubic lattice indexing.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Periodic box in d dimensions with M sites per axis.
///
/// Sites are stored flat row-major with the x axis fastest:
/// `index = x + M*y + M^2*z`. All coordinate arithmetic wraps modulo M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    d: usize,
    m: usize,
}

impl LatticeGeometry {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {d}"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "side length must be >= 2, got {m}"
            )));
        }
        Ok(Self { d, m })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn sites(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Flat index of wrapped coordinates.
    pub fn index(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        let m = self.m as i64;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &c in coords {
            idx += c.rem_euclid(m) as usize * stride;
            stride *= self.m;
        }
        idx
    }

    /// Coordinates of a flat index (first `dim()` entries meaningful).
    pub fn coords(&self, mut index: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        for slot in out.iter_mut().take(self.d) {
            *slot = (index % self.m) as i64;
            index /= self.m;
        }
        out
    }

    /// Neighbor of `index` one step along `axis` (`forward` = +e_axis).
    #[inline]
    pub fn neighbor(&self, index: usize, axis: usize, forward: bool) -> usize {
        let stride = self.m.pow(axis as u32);
        let c = (index / stride) % self.m;
        if forward {
            if c + 1 == self.m {
                index - (self.m - 1) * stride
            } else {
                index + stride
            }
        } else if c == 0 {
            index + (self.m - 1) * stride
        } else {
            index - stride
        }
    }

    /// Index shifted by a lattice vector.
    pub fn shift(&self, index: usize, v: &[i64]) -> usize {
        let c = self.coords(index);
        let shifted: Vec<i64> = (0..self.d).map(|a| c[a] + v[a]).collect();
        self.index(&shifted)
    }

    /// Centered representative of a coordinate difference, in (-M/2, M/2].
    pub fn centered(&self, delta: i64) -> i64 {
        let m = self.m as i64;
        let r = delta.rem_euclid(m);
        if r > m / 2 {
            r - m
        } else {
            r
        }
    }

    pub fn check_matches(&self, other: &LatticeGeometry, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GeometryMismatch(format!(
                "{what}: {}^{} vs {}^{}",
                self.m, self.d, other.m, other.d
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_both_ways() {
        let g = LatticeGeometry::new(2, 4).unwrap();
        let idx = g.index(&[0, 0]);
        assert_eq!(g.neighbor(idx, 0, false), g.index(&[3, 0]));
        assert_eq!(g.neighbor(idx, 1, false), g.index(&[0, 3]));
        let last = g.index(&[3, 3]);
        assert_eq!(g.neighbor(last, 0, true), g.index(&[0, 3]));
    }

    #[test]
    fn index_coords_roundtrip() {
        let g = LatticeGeometry::new(3, 5).unwrap();
        for i in 0..g.sites() {
            let c = g.coords(i);
            assert_eq!(g.index(&c[..3]), i);
        }
    }

    #[test]
    fn centered_representative() {
        let g = LatticeGeometry::new(1, 8).unwrap();
        assert_eq!(g.centered(7), -1);
        assert_eq!(g.centered(4), 4);
        assert_eq!(g.centered(-5), 3);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(LatticeGeometry::new(0, 4).is_err());
        assert!(LatticeGeometry::new(4, 4).is_err());
        assert!(LatticeGeometry::new(1, 1).is_err());
    }
}
