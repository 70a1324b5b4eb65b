//! Energy and chaotic-coordinate fields.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::util::NeumaierSum;

/// Nonnegative conserved scalar field, one value per site.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyField {
    geometry: LatticeGeometry,
    values: Vec<f64>,
}

impl EnergyField {
    pub fn zeros(geometry: LatticeGeometry) -> Self {
        Self {
            geometry,
            values: vec![0.0; geometry.sites()],
        }
    }

    pub fn constant(geometry: LatticeGeometry, value: f64) -> Result<Self> {
        if value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "energy values must be nonnegative, got {value}"
            )));
        }
        Ok(Self {
            geometry,
            values: vec![value; geometry.sites()],
        })
    }

    /// Point mass at one site.
    pub fn delta_spike(geometry: LatticeGeometry, site: usize, mass: f64) -> Result<Self> {
        if mass < 0.0 {
            return Err(Error::InvalidParameter("spike mass must be >= 0".into()));
        }
        let mut values = vec![0.0; geometry.sites()];
        values[site] = mass;
        Ok(Self { geometry, values })
    }

    pub fn from_values(geometry: LatticeGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.sites() {
            return Err(Error::GeometryMismatch(format!(
                "expected {} values, got {}",
                geometry.sites(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "energy values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total mass via compensated summation.
    pub fn total_mass(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for &v in &self.values {
            acc.add(v);
        }
        acc.total()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Field shifted by a lattice vector: out(x) = in(x - v).
    pub fn shifted(&self, v: &[i64]) -> EnergyField {
        let g = self.geometry;
        let mut values = vec![0.0; g.sites()];
        for (idx, val) in values.iter_mut().enumerate() {
            let neg: Vec<i64> = v.iter().map(|&c| -c).collect();
            *val = self.values[g.shift(idx, &neg)];
        }
        EnergyField {
            geometry: g,
            values,
        }
    }

    pub(crate) fn from_values_unchecked(geometry: LatticeGeometry, values: Vec<f64>) -> Self {
        Self { geometry, values }
    }
}

/// Per-site chaotic coordinates: one component on the circle, two on the
/// 2-torus. Components are stored interleaved and live in [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    geometry: LatticeGeometry,
    components: usize,
    values: Vec<f64>,
}

impl ThetaField {
    pub fn constant(geometry: LatticeGeometry, components: usize, value: f64) -> Result<Self> {
        Self::from_values(
            geometry,
            components,
            vec![value; geometry.sites() * components],
        )
    }

    pub fn from_values(
        geometry: LatticeGeometry,
        components: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=2).contains(&components) {
            return Err(Error::InvalidParameter(format!(
                "theta components must be 1 or 2, got {components}"
            )));
        }
        if values.len() != geometry.sites() * components {
            return Err(Error::GeometryMismatch(format!(
                "expected {} theta values, got {}",
                geometry.sites() * components,
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::InvalidParameter(
                "theta coordinates must lie in [0, 1)".into(),
            ));
        }
        Ok(Self {
            geometry,
            components,
            values,
        })
    }

    /// Uniform draw on the product of circles/tori.
    pub fn random_uniform<R: rand::Rng>(
        geometry: LatticeGeometry,
        components: usize,
        rng: &mut R,
    ) -> Self {
        let values = (0..geometry.sites() * components)
            .map(|_| rng.gen::<f64>())
            .collect();
        Self {
            geometry,
            components,
            values,
        }
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// First coordinate at a site (the one observables read).
    #[inline]
    pub fn primary(&self, site: usize) -> f64 {
        self.values[site * self.components]
    }

    #[inline]
    pub fn component(&self, site: usize, c: usize) -> f64 {
        self.values[site * self.components + c]
    }

    pub fn shifted(&self, v: &[i64]) -> ThetaField {
        let g = self.geometry;
        let mut values = vec![0.0; self.values.len()];
        let neg: Vec<i64> = v.iter().map(|&c| -c).collect();
        for idx in 0..g.sites() {
            let src = g.shift(idx, &neg);
            for c in 0..self.components {
                values[idx * self.components + c] = self.values[src * self.components + c];
            }
        }
        ThetaField {
            geometry: g,
            components: self.components,
            values,
        }
    }

    pub(crate) fn from_values_unchecked(
        geometry: LatticeGeometry,
        components: usize,
        values: Vec<f64>,
    ) -> Self {
        Self {
            geometry,
            components,
            values,
        }
    }
}
