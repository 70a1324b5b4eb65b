//! Energy fields on refined grids with the kernel integral convention.
//!
//! A scale-n field lives on the grid of spacing L^{-n} inside the periodic
//! box; integrals are L^{-nd} times plain sums. The scaling transformation
//! (S_L E)(x) = L^d E(Lx) is a pure relabeling of the same array (every
//! grid point x of the finer lattice has Lx on the coarser one), so mass is
//! preserved exactly under the convention.

use crate::error::{Error, Result};
use crate::lattice::{EnergyField, LatticeGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledField {
    geometry: LatticeGeometry,
    scale_n: u32,
    l_base: usize,
    values: Vec<f64>,
}

impl ScaledField {
    /// Wrap a lattice energy field as a scale-0 object.
    pub fn from_energy(field: &EnergyField, l_base: usize) -> Result<Self> {
        if l_base < 2 {
            return Err(Error::InvalidParameter(format!(
                "scale base must be >= 2, got {l_base}"
            )));
        }
        Ok(Self {
            geometry: *field.geometry(),
            scale_n: 0,
            l_base,
            values: field.values().to_vec(),
        })
    }

    pub fn from_values(
        geometry: LatticeGeometry,
        scale_n: u32,
        l_base: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != geometry.sites() {
            return Err(Error::GeometryMismatch(format!(
                "expected {} values, got {}",
                geometry.sites(),
                values.len()
            )));
        }
        Ok(Self {
            geometry,
            scale_n,
            l_base,
            values,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn scale(&self) -> u32 {
        self.scale_n
    }

    pub fn l_base(&self) -> usize {
        self.l_base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid spacing L^{-n}.
    pub fn spacing(&self) -> f64 {
        (self.l_base as f64).powi(-(self.scale_n as i32))
    }

    /// ||f||_1 under the integral convention: L^{-nd} sum |f|.
    pub fn l1_norm(&self) -> f64 {
        let w = self.spacing().powi(self.geometry.dim() as i32);
        let mut acc = crate::util::NeumaierSum::new();
        for v in &self.values {
            acc.add(v.abs());
        }
        acc.total() * w
    }

    /// Signed mass under the integral convention.
    pub fn mass(&self) -> f64 {
        let w = self.spacing().powi(self.geometry.dim() as i32);
        let mut acc = crate::util::NeumaierSum::new();
        for v in &self.values {
            acc.add(*v);
        }
        acc.total() * w
    }

    /// Physical coordinates of a site relative to a center site, wrapped to
    /// the symmetric box, in rescaled units.
    pub fn centered_coords(&self, site: usize, center: usize) -> [f64; 3] {
        let g = &self.geometry;
        let c = g.coords(site);
        let c0 = g.coords(center);
        let h = self.spacing();
        let mut out = [0.0; 3];
        for a in 0..g.dim() {
            out[a] = g.centered(c[a] - c0[a]) as f64 * h;
        }
        out
    }
}

/// One diffusive rescaling step: same array, scale n + 1, values times L^d.
/// Requires L to divide the box side so downstream cell structure stays
/// representable; L = 1 is the identity.
pub fn scale_field(field: &ScaledField, l: usize) -> Result<ScaledField> {
    if l == 1 {
        return Ok(field.clone());
    }
    if l != field.l_base {
        return Err(Error::InvalidParameter(format!(
            "scaling by {l} but field uses base {}",
            field.l_base
        )));
    }
    if field.geometry().side() % l != 0 {
        return Err(Error::GeometryMismatch(format!(
            "box side {} not divisible by {l}",
            field.geometry().side()
        )));
    }
    let ld = (l as f64).powi(field.geometry.dim() as i32);
    Ok(ScaledField {
        geometry: field.geometry,
        scale_n: field.scale_n + 1,
        l_base: field.l_base,
        values: field.values.iter().map(|v| v * ld).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spike_field(m: usize) -> ScaledField {
        let g = LatticeGeometry::new(1, m).unwrap();
        let e = EnergyField::delta_spike(g, 0, 1.0).unwrap();
        ScaledField::from_energy(&e, 2).unwrap()
    }

    #[test]
    fn identity_scaling() {
        let f = spike_field(8);
        let s = scale_field(&f, 1).unwrap();
        assert_eq!(s, f);
    }

    #[test]
    fn mass_preserved_under_scaling() {
        let g = LatticeGeometry::new(1, 16).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| ((i * 31) % 9) as f64 * 0.125).collect();
        let e = EnergyField::from_values(g, vals).unwrap();
        let f = ScaledField::from_energy(&e, 2).unwrap();
        let s = scale_field(&f, 2).unwrap();
        assert_eq!(s.scale(), 1);
        assert!((s.mass() - f.mass()).abs() < 1e-14 * f.mass().abs().max(1.0));
        assert!((s.l1_norm() - f.l1_norm()).abs() < 1e-14);
    }

    #[test]
    fn spike_stays_unit_mass_spike() {
        let f = spike_field(8);
        let s = scale_field(&f, 2).unwrap();
        assert!((s.values()[0] - 2.0).abs() < 1e-15);
        assert!((s.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indivisible_side() {
        let g = LatticeGeometry::new(1, 9).unwrap();
        let e = EnergyField::delta_spike(g, 0, 1.0).unwrap();
        let f = ScaledField::from_energy(&e, 2).unwrap();
        assert!(scale_field(&f, 2).is_err());
    }
}
