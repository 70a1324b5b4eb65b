//! Translation-invariant probability kernels on Z^d with finite support.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::util::fft::GridFft;
use rustfft::num_complex::Complex64;
use std::collections::BTreeMap;

/// Translation-invariant kernel T(u) on a finite stencil, normalized to
/// total mass 1. Entries are kept sorted for deterministic iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationKernel {
    d: usize,
    entries: Vec<(Vec<i64>, f64)>,
}

impl TranslationKernel {
    /// Symmetric nearest-neighbor hopping: T(0) = 1 - 2da, T(+-e_mu) = a.
    pub fn hopping(d: usize, a: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&(a * 2.0 * d as f64)) {
            return Err(Error::InvalidParameter(format!(
                "hopping rate {a} outside [0, 1/(2d)] for d = {d}"
            )));
        }
        let mut entries = vec![(vec![0i64; d], 1.0 - 2.0 * d as f64 * a)];
        for axis in 0..d {
            for sign in [-1i64, 1] {
                let mut u = vec![0i64; d];
                u[axis] = sign;
                entries.push((u, a));
            }
        }
        Self::from_entries(d, entries)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d,
            entries: vec![(vec![0; d], 1.0)],
        }
    }

    /// Build from explicit entries; validates nonnegativity, normalization
    /// (within 1e-12, then renormalizes exactly), and point-group symmetry.
    pub fn from_entries(d: usize, entries: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        let kernel = Self::assemble(d, entries, true)?;
        Ok(kernel)
    }

    /// Build from possibly asymmetric entries without the symmetry check
    /// (the assumption validators need to represent broken kernels).
    pub fn from_entries_unsymmetric(d: usize, entries: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        Self::assemble(d, entries, false)
    }

    fn assemble(
        d: usize,
        entries: Vec<(Vec<i64>, f64)>,
        check_symmetry: bool,
    ) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::InvalidParameter(format!("bad dimension {d}")));
        }
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (u, w) in entries {
            if u.len() != d {
                return Err(Error::GeometryMismatch(format!(
                    "offset {u:?} has wrong dimension, expected {d}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "kernel weight at {u:?} must be finite and >= 0, got {w}"
                )));
            }
            *map.entry(u).or_insert(0.0) += w;
        }
        map.retain(|_, w| *w != 0.0);
        if map.is_empty() {
            return Err(Error::InvalidParameter("kernel has no support".into()));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "kernel mass {total} deviates from 1 beyond 1e-12"
            )));
        }
        for w in map.values_mut() {
            *w /= total;
        }
        let kernel = Self {
            d,
            entries: map.into_iter().collect(),
        };
        if check_symmetry {
            kernel.check_point_group_symmetry()?;
        }
        Ok(kernel)
    }

    /// Average raw entries over the lattice point group (axis sign flips
    /// and permutations), then normalize. Returns the kernel together with
    /// the largest symmetrization correction applied to any entry.
    pub fn symmetrized_from_samples(
        d: usize,
        entries: Vec<(Vec<i64>, f64)>,
    ) -> Result<(Self, f64)> {
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (u, w) in entries {
            *map.entry(u).or_insert(0.0) += w;
        }
        let mut sym: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        let mut max_correction = 0.0f64;
        for (u, &w) in &map {
            let orbit = point_group_orbit(u);
            let mean: f64 =
                orbit.iter().map(|v| map.get(v).copied().unwrap_or(0.0)).sum::<f64>()
                    / orbit.len() as f64;
            max_correction = max_correction.max((w - mean).abs());
            sym.insert(u.clone(), mean);
            for v in orbit {
                sym.insert(v, mean);
            }
        }
        let total: f64 = sym.values().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("sampled kernel has no mass".into()));
        }
        let entries: Vec<(Vec<i64>, f64)> = sym
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(u, w)| (u, w / total))
            .collect();
        let kernel = Self { d, entries };
        kernel.check_point_group_symmetry()?;
        Ok((kernel, max_correction))
    }

    fn check_point_group_symmetry(&self) -> Result<()> {
        for (u, w) in &self.entries {
            for v in point_group_orbit(u) {
                let wv = self.value(&v);
                if (wv - w).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "kernel not point-group symmetric: T({u:?}) = {w}, T({v:?}) = {wv}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[(Vec<i64>, f64)] {
        &self.entries
    }

    pub fn value(&self, u: &[i64]) -> f64 {
        self.entries
            .binary_search_by(|(v, _)| v.as_slice().cmp(u))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn support_radius(&self) -> i64 {
        self.entries
            .iter()
            .flat_map(|(u, _)| u.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Full second moment sum_u |u|^2 T(u).
    pub fn second_moment(&self) -> f64 {
        self.entries
            .iter()
            .map(|(u, w)| {
                let r2: i64 = u.iter().map(|c| c * c).sum();
                r2 as f64 * w
            })
            .sum()
    }

    /// Characteristic function T-hat(k) = sum_u T(u) e^{-i k.u}.
    pub fn fourier_at(&self, k: &[f64]) -> Complex64 {
        debug_assert_eq!(k.len(), self.d);
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, w) in &self.entries {
            let phase: f64 = k.iter().zip(u).map(|(ki, &ui)| ki * ui as f64).sum();
            acc += Complex64::new(phase.cos(), -phase.sin()) * *w;
        }
        acc
    }

    /// Kernel as a periodic field on the torus, centered at site 0.
    /// Offsets whose wrapped positions collide accumulate.
    pub fn dense_on(&self, geometry: &LatticeGeometry) -> Result<Vec<f64>> {
        if geometry.dim() != self.d {
            return Err(Error::GeometryMismatch(format!(
                "kernel dimension {} vs lattice {}",
                self.d,
                geometry.dim()
            )));
        }
        let mut out = vec![0.0; geometry.sites()];
        for (u, w) in &self.entries {
            out[geometry.index(u)] += w;
        }
        Ok(out)
    }

    /// max over nonzero dual-grid wavenumbers of |T-hat(k)|.
    pub fn max_offzero_fourier_modulus(&self, geometry: &LatticeGeometry) -> Result<f64> {
        let dense = self.dense_on(geometry)?;
        let fft = GridFft::new(geometry.dim(), geometry.side());
        let spec = fft.forward_real(&dense);
        Ok(spec
            .iter()
            .skip(1)
            .map(|c| c.norm())
            .fold(0.0, f64::max))
    }

    /// t-fold convolution power as a periodic field (Fourier exponentiation).
    pub fn power_profile(&self, geometry: &LatticeGeometry, t: usize) -> Result<Vec<f64>> {
        let dense = self.dense_on(geometry)?;
        let fft = GridFft::new(geometry.dim(), geometry.side());
        let mut spec = fft.forward_real(&dense);
        for c in spec.iter_mut() {
            *c = c.powu(t as u32);
        }
        Ok(fft.inverse_to_real(spec))
    }
}

/// Orbit of an offset under axis sign flips and axis permutations
/// (the given point excluded).
pub fn point_group_orbit(u: &[i64]) -> Vec<Vec<i64>> {
    let d = u.len();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    permutations(&mut idx, 0, &mut perms);
    let mut orbit = Vec::new();
    for p in &perms {
        for signs in 0..(1u32 << d) {
            let v: Vec<i64> = (0..d)
                .map(|i| {
                    let c = u[p[i]];
                    if signs >> i & 1 == 1 {
                        -c
                    } else {
                        c
                    }
                })
                .collect();
            if v != u && !orbit.contains(&v) {
                orbit.push(v);
            }
        }
    }
    orbit
}

fn permutations(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permutations(idx, k + 1, out);
        idx.swap(k, i);
    }
}
