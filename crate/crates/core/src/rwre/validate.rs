//! Runtime validators for the six model assumptions: positivity,
//! conservation, statistical symmetry, locality, spectral gap of the
//! annealed kernel, and weak randomness. Each failed check is a named
//! diagnostic, never a crash.

use crate::lattice::{step_energy_raw, CurrentModel, LocalChaoticMap, ThetaField};
use crate::lattice::{EnergyField, LatticeGeometry};
use crate::norms::{weighted_kernel_norm_simplified, CellEntry, WeightMode};
use crate::rwre::annealed_kernel;
use crate::rwre::linearize::slice_from_theta;
use crate::srb::SrbSampler;
use crate::util::stats::Running;
use crate::util::NeumaierSum;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub statistic: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of the failed checks.
    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub n_samples: usize,
    /// Threshold, in standard errors, for the symmetry two-sample test.
    pub symmetry_sigmas: f64,
    /// Relative step for finite-difference derivative probes.
    pub fd_step: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            n_samples: 200,
            symmetry_sigmas: 4.0,
            fd_step: 1e-6,
        }
    }
}

/// Run all six checks against the model driven by the given chaotic map.
pub fn validate_assumptions(
    model: &CurrentModel,
    map: &LocalChaoticMap,
    geometry: LatticeGeometry,
    master_seed: u64,
    cfg: &ValidationConfig,
) -> AssumptionReport {
    let sampler = SrbSampler::new(*map, geometry, master_seed);
    let checks = vec![
        check_positivity(model, &sampler),
        check_conservation(model, &sampler),
        check_symmetry(model, &sampler, cfg),
        check_locality(model, &sampler, cfg),
        check_spectral_gap(model, map, &sampler, cfg),
        check_weak_randomness(model, &sampler, cfg),
    ];
    AssumptionReport { checks }
}

fn random_admissible_energy(g: LatticeGeometry, seed: u64) -> EnergyField {
    let mut rng = crate::util::derive_rng(seed, crate::util::rng::StreamRole::ProfileInit, 0);
    let vals: Vec<f64> = (0..g.sites()).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
    EnergyField::from_values(g, vals).expect("uniform draws are admissible")
}

/// (i) Positivity: one raw step on random admissible fields plus the
/// adversarial witness (delta spike, constant theta aligning the noise).
fn check_positivity(model: &CurrentModel, sampler: &SrbSampler) -> AssumptionCheck {
    let g = sampler.geometry;
    let mut min_seen = f64::INFINITY;
    let mut witness = String::new();

    for rep in 0..8u64 {
        let theta = sampler.sample(rep);
        let e = random_admissible_energy(g, 1000 + rep);
        let out = step_energy_raw(e.values(), &theta, model, &g);
        let m = out.iter().copied().fold(f64::INFINITY, f64::min);
        if m < min_seen {
            min_seen = m;
            witness = format!("random field, replica {rep}");
        }
    }

    // Constructed counterexample: spike with constant theta maximizes the
    // aligned outflow sum_n (a + eps' w).
    let spike = EnergyField::delta_spike(g, 0, 1.0).unwrap();
    let theta_const =
        ThetaField::constant(g, sampler.map.components(), 0.0).unwrap();
    let out = step_energy_raw(spike.values(), &theta_const, model, &g);
    let m = out.iter().copied().fold(f64::INFINITY, f64::min);
    if m < min_seen {
        min_seen = m;
        witness = "delta spike with constant theta".into();
    }

    AssumptionCheck {
        name: "positivity",
        passed: min_seen >= 0.0,
        statistic: min_seen,
        detail: if min_seen >= 0.0 {
            "min output energy nonnegative on all probes".into()
        } else {
            format!("negative output {min_seen:.3e} ({witness})")
        },
    }
}

/// (ii) Conservation: per-step mass drift within 8 ulp of the total.
fn check_conservation(model: &CurrentModel, sampler: &SrbSampler) -> AssumptionCheck {
    let g = sampler.geometry;
    let mut worst = 0.0f64;
    for rep in 0..8u64 {
        let theta = sampler.sample(rep);
        let e = random_admissible_energy(g, 2000 + rep);
        let out = step_energy_raw(e.values(), &theta, model, &g);
        let mut acc = NeumaierSum::new();
        for v in &out {
            acc.add(*v);
        }
        let m0 = e.total_mass();
        let drift = (acc.total() - m0).abs() / m0;
        worst = worst.max(drift);
    }
    let bound = 8.0 * f64::EPSILON;
    AssumptionCheck {
        name: "conservation",
        passed: worst <= bound,
        statistic: worst,
        detail: format!("max relative per-step mass drift {worst:.3e} (bound {bound:.3e})"),
    }
}

/// (iii) Symmetry: the directed stencil coefficients must share their law
/// across the point-group orbit. Compares means and variances pooled over
/// sites, per replica, at the configured sigma threshold.
fn check_symmetry(
    model: &CurrentModel,
    sampler: &SrbSampler,
    cfg: &ValidationConfig,
) -> AssumptionCheck {
    let g = sampler.geometry;
    let d = g.dim();
    let sites = g.sites();
    let n_dirs = 2 * d;
    let mut mean_stats: Vec<Running> = vec![Running::new(); n_dirs];
    let mut var_stats: Vec<Running> = vec![Running::new(); n_dirs];

    for rep in 0..cfg.n_samples as u64 {
        let theta = sampler.sample(rep);
        let slice = slice_from_theta(&theta, model);
        for dir in 0..n_dirs {
            let mut per_site = Running::new();
            for y in 0..sites {
                per_site.push(slice.moves[dir][y]);
            }
            mean_stats[dir].push(per_site.mean());
            var_stats[dir].push(if sites > 1 { per_site.variance() } else { 0.0 });
        }
    }

    let mut max_dev = 0.0f64;
    let mut detail = String::from("orbit-consistent within threshold");
    for stats in [&mean_stats, &var_stats] {
        for i in 0..n_dirs {
            for j in (i + 1)..n_dirs {
                let se = (stats[i].stderr().powi(2) + stats[j].stderr().powi(2)).sqrt();
                let diff = (stats[i].mean() - stats[j].mean()).abs();
                let dev = if se > 0.0 {
                    diff / se
                } else if diff > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                if dev > max_dev {
                    max_dev = dev;
                    let kind = if std::ptr::eq(stats, &mean_stats) {
                        "mean"
                    } else {
                        "variance"
                    };
                    detail = format!(
                        "largest orbit deviation: {kind} of directions {i} vs {j}, {dev:.2} sigma"
                    );
                }
            }
        }
    }

    AssumptionCheck {
        name: "symmetry",
        passed: max_dev <= cfg.symmetry_sigmas,
        statistic: max_dev,
        detail,
    }
}

/// (iv) Locality: finite-difference derivatives of the one-step map vanish
/// beyond range 1 and are bounded by a + eps' within it.
fn check_locality(
    model: &CurrentModel,
    sampler: &SrbSampler,
    cfg: &ValidationConfig,
) -> AssumptionCheck {
    let g = sampler.geometry;
    let sites = g.sites();
    let theta = sampler.sample(0);
    let base = random_admissible_energy(g, 3000);
    let h = cfg.fd_step;

    let mut beyond_range = 0.0f64;
    let mut within_range = 0.0f64;
    let probes: Vec<usize> = (0..sites).step_by((sites / 8).max(1)).collect();
    for &y in &probes {
        let mut up = base.values().to_vec();
        up[y] += h;
        let up_out = step_energy_raw(&up, &theta, model, &g);
        let mut dn = base.values().to_vec();
        dn[y] -= h.min(dn[y] * 0.5);
        let dn_step = base.values()[y] - dn[y];
        let dn_out = step_energy_raw(&dn, &theta, model, &g);
        for x in 0..sites {
            let deriv = (up_out[x] - dn_out[x]) / (h + dn_step);
            let c = g.coords(x);
            let cy = g.coords(y);
            let dist: i64 = (0..g.dim())
                .map(|a| g.centered(c[a] - cy[a]).abs())
                .sum();
            if dist >= 2 {
                beyond_range = beyond_range.max(deriv.abs());
            } else if x != y {
                within_range = within_range.max(deriv.abs());
            }
        }
    }

    let bound = model.hopping_rate + model.noise_amplitude + 1e-9;
    let passed = beyond_range <= 1e-9 && within_range <= bound;
    AssumptionCheck {
        name: "locality",
        passed,
        statistic: beyond_range,
        detail: format!(
            "max |dE'(x)/dE(y)|: {beyond_range:.3e} beyond range 1, {within_range:.4} within (bound {bound:.4})"
        ),
    }
}

/// (v) Spectral gap: max over nonzero dual-grid k of |T-hat(k)| < 1 for the
/// annealed kernel.
fn check_spectral_gap(
    model: &CurrentModel,
    map: &LocalChaoticMap,
    sampler: &SrbSampler,
    cfg: &ValidationConfig,
) -> AssumptionCheck {
    let est = match annealed_kernel(model, map, sampler, cfg.n_samples.max(8)) {
        Ok(e) => e,
        Err(e) => {
            return AssumptionCheck {
                name: "spectral_gap",
                passed: false,
                statistic: f64::NAN,
                detail: format!("annealed kernel estimation failed: {e}"),
            }
        }
    };
    let max_mod = match est.kernel.max_offzero_fourier_modulus(&sampler.geometry) {
        Ok(m) => m,
        Err(e) => {
            return AssumptionCheck {
                name: "spectral_gap",
                passed: false,
                statistic: f64::NAN,
                detail: format!("{e}"),
            }
        }
    };
    AssumptionCheck {
        name: "spectral_gap",
        passed: max_mod < 1.0 - 1e-12,
        statistic: max_mod,
        detail: format!("max nonzero-mode |T-hat| = {max_mod:.6}"),
    }
}

/// (vi) Weak randomness: eps = sup_t ||delta_t|| in the simplified weighted
/// cell norm (lambda = 0), compared against the total mean hopping mass
/// 2 d a (fluctuations must stay subordinate to the mean transport).
fn check_weak_randomness(
    model: &CurrentModel,
    sampler: &SrbSampler,
    cfg: &ValidationConfig,
) -> AssumptionCheck {
    let g = sampler.geometry;
    let d = g.dim();
    let est = match annealed_kernel(model, &sampler.map, sampler, cfg.n_samples.max(8)) {
        Ok(e) => e,
        Err(e) => {
            return AssumptionCheck {
                name: "weak_randomness",
                passed: false,
                statistic: f64::NAN,
                detail: format!("annealed kernel estimation failed: {e}"),
            }
        }
    };
    let kernel = est.kernel;

    let zero = vec![0i64; d];
    let mut eps_hat = 0.0f64;
    let probe_slices = 8usize.min(cfg.n_samples.max(1));
    for rep in 0..probe_slices as u64 {
        let theta = sampler.sample(500_000 + rep);
        let slice = slice_from_theta(&theta, model);
        let mut entries = Vec::new();
        for y in 0..g.sites() {
            let cy = g.coords(y);
            let vy: Vec<i64> = cy[..d].to_vec();
            entries.push(CellEntry {
                u: vy.clone(),
                v: vy.clone(),
                value: slice.stay[y] - kernel.value(&zero),
            });
            for axis in 0..d {
                for (dir, &fwd) in [true, false].iter().enumerate() {
                    let n = g.neighbor(y, axis, fwd);
                    let cn = g.coords(n);
                    let mut unit = vec![0i64; d];
                    unit[axis] = if fwd { 1 } else { -1 };
                    entries.push(CellEntry {
                        u: cn[..d].to_vec(),
                        v: vy.clone(),
                        value: slice.moves[2 * axis + dir][y] - kernel.value(&unit),
                    });
                }
            }
        }
        let norm = weighted_kernel_norm_simplified(&entries, 0.0, WeightMode::TwoPointL1);
        eps_hat = eps_hat.max(norm);
    }

    let budget = 2.0 * d as f64 * model.hopping_rate;
    AssumptionCheck {
        name: "weak_randomness",
        passed: eps_hat <= budget + 1e-15,
        statistic: eps_hat,
        detail: format!("eps-hat = {eps_hat:.4} vs mean transport mass {budget:.4}"),
    }
}
