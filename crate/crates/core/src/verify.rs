//! The invariant suite behind `steering verify`.
//!
//! Every check records the measured residual (or violation count) next to
//! the tolerance it is held to, so the JSON report is auditable.

use serde::{Deserialize, Serialize};

use crate::capacity::{reg_inc_beta, MomentBody, PlanePoint};
use crate::lhs::{povm_lower_bound_werner, realized_eta_for_dim, Method, ResponseModel};
use crate::qops::{
    canonical_povm, haar_state_sample, haar_unitary, isotropic_state, kron, max_abs,
    random_density_matrix, random_povm_effects, werner_state, BipartiteState, CMatrix, Projection,
    RandomStream,
};
use crate::radii::{
    closed_form_r2, critical_radius_rank, hierarchy_check, rank_scan, reference_thresholds,
    FamilyKind, StateFamily,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Sample count for the Monte-Carlo and randomised checks.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn at_most(&mut self, module: &str, name: &str, measured: f64, tolerance: f64) {
        self.checks.push(Check {
            module: module.into(),
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
        });
    }

    fn violations(&mut self, module: &str, name: &str, count: usize) {
        self.at_most(module, name, count as f64, 0.0);
    }
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.samples < 100 {
        return Err(Error::OutOfRange(format!(
            "need at least 100 samples, got {}",
            config.samples
        )));
    }
    let root = RandomStream::new(config.seed);
    let mut suite = Suite { checks: Vec::new() };
    qops_checks(&mut suite, config.samples, root.split(0))?;
    capacity_checks(&mut suite, config.samples, root.split(1))?;
    radii_checks(&mut suite)?;
    lhs_checks(&mut suite, config.samples, root.split(2))?;
    let passed = suite.checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        seed: config.seed,
        samples: config.samples,
        checks: suite.checks,
        passed,
    })
}

fn ks_beta(xs: &mut [f64], a: f64, b: f64) -> Result<f64> {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = reg_inc_beta(x.clamp(0.0, 1.0), a, b)?;
        worst = worst.max((f - i as f64 / n).max((i + 1) as f64 / n - f));
    }
    Ok(worst)
}

fn qops_checks(s: &mut Suite, samples: usize, mut rng: RandomStream) -> Result<()> {
    let mut marg: f64 = 0.0;
    let mut cov: f64 = 0.0;
    for d in 2..=5 {
        let id = CMatrix::identity(d, d).scale(1.0 / d as f64);
        for eta in [0.0, 0.37, 1.0] {
            let w = werner_state(d, eta)?;
            let iso = isotropic_state(d, eta)?;
            for st in [&w, &iso] {
                marg = marg.max(max_abs(&(st.reduced_a().matrix() - &id)));
                marg = marg.max(max_abs(&(st.reduced_b().matrix() - &id)));
            }
            let u = haar_unitary(d, &mut rng);
            let uu = kron(&u, &u);
            let uc = kron(&u, &u.map(|z| z.conj()));
            cov = cov.max(max_abs(&(&uu * w.matrix() * uu.adjoint() - w.matrix())));
            cov = cov.max(max_abs(&(&uc * iso.matrix() * uc.adjoint() - iso.matrix())));
        }
    }
    s.at_most("qops", "family marginals are maximally mixed", marg, 1e-12);
    s.at_most("qops", "unitary covariance of both families", cov, 1e-10);

    let mut lin: f64 = 0.0;
    let mut weights: f64 = 0.0;
    for _ in 0..20 {
        let rho = BipartiteState::from_density(3, 2, random_density_matrix(6, &mut rng))?;
        let pair = random_povm_effects(3, 2, &mut rng)?;
        let sum = rho.conditional_state(&pair[0])?.into_matrix()
            + rho.conditional_state(&pair[1])?.matrix();
        lin = lin.max(max_abs(&(sum - rho.reduced_b().matrix())));
        let povm = canonical_povm(&random_povm_effects(3, 3, &mut rng)?)?;
        weights = weights.max((povm.weights().iter().sum::<f64>() - 3.0).abs());
    }
    s.at_most(
        "qops",
        "conditional states are linear in the effect",
        lin,
        1e-12,
    );
    s.at_most("qops", "canonical POVM weights sum to d", weights, 1e-12);

    let ks_tol = (1.95 / (samples as f64).sqrt()).max(0.01);
    for (d, r) in [(2, 1), (4, 2)] {
        let u = haar_unitary(d, &mut rng);
        let p = Projection::from_orthonormal_columns(&u.columns(0, r).into_owned())?;
        let mut t: Vec<f64> = (0..samples)
            .map(|_| {
                let l = haar_state_sample(d, &mut rng);
                (l.adjoint() * p.matrix() * &l)[(0, 0)].re
            })
            .collect();
        let ks = ks_beta(&mut t, r as f64, (d - r) as f64)?;
        s.at_most(
            "qops",
            &format!("Haar overlap law Beta({r},{}) KS statistic, d={d}", d - r),
            ks,
            ks_tol,
        );
    }
    Ok(())
}

fn capacity_checks(s: &mut Suite, samples: usize, mut rng: RandomStream) -> Result<()> {
    let spot = (reg_inc_beta(0.3, 1.0, 4.0)? - (1.0 - 0.7f64.powi(4))).abs()
        + (reg_inc_beta(0.5, 1.0, 1.0)? - 0.5).abs()
        + (reg_inc_beta(0.5, 40.0, 40.0)? - 0.5).abs();
    s.at_most("capacity", "incomplete beta spot values", spot, 1e-12);

    let (mut sym, mut dual, mut convex, mut boundary) = (0, 0, 0, 0);
    let trials = 200;
    for _ in 0..trials {
        let d = 2 + (rng.uniform() * 10.0) as usize;
        let r = 1 + (rng.uniform() * (d - 1) as f64) as usize;
        let body = MomentBody::new(d, r)?;
        let k = 1.0 / d as f64;
        let member = |rng: &mut RandomStream| -> Result<PlanePoint> {
            let u = rng.uniform() * k;
            let (lo, hi) = body.v_range(u)?;
            Ok(PlanePoint::new(u, lo + rng.uniform() * (hi - lo)))
        };
        let p = member(&mut rng)?;
        let q = member(&mut rng)?;
        if !body.contains(PlanePoint::new(k - p.u, k - p.v)) {
            sym += 1;
        }
        if !MomentBody::new(d, d - r)?.contains(PlanePoint::new(p.v, p.u)) {
            dual += 1;
        }
        let xi = rng.uniform();
        if !body.contains(PlanePoint::new(
            xi * p.u + (1.0 - xi) * q.u,
            xi * p.v + (1.0 - xi) * q.v,
        )) {
            convex += 1;
        }
        let c = 0.01 + 0.98 * rng.uniform();
        let b = body.threshold_point_lower(c)?;
        if !body.contains(b) || body.contains(PlanePoint::new(b.u, b.v + 1e-6)) {
            boundary += 1;
        }
    }
    s.violations("capacity", "complement symmetry", sym);
    s.violations("capacity", "rank-complement duality", dual);
    s.violations("capacity", "convexity", convex);
    s.violations(
        "capacity",
        "lower threshold points lie on the boundary",
        boundary,
    );

    let mut worst: f64 = 0.0;
    for (d, r) in [(3, 1), (4, 2)] {
        let body = MomentBody::new(d, r)?;
        let c = r as f64 / d as f64;
        let p = body.threshold_point_lower(c)?;
        let (mut su, mut squ, mut sv, mut sqv) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..samples {
            let l = haar_state_sample(d, &mut rng);
            let t: f64 = l.iter().take(r).map(|z| z.norm_sqr()).sum();
            if t <= c {
                let (u, v) = (t / r as f64, (1.0 - t) / (d - r) as f64);
                su += u;
                squ += u * u;
                sv += v;
                sqv += v * v;
            }
        }
        let n = samples as f64;
        for (sum, sq, exact) in [(su, squ, p.u), (sv, sqv, p.v)] {
            let mean = sum / n;
            let se = ((sq / n - mean * mean) / (n - 1.0)).sqrt();
            worst = worst.max((mean - exact).abs() / se);
        }
    }
    s.at_most(
        "capacity",
        "threshold points vs Haar Monte Carlo (sigmas)",
        worst,
        3.0,
    );
    Ok(())
}

fn radii_checks(s: &mut Suite) -> Result<()> {
    let kinds = [FamilyKind::Werner, FamilyKind::Isotropic];
    let mut dev: f64 = 0.0;
    let mut strict = 0;
    let mut collapse: f64 = 0.0;
    for kind in kinds {
        for d in 2..=50 {
            let f = StateFamily::new(kind, d)?;
            dev = dev.max((critical_radius_rank(f, 1)? - closed_form_r2(f)).abs());
        }
        for d in 3..=100 {
            let f = StateFamily::new(kind, d)?;
            if closed_form_r2(f) <= reference_thresholds(f).projective {
                strict += 1;
            }
        }
        let f = StateFamily::new(kind, 2)?;
        collapse = collapse.max((closed_form_r2(f) - reference_thresholds(f).projective).abs());
    }
    s.at_most("radii", "solver vs closed form, d = 2..50", dev, 1e-8);
    s.violations("radii", "R2 > R_PVM for 3 <= d <= 100", strict);
    s.at_most("radii", "R2 = R_PVM at d = 2", collapse, 1e-12);

    let mut argmin = 0;
    for kind in kinds {
        argmin += rank_scan(kind, 2, 100)?
            .iter()
            .filter(|r| r.argmin != 1)
            .count();
    }
    s.violations("radii", "rank 1 minimal for d <= 100", argmin);
    let mut hier = 0;
    for d in 2..=100 {
        if !hierarchy_check(StateFamily::werner(d)?)?.ok {
            hier += 1;
        }
    }
    s.violations("radii", "Werner hierarchy, d = 2..100", hier);
    Ok(())
}

fn lhs_checks(s: &mut Suite, samples: usize, mut rng: RandomStream) -> Result<()> {
    let mut norm: f64 = 0.0;
    let mut range = 0;
    let per_model = 50;
    for i in 0..samples.div_ceil(per_model).min(200) {
        let d = 2 + i % 3;
        let povm = canonical_povm(&random_povm_effects(d, 2 + i % 3, &mut rng)?)?;
        let model = ResponseModel::new(povm)?;
        for _ in 0..per_model {
            let g = model.response(&haar_state_sample(d, &mut rng))?;
            norm = norm.max((g.iter().sum::<f64>() - 1.0).abs());
            range += g.iter().filter(|x| !(0.0..=1.0).contains(*x)).count();
        }
    }
    s.at_most("lhs", "response normalisation", norm, 1e-12);
    s.violations("lhs", "response range [0, 1]", range);

    let mut eta: f64 = 0.0;
    for d in 2..=20 {
        eta = eta.max((realized_eta_for_dim(d)? - povm_lower_bound_werner(d)?).abs());
    }
    s.at_most(
        "lhs",
        "realised mixing parameter vs closed form, d = 2..20",
        eta,
        1e-10,
    );

    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let model = ResponseModel::new(canonical_povm(&random_povm_effects(d, 3, &mut rng)?)?)?;
        let w = werner_state(d, povm_lower_bound_werner(d)?)?;
        let rec = model.reconstruct_assemblage(&Method::MonteCarlo {
            samples,
            stream: rng.split(d as u64),
        })?;
        let errs = rec.std_errors.as_ref().expect("Monte Carlo reports errors");
        for (a, (got, (se_re, se_im))) in rec.operators.iter().zip(errs).enumerate() {
            let want = w.conditional_state(&model.povm().effect(a))?;
            let diff = got - want.matrix();
            for (i, z) in diff.iter().enumerate() {
                for (dev, se) in [(z.re.abs(), se_re[i]), (z.im.abs(), se_im[i])] {
                    if dev > 1e-13 {
                        worst = worst.max(dev / se);
                    }
                }
            }
        }
    }
    s.at_most(
        "lhs",
        "Monte-Carlo assemblage vs Werner conditionals (sigmas)",
        worst,
        5.0,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_serialises() {
        let report = run(&VerifyConfig {
            seed: 1,
            samples: 20_000,
        })
        .unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.passed);
        for module in ["qops", "capacity", "radii", "lhs"] {
            assert!(report.checks.iter().any(|c| c.module == module));
        }
        assert!(run(&VerifyConfig {
            seed: 1,
            samples: 10
        })
        .is_err());
    }
}
