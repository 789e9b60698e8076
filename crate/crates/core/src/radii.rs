//! Critical radii of Werner and isotropic states for dichotomic measurements.
//!
//! A projective dichotomic measurement `(P, 1 - P)` with `rank P = r` steers
//! Bob into `span{P, 1}` (or `span{P^T, 1}`), so the radius for rank `r` is
//! the mixing parameter at which the conditional point leaves the moment
//! body `MomentBody(d, r)`. As `eta` varies the conditional point moves on a
//! straight line starting from the interior point `(r/d^2, r/d^2)`; the
//! radius is the exit parameter of that ray.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{MomentBody, PlanePoint};
use crate::roots::Bisection;
use crate::{lhs, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Werner,
    Isotropic,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Werner => "werner",
            FamilyKind::Isotropic => "isotropic",
        }
    }
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A one-parameter state family in local dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFamily {
    pub kind: FamilyKind,
    d: usize,
}

impl StateFamily {
    pub fn new(kind: FamilyKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
        }
        Ok(Self { kind, d })
    }

    pub fn werner(d: usize) -> Result<Self> {
        Self::new(FamilyKind::Werner, d)
    }

    pub fn isotropic(d: usize) -> Result<Self> {
        Self::new(FamilyKind::Isotropic, d)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest rank worth considering, `floor(d / 2)`.
    pub fn max_rank(&self) -> usize {
        self.d / 2
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.max_rank() {
            return Err(Error::OutOfRange(format!(
                "rank {r} not in [1, {}] for d = {}",
                self.max_rank(),
                self.d
            )));
        }
        Ok(())
    }
}

/// Radius for dichotomic measurements, minimised over projection rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRadiusResult {
    pub value: f64,
    pub achieving_rank: usize,
    pub per_rank: Vec<(usize, f64)>,
    pub solver_iterations: usize,
    pub residual: f64,
}

/// Separability and projective-measurement thresholds from the literature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceThresholds {
    pub separability: f64,
    pub projective: f64,
}

/// Diagnostics of a single-rank solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSolution {
    pub radius: f64,
    pub iterations: usize,
    /// Distance between the conditional point at the exit parameter and the
    /// boundary point found by the solver.
    pub residual: f64,
    pub threshold: f64,
}

/// Conditional state of a rank-`r` projection, in eigenvalue coordinates.
pub fn conditional_plane_point(family: StateFamily, r: usize, eta: f64) -> Result<PlanePoint> {
    family.check_rank(r)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfRange(format!(
            "mixing parameter {eta} not in [0, 1]"
        )));
    }
    Ok(plane_point_unchecked(family, r, eta))
}

fn plane_point_unchecked(family: StateFamily, r: usize, eta: f64) -> PlanePoint {
    let d = family.d as f64;
    let r = r as f64;
    let noise = r / (d * d);
    match family.kind {
        FamilyKind::Werner => PlanePoint::new(
            eta * (r - 1.0) / (d * (d - 1.0)) + (1.0 - eta) * noise,
            eta * r / (d * (d - 1.0)) + (1.0 - eta) * noise,
        ),
        FamilyKind::Isotropic => {
            PlanePoint::new(eta / d + (1.0 - eta) * noise, (1.0 - eta) * noise)
        }
    }
}

/// Solves for the rank-`r` radius with diagnostics.
pub fn solve_rank(family: StateFamily, r: usize) -> Result<RankSolution> {
    family.check_rank(r)?;
    let body = MomentBody::new(family.d, r)?;
    let start = plane_point_unchecked(family, r, 0.0);
    let end = plane_point_unchecked(family, r, 1.0);
    let direction = PlanePoint::new(end.u - start.u, end.v - start.v);
    let exit = body.ray_exit(start.u, direction)?;
    let radius = exit.step.min(1.0);
    let at = plane_point_unchecked(family, r, exit.step);
    let residual = if exit.step <= 1.0 {
        (at.u - exit.point.u).hypot(at.v - exit.point.v)
    } else {
        0.0
    };
    let p = plane_point_unchecked(family, r, radius);
    let inv_d = 1.0 / family.d as f64;
    if !body.contains(PlanePoint::new(inv_d - p.u, inv_d - p.v)) {
        return Err(Error::NoConvergence(format!(
            "complement effect outside the body at eta = {radius} (d = {}, r = {r})",
            family.d
        )));
    }
    Ok(RankSolution {
        radius,
        iterations: exit.iterations,
        residual,
        threshold: exit.threshold,
    })
}

/// `R_2^r`: largest `eta` at which rank-`r` dichotomic measurements cannot steer.
pub fn critical_radius_rank(family: StateFamily, r: usize) -> Result<f64> {
    solve_rank(family, r).map(|s| s.radius)
}

/// The same radius found by bisecting `eta` against the membership oracle.
///
/// Slower than [`critical_radius_rank`]; kept as an independent route.
pub fn critical_radius_rank_by_membership(family: StateFamily, r: usize, tol: f64) -> Result<f64> {
    family.check_rank(r)?;
    let body = MomentBody::new(family.d, r)?;
    let root = Bisection {
        abs_tol: tol,
        max_iter: 200,
    }
    .last_accepted(
        |eta| Ok(body.contains(plane_point_unchecked(family, r, eta))),
        0.0,
        1.0,
    )?;
    Ok(root.x)
}

/// `R_2 = min_r R_2^r` over `r = 1..floor(d/2)`.
pub fn critical_radius_dichotomic(family: StateFamily) -> Result<CriticalRadiusResult> {
    let mut per_rank = Vec::with_capacity(family.max_rank());
    let mut iterations = 0;
    let mut best: Option<(usize, RankSolution)> = None;
    for r in 1..=family.max_rank() {
        let s = solve_rank(family, r)?;
        iterations += s.iterations;
        per_rank.push((r, s.radius));
        if best.is_none_or(|(_, b)| s.radius < b.radius) {
            best = Some((r, s));
        }
    }
    let (achieving_rank, sol) = best.expect("d >= 2 has at least one rank");
    Ok(CriticalRadiusResult {
        value: sol.radius,
        achieving_rank,
        per_rank,
        solver_iterations: iterations,
        residual: sol.residual,
    })
}

/// Closed forms for `R_2` (attained at rank one).
pub fn closed_form_r2(family: StateFamily) -> f64 {
    let d = family.d as f64;
    match family.kind {
        // (d-1)^2 [1 - (1 - 1/d)^(1/(d-1))]
        FamilyKind::Werner => -(d - 1.0).powi(2) * ((-1.0 / d).ln_1p() / (d - 1.0)).exp_m1(),
        // 1 - d^(-1/(d-1))
        FamilyKind::Isotropic => -(-d.ln() / (d - 1.0)).exp_m1(),
    }
}

pub fn harmonic_number(d: usize) -> f64 {
    (1..=d).rev().map(|k| 1.0 / k as f64).sum()
}

pub fn reference_thresholds(family: StateFamily) -> ReferenceThresholds {
    let d = family.d as f64;
    let projective = match family.kind {
        FamilyKind::Werner => 1.0 - 1.0 / d,
        FamilyKind::Isotropic => (harmonic_number(family.d) - 1.0) / (d - 1.0),
    };
    ReferenceThresholds {
        separability: 1.0 / (d + 1.0),
        projective,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub strict: bool,
}

/// Orderings implied by nesting of measurement classes, checked numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub family: FamilyKind,
    pub d: usize,
    pub r2: f64,
    pub r2_closed_form: f64,
    pub r_pvm: f64,
    pub povm_lower_bound: Option<f64>,
    pub separability: f64,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
    pub ok: bool,
}

/// Slack for non-strict comparisons between radii.
pub const HIERARCHY_TOL: f64 = 1e-10;

fn compare(relation: &str, lhs: f64, rhs: f64) -> Comparison {
    Comparison {
        relation: relation.to_string(),
        lhs,
        rhs,
        holds: lhs >= rhs - HIERARCHY_TOL,
        strict: lhs > rhs + HIERARCHY_TOL,
    }
}

/// Checks `R_2 >= R_PVM` and, for Werner states, that the POVM lower bound
/// does not exceed `R_PVM` (it bounds `R_POVM <= R_PVM` from below).
pub fn hierarchy_check(family: StateFamily) -> Result<HierarchyReport> {
    let r2 = critical_radius_dichotomic(family)?.value;
    let refs = reference_thresholds(family);
    let mut comparisons = vec![compare("R2 >= R_PVM", r2, refs.projective)];
    let povm_lower_bound = match family.kind {
        FamilyKind::Werner => {
            let lb = lhs::povm_lower_bound_werner(family.d)?;
            comparisons.push(compare("R_PVM >= POVM lower bound", refs.projective, lb));
            Some(lb)
        }
        FamilyKind::Isotropic => None,
    };
    let mut notes = Vec::new();
    let strict = comparisons[0].strict;
    if family.d == 2 && !strict {
        notes.push("d = 2: R2 = R_PVM, the hierarchy collapses".to_string());
    }
    if family.d == 3 && strict {
        notes.push(
            "d = 3: projective measurements have 3 outcomes, so R_PVM >= R_3 and R2 > R_PVM gives R2 > R_3"
                .to_string(),
        );
    }
    let ok = comparisons.iter().all(|c| c.holds);
    Ok(HierarchyReport {
        family: family.kind,
        d: family.d,
        r2,
        r2_closed_form: closed_form_r2(family),
        r_pvm: refs.projective,
        povm_lower_bound,
        separability: refs.separability,
        comparisons,
        notes,
        ok,
    })
}

/// Per-rank radii and their argmin for one `(family, d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub family: FamilyKind,
    pub d: usize,
    pub per_rank: Vec<(usize, f64)>,
    pub argmin: usize,
}

/// Rank scan over `d_min..=d_max`, in parallel over `d`, returned in `d` order.
pub fn rank_scan(kind: FamilyKind, d_min: usize, d_max: usize) -> Result<Vec<ScanRow>> {
    (d_min.max(2)..=d_max)
        .into_par_iter()
        .map(|d| {
            let res = critical_radius_dichotomic(StateFamily::new(kind, d)?)?;
            Ok(ScanRow {
                family: kind,
                d,
                per_rank: res.per_rank,
                argmin: res.achieving_rank,
            })
        })
        .collect()
}
