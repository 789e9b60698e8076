//! Steerability criteria for general bipartite states: local filtering on
//! Bob's side, the channel-degradation lower bound and the twirling upper
//! bound.

mod sdp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::qops::{
    eigh, hermitian_function, hermitian_part, kron, max_abs, max_entangled_projector,
    swap_operator, trace_norm, trace_product, BipartiteState, CMatrix,
};
use crate::roots::Bisection;
use crate::{Error, Result, C64};

use sdp::{AffineSpace, Barrier, Feasibility, HermitianBasis};

const CHOI_TOL: f64 = 1e-9;
const MARGINAL_TOL: f64 = 1e-8;
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Choi matrix `sum_ij |i><j| (x) E(|i><j|)` of a CPTP map, input first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelChoi {
    dim_in: usize,
    dim_out: usize,
    matrix: CMatrix,
}

impl ChannelChoi {
    pub fn new(dim_in: usize, dim_out: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim_in * dim_out;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let skew = max_abs(&(&matrix - matrix.adjoint()));
        if skew > CHOI_TOL {
            return Err(Error::NotHermitian(skew));
        }
        let matrix = hermitian_part(&matrix);
        let min = eigh(&matrix).0[0];
        if min < -CHOI_TOL {
            return Err(Error::NotPositive(min));
        }
        let choi = Self {
            dim_in,
            dim_out,
            matrix,
        };
        let dev = max_abs(&(choi.output_trace() - CMatrix::identity(dim_in, dim_in)));
        if dev > CHOI_TOL {
            return Err(Error::Completeness(dev));
        }
        Ok(choi)
    }

    pub fn identity(d: usize) -> Self {
        let mut m = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
            }
        }
        Self {
            dim_in: d,
            dim_out: d,
            matrix: m,
        }
    }

    /// The channel `X -> Tr(X) 1/d_out`.
    pub fn completely_depolarizing(dim_in: usize, dim_out: usize) -> Self {
        let n = dim_in * dim_out;
        Self {
            dim_in,
            dim_out,
            matrix: CMatrix::identity(n, n).scale(1.0 / dim_out as f64),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix).0[0]
    }

    /// `Tr_out C`.
    pub fn output_trace(&self) -> CMatrix {
        output_trace(&self.matrix, self.dim_in, self.dim_out)
    }

    /// `(E (x) id)[tau]` as a raw matrix.
    pub fn apply_to_a(&self, tau: &BipartiteState) -> Result<CMatrix> {
        if tau.dim_a() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: tau.dim_a(),
            });
        }
        Ok(apply_choi(&self.matrix, self.dim_in, self.dim_out, tau))
    }
}

fn output_trace(c: &CMatrix, din: usize, dout: usize) -> CMatrix {
    CMatrix::from_fn(din, din, |i, j| {
        (0..dout).map(|a| c[(i * dout + a, j * dout + a)]).sum()
    })
}

fn apply_choi(c: &CMatrix, din: usize, dout: usize, tau: &BipartiteState) -> CMatrix {
    let db = tau.dim_b();
    let t = tau.matrix();
    let mut out = CMatrix::zeros(dout * db, dout * db);
    for i in 0..din {
        for j in 0..din {
            for k in 0..db {
                for l in 0..db {
                    let x = t[(i * db + k, j * db + l)];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..dout {
                        for b in 0..dout {
                            out[(a * db + k, b * db + l)] += c[(i * dout + a, j * dout + b)] * x;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `(1 (x) K) rho (1 (x) K^dagger)` with `K = (d_B rho_B)^(-1/2)`, which
/// leaves Bob's marginal maximally mixed.
pub fn normalize_bob_marginal(rho: &BipartiteState) -> Result<BipartiteState> {
    let rb = rho.reduced_b();
    let (vals, _) = eigh(rb.matrix());
    if vals[0] <= 1e-9 {
        return Err(Error::RankDeficient(vals[0]));
    }
    let db = rho.dim_b() as f64;
    let k = hermitian_function(&rb.matrix().scale(db), |x| 1.0 / x.sqrt());
    let full = kron(&CMatrix::identity(rho.dim_a(), rho.dim_a()), &k);
    let out = &full * rho.matrix() * &full;
    let tr: C64 = out.trace();
    BipartiteState::new(rho.dim_a(), rho.dim_b(), out.unscale(tr.re))
}

fn bob_marginal_deviation(rho: &BipartiteState) -> f64 {
    let db = rho.dim_b();
    max_abs(&(rho.reduced_b().matrix() - CMatrix::identity(db, db).scale(1.0 / db as f64)))
}

/// Tuning for [`degradation_radius_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationOptions {
    /// Feasibility gap: a point counts as reachable when the best Choi
    /// matrix has smallest eigenvalue at least `-tol`.
    pub tol: f64,
    /// Width of the final bracket in the mixing parameter.
    pub eta_resolution: f64,
    pub max_newton: usize,
}

impl Default for DegradationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            eta_resolution: 1e-6,
            max_newton: 2000,
        }
    }
}

/// Largest certified mixing parameter with its witness channel.
#[derive(Debug, Clone)]
pub struct Degradation {
    /// Mixing parameter reproduced exactly by `witness`.
    pub eta: f64,
    /// Smallest mixing parameter found unreachable, or 1.
    pub upper: f64,
    pub witness: ChannelChoi,
    pub feasibility_checks: usize,
}

/// `D(rho, tau)`: the largest `eta` such that some channel on Alice's side
/// maps `tau` to `eta rho + (1 - eta) 1/d_A (x) rho_B`.
pub fn degradation_radius(
    rho: &BipartiteState,
    tau: &BipartiteState,
    tol: f64,
) -> Result<Degradation> {
    degradation_radius_with(
        rho,
        tau,
        &DegradationOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn degradation_radius_with(
    rho: &BipartiteState,
    tau: &BipartiteState,
    opts: &DegradationOptions,
) -> Result<Degradation> {
    if rho.dim_b() != tau.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim_b(),
            got: tau.dim_b(),
        });
    }
    if !(opts.tol > 0.0 && opts.eta_resolution > 0.0) {
        return Err(Error::OutOfRange("tolerances must be positive".into()));
    }
    for s in [rho, tau] {
        let dev = bob_marginal_deviation(s);
        if dev > MARGINAL_TOL {
            return Err(Error::OutOfRange(format!(
                "Bob's marginal deviates from 1/d_B by {dev:e}; normalise first"
            )));
        }
    }
    let problem = Degrader::new(rho, tau, opts);
    let mut best: Option<(f64, ChannelChoi)> = None;
    let mut checks = 0;
    let mut upper = 1.0;
    let search = Bisection {
        abs_tol: opts.eta_resolution,
        max_iter: 200,
    };
    search.last_accepted(
        |eta| {
            checks += 1;
            match problem.reach(eta)? {
                Some(found) => {
                    best = Some(found);
                    Ok(true)
                }
                None => {
                    upper = eta;
                    Ok(false)
                }
            }
        },
        0.0,
        1.0,
    )?;
    let (eta, witness) = match best {
        Some(found) => found,
        None => (
            0.0,
            ChannelChoi::completely_depolarizing(tau.dim_a(), rho.dim_a()),
        ),
    };
    Ok(Degradation {
        eta,
        upper,
        witness,
        feasibility_checks: checks,
    })
}

struct Degrader<'a> {
    rho: &'a BipartiteState,
    tau: &'a BipartiteState,
    basis: HermitianBasis,
    out_basis: HermitianBasis,
    map: DMatrix<f64>,
    solver: Barrier,
    tol: f64,
}

impl<'a> Degrader<'a> {
    fn new(rho: &'a BipartiteState, tau: &'a BipartiteState, opts: &DegradationOptions) -> Self {
        let din = tau.dim_a();
        let dout = rho.dim_a();
        let basis = HermitianBasis::new(din * dout);
        let in_basis = HermitianBasis::new(din);
        let out_basis = HermitianBasis::new(dout * rho.dim_b());
        let rows = in_basis.len() + out_basis.len();
        let mut map = DMatrix::zeros(rows, basis.len());
        for k in 0..basis.len() {
            let e = basis.unit(k);
            let tp = in_basis.coords(&output_trace(&e, din, dout));
            let img = out_basis.coords(&apply_choi(&e, din, dout, tau));
            map.view_mut((0, k), (in_basis.len(), 1)).copy_from(&tp);
            map.view_mut((in_basis.len(), k), (out_basis.len(), 1))
                .copy_from(&img);
        }
        Self {
            rho,
            tau,
            basis,
            out_basis,
            map,
            solver: Barrier {
                tol: opts.tol,
                max_newton: opts.max_newton,
            },
            tol: opts.tol,
        }
    }

    fn target(&self, eta: f64) -> CMatrix {
        let da = self.rho.dim_a();
        let noise = kron(
            &CMatrix::identity(da, da).scale(1.0 / da as f64),
            self.rho.reduced_b().matrix(),
        );
        self.rho.matrix().scale(eta) + noise.scale(1.0 - eta)
    }

    /// A channel reaching `eta`, possibly mixed with a sliver of complete
    /// depolarisation; returns the mixing parameter it reproduces exactly.
    fn reach(&self, eta: f64) -> Result<Option<(f64, ChannelChoi)>> {
        let din = self.tau.dim_a();
        let dout = self.rho.dim_a();
        let ident = HermitianBasis::new(din).coords(&CMatrix::identity(din, din));
        let img = self.out_basis.coords(&self.target(eta));
        let b = DVector::from_iterator(
            ident.len() + img.len(),
            ident.iter().chain(img.iter()).copied(),
        );
        let space = AffineSpace::solve(&self.basis, self.map.clone(), &b);
        if space.residual > self.tol {
            return Ok(None);
        }
        match self.solver.decide(&space)? {
            Feasibility::Infeasible => Ok(None),
            Feasibility::Feasible {
                matrix,
                min_eigenvalue,
            } => {
                let (c, p) = repair(matrix, min_eigenvalue, din, dout);
                Ok(Some(((1.0 - p) * eta, ChannelChoi::new(din, dout, c)?)))
            }
        }
    }
}

/// Makes a nearly valid Choi matrix exactly trace preserving and positive.
/// Returns the repaired matrix and the depolarising weight mixed in.
fn repair(c: CMatrix, min_eigenvalue: f64, din: usize, dout: usize) -> (CMatrix, f64) {
    let n = din * dout;
    let mut p = 0.0;
    let mut c = c;
    if min_eigenvalue < 0.0 {
        let neg = -min_eigenvalue;
        p = neg / (neg + 1.0 / dout as f64);
        c = c.scale(1.0 - p) + CMatrix::identity(n, n).scale(p / dout as f64);
    }
    let t = output_trace(&c, din, dout);
    let s = kron(
        &hermitian_function(&t, |x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt()),
        &CMatrix::identity(dout, dout),
    );
    (hermitian_part(&(&s * c * &s)), p)
}

/// `F_S = Tr(Phi+ rho)` and `F_W = Tr(F rho)` for a state on `C^d (x) C^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwirlingFidelities {
    #[serde(rename = "F_S")]
    pub f_s: f64,
    #[serde(rename = "F_W")]
    pub f_w: f64,
}

pub fn twirling_fidelities(rho: &BipartiteState) -> Result<TwirlingFidelities> {
    let d = rho.dim_a();
    if rho.dim_b() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.dim_b(),
        });
    }
    let f_s = trace_product(max_entangled_projector(d).matrix(), rho.matrix());
    let f_w = trace_product(swap_operator(d).matrix(), rho.matrix());
    Ok(TwirlingFidelities {
        f_s: f_s.clamp(0.0, 1.0),
        f_w: f_w.clamp(-1.0, 1.0),
    })
}

/// Denominator used in the isotropic branch of the twirling bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsotropicDenominator {
    /// `d^2 F_S - 1`, which is tight on the isotropic family.
    #[default]
    Twirled,
    /// `d^2 - F_S - 1`.
    Printed,
}

/// Per-branch values of the twirling bound; `None` marks a vacuous branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwirlingBound {
    pub fidelities: TwirlingFidelities,
    pub werner_branch: Option<f64>,
    pub isotropic_branch: Option<f64>,
    /// Minimum over the non-vacuous branches, `+inf` if both are vacuous.
    pub value: f64,
}

impl TwirlingBound {
    /// Whether the bound certifies steerability (critical radius below 1).
    pub fn certifies_steerable(&self) -> bool {
        self.value < 1.0
    }
}

/// Upper bound on a critical radius of `rho` from the radii of the two
/// anchor families in the same dimension.
pub fn steerability_upper_bound(
    rho: &BipartiteState,
    r_werner: f64,
    r_isotropic: f64,
) -> Result<f64> {
    Ok(twirling_bound(rho, r_werner, r_isotropic, IsotropicDenominator::default())?.value)
}

pub fn twirling_bound(
    rho: &BipartiteState,
    r_werner: f64,
    r_isotropic: f64,
    denominator: IsotropicDenominator,
) -> Result<TwirlingBound> {
    for r in [r_werner, r_isotropic] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange(format!(
                "anchor radius {r} not in [0, 1]"
            )));
        }
    }
    let fid = twirling_fidelities(rho)?;
    let d = rho.dim_a() as f64;
    let branch = |num: f64, den: f64| (den > DENOMINATOR_FLOOR).then(|| num / den);
    let werner_branch = branch((d + 1.0) * r_werner, 1.0 - d * fid.f_w);
    let iso_den = match denominator {
        IsotropicDenominator::Twirled => d * d * fid.f_s - 1.0,
        IsotropicDenominator::Printed => d * d - fid.f_s - 1.0,
    };
    let isotropic_branch = branch((d * d - 1.0) * r_isotropic, iso_den);
    let value = [werner_branch, isotropic_branch]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    Ok(TwirlingBound {
        fidelities: fid,
        werner_branch,
        isotropic_branch,
        value,
    })
}

/// Trace-norm distance between `(E (x) id)[tau]` and the target at `eta`.
pub fn witness_residual(
    rho: &BipartiteState,
    tau: &BipartiteState,
    found: &Degradation,
) -> Result<f64> {
    let out = found.witness.apply_to_a(tau)?;
    let target = rho.mix_with_local_noise(found.eta)?;
    Ok(trace_norm(&(out - target.matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{isotropic_state, werner_state, DensityMatrix};

    fn pure(amps: &[f64]) -> BipartiteState {
        let v = CMatrix::from_iterator(amps.len(), 1, amps.iter().map(|&a| C64::new(a, 0.0)));
        BipartiteState::new(2, 2, &v * v.adjoint()).unwrap()
    }

    #[test]
    fn filtering_examples() {
        let iso = isotropic_state(3, 0.3).unwrap();
        let same = normalize_bob_marginal(&iso).unwrap();
        assert!(max_abs(&(same.matrix() - iso.matrix())) < 1e-12);

        let psi = pure(&[0.8f64.sqrt(), 0.0, 0.0, 0.2f64.sqrt()]);
        let out = normalize_bob_marginal(&psi).unwrap();
        assert!(bob_marginal_deviation(&out) < 1e-12);
        let bell = max_entangled_projector(2);
        assert!(max_abs(&(out.matrix() - bell.matrix())) < 1e-12);

        let product = pure(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            normalize_bob_marginal(&product),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        for d in 2..=3 {
            let w = twirling_fidelities(&werner_state(d, 1.0).unwrap()).unwrap();
            assert!((w.f_w + 1.0).abs() < 1e-12);
            let s = twirling_fidelities(&isotropic_state(d, 1.0).unwrap()).unwrap();
            assert!((s.f_s - 1.0).abs() < 1e-12);
            let mixed =
                BipartiteState::from_density(d, d, DensityMatrix::maximally_mixed(d * d)).unwrap();
            let m = twirling_fidelities(&mixed).unwrap();
            let df = d as f64;
            assert!((m.f_s - 1.0 / (df * df)).abs() < 1e-12);
            assert!((m.f_w - 1.0 / df).abs() < 1e-12);
        }
    }

    #[test]
    fn twirling_bound_branches() {
        let d = 3;
        let mixed = BipartiteState::from_density(d, d, DensityMatrix::maximally_mixed(9)).unwrap();
        let b = twirling_bound(&mixed, 0.7, 0.4, IsotropicDenominator::Printed).unwrap();
        assert!(b.werner_branch.is_none());
        let want = 8.0 * 0.4 / (9.0 - 1.0 / 9.0 - 1.0);
        assert!((b.isotropic_branch.unwrap() - want).abs() < 1e-12);
        // both denominators vanish or go negative for the twirled form
        let b = twirling_bound(&mixed, 0.7, 0.4, IsotropicDenominator::Twirled).unwrap();
        assert!(b.value.is_infinite());

        let iso = isotropic_state(3, 1.0).unwrap();
        let printed = twirling_bound(&iso, 0.7, 0.4, IsotropicDenominator::Printed).unwrap();
        assert!((printed.isotropic_branch.unwrap() - 8.0 / 7.0 * 0.4).abs() < 1e-12);
        let twirled = twirling_bound(&iso, 0.7, 0.4, IsotropicDenominator::Twirled).unwrap();
        assert!((twirled.value - 0.4).abs() < 1e-12);

        assert!(twirling_bound(&iso, 1.5, 0.4, IsotropicDenominator::Twirled).is_err());
    }

    #[test]
    fn identity_choi_is_valid() {
        let c = ChannelChoi::identity(3);
        let s = isotropic_state(3, 0.6).unwrap();
        assert!(max_abs(&(c.apply_to_a(&s).unwrap() - s.matrix())) < 1e-14);
        let bad = CMatrix::identity(9, 9);
        assert!(matches!(
            ChannelChoi::new(3, 3, bad),
            Err(Error::Completeness(_))
        ));
    }

    #[test]
    fn degradation_small_cases() {
        let bell = isotropic_state(2, 1.0).unwrap();
        let found = degradation_radius(&bell, &bell, 1e-7).unwrap();
        assert!(found.eta >= 1.0 - 1e-6, "{}", found.eta);
        assert!(witness_residual(&bell, &bell, &found).unwrap() < 1e-6);

        let product =
            BipartiteState::from_density(2, 2, DensityMatrix::maximally_mixed(4)).unwrap();
        let found = degradation_radius(&bell, &product, 1e-7).unwrap();
        assert!(found.eta <= 1e-6);

        // depolarising Alice's half of the Bell state reaches exactly eta
        let half = isotropic_state(2, 0.5).unwrap();
        let found = degradation_radius(&half, &bell, 1e-7).unwrap();
        assert!((found.eta - 1.0).abs() < 1e-6);
        let found = degradation_radius(&bell, &half, 1e-7).unwrap();
        assert!((found.eta - 0.5).abs() < 2e-6, "{}", found.eta);
        assert!(witness_residual(&bell, &half, &found).unwrap() < 1e-6);
    }

    #[test]
    fn degradation_rejects_unfiltered_states() {
        let psi = pure(&[0.8f64.sqrt(), 0.0, 0.0, 0.2f64.sqrt()]);
        let bell = isotropic_state(2, 1.0).unwrap();
        assert!(degradation_radius(&psi, &bell, 1e-7).is_err());
        let w3 = werner_state(3, 1.0).unwrap();
        assert!(matches!(
            degradation_radius(&w3, &bell, 1e-7),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
