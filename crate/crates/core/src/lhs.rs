//! A local-hidden-state model for arbitrary POVMs on Werner states.
//!
//! Hidden states are Haar-distributed pure states `|l>`. For a canonical
//! POVM `E_a = alpha_a P_a` the response is
//!
//! ```text
//! s_a(l)  = alpha_a <l|(1 - P_a)|l> / (d - 1)   if <l|P_a|l> <= 1/d, else 0
//! G_a(l)  = s_a(l) + (alpha_a / d) (1 - sum_b s_b(l))
//! ```
//!
//! `sum_a G_a = 1` follows from `sum_a alpha_a = d`, and `G_a >= 0` from
//! `sum_b alpha_b <l|P_b|l> = 1`. Averaged over the Haar measure the model
//! reproduces the Werner assemblage at the mixing parameter returned by
//! [`povm_lower_bound_werner`].

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::capacity::MomentBody;
use crate::qops::random::haar_state_into;
use crate::qops::{CMatrix, CVector, HermitianOperator, Povm, RandomStream};
use crate::{Error, Result, C64};

const MC_SHARD: usize = 1 << 15;

/// Response functions attached to one canonical POVM.
#[derive(Debug, Clone)]
pub struct ResponseModel {
    povm: Povm,
}

/// How to evaluate the Haar average of `G_a(l) |l><l|`.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Method {
    MonteCarlo {
        samples: usize,
        stream: RandomStream,
    },
    /// Product Gauss-Legendre x trapezoid rule on the Bloch sphere; `d = 2` only.
    Quadrature { order: usize },
}

/// Reconstructed (unnormalised) conditional states, one per outcome.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub operators: Vec<CMatrix>,
    /// Per-entry standard errors of the real and imaginary parts, Monte Carlo only.
    pub std_errors: Option<Vec<(DMatrix<f64>, DMatrix<f64>)>>,
    pub samples: usize,
}

impl ResponseModel {
    pub fn new(povm: Povm) -> Result<Self> {
        if povm.dim() < 2 {
            return Err(Error::InvalidDimension(format!(
                "d = {}, need d >= 2",
                povm.dim()
            )));
        }
        Ok(Self { povm })
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn outcomes(&self) -> usize {
        self.povm.len()
    }

    /// `G(l)` for a unit vector `l`.
    pub fn response(&self, lambda: &CVector) -> Result<Vec<f64>> {
        if lambda.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: lambda.len(),
            });
        }
        let norm = lambda.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        let mut out = vec![0.0; self.outcomes()];
        self.response_into(lambda.as_slice(), &mut out);
        Ok(out)
    }

    fn response_into(&self, lambda: &[C64], out: &mut [f64]) {
        let d = self.dim() as f64;
        let cutoff = 1.0 / d;
        let mut soft_total = 0.0;
        for (g, e) in out.iter_mut().zip(self.povm.effects()) {
            let overlap: C64 = e.vector.iter().zip(lambda).map(|(p, l)| p.conj() * l).sum();
            let t = overlap.norm_sqr();
            // closed cutoff: Theta(0) = 1
            let s = if t <= cutoff {
                e.weight * (1.0 - t) / (d - 1.0)
            } else {
                0.0
            };
            *g = s;
            soft_total += s;
        }
        let rest = 1.0 - soft_total;
        for (g, e) in out.iter_mut().zip(self.povm.effects()) {
            *g += e.weight / d * rest;
        }
    }

    /// Haar averages of the truncated first response term in the eigenbasis
    /// of a rank-one `P`: `(x_par, x_perp)` with
    /// `int (1-t)/(d-1) 1{t <= 1/d} |l><l| = x_par P + x_perp (1 - P)`.
    fn truncated_term(d: usize) -> Result<(f64, f64)> {
        let body = MomentBody::new(d, 1)?;
        let df = d as f64;
        let c = 1.0 / df;
        let x_par = body.truncated_moment(1, 1, c)? / (df - 1.0);
        let x_perp = body.truncated_moment(0, 2, c)? / ((df - 1.0) * (df - 1.0));
        Ok((x_par, x_perp))
    }

    /// Exact Haar average of `G_a(l) |l><l|` for every outcome.
    pub fn analytic_assemblage(&self) -> Result<Vec<HermitianOperator>> {
        let d = self.dim();
        let df = d as f64;
        let (x_par, x_perp) = Self::truncated_term(d)?;
        // sum_b alpha_b X_b = (d x_perp + x_par - x_perp) * 1
        let shared = (1.0 / df - (df - 1.0) * x_perp - x_par) / df;
        self.povm
            .effects()
            .iter()
            .map(|e| {
                let p = e.projection_matrix();
                let m = CMatrix::identity(d, d).scale(e.weight * (x_perp + shared))
                    + p.scale(e.weight * (x_par - x_perp));
                HermitianOperator::with_tolerance(m, 1e-12)
            })
            .collect()
    }

    /// Mixing parameter of the Werner assemblage reproduced by outcome `a`,
    /// read off the two eigenvalues of its analytic conditional state.
    pub fn realized_eta(&self, a: usize) -> Result<f64> {
        let e = self
            .povm
            .effects()
            .get(a)
            .ok_or_else(|| Error::OutOfRange(format!("outcome {a} of {}", self.outcomes())))?;
        if e.weight <= 1e-12 {
            return Err(Error::OutOfRange(format!("outcome {a} has zero weight")));
        }
        let d = self.dim();
        let df = d as f64;
        let op = &self.analytic_assemblage()?[a];
        let along: C64 = (e.vector.adjoint() * op.matrix() * &e.vector)[(0, 0)];
        let along = along.re / e.weight;
        let across = (op.trace() / e.weight - along) / (df - 1.0);
        Ok(df * (df - 1.0) * (across - along))
    }

    pub fn reconstruct_assemblage(&self, method: &Method) -> Result<Reconstruction> {
        match method {
            Method::MonteCarlo { samples, stream } => self.monte_carlo(*samples, stream),
            Method::Quadrature { order } => self.quadrature(*order),
        }
    }

    fn monte_carlo(&self, samples: usize, stream: &RandomStream) -> Result<Reconstruction> {
        if samples < 2 {
            return Err(Error::OutOfRange(format!(
                "need at least 2 samples, got {samples}"
            )));
        }
        let shards = samples.div_ceil(MC_SHARD);
        let partials: Vec<Moments> = (0..shards)
            .into_par_iter()
            .map(|k| {
                let n = MC_SHARD.min(samples - k * MC_SHARD);
                let mut s = stream.split(k as u64);
                self.shard(n, &mut s)
            })
            .collect();
        let total = partials
            .into_iter()
            .reduce(|mut acc, m| {
                acc.merge(&m);
                acc
            })
            .expect("at least one shard");
        Ok(total.finish(samples))
    }

    fn shard(&self, n: usize, stream: &mut RandomStream) -> Moments {
        let d = self.dim();
        let k = self.outcomes();
        let mut m = Moments::new(k, d);
        let mut g = vec![0.0; k];
        let mut l = vec![C64::new(0.0, 0.0); d];
        for _ in 0..n {
            haar_state_into(&mut l, stream);
            self.response_into(&l, &mut g);
            m.add(&l, &g);
        }
        m
    }

    fn quadrature(&self, order: usize) -> Result<Reconstruction> {
        if self.dim() != 2 {
            return Err(Error::InvalidDimension(
                "quadrature is implemented for d = 2 only".into(),
            ));
        }
        if order < 2 {
            return Err(Error::OutOfRange(format!("quadrature order {order} < 2")));
        }
        let (nodes, weights) = gauss_legendre(order);
        let n_phi = 2 * order;
        let k = self.outcomes();
        let mut ops = vec![CMatrix::zeros(2, 2); k];
        let mut g = vec![0.0; k];
        for (&z, &wz) in nodes.iter().zip(&weights) {
            // z = cos(theta); |l> = (cos(theta/2), e^{i phi} sin(theta/2))
            let c = ((1.0 + z) / 2.0).sqrt();
            let s = ((1.0 - z) / 2.0).sqrt();
            for j in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_phi as f64;
                let l = [C64::new(c, 0.0), C64::from_polar(s, phi)];
                self.response_into(&l, &mut g);
                let w = wz / 2.0 / n_phi as f64;
                for (op, &ga) in ops.iter_mut().zip(&g) {
                    for r in 0..2 {
                        for q in 0..2 {
                            op[(r, q)] += l[r] * l[q].conj() * (w * ga);
                        }
                    }
                }
            }
        }
        Ok(Reconstruction {
            operators: ops,
            std_errors: None,
            samples: nodes.len() * n_phi,
        })
    }
}

/// Running first and second moments of `G_a |l><l|`, upper triangle only.
struct Moments {
    d: usize,
    sum: Vec<C64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

impl Moments {
    fn new(k: usize, d: usize) -> Self {
        let n = k * d * d;
        Self {
            d,
            sum: vec![C64::new(0.0, 0.0); n],
            sq_re: vec![0.0; n],
            sq_im: vec![0.0; n],
        }
    }

    fn add(&mut self, l: &[C64], g: &[f64]) {
        let d = self.d;
        for (a, &ga) in g.iter().enumerate() {
            if ga == 0.0 {
                continue;
            }
            let base = a * d * d;
            for r in 0..d {
                let lr = l[r] * ga;
                for (q, lq) in l.iter().enumerate().skip(r) {
                    let x = lr * lq.conj();
                    let i = base + r * d + q;
                    self.sum[i] += x;
                    self.sq_re[i] += x.re * x.re;
                    self.sq_im[i] += x.im * x.im;
                }
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sq_re[i] += other.sq_re[i];
            self.sq_im[i] += other.sq_im[i];
        }
    }

    fn finish(self, samples: usize) -> Reconstruction {
        let d = self.d;
        let k = self.sum.len() / (d * d);
        let n = samples as f64;
        let se = |s: f64, sq: f64| {
            let mean = s / n;
            ((sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
        };
        let mut operators = Vec::with_capacity(k);
        let mut errors = Vec::with_capacity(k);
        for a in 0..k {
            let base = a * d * d;
            let mut op = CMatrix::zeros(d, d);
            let mut e_re = DMatrix::zeros(d, d);
            let mut e_im = DMatrix::zeros(d, d);
            for r in 0..d {
                for q in r..d {
                    let i = base + r * d + q;
                    let mean = self.sum[i] / n;
                    op[(r, q)] = mean;
                    op[(q, r)] = mean.conj();
                    let (sr, si) = (
                        se(self.sum[i].re, self.sq_re[i]),
                        se(self.sum[i].im, self.sq_im[i]),
                    );
                    e_re[(r, q)] = sr;
                    e_re[(q, r)] = sr;
                    e_im[(r, q)] = si;
                    e_im[(q, r)] = si;
                }
            }
            operators.push(op);
            errors.push((e_re, e_im));
        }
        Reconstruction {
            operators,
            std_errors: Some(errors),
            samples,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `[1 + (d-1)^(d+1) d^(-d)] / (d + 1)`.
pub fn povm_lower_bound_werner(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    let df = d as f64;
    // (d-1)^(d+1) d^(-d) = (d-1) (1 - 1/d)^d
    let tail = (df - 1.0) * (df * (-1.0 / df).ln_1p()).exp();
    Ok((1.0 + tail) / (df + 1.0))
}

/// The mixing parameter realised by the model in dimension `d`, from the
/// Beta moments of the truncated response (no POVM needed).
pub fn realized_eta_for_dim(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    let (x_par, x_perp) = ResponseModel::truncated_term(d)?;
    let df = d as f64;
    Ok(df * (df - 1.0) * (x_perp - x_par))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{canonical_povm, random_povm_effects};

    #[test]
    fn bound_values() {
        assert!((povm_lower_bound_werner(2).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!((povm_lower_bound_werner(3).unwrap() - 43.0 / 108.0).abs() < 1e-15);
        let big = povm_lower_bound_werner(10_000).unwrap();
        assert!((big - (-1f64).exp()).abs() < 1e-4);
        assert!(povm_lower_bound_werner(1).is_err());
    }

    #[test]
    fn realized_eta_small_dims() {
        // d = 2: t ~ U(0,1); x_par = int_0^{1/2} t(1-t) = 1/12, x_perp = int_0^{1/2} (1-t)^2 = 7/24
        assert!((realized_eta_for_dim(2).unwrap() - 5.0 / 12.0).abs() < 1e-14);
        assert!((realized_eta_for_dim(3).unwrap() - 43.0 / 108.0).abs() < 1e-14);
    }

    #[test]
    fn computational_basis_response() {
        let m = ResponseModel::new(Povm::computational_basis(3)).unwrap();
        let mut l = CVector::zeros(3);
        l[0] = C64::new(1.0, 0.0);
        let g = m.response(&l).unwrap();
        // <l|P_0|l> = 1 > 1/3 switches the first term off for outcome 0
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((g[0] - (1.0 / 3.0) * (1.0 - 2.0 * 0.5)).abs() < 1e-15);
        assert!((g[1] - (0.5 + (1.0 / 3.0) * 0.0)).abs() < 1e-15);
    }

    #[test]
    fn equator_boundary_qubit() {
        let m = ResponseModel::new(Povm::computational_basis(2)).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let l = CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, h)]);
        let g = m.response(&l).unwrap();
        assert!((g.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(g.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn rejects_unnormalised_lambda() {
        let m = ResponseModel::new(Povm::computational_basis(2)).unwrap();
        let l = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(m.response(&l), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn realized_eta_is_outcome_independent() {
        let mut s = RandomStream::new(11);
        let povm = canonical_povm(&random_povm_effects(3, 4, &mut s).unwrap()).unwrap();
        let m = ResponseModel::new(povm).unwrap();
        let want = povm_lower_bound_werner(3).unwrap();
        for a in 0..m.outcomes() {
            assert!((m.realized_eta(a).unwrap() - want).abs() < 1e-12);
        }
        assert!(m.realized_eta(m.outcomes()).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let int = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((int(0) - 2.0).abs() < 1e-14);
        assert!((int(12) - 2.0 / 13.0).abs() < 1e-14);
        assert!(int(5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_requires_qubits() {
        let m = ResponseModel::new(Povm::computational_basis(3)).unwrap();
        assert!(m
            .reconstruct_assemblage(&Method::Quadrature { order: 10 })
            .is_err());
        let m = ResponseModel::new(Povm::computational_basis(2)).unwrap();
        assert!(m
            .reconstruct_assemblage(&Method::MonteCarlo {
                samples: 1,
                stream: RandomStream::new(0)
            })
            .is_err());
    }
}
