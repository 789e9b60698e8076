//! Feasibility of `{C = P + sum_k y_k B_k : C >= 0}` by maximising the
//! smallest eigenvalue with a log-det barrier method.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SVD};

use crate::qops::{eigh, hermitian_part, CMatrix};
use crate::{Error, Result, C64};

/// Orthonormal real coordinates on `n x n` Hermitian matrices.
pub(crate) struct HermitianBasis {
    n: usize,
}

impl HermitianBasis {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn coords(&self, m: &CMatrix) -> DVector<f64> {
        let n = self.n;
        let r2 = std::f64::consts::SQRT_2;
        let mut out = DVector::zeros(n * n);
        let mut k = n;
        for i in 0..n {
            out[i] = m[(i, i)].re;
            for j in (i + 1)..n {
                let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                out[k] = r2 * z.re;
                out[k + 1] = r2 * z.im;
                k += 2;
            }
        }
        out
    }

    pub fn matrix(&self, x: &DVector<f64>) -> CMatrix {
        let n = self.n;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(n, n);
        let mut k = n;
        for i in 0..n {
            m[(i, i)] = C64::new(x[i], 0.0);
            for j in (i + 1)..n {
                let z = C64::new(x[k], x[k + 1]) * h;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                k += 2;
            }
        }
        m
    }

    pub fn unit(&self, k: usize) -> CMatrix {
        let mut x = DVector::zeros(self.len());
        x[k] = 1.0;
        self.matrix(&x)
    }
}

/// Solution set of a real linear system on Hermitian matrices.
pub(crate) struct AffineSpace {
    pub particular: CMatrix,
    pub directions: Vec<CMatrix>,
    pub residual: f64,
}

impl AffineSpace {
    /// Least-squares particular solution and null space of `a x = b`.
    pub fn solve(basis: &HermitianBasis, a: DMatrix<f64>, b: &DVector<f64>) -> Self {
        let cols = a.ncols();
        let rows = a.nrows().max(cols);
        let mut padded = DMatrix::zeros(rows, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        let mut rhs = DVector::zeros(rows);
        rhs.rows_mut(0, b.len()).copy_from(b);
        let svd = SVD::new(padded.clone(), true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let smax = svd.singular_values.max();
        let cut = 1e-10 * smax.max(1.0);
        let mut x = DVector::zeros(cols);
        let mut directions = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            let v = vt.row(i).transpose();
            if s > cut {
                x += v.scale(u.column(i).dot(&rhs) / s);
            } else {
                directions.push(basis.matrix(&v));
            }
        }
        let residual = (&padded * &x - &rhs).norm();
        Self {
            particular: basis.matrix(&x),
            directions,
            residual,
        }
    }

    pub fn point(&self, y: &[f64]) -> CMatrix {
        let mut m = self.particular.clone();
        for (b, &c) in self.directions.iter().zip(y) {
            m += b.scale(c);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Feasibility {
    Feasible {
        matrix: CMatrix,
        min_eigenvalue: f64,
    },
    Infeasible,
}

pub(crate) struct Barrier {
    pub tol: f64,
    pub max_newton: usize,
}

fn chol(m: &CMatrix) -> Option<Cholesky<C64, Dyn>> {
    Cholesky::new(hermitian_part(m))
}

fn log_det(c: &Cholesky<C64, Dyn>) -> f64 {
    2.0 * c
        .l_dirty()
        .diagonal()
        .iter()
        .map(|z| z.re.ln())
        .sum::<f64>()
}

impl Barrier {
    /// Decides whether the space contains a matrix with smallest eigenvalue
    /// at least `-tol`.
    pub fn decide(&self, space: &AffineSpace) -> Result<Feasibility> {
        let n = space.particular.nrows();
        let nf = n as f64;
        let k = space.directions.len();
        let shift = |z: &DVector<f64>| -> CMatrix {
            let mut m = space.point(&z.as_slice()[..k]);
            for i in 0..n {
                m[(i, i)] -= C64::new(z[k], 0.0);
            }
            m
        };
        let (vals, _) = eigh(&space.particular);
        let mut z = DVector::zeros(k + 1);
        z[k] = vals[0] - 1.0;
        let mut t = nf;
        let mut newton = 0;
        let ident = CMatrix::identity(n, n);
        loop {
            // centring for the current t; a stalled line search means the
            // iterate is centred as well as double precision allows
            let mut stalled = false;
            while !stalled {
                let f = shift(&z);
                let c = chol(&f)
                    .ok_or_else(|| Error::NoConvergence("barrier iterate left the cone".into()))?;
                let finv = c.inverse();
                let mut w: Vec<CMatrix> = space.directions.iter().map(|b| &finv * b).collect();
                w.push(-finv.clone());
                let mut g = DVector::zeros(k + 1);
                for i in 0..k {
                    g[i] = (0..n).map(|a| w[i][(a, a)].re).sum();
                }
                g[k] = t - (0..n).map(|a| finv[(a, a)].re).sum::<f64>();
                let mut h = DMatrix::zeros(k + 1, k + 1);
                for i in 0..=k {
                    for j in i..=k {
                        let mut acc = 0.0;
                        for a in 0..n {
                            for b in 0..n {
                                acc += (w[i][(a, b)] * w[j][(b, a)]).re;
                            }
                        }
                        h[(i, j)] = acc;
                        h[(j, i)] = acc;
                    }
                }
                let step = match Cholesky::new(h.clone()) {
                    Some(hc) => hc.solve(&g),
                    None => {
                        h.pseudo_inverse(1e-14)
                            .map_err(|e| Error::NoConvergence(e.to_string()))?
                            * &g
                    }
                };
                let decrement = g.dot(&step);
                if decrement < 1e-10 {
                    break;
                }
                let phi0 = t * z[k] + log_det(&c);
                let mut alpha = 1.0;
                loop {
                    let trial = &z + step.scale(alpha);
                    if let Some(ct) = chol(&shift(&trial)) {
                        if t * trial[k] + log_det(&ct) >= phi0 + 0.25 * alpha * decrement {
                            z = trial;
                            break;
                        }
                    }
                    alpha *= 0.5;
                    if alpha < 1e-10 {
                        stalled = true;
                        break;
                    }
                }
                newton += 1;
                if newton > self.max_newton {
                    return Err(Error::NoConvergence(format!(
                        "barrier method exceeded {} Newton steps",
                        self.max_newton
                    )));
                }
            }
            let s = z[k];
            let gap = nf / t;
            let feasible = |m: CMatrix| {
                let matrix = hermitian_part(&m);
                let min_eigenvalue = eigh(&matrix).0[0];
                Feasibility::Feasible {
                    matrix,
                    min_eigenvalue,
                }
            };
            if s >= 0.0 || (gap < 0.25 * self.tol && s >= -self.tol) {
                return Ok(feasible(shift(&z) + ident.scale(s)));
            }
            if stalled && s >= -self.tol {
                return Ok(feasible(shift(&z) + ident.scale(s)));
            }
            if s + gap < -self.tol || gap < 0.25 * self.tol || stalled {
                return Ok(Feasibility::Infeasible);
            }
            t *= 10.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_round_trip() {
        let basis = HermitianBasis::new(3);
        let x = DVector::from_fn(9, |i, _| i as f64 - 3.5);
        let m = basis.matrix(&x);
        assert!((basis.coords(&m) - &x).norm() < 1e-14);
        let a = basis.unit(4);
        let b = basis.unit(5);
        assert!(crate::qops::trace_product(&a, &b).abs() < 1e-15);
        assert!((crate::qops::trace_product(&b, &b) - 1.0).abs() < 1e-15);
    }

    fn diagonal_family(d0: f64) -> AffineSpace {
        // {diag(d0 + y, 1 - y)}
        let basis = HermitianBasis::new(2);
        let mut a = DMatrix::zeros(1, 4);
        a[(0, 0)] = 1.0;
        a[(0, 1)] = 1.0;
        let mut space = AffineSpace::solve(&basis, a, &DVector::from_element(1, 1.0 + d0));
        assert!(space.residual < 1e-14);
        // restrict to diagonal directions
        space.directions.retain(|b| b[(0, 1)].norm() < 1e-14);
        space
    }

    #[test]
    fn decides_simple_families() {
        let solver = Barrier {
            tol: 1e-9,
            max_newton: 500,
        };
        match solver.decide(&diagonal_family(0.5)).unwrap() {
            Feasibility::Feasible { min_eigenvalue, .. } => assert!(min_eigenvalue >= -1e-9),
            f => panic!("{f:?}"),
        }
        match solver.decide(&diagonal_family(-1.5)).unwrap() {
            Feasibility::Infeasible => {}
            f => panic!("{f:?}"),
        }
        // trace zero leaves the single PSD point 0 on the boundary
        match solver.decide(&diagonal_family(-1.0)).unwrap() {
            Feasibility::Feasible { min_eigenvalue, .. } => assert!(min_eigenvalue.abs() < 1e-9),
            f => panic!("{f:?}"),
        }
    }
}
