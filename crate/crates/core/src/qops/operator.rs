use super::{eigh, hermitian_part, identity, CMatrix};
use crate::{Error, Result, Tolerances, C64};

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A Hermitian operator on a `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::default().exact)
    }

    /// Validates Hermiticity within `tol` and stores the exactly Hermitian part.
    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        check_square(&matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let matrix = hermitian_part(&matrix);
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Checks `0 <= self <= 1` within `tol`.
    pub fn is_effect(&self, tol: f64) -> bool {
        let ev = self.eigenvalues();
        ev[0] >= -tol && ev[ev.len() - 1] <= 1.0 + tol
    }
}

/// A positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let tol = Tolerances::default().exact;
        Self::with_tolerance(matrix, tol)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        let op = HermitianOperator::with_tolerance(matrix, tol)?;
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::TraceMismatch {
                expected: 1.0,
                got: tr,
            });
        }
        let min = op.min_eigenvalue();
        if min < -tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator {
                matrix: identity(dim).scale(1.0 / dim as f64),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn purity(&self) -> f64 {
        super::trace_product(self.matrix(), self.matrix())
    }
}

/// An orthogonal projection of rank `1 <= rank <= dim - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    rank: usize,
    matrix: CMatrix,
}

impl Projection {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let tol = Tolerances::default().structural;
        let n = check_square(&matrix)?;
        let op = HermitianOperator::with_tolerance(matrix, tol)?;
        let m = op.into_matrix();
        let idem = super::max_abs(&(&m * &m - &m));
        if idem > tol {
            return Err(Error::NotProjection(format!(
                "P*P - P deviates by {idem:e}"
            )));
        }
        let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
        let rank = tr.round();
        if (tr - rank).abs() > tol || rank < 1.0 || rank as usize >= n {
            return Err(Error::NotProjection(format!(
                "trace {tr} is not an integer rank in [1, {}]",
                n - 1
            )));
        }
        Ok(Self {
            rank: rank as usize,
            matrix: m,
        })
    }

    /// Projection onto the span of the first `rank` computational basis vectors.
    pub fn coordinate(dim: usize, rank: usize) -> Result<Self> {
        if dim < 2 || rank == 0 || rank >= dim {
            return Err(Error::OutOfRange(format!(
                "rank {rank} not in [1, {}]",
                dim.saturating_sub(1)
            )));
        }
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            if i == j && i < rank {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { rank, matrix })
    }

    /// Projection onto the span of orthonormal columns.
    pub fn from_orthonormal_columns(columns: &CMatrix) -> Result<Self> {
        Self::new(columns * columns.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn complement(&self) -> Projection {
        Projection {
            rank: self.dim() - self.rank,
            matrix: identity(self.dim()) - &self.matrix,
        }
    }

    pub fn to_operator(&self) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }
}

/// A density matrix on `C^dim_a (x) C^dim_b`, Alice first.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    rho: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Result<Self> {
        Self::from_density(dim_a, dim_b, DensityMatrix::new(matrix)?)
    }

    pub fn from_density(dim_a: usize, dim_b: usize, rho: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidDimension(
                "subsystem dimensions must be positive".into(),
            ));
        }
        if rho.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                got: rho.dim(),
            });
        }
        Ok(Self { dim_a, dim_b, rho })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    /// `Tr_A[rho (E (x) 1)]`, the unnormalised conditional state on Bob's side.
    pub fn conditional_state(&self, effect: &HermitianOperator) -> Result<HermitianOperator> {
        if effect.dim() != self.dim_a {
            return Err(Error::DimensionMismatch {
                expected: self.dim_a,
                got: effect.dim(),
            });
        }
        let (da, db) = (self.dim_a, self.dim_b);
        let rho = self.matrix();
        let e = effect.matrix();
        let mut out = CMatrix::zeros(db, db);
        for i in 0..da {
            for j in 0..da {
                let eji = e[(j, i)];
                if eji == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out[(k, l)] += rho[(i * db + k, j * db + l)] * eji;
                    }
                }
            }
        }
        Ok(HermitianOperator {
            matrix: hermitian_part(&out),
        })
    }

    pub fn reduced_b(&self) -> DensityMatrix {
        let op = self
            .conditional_state(&HermitianOperator::identity(self.dim_a))
            .expect("identity has matching dimension");
        DensityMatrix { op }
    }

    pub fn reduced_a(&self) -> DensityMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        let rho = self.matrix();
        let m = CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        });
        DensityMatrix {
            op: HermitianOperator {
                matrix: hermitian_part(&m),
            },
        }
    }

    /// `eta * rho + (1 - eta) * (1/d_A) (x) rho_B`.
    pub fn mix_with_local_noise(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::OutOfRange(format!(
                "mixing parameter {eta} not in [0, 1]"
            )));
        }
        let noise = super::kron(
            &identity(self.dim_a).scale(1.0 / self.dim_a as f64),
            self.reduced_b().matrix(),
        );
        let m = self.matrix().scale(eta) + noise.scale(1.0 - eta);
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            rho: DensityMatrix {
                op: HermitianOperator { matrix: m },
            },
        })
    }

    pub(crate) fn from_trusted(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Self {
        let matrix = hermitian_part(&matrix);
        Self {
            dim_a,
            dim_b,
            rho: DensityMatrix {
                op: HermitianOperator { matrix },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn rejects_bad_trace_and_negative_states() {
        assert!(matches!(
            DensityMatrix::new(CMatrix::identity(2, 2)),
            Err(Error::TraceMismatch { .. })
        ));
        let m = CMatrix::from_diagonal(&super::super::CVector::from_vec(vec![
            C64::new(1.5, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn projection_rank_and_complement() {
        let p = Projection::coordinate(4, 1).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.complement().rank(), 3);
        assert!(Projection::new(CMatrix::identity(3, 3)).is_err());
        assert!(Projection::new(CMatrix::identity(3, 3).scale(0.5)).is_err());
    }

    #[test]
    fn conditional_state_checks_dimension() {
        let s = BipartiteState::new(2, 3, CMatrix::identity(6, 6).scale(1.0 / 6.0)).unwrap();
        let e = HermitianOperator::identity(3);
        assert!(matches!(
            s.conditional_state(&e),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
        let b = s
            .conditional_state(&HermitianOperator::identity(2))
            .unwrap();
        assert!((b.trace() - 1.0).abs() < 1e-14);
        assert_eq!(s.reduced_a().dim(), 2);
    }
}
