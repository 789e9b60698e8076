use super::{eigh, identity, max_abs, CMatrix, CVector, HermitianOperator, Projection};
use crate::{Error, Result, Tolerances};

/// One refined effect `weight * |v><v|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneEffect {
    pub weight: f64,
    /// Unit vector spanning the projection.
    pub vector: CVector,
    /// Index of the input effect this one was split from.
    pub source: usize,
}

impl RankOneEffect {
    pub fn projection_matrix(&self) -> CMatrix {
        &self.vector * self.vector.adjoint()
    }

    pub fn effect_matrix(&self) -> CMatrix {
        self.projection_matrix().scale(self.weight)
    }
}

/// A POVM in canonical rank-one form: `sum_a alpha_a P_a = 1`, `sum_a alpha_a = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    sources: usize,
    effects: Vec<RankOneEffect>,
}

impl Povm {
    /// Builds a POVM from weighted unit vectors, checking completeness.
    pub fn from_rank_one(dim: usize, effects: Vec<RankOneEffect>) -> Result<Self> {
        let tol = Tolerances::default().structural;
        if dim < 1 || effects.is_empty() {
            return Err(Error::InvalidDimension("empty POVM".into()));
        }
        let mut total = CMatrix::zeros(dim, dim);
        let mut weight_sum = 0.0;
        for e in &effects {
            if e.vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.vector.len(),
                });
            }
            if (e.vector.norm() - 1.0).abs() > tol {
                return Err(Error::NotNormalized(e.vector.norm()));
            }
            if !(-tol..=1.0 + tol).contains(&e.weight) {
                return Err(Error::OutOfRange(format!(
                    "weight {} not in [0, 1]",
                    e.weight
                )));
            }
            total += e.effect_matrix();
            weight_sum += e.weight;
        }
        let defect = max_abs(&(total - identity(dim)));
        if defect > tol {
            return Err(Error::Completeness(defect));
        }
        if (weight_sum - dim as f64).abs() > tol {
            return Err(Error::TraceMismatch {
                expected: dim as f64,
                got: weight_sum,
            });
        }
        let sources = effects.iter().map(|e| e.source + 1).max().unwrap_or(0);
        Ok(Self {
            dim,
            sources,
            effects,
        })
    }

    /// The projective measurement in the computational basis.
    pub fn computational_basis(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut v = CVector::zeros(dim);
                v[k] = crate::C64::new(1.0, 0.0);
                RankOneEffect {
                    weight: 1.0,
                    vector: v,
                    source: k,
                }
            })
            .collect();
        Self {
            dim,
            sources: dim,
            effects,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[RankOneEffect] {
        &self.effects
    }

    /// Number of effects in the POVM this one was refined from.
    pub fn source_count(&self) -> usize {
        self.sources
    }

    pub fn weights(&self) -> Vec<f64> {
        self.effects.iter().map(|e| e.weight).collect()
    }

    pub fn projection(&self, a: usize) -> Result<Projection> {
        Projection::new(self.effects[a].projection_matrix())
    }

    pub fn effect(&self, a: usize) -> HermitianOperator {
        HermitianOperator::with_tolerance(self.effects[a].effect_matrix(), 1e-10)
            .expect("rank-one effect")
    }

    /// Sums per-refined-outcome operators back onto the source outcomes.
    pub fn coarse_grain(&self, per_effect: &[CMatrix]) -> Vec<CMatrix> {
        let d = per_effect.first().map(|m| m.nrows()).unwrap_or(self.dim);
        let mut out = vec![CMatrix::zeros(d, d); self.sources];
        for (e, m) in self.effects.iter().zip(per_effect) {
            out[e.source] += m;
        }
        out
    }
}

/// Splits each effect into weighted rank-one projections along its spectrum.
///
/// Eigenvalues below the cut-off are dropped and the remaining weights are
/// rescaled so that they sum to `d` exactly.
pub fn canonical_povm(effects: &[HermitianOperator]) -> Result<Povm> {
    let tol = Tolerances::default();
    let Some(first) = effects.first() else {
        return Err(Error::InvalidDimension("empty POVM".into()));
    };
    let d = first.dim();
    let mut total = CMatrix::zeros(d, d);
    let mut refined = Vec::new();
    for (source, e) in effects.iter().enumerate() {
        if e.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: e.dim(),
            });
        }
        total += e.matrix();
        let (vals, vecs) = eigh(e.matrix());
        if vals[0] < -tol.structural {
            return Err(Error::NotPositive(vals[0]));
        }
        for (k, &w) in vals.iter().enumerate() {
            if w > tol.eigen_cutoff {
                refined.push(RankOneEffect {
                    weight: w,
                    vector: vecs.column(k).into_owned(),
                    source,
                });
            }
        }
    }
    let defect = max_abs(&(total - identity(d)));
    if defect > tol.structural {
        return Err(Error::Completeness(defect));
    }
    let sum: f64 = refined.iter().map(|e| e.weight).sum();
    let scale = d as f64 / sum;
    for e in &mut refined {
        e.weight = (e.weight * scale).min(1.0);
    }
    Povm::from_rank_one(d, refined).map(|mut p| {
        p.sources = effects.len();
        p
    })
}

#[cfg(test)]
mod tests {
    use super::super::{random_povm_effects, RandomStream};
    use super::*;
    use crate::C64;

    #[test]
    fn half_identity_pair_refines_to_four_effects() {
        let half = HermitianOperator::new(identity(2).scale(0.5)).unwrap();
        let p = canonical_povm(&[half.clone(), half]).unwrap();
        assert_eq!(p.len(), 4);
        for w in p.weights() {
            assert!((w - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn projective_pair_in_qutrit() {
        let pr = Projection::coordinate(3, 1).unwrap();
        let p = canonical_povm(&[pr.to_operator(), pr.complement().to_operator()]).unwrap();
        assert_eq!(p.len(), 3);
        for w in p.weights() {
            assert!((w - 1.0).abs() < 1e-14);
        }
        // orthogonal projectors
        for a in 0..3 {
            for b in 0..a {
                let ov = p.effects()[a].vector.dotc(&p.effects()[b].vector).norm();
                assert!(ov < 1e-12);
            }
        }
    }

    #[test]
    fn random_three_outcome_povm() {
        let mut s = RandomStream::new(7);
        let effects = random_povm_effects(3, 3, &mut s).unwrap();
        let p = canonical_povm(&effects).unwrap();
        assert!(p.len() <= 9);
        let sum: f64 = p.weights().iter().sum();
        assert!((sum - 3.0).abs() < 1e-12);
        let total = p
            .effects()
            .iter()
            .fold(CMatrix::zeros(3, 3), |acc, e| acc + e.effect_matrix());
        assert!(max_abs(&(total - identity(3))) < 1e-10);
        let regrouped = p.coarse_grain(
            &p.effects()
                .iter()
                .map(|e| e.effect_matrix())
                .collect::<Vec<_>>(),
        );
        for (g, e) in regrouped.iter().zip(&effects) {
            assert!(max_abs(&(g - e.matrix())) < 1e-10);
        }
    }

    #[test]
    fn rejects_incomplete_and_negative() {
        let half = HermitianOperator::new(identity(2).scale(0.5)).unwrap();
        assert!(matches!(
            canonical_povm(&[half]),
            Err(Error::Completeness(_))
        ));
        let mut m = identity(2);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        let neg = HermitianOperator::new(m).unwrap();
        let rest = HermitianOperator::new(identity(2) - neg.matrix()).unwrap();
        assert!(matches!(
            canonical_povm(&[neg, rest]),
            Err(Error::NotPositive(_))
        ));
    }
}
