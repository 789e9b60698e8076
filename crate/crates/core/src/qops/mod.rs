//! Finite-dimensional quantum linear algebra.
//!
//! Dense complex matrices throughout; the dimensions of interest for matrix
//! work are small (d <= 100), the large-d scans live in [`crate::capacity`].

mod operator;
mod povm;
pub(crate) mod random;
mod states;

pub use operator::{BipartiteState, DensityMatrix, HermitianOperator, Projection};
pub use povm::{canonical_povm, Povm, RankOneEffect};
pub use random::{
    haar_state_sample, haar_unitary, random_density_matrix, random_povm_effects, RandomStream,
};
pub use states::{
    isotropic_state, kron, max_entangled_projector, max_entangled_vector, swap_operator,
    werner_state,
};

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm(m: &CMatrix) -> f64 {
    let h = hermitian_part(m);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum()
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real part of `Tr(a * b)`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `f(m)` for a Hermitian `m`, applied through its spectrum.
pub fn hermitian_function<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::new(f(x), 0.0)),
    ));
    &vecs * diag * vecs.adjoint()
}

pub(crate) fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}
