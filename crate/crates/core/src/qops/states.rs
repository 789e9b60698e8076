use super::{identity, BipartiteState, CMatrix, CVector, DensityMatrix, HermitianOperator};
use crate::{Error, Result, C64};

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// The swap `F|ij> = |ji>` on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> HermitianOperator {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    HermitianOperator::new(f).expect("swap is Hermitian")
}

/// `|phi+> = sum_k |kk> / sqrt(d)`.
pub fn max_entangled_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for k in 0..d {
        v[k * d + k] = amp;
    }
    v
}

/// `S^d = |phi+><phi+|`.
pub fn max_entangled_projector(d: usize) -> DensityMatrix {
    let v = max_entangled_vector(d);
    DensityMatrix::new(&v * v.adjoint()).expect("pure state")
}

fn check_family_args(d: usize, eta: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
    }
    if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
        return Err(Error::OutOfRange(format!(
            "mixing parameter {eta} not in [0, 1]"
        )));
    }
    Ok(())
}

fn white_noise(d: usize) -> CMatrix {
    identity(d * d).scale(1.0 / (d * d) as f64)
}

/// `eta * 2 pi_- / (d^2 - d) + (1 - eta) * 1/d^2`, with `pi_- = (1 - F) / 2`.
pub fn werner_state(d: usize, eta: f64) -> Result<BipartiteState> {
    check_family_args(d, eta)?;
    let f = swap_operator(d);
    let antisym = (identity(d * d) - f.matrix()).scale(1.0 / (d * (d - 1)) as f64);
    let m = antisym.scale(eta) + white_noise(d).scale(1.0 - eta);
    Ok(BipartiteState::from_trusted(d, d, m))
}

/// `eta * |phi+><phi+| + (1 - eta) * 1/d^2`.
pub fn isotropic_state(d: usize, eta: f64) -> Result<BipartiteState> {
    check_family_args(d, eta)?;
    let s = max_entangled_projector(d);
    let m = s.matrix().scale(eta) + white_noise(d).scale(1.0 - eta);
    Ok(BipartiteState::from_trusted(d, d, m))
}
