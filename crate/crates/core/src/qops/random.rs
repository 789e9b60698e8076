use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{hermitian_function, CMatrix, CVector, DensityMatrix, HermitianOperator};
use crate::{Error, Result, C64};

/// A seeded, splittable random stream.
///
/// Splitting derives an independent ChaCha stream from `(seed, path)`, so
/// parallel shards are reproducible regardless of scheduling.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    path: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_path(seed, 0)
    }

    fn with_path(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        Self { seed, path, rng }
    }

    /// The `index`-th child stream. Children of distinct indices (or of
    /// distinct parents) do not overlap.
    pub fn split(&self, index: u64) -> Self {
        Self::with_path(
            self.seed,
            splitmix64(self.path ^ splitmix64(index.wrapping_add(1))),
        )
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A Haar-random unit vector in `C^d`: a normalised complex Gaussian vector.
pub fn haar_state_sample(d: usize, stream: &mut RandomStream) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| stream.complex_normal());
        let n = v.norm();
        if n > 1e-300 {
            return v.unscale(n);
        }
    }
}

/// Writes a Haar-random unit vector into `out` without allocating.
pub(crate) fn haar_state_into(out: &mut [C64], stream: &mut RandomStream) {
    loop {
        let mut norm2 = 0.0;
        for z in out.iter_mut() {
            *z = stream.complex_normal();
            norm2 += z.norm_sqr();
        }
        if norm2 > 1e-300 {
            let inv = 1.0 / norm2.sqrt();
            for z in out.iter_mut() {
                *z *= inv;
            }
            return;
        }
    }
}

/// A Haar-random unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal moved into Q.
pub fn haar_unitary(d: usize, stream: &mut RandomStream) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| stream.complex_normal());
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A random full-rank density matrix drawn from the Hilbert-Schmidt measure.
pub fn random_density_matrix(d: usize, stream: &mut RandomStream) -> DensityMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| stream.complex_normal());
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityMatrix::with_tolerance(m.unscale(tr), 1e-10).expect("Gram matrix is a state")
}

/// `n` random effects `S^{-1/2} A_i S^{-1/2}` with `A_i` Wishart and
/// `S = sum_i A_i`, so they sum to the identity.
pub fn random_povm_effects(
    d: usize,
    n: usize,
    stream: &mut RandomStream,
) -> Result<Vec<HermitianOperator>> {
    if d < 1 || n < 1 {
        return Err(Error::InvalidDimension(format!("d = {d}, n = {n}")));
    }
    let parts: Vec<CMatrix> = (0..n)
        .map(|_| {
            let g = CMatrix::from_fn(d, d, |_, _| stream.complex_normal());
            &g * g.adjoint()
        })
        .collect();
    let total = parts.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a);
    let inv_sqrt = hermitian_function(&total, |x| 1.0 / x.sqrt());
    parts
        .iter()
        .map(|a| HermitianOperator::with_tolerance(&inv_sqrt * a * &inv_sqrt, 1e-10))
        .collect()
}
