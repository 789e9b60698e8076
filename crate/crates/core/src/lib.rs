//! Quantum steering critical radii for Werner and isotropic states.
//!
//! The crate is organised bottom-up:
//!
//! - [`qops`]: dense complex linear algebra for bipartite states, POVMs,
//!   partial traces and Haar sampling.
//! - [`capacity`]: the two-dimensional cross-section of the capacity of the
//!   uniform (Haar) hidden-state ensemble, reduced to the moment body of a
//!   Beta(r, d-r) variable.
//! - [`radii`]: critical radii for dichotomic measurements, closed forms and
//!   reference thresholds.
//! - [`lhs`]: an explicit local-hidden-state model for arbitrary POVMs on
//!   Werner states.
//! - [`criteria`]: channel-degradation (SDP) and twirling bounds for general
//!   states.
//! - [`verify`]: the invariant suite behind `steering verify`.

#![forbid(unsafe_code)]

pub mod capacity;
pub mod criteria;
mod error;
pub mod lhs;
pub mod qops;
pub mod radii;
pub mod roots;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Numerical tolerances shared by the structural checks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Hermiticity, idempotence and completeness checks.
    pub structural: f64,
    /// Exact algebraic identities (traces, normalisation).
    pub exact: f64,
    /// Eigenvalues below this are treated as zero when decomposing effects.
    pub eigen_cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            exact: 1e-12,
            eigen_cutoff: 1e-12,
        }
    }
}
