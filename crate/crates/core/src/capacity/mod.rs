//! Cross-sections of the capacity of the uniform hidden-state ensemble.
//!
//! For a rank-`r` projection `P` in dimension `d`, the capacity
//! `K = { int g(l) |l><l| dl : 0 <= g <= 1 }` meets `span{P, 1}` in a convex
//! set of operators `u P + v (1 - P)`. Averaging `g` over the stabiliser of
//! `P` reduces it to a function of `t = <l|P|l> ~ Beta(r, d - r)`, and
//!
//! ```text
//! u = E[g t] / r,   v = E[g (1 - t)] / (d - r).
//! ```
//!
//! For fixed `u`, `v` is maximised by `g = 1{t <= c}` and minimised by
//! `g = 1{t >= c}`. With the Beta moment identities the two boundary
//! families are
//!
//! ```text
//! lower(c) = ( I_c(r+1, d-r),      I_c(r, d-r+1)      ) / d
//! upper(c) = ( 1 - I_c(r+1, d-r),  1 - I_c(r, d-r+1)  ) / d
//! ```

pub mod beta;

pub use beta::{ln_beta, ln_gamma, reg_inc_beta, reg_inc_beta_tails};

use serde::{Deserialize, Serialize};

use crate::roots::Bisection;
use crate::{Error, Result};

/// Slack used by [`MomentBody::contains`].
pub const MEMBERSHIP_EPS: f64 = 1e-11;

/// Eigenvalue coordinates of `u P + v (1 - P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub u: f64,
    pub v: f64,
}

impl PlanePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// Which threshold family traces the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `g = 1{t <= c}`: the `v >= u` side, reached by anticorrelated states.
    Lower,
    /// `g = 1{t >= c}`: the `v <= u` side, reached by correlated states.
    Upper,
}

/// Where a ray leaves the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayExit {
    pub branch: Branch,
    /// Threshold of the boundary response at the exit point.
    pub threshold: f64,
    pub point: PlanePoint,
    /// Exit point = origin + `step` * direction.
    pub step: f64,
    pub iterations: usize,
}

/// The moment body of `Beta(r, d - r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentBody {
    d: usize,
    r: usize,
}

impl MomentBody {
    pub fn new(d: usize, r: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}, need d >= 2")));
        }
        if r == 0 || r >= d {
            return Err(Error::OutOfRange(format!("rank {r} not in [1, {}]", d - 1)));
        }
        Ok(Self { d, r })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// The body for `1 - P`, with coordinates swapped.
    pub fn complement(&self) -> Self {
        Self {
            d: self.d,
            r: self.d - self.r,
        }
    }

    fn inv_d(&self) -> f64 {
        1.0 / self.d as f64
    }

    /// `(I_c(r+1, d-r), I_c(r, d-r+1))` and their complements.
    fn tails(&self, c: f64) -> Result<((f64, f64), (f64, f64))> {
        let (d, r) = (self.d as f64, self.r as f64);
        let tu = reg_inc_beta_tails(c, r + 1.0, d - r)?;
        let tv = reg_inc_beta_tails(c, r, d - r + 1.0)?;
        Ok((tu, tv))
    }

    /// Image of `g = 1{t >= c}`.
    pub fn threshold_point_upper(&self, c: f64) -> Result<PlanePoint> {
        let ((_, u), (_, v)) = self.tails(c)?;
        Ok(PlanePoint::new(u * self.inv_d(), v * self.inv_d()))
    }

    /// Image of `g = 1{t <= c}`.
    pub fn threshold_point_lower(&self, c: f64) -> Result<PlanePoint> {
        let ((u, _), (v, _)) = self.tails(c)?;
        Ok(PlanePoint::new(u * self.inv_d(), v * self.inv_d()))
    }

    pub fn threshold_point(&self, branch: Branch, c: f64) -> Result<PlanePoint> {
        match branch {
            Branch::Lower => self.threshold_point_lower(c),
            Branch::Upper => self.threshold_point_upper(c),
        }
    }

    /// `E[t^k (1-t)^m 1{t <= c}]` under `Beta(r, d - r)`.
    pub fn truncated_moment(&self, k: u32, m: u32, c: f64) -> Result<f64> {
        let (d, r) = (self.d as f64, self.r as f64);
        let (k, m) = (k as f64, m as f64);
        let ratio = (ln_beta(r + k, d - r + m) - ln_beta(r, d - r)).exp();
        Ok(ratio * reg_inc_beta(c, r + k, d - r + m)?)
    }

    fn check_u(&self, u: f64) -> Result<()> {
        if !(0.0..=self.inv_d()).contains(&u) {
            return Err(Error::OutOfRange(format!(
                "u = {u} not in [0, 1/{}]",
                self.d
            )));
        }
        Ok(())
    }

    /// Threshold `c` at which the given branch attains first coordinate `u`.
    fn threshold_for_u(&self, branch: Branch, u: f64) -> Result<f64> {
        let target = u * self.d as f64;
        let (d, r) = (self.d as f64, self.r as f64);
        let root = Bisection::to_resolution().root(
            |c| {
                let (lo, hi) =
                    reg_inc_beta_tails(c, r + 1.0, d - r).unwrap_or((f64::NAN, f64::NAN));
                match branch {
                    Branch::Lower => lo - target,
                    Branch::Upper => target - hi,
                }
            },
            0.0,
            1.0,
        )?;
        Ok(root.x)
    }

    /// `(v_min(u), v_max(u))`.
    pub fn v_range(&self, u: f64) -> Result<(f64, f64)> {
        self.check_u(u)?;
        let c_lo = self.threshold_for_u(Branch::Lower, u)?;
        let c_hi = self.threshold_for_u(Branch::Upper, u)?;
        let v_max = self.threshold_point_lower(c_lo)?.v;
        let v_min = self.threshold_point_upper(c_hi)?.v;
        Ok((v_min, v_max))
    }

    /// Membership of a point in the cross-section, with slack [`MEMBERSHIP_EPS`].
    pub fn contains(&self, p: PlanePoint) -> bool {
        let eps = MEMBERSHIP_EPS;
        if !(p.u.is_finite() && p.v.is_finite()) || p.u < -eps || p.u > self.inv_d() + eps {
            return false;
        }
        let u = p.u.clamp(0.0, self.inv_d());
        match self.v_range(u) {
            Ok((lo, hi)) => p.v >= lo - eps && p.v <= hi + eps,
            Err(_) => false,
        }
    }

    /// Exit point of the ray `(w, w) + s * direction`, `s >= 0`, where
    /// `(w, w)` is an interior point of the diagonal chord.
    ///
    /// Both boundary branches join `(0, 0)` to `(1/d, 1/d)`, so a ray from the
    /// chord pointing into `v > u` leaves through the lower branch and one
    /// pointing into `v < u` through the upper branch, each exactly once.
    pub fn ray_exit(&self, w: f64, direction: PlanePoint) -> Result<RayExit> {
        if !(w > 0.0 && w < self.inv_d()) {
            return Err(Error::OutOfRange(format!(
                "origin ({w}, {w}) is not interior"
            )));
        }
        let (du, dv) = (direction.u, direction.v);
        if du == dv || !(du.is_finite() && dv.is_finite()) {
            return Err(Error::OutOfRange("ray runs along the diagonal".into()));
        }
        let branch = if dv > du {
            Branch::Lower
        } else {
            Branch::Upper
        };
        let cross = |c: f64| match self.threshold_point(branch, c) {
            Ok(p) => (p.u - w) * dv - (p.v - w) * du,
            Err(_) => f64::NAN,
        };
        let root = Bisection::to_resolution().root(cross, 0.0, 1.0)?;
        let point = self.threshold_point(branch, root.x)?;
        let step = ((point.u - w) * du + (point.v - w) * dv) / (du * du + dv * dv);
        Ok(RayExit {
            branch,
            threshold: root.x,
            point,
            step,
            iterations: root.iterations,
        })
    }
}
