//! Bracketing bisection used by the moment-body and radius solvers.

use crate::{Error, Result};

/// Iteration cap and absolute tolerance for a bracketing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for Bisection {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl Bisection {
    /// Bisect until the bracket cannot shrink any further in double precision.
    pub fn to_resolution() -> Self {
        Self {
            abs_tol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
    /// Width of the final bracket.
    pub width: f64,
}

impl Bisection {
    /// Locate a sign change of `f` on `[lo, hi]`.
    pub fn root<F: FnMut(f64) -> f64>(&self, mut f: F, mut lo: f64, mut hi: f64) -> Result<Root> {
        let mut f_lo = f(lo);
        let f_hi = f(hi);
        if f_lo == 0.0 {
            return Ok(Root {
                x: lo,
                iterations: 0,
                width: 0.0,
            });
        }
        if f_hi == 0.0 {
            return Ok(Root {
                x: hi,
                iterations: 0,
                width: 0.0,
            });
        }
        if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
            return Err(Error::NoConvergence(format!(
                "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
            )));
        }
        for it in 1..=self.max_iter {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(Root {
                    x: mid,
                    iterations: it,
                    width: hi - lo,
                });
            }
            let f_mid = f(mid);
            if f_mid == 0.0 {
                return Ok(Root {
                    x: mid,
                    iterations: it,
                    width: 0.0,
                });
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
            if hi - lo <= self.abs_tol {
                return Ok(Root {
                    x: 0.5 * (lo + hi),
                    iterations: it,
                    width: hi - lo,
                });
            }
        }
        if hi - lo <= self.abs_tol.max(1e-12) {
            Ok(Root {
                x: 0.5 * (lo + hi),
                iterations: self.max_iter,
                width: hi - lo,
            })
        } else {
            Err(Error::NoConvergence(format!(
                "bisection hit the {}-iteration cap with bracket width {:e}",
                self.max_iter,
                hi - lo
            )))
        }
    }

    /// Largest `x` in `[lo, hi]` with `accept(x)`, given `accept(lo)` holds
    /// and the accepted set is an interval containing `lo`. Returns the last
    /// accepted point.
    pub fn last_accepted<F: FnMut(f64) -> Result<bool>>(
        &self,
        mut accept: F,
        mut lo: f64,
        mut hi: f64,
    ) -> Result<Root> {
        if accept(hi)? {
            return Ok(Root {
                x: hi,
                iterations: 0,
                width: 0.0,
            });
        }
        let mut it = 0;
        while hi - lo > self.abs_tol {
            if it == self.max_iter {
                return Err(Error::NoConvergence(format!(
                    "bisection hit the {}-iteration cap with bracket width {:e}",
                    self.max_iter,
                    hi - lo
                )));
            }
            it += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if accept(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Root {
            x: lo,
            iterations: it,
            width: hi - lo,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = Bisection::default()
            .root(|x| x * x - 2.0, 0.0, 2.0)
            .unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.iterations <= 200);
    }

    #[test]
    fn resolution_mode_hits_machine_precision() {
        let r = Bisection::to_resolution()
            .root(|x| x - 0.1, 0.0, 1.0)
            .unwrap();
        assert!((r.x - 0.1).abs() < 1e-16);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(Bisection::default()
            .root(|x| x * x + 1.0, -1.0, 1.0)
            .is_err());
    }

    #[test]
    fn last_accepted_brackets_threshold() {
        let r = Bisection {
            abs_tol: 1e-9,
            max_iter: 200,
        }
        .last_accepted(|x| Ok(x <= 0.3), 0.0, 1.0)
        .unwrap();
        assert!(r.x <= 0.3 && 0.3 - r.x < 1e-9);
    }
}
