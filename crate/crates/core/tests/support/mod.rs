//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use statrs::distribution::{Beta, ContinuousCDF};
use steering_core::qops::{haar_state_sample, RandomStream};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn sigmas(&self, exact: f64) -> f64 {
        (self.mean - exact).abs() / self.se
    }
}

fn estimate(sum: f64, sq: f64, n: usize) -> Estimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sq / nf - mean * mean) * nf / (nf - 1.0);
    Estimate {
        mean,
        se: (var / nf).sqrt(),
    }
}

/// Haar Monte-Carlo estimate of the eigenvalue coordinates `(u, v)` of
/// `int g(l) |l><l|` for `g = 1{t <= c}` (lower) or `1{t >= c}` (upper),
/// with `t` the weight of `l` on the first `r` coordinates.
pub fn mc_threshold_point(
    d: usize,
    r: usize,
    c: f64,
    lower: bool,
    samples: usize,
    stream: &mut RandomStream,
) -> (Estimate, Estimate) {
    let (mut su, mut squ, mut sv, mut sqv) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let l = haar_state_sample(d, stream);
        let t: f64 = l.iter().take(r).map(|z| z.norm_sqr()).sum();
        let on = if lower { t <= c } else { t >= c };
        if on {
            let u = t / r as f64;
            let v = (1.0 - t) / (d - r) as f64;
            su += u;
            squ += u * u;
            sv += v;
            sqv += v * v;
        }
    }
    (estimate(su, squ, samples), estimate(sv, sqv, samples))
}

/// `(v_min, v_max)` at fixed `u` from a linear program over responses that
/// are constant on `cells` equal-width bins of `t ~ Beta(r, d - r)`.
///
/// Each bound is the minimum of the one-dimensional convex Lagrange dual
/// `min_mu mu U + sum_i max(0, a_i - mu b_i)`.
pub fn lp_v_range(d: usize, r: usize, u: f64, cells: usize) -> (f64, f64) {
    let (df, rf) = (d as f64, r as f64);
    let mass = Beta::new(rf, df - rf).unwrap();
    let first = Beta::new(rf + 1.0, df - rf).unwrap();
    let mut m = Vec::with_capacity(cells);
    let mut mt = Vec::with_capacity(cells);
    for i in 0..cells {
        let (lo, hi) = (i as f64 / cells as f64, (i + 1) as f64 / cells as f64);
        m.push(mass.cdf(hi) - mass.cdf(lo));
        mt.push(rf / df * (first.cdf(hi) - first.cdf(lo)));
    }
    // u = sum g_i mt_i / r, v = sum g_i (m_i - mt_i) / (d - r)
    let target = u * rf;
    let a: Vec<f64> = m.iter().zip(&mt).map(|(m, t)| m - t).collect();
    let neg_a: Vec<f64> = a.iter().map(|x| -x).collect();
    let v_max = lp_dual(&a, &mt, target);
    let v_min = -lp_dual(&neg_a, &mt, target);
    (v_min / (df - rf), v_max / (df - rf))
}

fn lp_dual(a: &[f64], b: &[f64], target: f64) -> f64 {
    let dual = |mu: f64| {
        mu * target
            + a.iter()
                .zip(b)
                .map(|(a, b)| (a - mu * b).max(0.0))
                .sum::<f64>()
    };
    let bound = a
        .iter()
        .zip(b)
        .filter(|(_, b)| **b > 0.0)
        .map(|(a, b)| (a / b).abs())
        .fold(1.0, f64::max)
        * 2.0;
    let (mut lo, mut hi) = (-bound, bound);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if dual(x1) <= dual(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    dual(0.5 * (lo + hi))
}
