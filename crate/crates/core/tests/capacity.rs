mod support;

use proptest::prelude::*;
use steering_core::capacity::{MomentBody, PlanePoint};
use steering_core::qops::RandomStream;
use steering_core::radii::{closed_form_r2, conditional_plane_point, StateFamily};
use support::{lp_v_range, mc_threshold_point};

#[test]
fn threshold_points_match_monte_carlo() {
    let mut s = RandomStream::new(8);
    for (d, r) in [(3, 1), (4, 2)] {
        let body = MomentBody::new(d, r).unwrap();
        let c = r as f64 / d as f64;
        for lower in [true, false] {
            let p = if lower {
                body.threshold_point_lower(c).unwrap()
            } else {
                body.threshold_point_upper(c).unwrap()
            };
            let (u, v) = mc_threshold_point(d, r, c, lower, 200_000, &mut s);
            assert!(
                u.sigmas(p.u) < 3.0,
                "d={d} r={r} lower={lower}: u {u:?} vs {}",
                p.u
            );
            assert!(
                v.sigmas(p.v) < 3.0,
                "d={d} r={r} lower={lower}: v {v:?} vs {}",
                p.v
            );
        }
    }
}

#[test]
fn v_range_matches_linear_program() {
    for (d, r, u) in [(3, 1, 1.0 / 6.0), (4, 1, 0.1), (5, 2, 0.05), (6, 3, 0.15)] {
        let body = MomentBody::new(d, r).unwrap();
        let (lo, hi) = body.v_range(u).unwrap();
        let (lp_lo, lp_hi) = lp_v_range(d, r, u, 10_000);
        assert!((lo - lp_lo).abs() < 1e-4, "d={d} r={r}: {lo} vs {lp_lo}");
        assert!((hi - lp_hi).abs() < 1e-4, "d={d} r={r}: {hi} vs {lp_hi}");
    }
}

#[test]
fn werner_point_flips_at_closed_form() {
    let w = StateFamily::werner(3).unwrap();
    let body = MomentBody::new(3, 1).unwrap();
    let r2 = closed_form_r2(w);
    assert!(body.contains(conditional_plane_point(w, 1, r2 - 1e-6).unwrap()));
    assert!(!body.contains(conditional_plane_point(w, 1, r2 + 1e-6).unwrap()));
}

fn body_strategy() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=12).prop_flat_map(|d| (Just(d), 1..d))
}

fn member(body: &MomentBody, su: f64, sv: f64) -> PlanePoint {
    let u = su / body.dim() as f64;
    let (lo, hi) = body.v_range(u).unwrap();
    PlanePoint::new(u, lo + sv * (hi - lo))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn complement_symmetry((d, r) in body_strategy(), su in 0.0f64..=1.0, sv in 0.0f64..=1.0) {
        let body = MomentBody::new(d, r).unwrap();
        let p = member(&body, su, sv);
        let k = 1.0 / d as f64;
        prop_assert!(body.contains(p));
        prop_assert!(body.contains(PlanePoint::new(k - p.u, k - p.v)));
    }

    #[test]
    fn rank_duality((d, r) in body_strategy(), su in 0.0f64..=1.0, sv in -0.2f64..=1.2) {
        let body = MomentBody::new(d, r).unwrap();
        let dual = MomentBody::new(d, d - r).unwrap();
        let u = su / d as f64;
        let (lo, hi) = body.v_range(u).unwrap();
        let p = PlanePoint::new(u, lo + sv * (hi - lo));
        // keep clear of the boundary, where the two oracles may round differently
        prop_assume!(sv < -1e-6 || (1e-6..=1.0 - 1e-6).contains(&sv) || sv > 1.0 + 1e-6);
        prop_assume!((1e-9..=1.0 - 1e-9).contains(&su));
        prop_assert_eq!(body.contains(p), dual.contains(PlanePoint::new(p.v, p.u)));
    }

    #[test]
    fn convexity((d, r) in body_strategy(), a in (0.0f64..=1.0, 0.0f64..=1.0), b in (0.0f64..=1.0, 0.0f64..=1.0), xi in 0.0f64..=1.0) {
        let body = MomentBody::new(d, r).unwrap();
        let p = member(&body, a.0, a.1);
        let q = member(&body, b.0, b.1);
        let m = PlanePoint::new(xi * p.u + (1.0 - xi) * q.u, xi * p.v + (1.0 - xi) * q.v);
        prop_assert!(body.contains(m));
    }

    #[test]
    fn lower_threshold_points_are_boundary((d, r) in body_strategy(), c in 0.01f64..=0.99) {
        let body = MomentBody::new(d, r).unwrap();
        let p = body.threshold_point_lower(c).unwrap();
        prop_assert!(body.contains(p));
        prop_assert!(!body.contains(PlanePoint::new(p.u, p.v + 1e-6)));
        let q = body.threshold_point_upper(c).unwrap();
        prop_assert!(body.contains(q));
        prop_assert!(!body.contains(PlanePoint::new(q.u, q.v - 1e-6)));
    }
}
