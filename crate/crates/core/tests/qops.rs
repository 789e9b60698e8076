use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};
use steering_core::qops::*;

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn overlaps(p: &Projection, samples: usize, stream: &mut RandomStream) -> Vec<f64> {
    (0..samples)
        .map(|_| {
            let l = haar_state_sample(p.dim(), stream);
            (l.adjoint() * p.matrix() * &l)[(0, 0)].re
        })
        .collect()
}

fn random_projection(d: usize, r: usize, stream: &mut RandomStream) -> Projection {
    let u = haar_unitary(d, stream);
    Projection::from_orthonormal_columns(&u.columns(0, r).into_owned()).unwrap()
}

#[test]
fn haar_overlap_laws() {
    let mut s = RandomStream::new(2024);
    for (d, r) in [(2, 1), (4, 2), (5, 1), (6, 4)] {
        let p = random_projection(d, r, &mut s);
        let law = Beta::new(r as f64, (d - r) as f64).unwrap();
        let ks = ks_statistic(overlaps(&p, 100_000, &mut s), |x| law.cdf(x));
        assert!(ks < 0.01, "d={d} r={r}: KS {ks}");
    }
}

#[test]
fn haar_states_are_normalised_and_average_to_identity() {
    let mut s = RandomStream::new(5);
    let d = 3;
    let n = 100_000;
    let mut acc = CMatrix::zeros(d, d);
    for _ in 0..n {
        let l = haar_state_sample(d, &mut s);
        assert!((l.norm() - 1.0).abs() < 1e-12);
        acc += &l * l.adjoint();
    }
    let dev = max_abs(&(acc.unscale(n as f64) - CMatrix::identity(d, d).scale(1.0 / 3.0)));
    assert!(dev < 5.0 / (n as f64).sqrt(), "{dev}");
}

#[test]
fn streams_are_reproducible_and_split() {
    let mut a = RandomStream::new(9);
    let mut b = RandomStream::new(9);
    assert_eq!(haar_state_sample(4, &mut a), haar_state_sample(4, &mut b));
    let mut c = RandomStream::new(9).split(1);
    let mut e = RandomStream::new(9).split(2);
    assert_ne!(haar_state_sample(4, &mut c), haar_state_sample(4, &mut e));
}

#[test]
fn complex_projection_conditionals() {
    let mut s = RandomStream::new(77);
    for d in 2..=4 {
        for r in 1..d {
            let p = random_projection(d, r, &mut s);
            assert!(p.matrix().iter().any(|z| z.im.abs() > 1e-3));
            let df = d as f64;
            let iso = isotropic_state(d, 1.0)
                .unwrap()
                .conditional_state(&p.to_operator())
                .unwrap();
            let want = p.matrix().transpose().unscale(df);
            assert!(max_abs(&(iso.matrix() - want)) < 1e-12);
            let w = werner_state(d, 1.0)
                .unwrap()
                .conditional_state(&p.to_operator())
                .unwrap();
            let want =
                (CMatrix::identity(d, d).scale(r as f64) - p.matrix()).unscale(df * (df - 1.0));
            assert!(max_abs(&(w.matrix() - want)) < 1e-12);
        }
    }
}

#[test]
fn refined_povm_coarse_grains_back() {
    let mut s = RandomStream::new(31);
    let effects = random_povm_effects(3, 3, &mut s).unwrap();
    let povm = canonical_povm(&effects).unwrap();
    assert!(povm.len() <= 9);
    assert!((povm.weights().iter().sum::<f64>() - 3.0).abs() < 1e-12);
    let rho = BipartiteState::from_density(3, 3, random_density_matrix(9, &mut s)).unwrap();
    let refined: Vec<CMatrix> = (0..povm.len())
        .map(|a| {
            rho.conditional_state(&povm.effect(a))
                .unwrap()
                .into_matrix()
        })
        .collect();
    for (e, got) in effects.iter().zip(povm.coarse_grain(&refined)) {
        let want = rho.conditional_state(e).unwrap();
        assert!(max_abs(&(got - want.matrix())) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn families_are_unitarily_covariant(seed in any::<u64>(), d in 2usize..=4, eta in 0.0f64..=1.0) {
        let mut s = RandomStream::new(seed);
        let u = haar_unitary(d, &mut s);
        let w = werner_state(d, eta).unwrap();
        let uu = kron(&u, &u);
        prop_assert!(max_abs(&(&uu * w.matrix() * uu.adjoint() - w.matrix())) < 1e-10);
        let iso = isotropic_state(d, eta).unwrap();
        let uc = kron(&u, &u.map(|z| z.conj()));
        prop_assert!(max_abs(&(&uc * iso.matrix() * uc.adjoint() - iso.matrix())) < 1e-10);
    }

    #[test]
    fn conditional_states_are_linear(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut s = RandomStream::new(seed);
        let rho = BipartiteState::from_density(da, db, random_density_matrix(da * db, &mut s)).unwrap();
        let pair = random_povm_effects(da, 2, &mut s).unwrap();
        let sum = rho.conditional_state(&pair[0]).unwrap().into_matrix()
            + rho.conditional_state(&pair[1]).unwrap().matrix();
        prop_assert!(max_abs(&(sum - rho.reduced_b().matrix())) < 1e-12);
        let c = rho.conditional_state(&pair[0]).unwrap();
        prop_assert!(c.min_eigenvalue() > -1e-12);
        let tr = trace_product(&kron(pair[0].matrix(), &CMatrix::identity(db, db)), rho.matrix());
        prop_assert!((c.trace() - tr).abs() < 1e-12);
    }

    #[test]
    fn canonical_weights_sum_to_dimension(seed in any::<u64>(), d in 2usize..=4, n in 1usize..=4) {
        let mut s = RandomStream::new(seed);
        let povm = canonical_povm(&random_povm_effects(d, n, &mut s).unwrap()).unwrap();
        prop_assert!((povm.weights().iter().sum::<f64>() - d as f64).abs() < 1e-12);
        let total = (0..povm.len()).fold(CMatrix::zeros(d, d), |acc, a| acc + povm.effect(a).matrix());
        prop_assert!(max_abs(&(total - CMatrix::identity(d, d))) < 1e-10);
    }
}

#[test]
fn swap_overlap_with_max_entangled() {
    for d in 2..=3 {
        let f = swap_operator(d);
        let phi = max_entangled_projector(d);
        assert!((trace_product(f.matrix(), phi.matrix()) - 1.0).abs() < 1e-12);
    }
}
