use ehyper::sampler::has_tie;
use ehyper::specfun::{elliptic_gamma, theta, theta_addition_residual, BasePair, TruncationPolicy};
use ehyper::C64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn polar(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo.ln()..hi.ln(), 0.0..std::f64::consts::TAU).prop_map(|(r, a)| C64::from_polar(r.exp(), a))
}

fn base() -> impl Strategy<Value = BasePair> {
    (polar(0.15, 0.4), polar(0.15, 0.4))
        .prop_filter("distinct", |(p, q)| (p - q).norm() > 1e-3)
        .prop_map(|(p, q)| BasePair::new(p, q).unwrap())
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

/// Product formula truncated far past double precision.
fn naive_theta(z: C64, p: C64) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    let mut pk = C64::new(1.0, 0.0);
    for _ in 0..200 {
        r *= (1.0 - pk * z) * (1.0 - pk * p / z);
        pk *= p;
    }
    r
}

fn naive_gamma(z: C64, p: C64, q: C64) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    let mut pj = C64::new(1.0, 0.0);
    for _ in 0..60 {
        let mut qk = C64::new(1.0, 0.0);
        for _ in 0..60 {
            r *= (1.0 - pj * qk * p * q / z) / (1.0 - pj * qk * z);
            qk *= q;
        }
        pj *= p;
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig { rng_seed: RngSeed::Fixed(64), ..ProptestConfig::with_cases(64) })]

    #[test]
    fn theta_matches_naive_product(z in polar(0.3, 3.0), p in polar(0.05, 0.4)) {
        let v = theta(z, p, &TruncationPolicy::default()).unwrap();
        prop_assert!(rel(v, naive_theta(z, p)) < 1e-12);
    }

    #[test]
    fn gamma_matches_naive_product(z in polar(0.3, 2.0), b in base()) {
        let v = elliptic_gamma(z, &b, &TruncationPolicy::default()).unwrap();
        prop_assert!(rel(v, naive_gamma(z, b.p(), b.q())) < 1e-11);
    }

    #[test]
    fn theta_quasi_periodic(z in polar(0.3, 3.0), p in polar(0.15, 0.4)) {
        let pol = TruncationPolicy::default();
        let t = theta(z, p, &pol).unwrap();
        prop_assert!(rel(theta(p * z, p, &pol).unwrap(), -t / z) < 1e-12);
        prop_assert!(rel(theta(1.0 / z, p, &pol).unwrap(), -t / z) < 1e-12);
    }

    #[test]
    fn gamma_shifts_and_symmetry(z in polar(0.3, 2.0), b in base()) {
        let pol = TruncationPolicy::default();
        let g = |x: C64| elliptic_gamma(x, &b, &pol).unwrap();
        let gz = g(z);
        prop_assert!(rel(g(b.q() * z), theta(z, b.p(), &pol).unwrap() * gz) < 1e-12);
        prop_assert!(rel(g(b.p() * z), theta(z, b.q(), &pol).unwrap() * gz) < 1e-12);
        prop_assert!(rel(gz * g(b.pq() / z), C64::new(1.0, 0.0)) < 1e-12);
        prop_assert!(rel(elliptic_gamma(z, &b.swapped(), &pol).unwrap(), gz) < 1e-12);
    }

    #[test]
    fn addition_formula(x in polar(0.3, 2.0), y in polar(0.3, 2.0), u in polar(0.3, 2.0), v in polar(0.3, 2.0), p in polar(0.15, 0.4)) {
        prop_assume!(!has_tie(&[x, y, u, v]));
        let r = theta_addition_residual(x, y, u, v, p, &TruncationPolicy::default()).unwrap();
        prop_assert!(r.relative() < 1e-11);
    }
}

#[test]
fn theta_zeros_and_conjugation() {
    let pol = TruncationPolicy::default();
    let p = C64::new(0.2, 0.1);
    assert!(theta(C64::new(1.0, 0.0), p, &pol).unwrap().norm() < 1e-15);
    let z = C64::new(0.7, -0.4);
    let c = theta(z.conj(), p.conj(), &pol).unwrap();
    assert!(rel(c, theta(z, p, &pol).unwrap().conj()) < 1e-14);
}

#[test]
fn rejects_bad_bases() {
    assert!(BasePair::new(C64::new(1.0, 0.0), C64::new(0.2, 0.0)).is_err());
    assert!(theta(C64::new(0.5, 0.0), C64::new(0.0, 1.2), &TruncationPolicy::default()).is_err());
}
