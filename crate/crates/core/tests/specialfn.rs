use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statpriv::specialfn::*;
use statpriv::Error;

const INV_E: f64 = 0.367_879_441_171_442_33;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn normal_cdf_matches_quadrature() {
    for &x in &[-4.0, -1.7, -0.3, 0.0, 0.8, 2.5] {
        let q = 0.5 + simpson(0.0, x, 2000, std_normal_pdf);
        assert!((std_normal_cdf(x) - q).abs() < 1e-12, "x={x}");
    }
    assert_eq!(std_normal_cdf(0.0), 0.5);
    assert!(std_normal_cdf(f64::NAN).is_nan());
}

#[test]
fn normal_quantile_matches_bisection() {
    for &p in &[1e-10, 1e-4, 0.01, 0.024, 0.3, 0.5, 0.77, 0.975, 0.999, 1.0 - 1e-9] {
        let x = std_normal_quantile(p).unwrap();
        let oracle = if p < 0.5 {
            bisect(-40.0, 0.0, |t| std_normal_cdf(t) - p)
        } else {
            bisect(0.0, 40.0, |t| (1.0 - p) - std_normal_cdf(-t))
        };
        assert!((x - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "p={p}: {x} vs {oracle}");
    }
    assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
}

#[test]
fn normal_quantile_domain() {
    for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(matches!(std_normal_quantile(p), Err(Error::Domain(_))));
    }
}

#[test]
fn lambert_known_values() {
    assert_eq!(lambert_w(Branch::Principal, 0.0).unwrap(), 0.0);
    assert!((lambert_w(Branch::Principal, 1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
    assert!((lambert_w(Branch::Principal, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
    assert!((lambert_w(Branch::Principal, -INV_E).unwrap() + 1.0).abs() < 1e-7);
    assert!((lambert_w(Branch::Minus1, -INV_E).unwrap() + 1.0).abs() < 1e-7);
    // -2 e^{-2}
    let x = -2.0 * (-2.0f64).exp();
    assert!((lambert_w(Branch::Minus1, x).unwrap() + 2.0).abs() < 1e-13);
}

#[test]
fn lambert_domain_errors() {
    assert!(lambert_w(Branch::Principal, -0.5).is_err());
    assert!(lambert_w(Branch::Minus1, 0.0).is_err());
    assert!(lambert_w(Branch::Minus1, 0.1).is_err());
    assert!(lambert_w(Branch::Minus1, -0.4).is_err());
}

#[test]
fn lambert_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = -INV_E + rng.random::<f64>() * 20.0;
        let w = lambert_w(Branch::Principal, x).unwrap();
        let oracle = bisect(-1.0, 10.0, |w| w * w.exp() - x);
        assert!((w - oracle).abs() < 1e-9, "x={x}");
        let x = -INV_E * rng.random::<f64>().max(1e-12);
        let w = lambert_w(Branch::Minus1, x).unwrap();
        let oracle = bisect(-60.0, -1.0, |w| w * w.exp() - x);
        assert!((w - oracle).abs() < 1e-7 * oracle.abs(), "x={x}");
    }
}

#[test]
fn beta_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let x: f64 = rng.random();
        let a = 0.1 + 20.0 * rng.random::<f64>();
        let b = 0.1 + 20.0 * rng.random::<f64>();
        let s = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "x={x} a={a} b={b}");
    }
    assert_eq!(reg_inc_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
    assert_eq!(reg_inc_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
    assert!(reg_inc_beta(1.2, 2.0, 3.0).is_err());
    assert!(reg_inc_beta(0.5, 0.0, 3.0).is_err());
}

#[test]
fn beta_matches_quadrature() {
    for &(x, a, b) in &[(0.3, 2.0, 3.0), (0.7, 2.5, 4.5), (0.5, 5.0, 5.0), (0.9, 1.0, 2.0)] {
        let norm = simpson(0.0, 1.0, 20_000, |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0));
        let part = simpson(0.0, x, 20_000, |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0));
        assert!((reg_inc_beta(x, a, b).unwrap() - part / norm).abs() < 1e-9);
    }
}

#[test]
fn beta_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let x: f64 = rng.random();
        let a = 0.2 + 10.0 * rng.random::<f64>();
        assert!((reg_inc_beta(x, 1.0, a).unwrap() - (1.0 - (1.0 - x).powf(a))).abs() < 1e-13);
        assert!((reg_inc_beta(x, a, 1.0).unwrap() - x.powf(a)).abs() < 1e-13);
        assert!((reg_inc_beta(0.5, a, a).unwrap() - 0.5).abs() < 1e-13);
    }
}

#[test]
fn gamma_identities() {
    for s in [0.5, 1.0, 3.0, 17.5] {
        assert_eq!(reg_gamma_q(s, 0.0).unwrap(), 1.0);
    }
    for n in 1..=40u32 {
        for &x in &[0.01f64, 0.5, 1.0, 3.7, 10.0, 25.0, 60.0] {
            let mut term = (-x).exp();
            let mut sum = term;
            for k in 1..n {
                term *= x / k as f64;
                sum += term;
            }
            let q = reg_gamma_q(n as f64, x).unwrap();
            assert!((q - sum).abs() < 1e-12, "n={n} x={x}: {q} vs {sum}");
        }
    }
    assert!(reg_gamma_q(0.0, 1.0).is_err());
    assert!(reg_gamma_q(1.0, -1.0).is_err());
}

proptest! {
    #[test]
    fn lambert_principal_round_trip(x in -INV_E..1e6) {
        let w = lambert_w(Branch::Principal, x).unwrap();
        prop_assert!(w >= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-10 * x.abs().max(1.0));
    }

    #[test]
    fn lambert_minus1_round_trip(u in 1e-300f64..1.0) {
        let x = -INV_E * u;
        let w = lambert_w(Branch::Minus1, x).unwrap();
        prop_assert!(w <= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-10 * x.abs().max(1e-300));
    }

    #[test]
    fn normal_quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12)) {
        let x = std_normal_quantile(p).unwrap();
        let back = if x <= 0.0 { std_normal_cdf(x) } else { 1.0 - std_normal_cdf(-x) };
        prop_assert!((back - p).abs() <= 1e-12 * p.min(1.0 - p).max(1e-3));
    }

    #[test]
    fn normal_cdf_monotone(a in -30.0f64..30.0, d in 0.0f64..5.0) {
        prop_assert!(std_normal_cdf(a) <= std_normal_cdf(a + d));
    }
}
