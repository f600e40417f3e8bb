mod common;

use chiral_rmt::linalg::{
    hermitian_eigenvalues, pfaffian, sample_ginibre, singular_values, ComplexMatrix, RngStream,
};
use chiral_rmt::quadrature::{integrate_2d, integrate_finite, theta_integral, Interval, QuadratureSpec};
use chiral_rmt::specfun::{bessel_i0_scaled, bessel_i1_scaled, hermite_monic, laguerre};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn skew(n: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random_range(-2.0..2.0);
            a[i * n + j] = v;
            a[j * n + i] = -v;
        }
    }
    a
}

proptest! {
    #[test]
    fn i0_scaled_in_unit_interval_and_decreasing(x in 0.0f64..500.0, dx in 1e-3f64..50.0) {
        let a = bessel_i0_scaled(x);
        let b = bessel_i0_scaled(x + dx);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn scaled_bessel_matches_series(x in 0.0f64..12.0) {
        let want0 = common::i0_series(x) * (-x).exp();
        let want1 = common::i1_series(x) * (-x).exp();
        prop_assert!((bessel_i0_scaled(x) - want0).abs() <= 1e-13 * want0);
        prop_assert!((bessel_i1_scaled(x) - want1).abs() <= 1e-13 * want1.max(1e-300));
    }

    #[test]
    fn laguerre_three_term_recurrence(n in 1usize..20, alpha in 0.0f64..4.0, y in -20.0f64..20.0) {
        let nf = n as f64;
        let lp = laguerre(n + 1, alpha, y);
        let l = laguerre(n, alpha, y);
        let lm = laguerre(n - 1, alpha, y);
        let lhs = (nf + 1.0) * lp;
        let rhs = (2.0 * nf + 1.0 + alpha - y) * l - (nf + alpha) * lm;
        let scale = lhs.abs().max(((2.0 * nf + 1.0 + alpha - y) * l).abs()).max(((nf + alpha) * lm).abs());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn pfaffian_under_permutation(n in 1usize..7, seed in any::<u64>(), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let n = 2 * n;
        let a = skew(n, seed);
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut ChaCha20Rng::seed_from_u64(perm_seed));
        // (PᵀAP)_{ij} = A_{p(i) p(j)}
        let b: Vec<f64> = (0..n * n).map(|k| a[p[k / n] * n + p[k % n]]).collect();
        let mut sign = 1.0;
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = p[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        let pa = pfaffian(&a, n).unwrap();
        let pb = pfaffian(&b, n).unwrap();
        prop_assert_eq!(pb.signum(), sign * pa.signum());
        prop_assert!((pb - sign * pa).abs() <= 1e-10 * pa.abs().max(1.0));
    }

    #[test]
    fn pfaffian_squared_is_determinant(n in 1usize..7, seed in any::<u64>()) {
        let n = 2 * n;
        let a = skew(n, seed);
        let pf = pfaffian(&a, n).unwrap();
        let det = common::det_lu(&a, n);
        prop_assert!((pf * pf - det).abs() <= 1e-9 * det.abs().max(1e-12));
    }

    #[test]
    fn singular_values_from_chiral_block(n in 1usize..6, seed in any::<u64>()) {
        let w = sample_ginibre(n, &mut ChaCha20Rng::seed_from_u64(seed));
        let sv = singular_values(&w).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let wd = w.adjoint();
        // [[0, iW], [iW†, 0]] is anti-Hermitian with eigenvalues ±iλ; −i times it is Hermitian.
        let dirac = ComplexMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, false) => i * w[(r, c - n)],
            (false, true) => i * wd[(r - n, c)],
            _ => Complex64::new(0.0, 0.0),
        });
        let mut folded: Vec<f64> = hermitian_eigenvalues(&dirac.scale(-i)).unwrap().into_iter().filter(|&e| e >= 0.0).collect();
        folded.sort_by(f64::total_cmp);
        prop_assert_eq!(folded.len(), n);
        for (a, b) in sv.iter().zip(&folded) {
            prop_assert!((a - b).abs() <= 1e-10 * sv[n - 1].max(1.0));
        }
    }

    #[test]
    fn identical_streams_reproduce(seed in any::<u64>(), id in any::<u64>()) {
        use rand::Rng;
        let a: Vec<u64> = RngStream::new(seed, id).rng().random_iter().take(16).collect();
        let b: Vec<u64> = RngStream::new(seed, id).rng().random_iter().take(16).collect();
        let c: Vec<u64> = RngStream::new(seed, id.wrapping_add(1)).rng().random_iter().take(16).collect();
        prop_assert_eq!(&a, &b);
        prop_assert_ne!(&a, &c);
    }

    #[test]
    fn theta_integral_is_linear_in_sign(k in 0.1f64..3.0) {
        let spec = QuadratureSpec::default();
        let f = |s: f64, c: f64| s * (k * c).exp();
        let a = theta_integral(f, &spec).unwrap().value;
        let b = theta_integral(|s, c| -f(s, c), &spec).unwrap().value;
        prop_assert_eq!(a, -b);
    }
}

#[test]
fn i0_derivative_is_i1() {
    for k in 0..=100 {
        let x = 0.1 + 49.9 * k as f64 / 100.0;
        let e = 1e-5 * x.max(1.0);
        // d/dx [e^x i0e(x)] e^{-x} = i0e' + i0e
        let d = (bessel_i0_scaled(x + e) * e.exp() - bessel_i0_scaled(x - e) * (-e).exp()) / (2.0 * e);
        let want = bessel_i1_scaled(x);
        assert!(((d - want) / want).abs() < 1e-6, "x = {x}: {d} vs {want}");
    }
}

#[test]
fn hermite_is_monic() {
    for n in 0..=8 {
        let x: f64 = 1e3;
        let r = hermite_monic(n, x) / x.powi(n as i32);
        assert!((r - 1.0).abs() < 1e-4, "n = {n}: {r}");
    }
}

#[test]
fn antisymmetric_two_dim_integral_is_within_its_error() {
    let spec = QuadratureSpec::new(1e-10, 1e-8, 100).unwrap();
    let r = integrate_2d(
        |x, y| (x - y) * (x * x + y).exp() * (x + 2.0 * y).sin() * (y * y + x).exp() * (y + 2.0 * x).sin(),
        Interval::Finite(-1.0, 1.0),
        Interval::Finite(-1.0, 1.0),
        &spec,
    );
    assert!(r.converged);
    assert!(r.value.abs() <= r.error_estimate.max(1e-15), "{} > {}", r.value, r.error_estimate);
}

#[test]
fn finite_integral_error_estimate_is_nonnegative() {
    for spec in [QuadratureSpec::default(), QuadratureSpec::new(1e-4, 1e-4, 1).unwrap()] {
        let r = integrate_finite(|x| (10.0 * x).sin() / (1.0 + x * x), 0.0, 7.0, &spec);
        assert!(r.error_estimate >= 0.0 && r.value.is_finite());
    }
}
