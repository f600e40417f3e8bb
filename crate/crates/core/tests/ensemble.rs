use chiral_rmt::ensemble::{
    jpdf, jpdf_pfaffian_matrix, ln_norm_constant, make_coupling, vandermonde, weight_big_g, weight_g, WeightSet,
};
use chiral_rmt::linalg::pfaffian;
use chiral_rmt::quadrature::{gauss_legendre, integrate_semi_infinite, QuadratureSpec};
use chiral_rmt::Error;
use proptest::prelude::*;

fn tight() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-10, 200).unwrap()
}

/// Composite Gauss–Legendre nodes, graded towards the origin where the
/// small-μ density varies on the scale μ.
fn nodes(per: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(per);
    [0.0, 0.2, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0]
        .windows(2)
        .flat_map(|p| {
            let (a, h) = (p[0], p[1] - p[0]);
            x.iter().zip(&w).map(move |(x, w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w)).collect::<Vec<_>>()
        })
        .collect()
}

proptest! {
    #[test]
    fn eta_difference_is_one_half(mu in 1e-3f64..=1.0) {
        let c = make_coupling(mu).unwrap();
        prop_assert!((c.eta_plus - c.eta_minus - 0.5).abs() <= 1e-15 * c.eta_plus.max(1.0));
    }

    #[test]
    fn weights_finite_antisymmetric_nonnegative(mu in 0.05f64..0.99, l1 in 0.0f64..10.0, l2 in 0.0f64..10.0) {
        let c = make_coupling(mu).unwrap();
        let s = QuadratureSpec::default();
        let g = weight_g(l1, &c);
        prop_assert!(g.is_finite() && g >= 0.0);
        let a = weight_big_g(l1, l2, &c, &s).unwrap();
        let b = weight_big_g(l2, l1, &c, &s).unwrap();
        prop_assert!(a.is_finite());
        prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-300));
        let w = WeightSet::new(c);
        let t = w.g_tilde(l1, l2).unwrap();
        let u = w.g_tilde(l2, l1).unwrap();
        prop_assert!(t.is_finite() && (t + u).abs() <= 1e-10 * t.abs().max(1e-12));
    }
}

#[test]
fn mu_outside_unit_interval_is_a_domain_error() {
    for mu in [0.0, -0.5, 1.5, f64::NAN] {
        match make_coupling(mu) {
            Err(Error::Domain(msg)) => assert!(msg.contains("1/mu"), "{msg}"),
            other => panic!("mu = {mu}: {other:?}"),
        }
    }
}

#[test]
fn integrated_weights_vanish() {
    let s = tight();
    for mu in [0.2, 0.5] {
        let w = WeightSet::new(make_coupling(mu).unwrap());
        let total_h = integrate_semi_infinite(|x| w.h(x).unwrap(), 2.0, &s);
        assert!(total_h.value.abs() < 1e-6, "mu = {mu}: {}", total_h.value);
        for l in [0.3, 1.0, 2.0] {
            let r = integrate_semi_infinite(|x| w.g_tilde(x, l).unwrap(), 2.0, &s);
            assert!(r.value.abs() < 1e-6, "mu = {mu}, lambda = {l}: {}", r.value);
        }
    }
}

#[test]
fn g_integrates_to_g_bar() {
    let w = WeightSet::new(make_coupling(0.3).unwrap());
    let r = integrate_semi_infinite(|x| w.g(x), 1.0, &tight());
    assert!((r.value - 2.0 * std::f64::consts::PI.sqrt() * 0.3).abs() < 1e-10);
}

#[test]
fn jpdf_is_normalized() {
    let s = tight();
    for mu in [0.1, 0.5, 0.9] {
        let c = make_coupling(mu).unwrap();
        let one = integrate_semi_infinite(|x| jpdf(&[x], &c).unwrap(), 1.5, &s).value;
        assert!((one - 1.0).abs() < 1e-5, "N = 1, mu = {mu}: {one}");

        let pts = nodes(12);
        let mut two = 0.0;
        for (i, &(x, wx)) in pts.iter().enumerate() {
            for &(y, wy) in &pts[i + 1..] {
                two += 2.0 * wx * wy * jpdf(&[x, y], &c).unwrap();
            }
        }
        assert!((two - 1.0).abs() < 1e-5, "N = 2, mu = {mu}: {two}");

        // N = 3 on the same product grid. The weights are tabulated once per
        // node pair and the density is assembled from the bordered 4 × 4
        // Pfaffian; the assembly is checked against jpdf on sampled triples.
        let w = WeightSet::new(c);
        let m = pts.len();
        let g: Vec<f64> = pts.iter().map(|p| w.g(p.0)).collect();
        let mut gt = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                gt[i * m + j] = w.g_tilde(pts[j].0, pts[i].0).unwrap();
            }
        }
        let c3 = (ln_norm_constant(3, &c).unwrap()).exp() / 6.0;
        let assembled = |i: usize, j: usize, k: usize| {
            let sq = [pts[i].0.powi(2), pts[j].0.powi(2), pts[k].0.powi(2)];
            let pf = gt[i * m + j] * g[k] - gt[i * m + k] * g[j] + gt[j * m + k] * g[i];
            c3 * vandermonde(&sq) * pf
        };
        for (i, j, k) in [(0, 1, 2), (3, 20, 41), (10, 11, 60), (30, 50, 83), (5, 45, 46)] {
            let direct = jpdf(&[pts[i].0, pts[j].0, pts[k].0], &c).unwrap();
            let a = assembled(i, j, k);
            // the two evaluate G̃ in a different order; deep in the tails that costs digits
            assert!((a - direct).abs() <= 1e-8 * direct.abs() + 1e-16, "{a} vs {direct}");
        }
        let mut three = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    three += 6.0 * pts[i].1 * pts[j].1 * pts[k].1 * assembled(i, j, k);
                }
            }
        }
        assert!((three - 1.0).abs() < 1e-5, "N = 3, mu = {mu}: {three}");
    }
}

#[test]
fn odd_jpdf_unchanged_when_g_tilde_is_replaced_by_g() {
    let w = WeightSet::new(make_coupling(0.6).unwrap());
    for lambda in [vec![0.4, 1.2, 2.1], vec![0.2, 0.9, 1.5, 2.2, 3.0]] {
        let (m, dim) = jpdf_pfaffian_matrix(&lambda, &w).unwrap();
        let n = lambda.len();
        let mut plain = vec![0.0; dim * dim];
        for a in 0..n {
            for b in (a + 1)..n {
                let v = w.big_g(lambda[b], lambda[a]).unwrap();
                plain[a * dim + b] = v;
                plain[b * dim + a] = -v;
            }
            plain[a * dim + n] = w.g(lambda[a]);
            plain[n * dim + a] = -w.g(lambda[a]);
        }
        let p1 = pfaffian(&m, dim).unwrap();
        let p2 = pfaffian(&plain, dim).unwrap();
        assert!(((p1 - p2) / p1).abs() < 1e-10, "{p1} vs {p2}");
    }
}

#[test]
fn jpdf_rejects_bad_input_and_ties_vanish() {
    let c = make_coupling(0.5).unwrap();
    assert!(jpdf(&[], &c).is_err());
    assert!(jpdf(&[-1.0, 2.0], &c).is_err());
    assert_eq!(jpdf(&[0.7, 1.3, 0.7], &c).unwrap(), 0.0);
    assert!(matches!(jpdf(&[0.5, 1.0], &make_coupling(1.0).unwrap()), Err(Error::DegenerateEndpoint(_))));
}
