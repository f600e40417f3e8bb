use chiral_rmt::ensemble::{make_coupling, norm_constant, weight_g};
use chiral_rmt::kernels::{
    correlation, kernel_g, kernel_k, kernel_w, level_density, partition_z01, partition_z0f, CorrelationRequest,
    KernelSet, Mass,
};
use chiral_rmt::linalg::RngStream;
use chiral_rmt::montecarlo::characteristic_product_mc;
use chiral_rmt::Error;
use proptest::prelude::*;

fn set(n: usize, mu: f64) -> KernelSet {
    KernelSet::new(n, make_coupling(mu).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_antisymmetric(n in 1usize..=5, mu in 0.1f64..0.9, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let ks = set(n, mu);
        let k1 = kernel_k(&ks, a, b);
        let k2 = kernel_k(&ks, b, a);
        prop_assert!((k1 + k2).abs() <= 1e-8 * k1.abs().max(1.0));
        prop_assert_eq!(kernel_k(&ks, a, a), 0.0);
        let w1 = kernel_w(&ks, a, b).unwrap();
        let w2 = kernel_w(&ks, b, a).unwrap();
        prop_assert!((w1 + w2).abs() <= 1e-8 * w1.abs().max(1.0));
        prop_assert!(kernel_w(&ks, a, a).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn pair_correlation_symmetric(n in 2usize..=5, mu in 0.1f64..0.9, a in 0.05f64..4.0, b in 0.05f64..4.0) {
        let ks = set(n, mu);
        let r1 = correlation(&ks, &CorrelationRequest::new(vec![a, b])).unwrap();
        let r2 = correlation(&ks, &CorrelationRequest::new(vec![b, a])).unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-8 * r1.abs().max(1.0));
    }
}

#[test]
fn pair_correlation_nonnegative_on_grid() {
    for (n, mu) in [(2, 0.5), (3, 0.3), (4, 0.8)] {
        let ks = set(n, mu);
        for i in 0..10 {
            for j in 0..10 {
                let a = 0.2 + 0.4 * i as f64;
                let b = 0.25 + 0.4 * j as f64;
                let r = correlation(&ks, &CorrelationRequest::new(vec![a, b])).unwrap();
                assert!(r >= -1e-8, "N = {n}, mu = {mu}, ({a}, {b}): {r}");
            }
        }
    }
}

#[test]
fn one_point_correlation_is_n_times_density() {
    for n in [1, 2, 3] {
        let ks = set(n, 0.4);
        for l in [0.3, 1.4] {
            let r1 = correlation(&ks, &CorrelationRequest::new(vec![l])).unwrap();
            let rho = level_density(&ks, l).unwrap();
            assert!((r1 - n as f64 * rho).abs() <= 1e-12 * r1.abs(), "N = {n}");
            assert!((kernel_g(&ks, l, l).unwrap() - r1).abs() <= 1e-12 * r1.abs());
        }
    }
}

#[test]
fn single_level_density_is_the_normalized_one_point_weight() {
    let c = make_coupling(0.7).unwrap();
    let ks = KernelSet::new(1, c).unwrap();
    for l in [0.1, 0.9, 2.5] {
        let want = norm_constant(1, &c).unwrap() * weight_g(l, &c);
        // g/ḡ against C₁g: equal up to the rounding of 1/ḡ
        assert!((level_density(&ks, l).unwrap() - want).abs() <= 4.0 * f64::EPSILON * want);
    }
}

#[test]
fn coincident_and_excess_points() {
    let ks = set(3, 0.5);
    assert_eq!(correlation(&ks, &CorrelationRequest::new(vec![1.0, 1.0])).unwrap(), 0.0);
    assert_eq!(correlation(&ks, &CorrelationRequest::new(vec![0.5, 1.0, 0.5])).unwrap(), 0.0);
    assert_eq!(correlation(&ks, &CorrelationRequest::new(vec![0.5, 1.0, 1.5, 2.0])).unwrap(), 0.0);
    assert!(correlation(&ks, &CorrelationRequest::new(vec![])).is_err());
    assert!(correlation(&ks, &CorrelationRequest::new(vec![-0.5, 1.0])).is_err());
}

#[test]
fn top_correlation_is_n_factorial_times_jpdf() {
    let c = make_coupling(0.55).unwrap();
    for pts in [vec![0.4, 1.3], vec![0.3, 1.1, 2.0]] {
        let n = pts.len();
        let ks = KernelSet::new(n, c).unwrap();
        let r = correlation(&ks, &CorrelationRequest::new(pts.clone())).unwrap();
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let p = chiral_rmt::ensemble::jpdf(&pts, &c).unwrap();
        assert!(((r - fact * p) / r).abs() < 1e-8, "N = {n}: {r} vs {}", fact * p);
    }
}

#[test]
fn partition_functions_match_characteristic_products() {
    let c = make_coupling(0.6).unwrap();
    let stream = RngStream::new(4242, 0);
    for kappa in [Mass::Real(0.8), Mass::Imaginary(0.5)] {
        let e = characteristic_product_mc(3, 0.6, &[kappa.squared()], 100_000, &stream.substream(1)).unwrap();
        let z = partition_z01(3, &c, kappa);
        assert!(((e.mean - z) / e.std_error).abs() < 4.0, "{kappa:?}: {z} vs {e:?}");
    }
    let masses = [Mass::Real(0.7), Mass::Imaginary(0.4)];
    let y: Vec<f64> = masses.iter().map(Mass::squared).collect();
    let e = characteristic_product_mc(2, 0.6, &y, 100_000, &stream.substream(2)).unwrap();
    let z = partition_z0f(2, &c, &masses).unwrap();
    assert!(((e.mean - z) / e.std_error).abs() < 4.0, "{z} vs {e:?}");
}

#[test]
fn partition_function_argument_errors() {
    let c = make_coupling(0.6).unwrap();
    assert_eq!(partition_z0f(3, &c, &[]).unwrap(), 1.0);
    assert!(matches!(partition_z0f(3, &c, &[Mass::Real(1.0)]), Err(Error::InvalidArgument(_))));
    assert!(matches!(
        partition_z0f(3, &c, &[Mass::Real(1.0), Mass::Real(-1.0)]),
        Err(Error::DegenerateMass(_))
    ));
}
