//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use chiral_rmt::quadrature::{integrate_semi_infinite, QuadratureSpec};

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_lu(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap();
        if m[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = m[k * n + k];
        det *= piv;
        for i in (k + 1)..n {
            let f = m[i * n + k] / piv;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    det
}

/// Density of |x| for the eigenvalues of a 2 × 2 GUE matrix with weight
/// exp(−Tr H²/2), normalized to one on [0, ∞).
pub fn gue2_abs_density(l: f64) -> f64 {
    (1.0 + l * l) * (-0.5 * l * l).exp() / (2.0 * PI).sqrt()
}

/// Joint density of the two singular values of a complex Ginibre matrix
/// with E|w_ij|² = 2, normalized on [0, ∞)².
pub fn lue2_jpdf(l1: f64, l2: f64) -> f64 {
    let d = l1 * l1 - l2 * l2;
    d * d * l1 * l2 * (-0.5 * (l1 * l1 + l2 * l2)).exp() / 8.0
}

/// One-point marginal of [`lue2_jpdf`] by quadrature.
pub fn lue2_marginal(l: f64) -> f64 {
    let spec = QuadratureSpec::new(1e-14, 1e-12, 200).unwrap();
    integrate_semi_infinite(|x| lue2_jpdf(l, x), 1.0, &spec).value
}

/// q_j(y) at μ = 1 through the three-term Laguerre recurrence, as an
/// independent check of the closed endpoint form (−2)^j j! L_j(y/2).
pub fn q_mu1_recurrence(j: usize, y: f64) -> f64 {
    let t = y / 2.0;
    let (mut l0, mut l1) = (1.0, 1.0 - t);
    if j == 0 {
        return 1.0;
    }
    for k in 1..j {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - t) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    (-2.0f64).powi(j as i32) * fact * l1
}

/// (1/2π)∫₀^{2π} e^{x cos 2φ} dφ = I₀(x) by the midpoint rule, which is
/// spectrally accurate for periodic integrands.
pub fn i0_by_angle(x: f64) -> f64 {
    let m = 2000;
    (0..m).map(|k| (x * (4.0 * PI * (k as f64 + 0.5) / m as f64).cos()).exp()).sum::<f64>() / m as f64
}

/// Modified Bessel I₀ and I₁ by their power series (moderate arguments).
pub fn i0_series(x: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= (x / 2.0) * (x / 2.0) / (k as f64 * k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

pub fn i1_series(x: f64) -> f64 {
    let (mut term, mut sum) = (x / 2.0, x / 2.0);
    for k in 1..200 {
        term *= (x / 2.0) * (x / 2.0) / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
