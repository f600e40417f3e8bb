//! Scaled modified Bessel functions and classical polynomial families.

/// Switch point between the power series and the asymptotic expansion.
const BESSEL_SWITCH: f64 = 15.0;

fn bessel_series(nu: u32, ax: f64) -> f64 {
    // sum_k (x/2)^(2k+nu) / (k! (k+nu)!), multiplied by e^{-x}
    let q = 0.25 * ax * ax;
    let mut term = (0.5 * ax).powi(nu as i32);
    for k in 1..=nu {
        term /= k as f64;
    }
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term < 1e-17 * sum || k > 500 {
            break;
        }
    }
    sum * (-ax).exp()
}

fn bessel_asymptotic(nu: u32, ax: f64) -> f64 {
    let m = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(m - odd * odd) / (k as f64 * 8.0 * ax);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * ax).sqrt()
}

/// `e^{-|x|} I_0(x)`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax < BESSEL_SWITCH {
        bessel_series(0, ax)
    } else {
        bessel_asymptotic(0, ax)
    }
}

/// `e^{-|x|} I_1(x)`, odd in `x`.
pub fn bessel_i1_scaled(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < BESSEL_SWITCH {
        bessel_series(1, ax)
    } else {
        bessel_asymptotic(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(y)` by forward recurrence.
pub fn laguerre(n: usize, alpha: f64, y: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + alpha - y;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + alpha - y) * l1 - (kf + alpha) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Monic (probabilists') Hermite polynomial `He_n(x)`.
pub fn hermite_monic(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = x;
    for k in 1..n {
        let h2 = x * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Legendre polynomial `P_n(x)`; used for the closed-form moments of `g`.
pub fn legendre(n: usize, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients (ascending powers of `y`) of `L_n^{(alpha)}(scale * y)`.
pub fn laguerre_coeffs(n: usize, alpha: f64, scale: f64) -> Vec<f64> {
    // c_i = (-1)^i binom(n+alpha, n-i) / i! * scale^i
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut b = 1.0;
        for t in 0..(n - i) {
            b *= (alpha + (i + 1 + t) as f64) / (t + 1) as f64;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * b / factorial(i) * scale.powi(i as i32));
    }
    out
}

/// Coefficients (ascending powers of `x`) of `He_n(x)`.
pub fn hermite_coeffs(n: usize) -> Vec<f64> {
    let mut h0 = vec![1.0];
    if n == 0 {
        return h0;
    }
    let mut h1 = vec![0.0, 1.0];
    for k in 1..n {
        let mut h2 = vec![0.0; k + 2];
        for (i, c) in h1.iter().enumerate() {
            h2[i + 1] += c;
        }
        for (i, c) in h0.iter().enumerate() {
            h2[i] -= k as f64 * c;
        }
        h0 = h1;
        h1 = h2;
    }
    h1
}
