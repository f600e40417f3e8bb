//! Double-double helpers: the scalar type and an accurate exponential.

use twofloat::TwoFloat;

pub type Dd = TwoFloat;

pub(crate) fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

/// a / b to double-double accuracy. The division operator of the
/// underlying type loses the low word, so every Dd / Dd goes through here.
pub(crate) fn div_dd(a: Dd, b: Dd) -> Dd {
    let bh = b.hi();
    let q1 = a.hi() / bh;
    let r = a - b * q1;
    let q2 = r.hi() / bh;
    let r = r - b * q2;
    let q3 = r.hi() / bh;
    dd(q1) + q2 + q3
}

pub(crate) fn recip_dd(b: Dd) -> Dd {
    div_dd(dd(1.0), b)
}

const SQUARINGS: i32 = 5;

/// e^x to about 1e-30 relative, by ln 2 reduction, a Taylor series and
/// repeated squaring.
pub(crate) fn exp_dd(x: Dd) -> Dd {
    let xf = f64::from(x);
    if xf < -745.0 {
        return dd(0.0);
    }
    let k = (xf / std::f64::consts::LN_2).round();
    let r = (x - twofloat::consts::LN_2 * k) * (0.5f64).powi(SQUARINGS);
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for n in 1..=18 {
        term = term * r / n as f64;
        sum += term;
    }
    for _ in 0..SQUARINGS {
        sum = sum * sum;
    }
    // split the power of two so neither factor overflows
    let k = k as i32;
    let half = k / 2;
    sum * 2f64.powi(half) * 2f64.powi(k - half)
}


/// e^{-x} I₀(x) for x ≥ 0; double-double series below 30, double beyond.
pub(crate) fn bessel_i0_scaled_dd(x: Dd) -> Dd {
    let xf = f64::from(x);
    if xf >= 30.0 {
        return dd(crate::specfun::bessel_i0_scaled(xf));
    }
    let q = x * x * 0.25;
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    let mut k = 1.0;
    loop {
        term = term * q / (k * k);
        sum += term;
        if f64::from(term) < 1e-34 * f64::from(sum) {
            break;
        }
        k += 1.0;
    }
    sum * exp_dd(-x)
}

#[cfg(test)]
mod bessel_tests {
    use super::*;

    #[test]
    fn i0_matches_double() {
        for x in [0.0, 0.01, 1.0, 7.5, 29.0] {
            let a = f64::from(bessel_i0_scaled_dd(dd(x)));
            let b = crate::specfun::bessel_i0_scaled(x);
            assert!((a - b).abs() < 1e-14 * b, "{x}");
        }
    }
}
