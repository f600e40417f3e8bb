//! Skew-orthogonal polynomials q_j, q̃_j, their μ → 0 and μ → 1 forms, and
//! the antisymmetric products they are orthogonal under.

use serde::Serialize;

use crate::dd::{div_dd, recip_dd};
use crate::ensemble::{dd, Coupling, Dd};
use crate::error::{Error, Result};
use crate::moments::Moments;
use crate::quadrature::QuadratureSpec;
use crate::specfun::{binomial, factorial, hermite_coeffs, laguerre_coeffs};

/// Ascending coefficients of a polynomial in x².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialCoeffs {
    pub coeffs: Vec<f64>,
}

impl PolynomialCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1.0)
    }

    /// Value at x² = `y`.
    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self { coeffs: c }
    }

    pub(crate) fn to_dd(&self) -> Vec<Dd> {
        self.coeffs.iter().map(|&v| dd(v)).collect()
    }

    fn from_dd(v: &[Dd]) -> Self {
        let mut coeffs: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        if let Some(last) = coeffs.last_mut() {
            *last = 1.0;
        }
        Self { coeffs }
    }
}

fn add_scaled(out: &mut [Dd], src: &[Dd], s: Dd) {
    for (o, &v) in out.iter_mut().zip(src) {
        *o += v * s;
    }
}

/// Coefficients of L_n(y/(1+μ²)) in double-double.
fn laguerre_dd(n: usize, inv_scale: Dd) -> Vec<Dd> {
    let mut out = Vec::with_capacity(n + 1);
    let mut pw = dd(1.0);
    for i in 0..=n {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(pw * (sign * binomial(n, i)) / factorial(i));
        pw *= inv_scale;
    }
    out
}

struct LaguerreSumParams {
    one_plus: Dd,
    inv: Dd,
    rho2: Dd,
    ratio2: Dd,
}

fn params(c: &Coupling) -> LaguerreSumParams {
    let m2 = c.mu2_dd();
    let one_plus = m2 + 1.0;
    let one_minus = dd(1.0) - m2;
    // β/(2α) = (1-μ²)/(2(1+μ²)), β/α = (1-μ²)/(1+μ²)
    let ratio = div_dd(one_minus, one_plus);
    LaguerreSumParams { one_plus, inv: recip_dd(one_plus), rho2: ratio * ratio * 0.25, ratio2: ratio * ratio }
}

pub(crate) fn q_dd(j: usize, c: &Coupling) -> Vec<Dd> {
    let p = params(c);
    let mut out = vec![dd(0.0); j + 1];
    let mut rho_pow = dd(1.0);
    for l in 0..=(j / 2) {
        let w = rho_pow * binomial(2 * l, l);
        add_scaled(&mut out, &laguerre_dd(j - 2 * l, p.inv), w);
        rho_pow *= p.rho2;
    }
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pre = p.one_plus.powi(j as i32) * (sign * factorial(j));
    let mut out: Vec<Dd> = out.into_iter().map(|v| v * pre).collect();
    out[j] = dd(1.0);
    out
}

pub(crate) fn q_tilde_dd(j: usize, c: &Coupling, c_tilde: f64) -> Vec<Dd> {
    let p = params(c);
    let mut out = vec![dd(0.0); j + 2];
    let mut rho_pow = dd(1.0);
    for l in 0..=(j / 2) {
        let w = rho_pow * binomial(2 * l, l);
        let m = j - 2 * l;
        if m >= 1 {
            add_scaled(&mut out, &laguerre_dd(m - 1, p.inv), w * p.ratio2 * m as f64);
        }
        add_scaled(&mut out, &laguerre_dd(m + 1, p.inv), w * -((m + 1) as f64));
        rho_pow *= p.rho2;
    }
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pre = p.one_plus.powi(j as i32 + 1) * (sign * factorial(j));
    let mut out: Vec<Dd> = out.into_iter().map(|v| v * pre).collect();
    out[j + 1] = dd(1.0);
    if c_tilde != 0.0 {
        let q = q_dd(j, c);
        add_scaled(&mut out, &q, dd(c_tilde));
    }
    out
}

/// Monic q_j (degree j in x²) from the Laguerre sum.
pub fn q(j: usize, c: &Coupling) -> PolynomialCoeffs {
    PolynomialCoeffs::from_dd(&q_dd(j, c))
}

/// Monic q̃_j (degree j+1 in x²) with free constant c̃_j = 0.
pub fn q_tilde(j: usize, c: &Coupling) -> PolynomialCoeffs {
    q_tilde_with_constant(j, c, 0.0)
}

/// q̃_j + c̃ q_j.
pub fn q_tilde_with_constant(j: usize, c: &Coupling, c_tilde: f64) -> PolynomialCoeffs {
    PolynomialCoeffs::from_dd(&q_tilde_dd(j, c, c_tilde))
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

/// μ = 0 polynomial as He_{j+1}(x) He_j(x) / x, written in x².
pub fn q_limit_mu0(j: usize) -> PolynomialCoeffs {
    let prod = poly_mul(&hermite_coeffs(j + 1), &hermite_coeffs(j));
    // prod is odd in x: drop the zero constant term and keep every other entry
    let coeffs = prod.iter().skip(1).step_by(2).copied().collect();
    PolynomialCoeffs { coeffs }
}

/// μ = 0 polynomial as the product of two generalized Laguerre polynomials.
pub fn q_limit_mu0_laguerre(j: usize) -> PolynomialCoeffs {
    let (hi, lo) = (j.div_ceil(2), j / 2);
    let a = laguerre_coeffs(hi, -0.5, 0.5);
    let b = laguerre_coeffs(lo, 0.5, 0.5);
    let pre = (-2.0f64).powi(j as i32) * factorial(hi) * factorial(lo);
    let coeffs = poly_mul(&a, &b).into_iter().map(|v| v * pre).collect();
    PolynomialCoeffs { coeffs }
}

/// μ = 1 polynomial (−2)^j j! L_j(x²/2).
pub fn q_limit_mu1(j: usize) -> PolynomialCoeffs {
    let pre = (-2.0f64).powi(j as i32) * factorial(j);
    PolynomialCoeffs { coeffs: laguerre_coeffs(j, 0.0, 0.5).into_iter().map(|v| v * pre).collect() }
}

/// q_j from the residue of its generating integrand, by truncated power series.
pub fn q_via_contour(j: usize, c: &Coupling) -> PolynomialCoeffs {
    let mu2 = c.mu * c.mu;
    let b = 1.0 + mu2;
    // (1 - b z)^{j+1}
    let a: Vec<f64> = (0..=j).map(|i| binomial(j + 1, i) * (-b).powi(i as i32)).collect();
    // (1 + s1 z + s2 z²)^{-1/2} by the power recurrence for series
    let s = [1.0, -2.0 * b, 4.0 * mu2];
    let alpha = -0.5;
    let mut y = vec![0.0; j + 1];
    y[0] = 1.0;
    for n in 1..=j {
        let mut acc = 0.0;
        for k in 1..=n.min(2) {
            acc += ((alpha + 1.0) * k as f64 - n as f64) * s[k] * y[n - k];
        }
        y[n] = acc / n as f64;
    }
    let mut coeffs = vec![0.0; j + 1];
    for (m, slot) in coeffs.iter_mut().enumerate() {
        let r = j - m;
        let z: f64 = (0..=r).map(|i| a[i] * y[r - i]).sum();
        *slot = factorial(j) / factorial(m) * z;
    }
    PolynomialCoeffs { coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewProductSpec {
    pub parity: Parity,
    pub coupling: Coupling,
    pub spec: QuadratureSpec,
}

impl SkewProductSpec {
    pub fn new(parity: Parity, coupling: Coupling) -> Self {
        Self { parity, coupling, spec: crate::moments::moment_spec() }
    }
}

/// ⟨f1|f2⟩ = ∫∫ W(λ₂, λ₁) f1(λ₁²) f2(λ₂²) with W = G (even) or G̃ (odd).
pub fn skew_product(f1: &PolynomialCoeffs, f2: &PolynomialCoeffs, sps: &SkewProductSpec) -> Result<f64> {
    Ok(skew_products(&[(f1.clone(), f2.clone())], sps)?[0])
}

/// Batched [`skew_product`].
pub fn skew_products(pairs: &[(PolynomialCoeffs, PolynomialCoeffs)], sps: &SkewProductSpec) -> Result<Vec<f64>> {
    if sps.coupling.is_endpoint() {
        return Err(Error::DegenerateEndpoint("the two-point weight vanishes at mu = 1".into()));
    }
    let dds: Vec<(Vec<Dd>, Vec<Dd>)> = pairs.iter().map(|(a, b)| (a.to_dd(), b.to_dd())).collect();
    skew_products_dd(&dds, sps)
}

pub(crate) fn skew_products_dd(pairs: &[(Vec<Dd>, Vec<Dd>)], sps: &SkewProductSpec) -> Result<Vec<f64>> {
    let m = Moments::with_spec(sps.coupling, sps.spec);
    let refs: Vec<(&[Dd], &[Dd])> = pairs.iter().map(|(a, b)| (a.as_slice(), b.as_slice())).collect();
    let s = m.s_values(&refs)?;
    match sps.parity {
        Parity::Even => Ok(s.iter().map(|v| -v).collect()),
        Parity::Odd => {
            let gb = m.g_bar();
            let mut polys: Vec<&[Dd]> = Vec::new();
            for (a, b) in &refs {
                polys.push(a);
                polys.push(b);
            }
            let hd = m.h_dot(&polys)?;
            Ok(refs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let ga = f64::from(m.g_dot(a));
                    let gbv = f64::from(m.g_dot(b));
                    -(s[i] - ga * hd[2 * i + 1] / gb + hd[2 * i] * gbv / gb)
                })
                .collect())
        }
    }
}

/// ∫₀^∞ g(λ) f(λ²) dλ.
pub fn g_product(f: &PolynomialCoeffs, c: &Coupling) -> f64 {
    f64::from(Moments::new(*c).g_dot(&f.to_dd()))
}
