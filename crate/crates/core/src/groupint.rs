//! The unitary group integral
//!
//!   I = ∫ dU exp[ξ Tr(AU + U†B) + ½ Tr((AU)² + (U†B)²)]
//!
//! as a Pfaffian of two-point weights B_ξ (bordered by C_ξ for odd N), its
//! Haar Monte Carlo oracle and the large-ξ Leutwyler–Smilga limit.
//!
//! All weights are returned with the factor e^{a_k² + a_l²} (resp. e^{a²})
//! divided out; the Pfaffian of the scaled matrix is then exactly
//! e^{−Tr a²} Pf[B_ξ], so the exponential prefactor never appears.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pfaffian, sample_haar_unitary, ComplexMatrix, RngStream};
use crate::montecarlo::{mc_mean, Estimate};
use crate::quadrature::{integrate_breaks, theta_integral, QuadratureSpec};
use crate::specfun::{bessel_i0_scaled, bessel_i1_scaled, ln_factorial};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupIntegralInput {
    /// Distinct nonnegative values; A = B = diag(a).
    pub a: Vec<f64>,
    pub xi: f64,
}

/// Minimal gap between the a values below which the input counts as degenerate.
pub const MIN_GAP: f64 = 1e-6;

fn check_nonneg(v: f64, what: &str) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{what} must be finite and nonnegative (got {v})")));
    }
    Ok(())
}

/// e^{−u²−v²} B₀(u, v) = 4∫₀^π tan θ sinh[(u²−v²) sin 2θ] I₀(2uv cos 2θ) dθ.
fn weight_b0_scaled(u: f64, v: f64, spec: &QuadratureSpec) -> Result<f64> {
    if u == v {
        return Ok(0.0);
    }
    let d = u * u - v * v;
    let b = 2.0 * u * v;
    let r = theta_integral(
        |s, c| {
            let a = d * s;
            let z = b * c;
            if a.abs() < 20.0 {
                a.sinh() * z.abs().exp() * bessel_i0_scaled(z)
            } else {
                let e = a.abs() + z.abs();
                a.signum() * 0.5 * e.exp() * (-(-2.0 * a.abs()).exp_m1()) * bessel_i0_scaled(z)
            }
        },
        spec,
    )?;
    Ok(4.0 * r.require("group-integral weight B at xi = 0")?)
}

/// e^{−u²−v²} B_ξ(u, v) from the 2-D form in the rotated coordinates
/// s = (x+y)/√2, t = (x−y)/√2 where (x−y)/(x+y) = t/s:
///
///   ∫∫ (t/s) [I₀(2ux)I₀(2vy) − I₀(2vx)I₀(2uy)] e^{−(s−√2ξ)²/2 − t²/2}.
///
/// The bracket vanishes on s = 0, where the integrand stays finite. The
/// integrand is even in t, so only t ≥ 0 is integrated.
fn weight_b_2d_scaled(xi: f64, u: f64, v: f64, spec: &QuadratureSpec) -> Result<f64> {
    if u == v {
        return Ok(0.0);
    }
    let amax = u.max(v);
    let reach = 12.0 + 2.0 * SQRT_2 * amax;
    let c = SQRT_2 * xi;
    let (s_lo, s_hi) = (c - reach, c + reach);
    let mut sb: Vec<f64> = (0..=8).map(|i| s_lo + (s_hi - s_lo) * i as f64 / 8.0).collect();
    if s_lo < 0.0 && s_hi > 0.0 {
        sb.push(0.0);
        sb.sort_by(f64::total_cmp);
    }
    let tb: Vec<f64> = (0..=6).map(|i| reach * i as f64 / 6.0).collect();
    let inner_spec = spec.scaled(0.1);
    let sum = u * u + v * v;
    let mut inner_ok = true;
    let mut inner_err: f64 = 0.0;
    let outer = integrate_breaks(
        |s| {
            let r = integrate_breaks(
                |t| {
                    let x = (s + t) / SQRT_2;
                    let y = (s - t) / SQRT_2;
                    let (ux, vy, vx, uy) = (2.0 * u * x, 2.0 * v * y, 2.0 * v * x, 2.0 * u * y);
                    let g = -0.5 * ((s - c) * (s - c) + t * t) - sum;
                    let p = (g + ux.abs() + vy.abs()).exp() * bessel_i0_scaled(ux) * bessel_i0_scaled(vy);
                    let q = (g + vx.abs() + uy.abs()).exp() * bessel_i0_scaled(vx) * bessel_i0_scaled(uy);
                    t / s * (p - q)
                },
                &tb,
                &inner_spec,
            );
            inner_ok &= r.converged;
            inner_err = inner_err.max(r.error_estimate);
            r.value
        },
        &sb,
        spec,
    );
    if !(outer.converged && inner_ok) {
        return Err(Error::NonConvergence(format!(
            "group-integral weight B at xi = {xi}: value {:e}, error {:e}",
            2.0 * outer.value,
            2.0 * (outer.error_estimate + (s_hi - s_lo) * inner_err)
        )));
    }
    Ok(2.0 * outer.value)
}

/// e^{−a²} C_ξ(a) = e^{−a²} √2 ∫ e^{−(x−ξ)²/2} I₀(2ax) dx.
fn weight_c_scaled(xi: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if xi == 0.0 {
        // e^{−a²}·2√π e^{a²} I₀(a²) = 2√π I₀(a²)
        return Ok(2.0 * PI.sqrt() * (a * a).exp() * bessel_i0_scaled(a * a));
    }
    let reach = 12.0 + 2.0 * a;
    let lo = xi - reach;
    let hi = xi + reach;
    let breaks: Vec<f64> = (0..=8).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
    let r = integrate_breaks(
        |x| {
            let z = 2.0 * a * x;
            (-0.5 * (x - xi) * (x - xi) + z.abs() - a * a).exp() * bessel_i0_scaled(z)
        },
        &breaks,
        spec,
    );
    Ok(SQRT_2 * r.require("group-integral weight C")?)
}

/// B_ξ(a_k, a_l); antisymmetric, positive for a_k > a_l at ξ = 0.
pub fn weight_b(xi: f64, ak: f64, al: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_nonneg(ak, "a_k")?;
    check_nonneg(al, "a_l")?;
    let scaled = if xi == 0.0 { weight_b0_scaled(ak, al, spec)? } else { weight_b_2d_scaled(xi, ak, al, spec)? };
    Ok(scaled * (ak * ak + al * al).exp())
}

/// B_ξ through the 2-D representation even at ξ = 0; used to cross-check
/// the single-angle form.
pub fn weight_b_2d(xi: f64, ak: f64, al: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_nonneg(ak, "a_k")?;
    check_nonneg(al, "a_l")?;
    Ok(weight_b_2d_scaled(xi, ak, al, spec)? * (ak * ak + al * al).exp())
}

/// C_ξ(a).
pub fn weight_c(xi: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_nonneg(a, "a")?;
    Ok(weight_c_scaled(xi, a, spec)? * (a * a).exp())
}

/// The group integral for A = B = diag(a).
pub fn group_integral(input: &GroupIntegralInput, spec: &QuadratureSpec) -> Result<f64> {
    let n = input.a.len();
    if n == 0 {
        return Err(Error::InvalidArgument("the group integral needs N >= 1".into()));
    }
    for &a in &input.a {
        check_nonneg(a, "a")?;
    }
    if !input.xi.is_finite() {
        return Err(Error::Domain("xi must be finite".into()));
    }
    // sort and reject degenerate inputs; I is symmetric in the a values
    let mut a = input.a.clone();
    a.sort_by(f64::total_cmp);
    if a.windows(2).any(|w| w[1] - w[0] <= MIN_GAP) {
        return Err(Error::Domain(format!(
            "a values must be pairwise separated by more than {MIN_GAP} (got {:?}); the confluent case is not supported",
            input.a
        )));
    }
    let odd = n % 2 == 1;
    let d = n + usize::from(odd);
    let mut m = vec![0.0; d * d];
    for k in 0..n {
        for l in (k + 1)..n {
            let b = if input.xi == 0.0 {
                weight_b0_scaled(a[l], a[k], spec)?
            } else {
                weight_b_2d_scaled(input.xi, a[l], a[k], spec)?
            };
            m[k * d + l] = b;
            m[l * d + k] = -b;
        }
        if odd {
            let c = weight_c_scaled(input.xi, a[k], spec)?;
            m[k * d + n] = c;
            m[n * d + k] = -c;
        }
    }
    let pf = pfaffian(&m, d)?;
    // ∏_{j<N} j!/√(4π) over Δ_N(a²) = ∏_{k<l}(a_l² − a_k²), in logs
    let mut ln_pref = (0..n).map(|j| ln_factorial(j) - 0.5 * (4.0 * PI).ln()).sum::<f64>();
    for k in 0..n {
        for l in (k + 1)..n {
            ln_pref -= (a[l] * a[l] - a[k] * a[k]).ln();
        }
    }
    Ok(pf * ln_pref.exp())
}

/// Haar Monte Carlo estimate of the real part of the group integral for
/// general square A and B.
pub fn mc_group_integral(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    xi: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<Estimate> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(Error::InvalidArgument("A and B must be square of the same size".into()));
    }
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!("mc_group_integral needs at least 1000 samples (got {samples})")));
    }
    let x = Complex64::new(xi, 0.0);
    Ok(mc_mean(samples, stream, |rng| {
        let u = sample_haar_unitary(n, rng);
        let au = a.matmul(&u);
        let ub = u.adjoint().matmul(b);
        let e = x * (au.trace() + ub.trace()) + 0.5 * (au.matmul(&au).trace() + ub.matmul(&ub).trace());
        e.exp().re
    }))
}

/// ∫ dU exp Tr(diag(m)U + U†diag(m)) for N = 2:
/// [m₁I₁(2m₁)I₀(2m₂) − m₂I₀(2m₁)I₁(2m₂)]/(m₁² − m₂²).
pub fn leutwyler_smilga_reference(m1: f64, m2: f64) -> f64 {
    let (x1, x2) = (2.0 * m1, 2.0 * m2);
    let e = (x1 + x2).exp();
    let num = m1 * bessel_i1_scaled(x1) * bessel_i0_scaled(x2) - m2 * bessel_i0_scaled(x1) * bessel_i1_scaled(x2);
    e * num / (m1 * m1 - m2 * m2)
}

/// The ξ values used for the large-ξ extrapolation.
pub const LS_XI: [f64; 3] = [20.0, 40.0, 80.0];

/// Evaluates the N = 2 group integral at a = m/ξ for ξ ∈ {20, 40, 80},
/// Richardson-extrapolates in 1/ξ² (the leading corrections are O(1/ξ²))
/// and returns (limit, closed-form reference).
pub fn leutwyler_smilga_check(m1: f64, m2: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(m1 >= 0.0 && m2 >= 0.0) || m1 == m2 {
        return Err(Error::Domain(format!("masses must be nonnegative and distinct (got {m1}, {m2})")));
    }
    let mut f = [0.0; 3];
    for (i, &xi) in LS_XI.iter().enumerate() {
        f[i] = group_integral(&GroupIntegralInput { a: vec![m1 / xi, m2 / xi], xi }, spec)?;
    }
    let r1 = (4.0 * f[1] - f[0]) / 3.0;
    let r2 = (4.0 * f[2] - f[1]) / 3.0;
    let limit = (16.0 * r2 - r1) / 15.0;
    Ok((limit, leutwyler_smilga_reference(m1, m2)))
}
