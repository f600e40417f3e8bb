//! Coupling constants, normalization constants, the one- and two-point
//! weights and the joint density of the singular values at finite N.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::pfaffian;
use crate::quadrature::{theta_integral, QuadratureSpec};
use crate::specfun::{bessel_i0_scaled, factorial, ln_factorial};

pub(crate) use crate::dd::dd;
pub use crate::dd::Dd;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub mu: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
}

/// Builds the coupling for `0 < mu <= 1`. The model is invariant under
/// μ → -μ and μ → 1/μ (up to rescaling), so this range is complete.
pub fn make_coupling(mu: f64) -> Result<Coupling> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::Domain(format!(
            "mu must lie in (0, 1]; other values follow from the symmetries mu -> -mu and mu -> 1/mu (got {mu})"
        )));
    }
    let eta_minus = (1.0 - mu * mu) / (4.0 * mu * mu);
    Ok(Coupling { mu, eta_plus: eta_minus + 0.5, eta_minus })
}

impl Coupling {
    pub(crate) fn mu2_dd(&self) -> Dd {
        dd(self.mu) * self.mu
    }

    /// η₋ in double-double precision.
    pub(crate) fn eta_minus_dd(&self) -> Dd {
        let m2 = self.mu2_dd();
        crate::dd::div_dd(dd(1.0) - m2, m2 * 4.0)
    }

    /// 1 - μ² in double-double precision.
    pub(crate) fn one_minus_mu2_dd(&self) -> Dd {
        dd(1.0) - self.mu2_dd()
    }

    pub fn is_endpoint(&self) -> bool {
        self.mu == 1.0
    }
}

/// ln C_N with C_N = ∏_{j<N} 1/(√(4πμ²)(1-μ²)^j j!).
pub fn ln_norm_constant(n: usize, c: &Coupling) -> Result<f64> {
    if c.is_endpoint() && n >= 2 {
        return Err(Error::DegenerateEndpoint(format!(
            "C_{n} diverges at mu = 1; use the mu -> 1 limit routines"
        )));
    }
    let l1m = (1.0 - c.mu * c.mu).ln();
    Ok((0..n)
        .map(|j| -(0.5 * (4.0 * PI * c.mu * c.mu).ln() + if j > 0 { j as f64 * l1m } else { 0.0 } + ln_factorial(j)))
        .sum())
}

pub fn norm_constant(n: usize, c: &Coupling) -> Result<f64> {
    ln_norm_constant(n, c).map(f64::exp)
}

/// h_j = C_j / C_{j+2} = 4πμ²(1-μ²)^{2j+1} j!(j+1)!.
pub fn h(j: usize, c: &Coupling) -> Result<f64> {
    h_dd(j, c).map(f64::from)
}

pub(crate) fn h_dd(j: usize, c: &Coupling) -> Result<Dd> {
    if c.is_endpoint() {
        return Err(Error::DegenerateEndpoint("h_j vanishes at mu = 1; use the mu -> 1 limit routines".into()));
    }
    let om = c.one_minus_mu2_dd();
    Ok(c.mu2_dd() * (4.0 * PI) * om.powi(2 * j as i32 + 1) * factorial(j) * factorial(j + 1))
}

/// Evaluators for g, G, H and G̃ at a fixed coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSet {
    pub coupling: Coupling,
    pub spec: QuadratureSpec,
}

impl WeightSet {
    pub fn new(coupling: Coupling) -> Self {
        Self { coupling, spec: QuadratureSpec::new(1e-13, 1e-11, 200).expect("valid spec") }
    }

    pub fn with_spec(coupling: Coupling, spec: QuadratureSpec) -> Self {
        Self { coupling, spec }
    }

    /// g(λ) = 2√π λ e^{-η₊λ²} I₀(η₋λ²).
    pub fn g(&self, lambda: f64) -> f64 {
        weight_g(lambda, &self.coupling)
    }

    /// ḡ = ∫₀^∞ g(λ) dλ = 2√π μ.
    pub fn g_bar(&self) -> f64 {
        2.0 * PI.sqrt() * self.coupling.mu
    }

    pub fn big_g(&self, l1: f64, l2: f64) -> Result<f64> {
        weight_big_g(l1, l2, &self.coupling, &self.spec)
    }

    pub fn h(&self, lambda: f64) -> Result<f64> {
        weight_h(lambda, &self.coupling, &self.spec)
    }

    pub fn g_tilde(&self, l1: f64, l2: f64) -> Result<f64> {
        let gb = self.g_bar();
        Ok(self.big_g(l1, l2)? - self.g(l1) * self.h(l2)? / gb + self.h(l1)? * self.g(l2) / gb)
    }
}

pub fn weight_g(lambda: f64, c: &Coupling) -> f64 {
    let l2 = lambda * lambda;
    2.0 * PI.sqrt() * lambda * (-0.5 * l2).exp() * bessel_i0_scaled(c.eta_minus * l2)
}

/// Two-point weight G(λ₁, λ₂); positive for λ₁ > λ₂.
pub fn weight_big_g(l1: f64, l2: f64, c: &Coupling, spec: &QuadratureSpec) -> Result<f64> {
    if l1 == l2 || l1 == 0.0 || l2 == 0.0 || c.eta_minus == 0.0 {
        return Ok(0.0);
    }
    let em = c.eta_minus;
    let d = l1 * l1 - l2 * l2;
    let sum = l1 * l1 + l2 * l2;
    let b = 2.0 * em * l1 * l2;
    let r = theta_integral(
        |s, cs| {
            let a = em * d * s;
            // exponent of the combined Gaussian, sinh and Bessel growth; ≤ -sum/2
            let expo = em * ((d * s).abs() + 2.0 * l1 * l2 * cs.abs() - sum) - 0.5 * sum;
            let sh = a.signum() * 0.5 * (-(-2.0 * a.abs()).exp_m1());
            expo.exp() * sh * bessel_i0_scaled(b * cs)
        },
        spec,
    )?;
    Ok(4.0 * l1 * l2 * r.require("two-point weight G")?)
}

/// H(λ) = ∫₀^∞ G(x, λ) dx by its closed single-θ form.
pub fn weight_h(lambda: f64, c: &Coupling, spec: &QuadratureSpec) -> Result<f64> {
    if lambda == 0.0 || c.eta_minus == 0.0 {
        return Ok(0.0);
    }
    let em = c.eta_minus;
    let k = lambda * lambda / (4.0 * c.mu * c.mu);
    let r = theta_integral(
        |s, _| {
            let pm = 0.5 + em * (1.0 - s);
            let pp = 0.5 + em * (1.0 + s);
            (-k / pm).exp() / pm - (-k / pp).exp() / pp
        },
        spec,
    )?;
    Ok(lambda * r.require("integrated weight H")?)
}

/// Vandermonde Δ_N(x) = ∏_{a<b} (x_b − x_a).
pub fn vandermonde(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for a in 0..x.len() {
        for b in (a + 1)..x.len() {
            v *= x[b] - x[a];
        }
    }
    v
}

/// The antisymmetric weight matrix whose Pfaffian enters the joint density:
/// entries G(λ_b, λ_a) for even N, and the G̃ block bordered by g for odd N.
pub fn jpdf_pfaffian_matrix(lambda: &[f64], w: &WeightSet) -> Result<(Vec<f64>, usize)> {
    let n = lambda.len();
    let odd = n % 2 == 1;
    let dim = if odd { n + 1 } else { n };
    let mut m = vec![0.0; dim * dim];
    let (hv, gb) = if odd {
        (lambda.iter().map(|&l| w.h(l)).collect::<Result<Vec<_>>>()?, w.g_bar())
    } else {
        (vec![], 1.0)
    };
    for a in 0..n {
        for b in (a + 1)..n {
            let mut v = w.big_g(lambda[b], lambda[a])?;
            if odd {
                v += -w.g(lambda[b]) * hv[a] / gb + hv[b] * w.g(lambda[a]) / gb;
            }
            m[a * dim + b] = v;
            m[b * dim + a] = -v;
        }
        if odd {
            let ga = w.g(lambda[a]);
            m[a * dim + n] = ga;
            m[n * dim + a] = -ga;
        }
    }
    Ok((m, dim))
}

/// Joint probability density of the N singular values.
pub fn jpdf(lambda: &[f64], c: &Coupling) -> Result<f64> {
    jpdf_with(lambda, &WeightSet::new(*c))
}

pub fn jpdf_with(lambda: &[f64], w: &WeightSet) -> Result<f64> {
    let n = lambda.len();
    if n == 0 {
        return Err(Error::InvalidArgument("jpdf needs at least one singular value".into()));
    }
    if lambda.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidArgument("singular values must be nonnegative".into()));
    }
    let c = &w.coupling;
    let lnc = ln_norm_constant(n, c)?;
    let sq: Vec<f64> = lambda.iter().map(|l| l * l).collect();
    let delta = vandermonde(&sq);
    if delta == 0.0 {
        return Ok(0.0);
    }
    let (m, dim) = jpdf_pfaffian_matrix(lambda, w)?;
    let pf = pfaffian(&m, dim)?;
    Ok((lnc - ln_factorial(n)).exp() * delta * pf)
}
