//! Finite-N correlation kernels K_N, G_N, W_N, the level density, k-point
//! correlation Pfaffians and fermionic partition functions.

use serde::Serialize;

use crate::dd::recip_dd;
use crate::ensemble::{dd, h_dd, vandermonde, weight_g, Coupling, Dd, WeightSet};
use crate::error::{Error, Result};
use crate::linalg::pfaffian;
use crate::moments::{eval_dd, moment_spec, Moments};
use crate::polynomials::{q_dd, q_tilde_dd, Parity};
use crate::quadrature::QuadratureSpec;
use crate::specfun::factorial;

/// Kernel evaluators for a fixed matrix size and coupling.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub n: usize,
    pub coupling: Coupling,
    pub parity: Parity,
    /// Polynomial indices j entering the sums.
    pub indices: Vec<usize>,
    /// K_N(x, y) = Σ_{m,l} kmat[m][l] x^{2m} y^{2l}.
    kmat: Vec<Vec<Dd>>,
    moments: Moments,
    weights: WeightSet,
}

impl KernelSet {
    pub fn new(n: usize, coupling: Coupling) -> Result<Self> {
        Self::with_free_constant(n, coupling, 0.0)
    }

    /// Kernels built from q̃_j + c̃ q_j; the result is independent of c̃.
    pub fn with_free_constant(n: usize, coupling: Coupling, c_tilde: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("kernels need N >= 1".into()));
        }
        let parity = if n.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
        let first = if n.is_multiple_of(2) { 0 } else { 1 };
        let indices: Vec<usize> = (first..n.saturating_sub(1)).step_by(2).collect();
        if !indices.is_empty() && coupling.is_endpoint() {
            return Err(Error::DegenerateEndpoint(
                "kernels with N >= 2 are singular at mu = 1; use mu < 1".into(),
            ));
        }
        let size = indices.last().map_or(1, |j| j + 2);
        let mut kmat = vec![vec![dd(0.0); size]; size];
        for &j in &indices {
            let q = q_dd(j, &coupling);
            let qt = q_tilde_dd(j, &coupling, c_tilde);
            let inv_h = recip_dd(h_dd(j, &coupling)?);
            for (m, &a) in qt.iter().enumerate() {
                for (l, &b) in q.iter().enumerate() {
                    let v = a * b * inv_h;
                    kmat[m][l] += v;
                    kmat[l][m] -= v;
                }
            }
        }
        Ok(Self {
            n,
            coupling,
            parity,
            indices,
            kmat,
            moments: Moments::with_spec(coupling, moment_spec()),
            weights: WeightSet::new(coupling),
        })
    }

    pub fn with_spec(mut self, spec: QuadratureSpec) -> Self {
        self.moments = Moments::with_spec(self.coupling, spec);
        self
    }

    fn odd(&self) -> bool {
        self.parity == Parity::Odd
    }

    /// Coefficients in x² of K_N(x, λ).
    pub(crate) fn k_poly(&self, lambda: f64) -> Vec<Dd> {
        let y = lambda * lambda;
        self.kmat.iter().map(|row| eval_dd(row, y)).collect()
    }

    /// K_N as a polynomial in the squared arguments; valid for negative
    /// values (imaginary arguments) as well.
    pub fn kernel_k_squared(&self, y1: f64, y2: f64) -> f64 {
        let row: Vec<Dd> = self.kmat.iter().map(|r| eval_dd(r, y2)).collect();
        f64::from(eval_dd(&row, y1))
    }

    fn g_term(&self, lambda: f64) -> f64 {
        if self.odd() {
            weight_g(lambda, &self.coupling) / self.moments.g_bar()
        } else {
            0.0
        }
    }

    /// Ã^f(λ) = ∫ W(x, λ) f(x²) dx with W = G (N even) or G̃ (N odd), batched.
    fn transforms(&self, polys: &[Vec<Dd>], lambda: f64) -> Result<Vec<f64>> {
        let refs: Vec<&[Dd]> = polys.iter().map(|p| p.as_slice()).collect();
        self.moments.a_values(&refs, lambda, self.odd())
    }
}

/// K_N(λ₁, λ₂); antisymmetric, identically zero for N = 1.
pub fn kernel_k(ks: &KernelSet, l1: f64, l2: f64) -> f64 {
    if l1 == l2 {
        return 0.0;
    }
    ks.kernel_k_squared(l1 * l1, l2 * l2)
}

/// G_N(λ₁, λ₂) = ∫ W(x, λ₁) K_N(x, λ₂) dx, plus g(λ₁)/ḡ for odd N.
pub fn kernel_g(ks: &KernelSet, l1: f64, l2: f64) -> Result<f64> {
    let base = ks.g_term(l1);
    if ks.indices.is_empty() {
        return Ok(base);
    }
    Ok(base + ks.transforms(&[ks.k_poly(l2)], l1)?[0])
}

/// Coefficients in x² of ∫ W(y, λ) K_N(x, y) dy.
fn w_poly(ks: &KernelSet, lambda: f64) -> Result<Vec<Dd>> {
    let rows: Vec<Vec<Dd>> = ks.kmat.clone();
    Ok(ks.transforms(&rows, lambda)?.into_iter().map(dd).collect())
}

/// W_N(λ₁, λ₂) = −W(λ₁, λ₂) + ∫∫ W(x₁, λ₁) W(x₂, λ₂) K_N(x₁, x₂), with W the
/// two-point weight G (N even) or G̃ (N odd); antisymmetric.
pub fn kernel_w(ks: &KernelSet, l1: f64, l2: f64) -> Result<f64> {
    if l1 == l2 {
        return Ok(0.0);
    }
    let w = &ks.weights;
    let base = -if ks.odd() { w.g_tilde(l1, l2)? } else { w.big_g(l1, l2)? };
    if ks.indices.is_empty() {
        return Ok(base);
    }
    let f = w_poly(ks, l2)?;
    Ok(base + ks.transforms(&[f], l1)?[0])
}

/// ρ_N(λ) = G_N(λ, λ)/N, normalized to one.
pub fn level_density(ks: &KernelSet, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative (got {lambda})")));
    }
    Ok(kernel_g(ks, lambda, lambda)? / ks.n as f64)
}

/// Batched level density.
pub fn level_density_grid(ks: &KernelSet, lambdas: &[f64]) -> Result<Vec<f64>> {
    lambdas.iter().map(|&l| level_density(ks, l)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRequest {
    pub points: Vec<f64>,
}

impl CorrelationRequest {
    pub fn new(points: Vec<f64>) -> Self {
        Self { points }
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }
}

/// The 2k × 2k skew matrix [[W_N, G_N], [−G_Nᵀ, K_N]] at the requested points.
pub fn correlation_matrix(ks: &KernelSet, points: &[f64]) -> Result<Vec<f64>> {
    let k = points.len();
    let d = 2 * k;
    let mut m = vec![0.0; d * d];
    for a in 0..k {
        for b in 0..k {
            let gab = kernel_g(ks, points[a], points[b])?;
            m[a * d + k + b] = gab;
            m[(k + b) * d + a] = -gab;
        }
        for b in (a + 1)..k {
            let w = kernel_w(ks, points[a], points[b])?;
            m[a * d + b] = w;
            m[b * d + a] = -w;
            let kk = kernel_k(ks, points[a], points[b]);
            m[(k + a) * d + k + b] = kk;
            m[(k + b) * d + k + a] = -kk;
        }
    }
    Ok(m)
}

/// k-point correlation function R⁽ᵏ⁾ as a signed Pfaffian.
pub fn correlation(ks: &KernelSet, req: &CorrelationRequest) -> Result<f64> {
    let k = req.k();
    if k == 0 {
        return Err(Error::InvalidArgument("correlation needs at least one point".into()));
    }
    if k > ks.n {
        return Ok(0.0);
    }
    if req.points.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidArgument("points must be nonnegative".into()));
    }
    for a in 0..k {
        for b in (a + 1)..k {
            if req.points[a] == req.points[b] {
                return Ok(0.0);
            }
        }
    }
    let m = correlation_matrix(ks, &req.points)?;
    let sign = if (k * (k - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * pfaffian(&m, 2 * k)?)
}

/// A fermion mass, real or purely imaginary; only κ² enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mass {
    Real(f64),
    Imaginary(f64),
}

impl Mass {
    pub fn squared(&self) -> f64 {
        match *self {
            Mass::Real(k) => k * k,
            Mass::Imaginary(k) => -k * k,
        }
    }
}

/// ⟨det(κ² − WW†)⟩ over N × N matrices, equal to q_N(κ²).
pub fn partition_z01(n: usize, c: &Coupling, kappa: Mass) -> f64 {
    let q = q_dd(n, c);
    f64::from(eval_dd(&q, kappa.squared()))
}

/// ⟨∏_f det(κ_f² − WW†)⟩ for an even number of masses, as a Pfaffian of
/// K_{N+k_f} over the masses divided by the Vandermonde of κ².
pub fn partition_z0f(n: usize, c: &Coupling, masses: &[Mass]) -> Result<f64> {
    let kf = masses.len();
    if kf % 2 == 1 {
        return Err(Error::InvalidArgument("the number of masses must be even".into()));
    }
    if kf == 0 {
        return Ok(1.0);
    }
    let y: Vec<f64> = masses.iter().map(Mass::squared).collect();
    for a in 0..kf {
        for b in (a + 1)..kf {
            if (y[a] - y[b]).abs() < 1e-8 {
                return Err(Error::DegenerateMass(format!(
                    "squared masses {} and {} coincide; confluent limits are not supported",
                    y[a], y[b]
                )));
            }
        }
    }
    let ks = KernelSet::new(n + kf, *c)?;
    let mut m = vec![0.0; kf * kf];
    for a in 0..kf {
        for b in (a + 1)..kf {
            let v = ks.kernel_k_squared(y[a], y[b]);
            m[a * kf + b] = v;
            m[b * kf + a] = -v;
        }
    }
    // C_N / C_{N+k_f} = ∏_{j=N}^{N+k_f-1} √(4πμ²)(1-μ²)^j j!
    let om = 1.0 - c.mu * c.mu;
    let ratio: f64 = (n..n + kf)
        .map(|j| (4.0 * std::f64::consts::PI).sqrt() * c.mu * om.powi(j as i32) * factorial(j))
        .product();
    let sign = if (kf / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * ratio * pfaffian(&m, kf)? / vandermonde(&y))
}
