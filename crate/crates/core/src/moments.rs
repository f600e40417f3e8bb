//! Polynomial moments of the two-point weight reduced to single θ-integrals.
//!
//! For a polynomial f(x²) = Σ f_k x^{2k} the x-integral of G(x, λ) f(x²) is
//! done in closed form per angle:
//!
//!   ∫₀^∞ G(x,λ) x^{2k} dx = k! λ ∫₀^π tan θ [Φ_k(p₋) − Φ_k(p₊)] dθ,
//!   Φ_k(p) = p^{-k-1} exp(-λ²/(4μ²p)) L_k(-η₋² cos²2θ λ²/p),
//!   p∓ = η₊ ∓ η₋ sin 2θ.
//!
//! Near μ = 1 the kernel polynomials have coefficients of order (1-μ²)^{-2N}
//! and the result survives only after both the sum over k and the angular
//! integral cancel, so everything up to the final value runs in
//! double-double arithmetic.

use std::f64::consts::PI;

use crate::dd::{bessel_i0_scaled_dd, dd, div_dd, exp_dd, recip_dd, Dd};
use crate::ensemble::Coupling;
use crate::error::Result;
use crate::quadrature::{theta_integral_dd, QuadratureSpec};
use crate::specfun::{binomial, factorial};

pub(crate) fn moment_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-12, max_subdivisions: 400 }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub c: Coupling,
    pub spec: QuadratureSpec,
    em: Dd,
    four_mu2: Dd,
    g_bar: Dd,
}

/// Horner evaluation of a double-double polynomial at a double argument.
pub(crate) fn eval_dd(f: &[Dd], y: f64) -> Dd {
    let mut acc = dd(0.0);
    for &a in f.iter().rev() {
        acc = acc * y + a;
    }
    acc
}

fn abs_dd(x: Dd) -> f64 {
    f64::from(x).abs()
}

impl Moments {
    pub fn new(c: Coupling) -> Self {
        Self::with_spec(c, moment_spec())
    }

    pub fn with_spec(c: Coupling, spec: QuadratureSpec) -> Self {
        Self {
            c,
            spec,
            em: c.eta_minus_dd(),
            four_mu2: c.mu2_dd() * 4.0,
            g_bar: dd(PI.sqrt()) * 2.0 * c.mu,
        }
    }

    pub fn g_bar(&self) -> f64 {
        f64::from(self.g_bar)
    }

    /// g(λ)/ḡ = (λ/μ) e^{-λ²/2} e^{-η₋λ²} I₀(η₋λ²).
    fn g_over_bar(&self, lambda: f64) -> Dd {
        let l2 = dd(lambda) * lambda;
        div_dd(dd(lambda), dd(self.c.mu)) * exp_dd(-(l2 * 0.5)) * bessel_i0_scaled_dd(self.em * l2)
    }

    fn sides(&self, s: Dd) -> [Dd; 2] {
        // p∓ = 1/2 + η₋(1 ∓ s), keeping η₊ − η₋ = 1/2 exact
        [self.em * (dd(1.0) - s) + 0.5, self.em * (s + 1.0) + 0.5]
    }

    /// k! p^{-k-1} L_k(-y) for k ≤ kmax.
    fn laguerre_tower(p: Dd, y: Dd, kmax: usize, out: &mut Vec<Dd>) {
        out.clear();
        let inv = recip_dd(p);
        let mut l_prev = dd(1.0);
        let mut l_cur = y + 1.0;
        let mut pw = inv;
        for k in 0..=kmax {
            let lk = if k == 0 { dd(1.0) } else { l_cur };
            out.push(lk * pw * factorial(k));
            if k >= 1 {
                let kf = k as f64;
                let next = ((y + (2.0 * kf + 1.0)) * l_cur - l_prev * kf) / (kf + 1.0);
                l_prev = l_cur;
                l_cur = next;
            }
            pw *= inv;
        }
    }

    /// ∫ g(x) x^{2k} dx in closed form, k ≤ kmax.
    pub fn g_moments(&self, kmax: usize) -> Vec<Dd> {
        let mu = dd(self.c.mu);
        let x = div_dd(self.c.mu2_dd() + 1.0, mu * 2.0);
        let mut out = Vec::with_capacity(kmax + 1);
        let (mut p0, mut p1) = (dd(1.0), x);
        for k in 0..=kmax {
            let pk = if k == 0 { p0 } else { p1 };
            out.push(pk * (mu * 2.0).powi(k as i32 + 1) * factorial(k) * PI.sqrt());
            if k >= 1 {
                let kf = k as f64;
                let next = (x * p1 * (2.0 * kf + 1.0) - p0 * kf) / (kf + 1.0);
                p0 = p1;
                p1 = next;
            }
        }
        out
    }

    pub fn g_dot(&self, f: &[Dd]) -> Dd {
        let r = self.g_moments(f.len().saturating_sub(1));
        f.iter().zip(&r).fold(dd(0.0), |acc, (a, b)| acc + *a * *b)
    }

    /// Ã^f(λ) (odd) or A^f(λ) (even) for several polynomials at once:
    /// the x-integral of the (tilde) two-point weight against f(x²).
    pub fn a_values(&self, polys: &[&[Dd]], lambda: f64, odd: bool) -> Result<Vec<f64>> {
        let n = polys.len();
        if lambda == 0.0 || n == 0 {
            return Ok(vec![0.0; n]);
        }
        let kmax = polys.iter().map(|p| p.len()).max().unwrap_or(1).max(1) - 1;
        let gdots: Vec<Dd> = if odd { polys.iter().map(|p| div_dd(self.g_dot(p), self.g_bar)).collect() } else { vec![] };
        let g_over = if odd { self.g_over_bar(lambda) } else { dd(0.0) };
        let lam = dd(lambda);
        let l2 = lam * lambda;
        let em2 = self.em * self.em;
        let mut tower = [Vec::with_capacity(kmax + 1), Vec::with_capacity(kmax + 1)];
        let r = theta_integral_dd(
            |s, cs, out: &mut [Dd], mags: &mut [f64]| {
                let sides = self.sides(s);
                let mut ex = [dd(0.0); 2];
                for side in 0..2 {
                    let p = sides[side];
                    let y = div_dd(em2 * cs * cs * l2, p);
                    Self::laguerre_tower(p, y, kmax, &mut tower[side]);
                    ex[side] = exp_dd(-div_dd(l2, self.four_mu2 * p));
                }
                for (i, f) in polys.iter().enumerate() {
                    let mut sm = dd(0.0);
                    let mut sp = dd(0.0);
                    let mut mag = 0.0;
                    for (k, &fk) in f.iter().enumerate() {
                        let (a, b) = (fk * tower[0][k], fk * tower[1][k]);
                        mag += abs_dd(a) * f64::from(ex[0]) + abs_dd(b) * f64::from(ex[1]);
                        sm += a;
                        sp += b;
                    }
                    mag *= lambda;
                    let mut v = (sm * ex[0] - sp * ex[1]) * lam;
                    if odd {
                        let base = (tower[0][0] * ex[0] - tower[1][0] * ex[1]) * lam;
                        v -= gdots[i] * base;
                        let (hv, hm) = self.h_integrand(f, sides);
                        v += g_over * hv;
                        mag += abs_dd(gdots[i] * base) + f64::from(g_over) * hm;
                    }
                    out[i] = v;
                    mags[i] = mag;
                }
            },
            n,
            &self.spec,
        )?;
        r.require("polynomial moment of the two-point weight")
    }

    /// Σ_k f_k k!(4μ²)^{k+1}(p₋^k − p₊^k)/2, the angular integrand of ∫H f,
    /// with the sum of the magnitudes of its terms.
    fn h_integrand(&self, f: &[Dd], sides: [Dd; 2]) -> (Dd, f64) {
        let mut acc = dd(0.0);
        let mut mag = 0.0;
        let mut pw = [dd(1.0), dd(1.0)];
        let mut scale = self.four_mu2;
        for (k, &fk) in f.iter().enumerate() {
            let t = fk * scale * factorial(k);
            mag += abs_dd(t) * f64::from(pw[0] + pw[1]);
            acc += t * (pw[0] - pw[1]);
            pw[0] *= sides[0];
            pw[1] *= sides[1];
            scale *= self.four_mu2;
        }
        (acc * 0.5, 0.5 * mag)
    }

    /// ∫₀^∞ H(λ) f(λ²) dλ.
    pub fn h_dot(&self, polys: &[&[Dd]]) -> Result<Vec<f64>> {
        let r = theta_integral_dd(
            |s, _, out: &mut [Dd], mags: &mut [f64]| {
                let sides = self.sides(s);
                for (i, f) in polys.iter().enumerate() {
                    let (v, m) = self.h_integrand(f, sides);
                    out[i] = v;
                    mags[i] = m;
                }
            },
            polys.len(),
            &self.spec,
        )?;
        r.require("moment of H")
    }

    /// ∫∫ G(λ₁,λ₂) f1(λ₁²) f2(λ₂²) for each pair, in closed angular form.
    pub fn s_values(&self, pairs: &[(&[Dd], &[Dd])]) -> Result<Vec<f64>> {
        let mut t_buf: Vec<Dd> = Vec::new();
        let mut t_abs: Vec<f64> = Vec::new();
        let r = theta_integral_dd(
            |s, cs, out: &mut [Dd], mags: &mut [f64]| {
                let sides = self.sides(s);
                for (i, (f1, f2)) in pairs.iter().enumerate() {
                    let mut v = dd(0.0);
                    let mut mag = 0.0;
                    for (side, &p) in sides.iter().enumerate() {
                        let kappa = self.four_mu2 * p;
                        let w = div_dd(self.em * self.em * cs * cs, p);
                        let amax = f1.len().saturating_sub(1);
                        // T_m = Σ_b f2_b (b+m)! κ^{b+m+1} / 2
                        t_buf.clear();
                        t_abs.clear();
                        for m in 0..=amax {
                            let mut t = dd(0.0);
                            let mut ta = 0.0;
                            let mut kp = kappa.powi(m as i32 + 1);
                            for (b, &fb) in f2.iter().enumerate() {
                                let u = fb * kp * factorial(b + m);
                                ta += abs_dd(u);
                                t += u;
                                kp *= kappa;
                            }
                            t_buf.push(t * 0.5);
                            t_abs.push(0.5 * ta);
                        }
                        let inv = recip_dd(p);
                        let mut acc = dd(0.0);
                        let mut pw = inv;
                        for (a, &fa) in f1.iter().enumerate() {
                            let mut inner = dd(0.0);
                            let mut inner_abs = 0.0;
                            let mut wi = dd(1.0);
                            for i2 in 0..=a {
                                let cb = binomial(a, i2);
                                let fi = factorial(i2);
                                inner += wi * t_buf[i2] * cb / fi;
                                inner_abs += f64::from(wi) * t_abs[i2] * cb / fi;
                                wi *= w;
                            }
                            mag += abs_dd(fa * pw) * inner_abs * factorial(a);
                            acc += fa * pw * inner * factorial(a);
                            pw *= inv;
                        }
                        if side == 0 {
                            v += acc;
                        } else {
                            v -= acc;
                        }
                    }
                    out[i] = v;
                    mags[i] = mag;
                }
            },
            pairs.len(),
            &self.spec,
        )?;
        r.require("double moment of the two-point weight")
    }
}
