//! Small dense complex matrices, Pfaffians, Hermitian eigenvalues and the
//! random-matrix samplers (GUE, Ginibre, Haar unitary).

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        (0..self.rows).all(|i| (0..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol * scale))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Scalars the Pfaffian routine can run on.
pub trait PfScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl PfScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl PfScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

fn check_skew<T: PfScalar>(a: &[T], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::InvalidArgument(format!("expected {} entries, got {}", n * n, a.len())));
    }
    let scale = a.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    for i in 0..n {
        for j in i..n {
            if (a[i * n + j] + a[j * n + i]).modulus() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidArgument(format!("matrix is not skew-symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Pfaffian of an `n × n` skew-symmetric matrix (row-major) by Parlett–Reid
/// tridiagonalization with partial pivoting.
pub fn pfaffian<T: PfScalar>(a: &[T], n: usize) -> Result<T> {
    if n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Pfaffian needs even dimension, got {n}")));
    }
    check_skew(a, n)?;
    let mut m = a.to_vec();
    let mut pf = T::one();
    let idx = |i: usize, j: usize| i * n + j;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = m[idx(k + 1, k)].modulus();
        for i in (k + 2)..n {
            let v = m[idx(i, k)].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                m.swap(idx(k + 1, j), idx(kp, j));
            }
            for i in 0..n {
                m.swap(idx(i, k + 1), idx(i, kp));
            }
            pf = -pf;
        }
        let piv = m[idx(k, k + 1)];
        if piv.modulus() == 0.0 {
            return Ok(T::zero());
        }
        pf = pf * piv;
        if k + 2 < n {
            let tau: Vec<T> = ((k + 2)..n).map(|j| m[idx(k, j)] / piv).collect();
            let col: Vec<T> = ((k + 2)..n).map(|i| m[idx(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    m[idx(i, j)] = m[idx(i, j)] + tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    if !h.is_hermitian(1e-12) {
        return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
    }
    let n = h.rows();
    let mut a = h.clone();
    let norm = a.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-13 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = E R with E = diag(.., e^{-iφ} at q, ..)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Singular values of a square matrix: square roots of the eigenvalues of W†W, ascending.
pub fn singular_values(w: &ComplexMatrix) -> Result<Vec<f64>> {
    if !w.is_square() {
        return Err(Error::InvalidArgument("singular_values expects a square matrix".into()));
    }
    let mut wdw = w.adjoint().matmul(w);
    let n = wdw.rows();
    // symmetrize away rounding so the Hermitian check is exact
    for i in 0..n {
        wdw[(i, i)] = Complex64::new(wdw[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = 0.5 * (wdw[(i, j)] + wdw[(j, i)].conj());
            wdw[(i, j)] = v;
            wdw[(j, i)] = v.conj();
        }
    }
    Ok(hermitian_eigenvalues(&wdw)?.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// A reproducible random stream: one ChaCha generator per (seed, stream id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut r = ChaCha20Rng::seed_from_u64(self.master_seed);
        r.set_stream(self.stream_id);
        r
    }

    /// A derived stream, used to give independent sub-tasks their own streams.
    pub fn substream(&self, k: u64) -> Self {
        Self { master_seed: self.master_seed, stream_id: self.stream_id.wrapping_mul(1 << 20).wrapping_add(k) }
    }
}

fn normal<R: rand::Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// GUE matrix with density ∝ exp(-Tr H²/2).
pub fn sample_gue<R: rand::Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        h[(i, i)] = Complex64::new(normal(rng), 0.0);
        for j in (i + 1)..n {
            let v = Complex64::new(s * normal(rng), s * normal(rng));
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    h
}

/// Complex Ginibre matrix with E|z_ij|² = 1.
pub fn sample_ginibre<R: rand::Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(s * normal(rng), s * normal(rng)))
}

/// Householder QR; returns Q and the diagonal of R.
fn qr(a: &ComplexMatrix) -> (ComplexMatrix, Vec<Complex64>) {
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n {
        let norm: f64 = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let mut v: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] += ph * norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        // R <- (I - 2 v v†/|v|²) R
        for j in 0..n {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            let f = dot * (2.0 / vn);
            for i in k..n {
                let upd = v[i - k] * f;
                r[(i, j)] -= upd;
            }
        }
        // Q <- Q (I - 2 v v†/|v|²)
        for i in 0..n {
            let dot: Complex64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            let f = dot * (2.0 / vn);
            for j in k..n {
                let upd = f * v[j - k].conj();
                q[(i, j)] -= upd;
            }
        }
    }
    let diag = (0..n).map(|i| r[(i, i)]).collect();
    (q, diag)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal moved into Q.
pub fn sample_haar_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = sample_ginibre(n, rng);
    let (mut q, d) = qr(&z);
    for j in 0..n {
        let ph = if d[j].norm() > 0.0 { d[j] / d[j].norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}
