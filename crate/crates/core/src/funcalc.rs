//! Functions of a self-adjoint body plus a nilpotent perturbation.
//!
//! For `X = B + N` with `B` a self-adjoint even matrix and `N` nilpotent,
//!
//! ```text
//! f(B + N) = Σ_k Σ_{i_0..i_k} f[ν_{i_0}, …, ν_{i_k}] Π_{i_0} N Π_{i_1} N … N Π_{i_k}
//! ```
//!
//! where `ν_i`, `Π_i` are the eigenvalues and eigenprojections of `B` and
//! `f[…]` are divided differences. For `f = exp` the inner sums are the
//! simplex integrals of the Duhamel expansion. The series terminates because
//! `N` is nilpotent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, max_abs, CMat};
use crate::opform::{grade_conj, OpForm};
use crate::ring::{monomial_product, Monomial};

/// Real function with derivatives, applied spectrally.
pub trait SpectralFn: Sync {
    fn value(&self, x: f64) -> f64;

    /// `k`-th derivative (used by the confluent Taylor fallback).
    fn derivative(&self, x: f64, k: usize) -> f64;

    fn divided_difference(&self, xs: &[f64]) -> f64 {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        generic_dd(self, &v)
    }
}

const TAYLOR_TERMS: usize = 12;

fn cluster_tol(xs: &[f64]) -> f64 {
    let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    1e-3 * scale
}

fn generic_dd<F: SpectralFn + ?Sized>(f: &F, xs: &[f64]) -> f64 {
    let k = xs.len() - 1;
    if k == 0 {
        return f.value(xs[0]);
    }
    let spread = xs[k] - xs[0];
    if spread <= cluster_tol(xs) {
        return taylor_dd(f, xs);
    }
    (generic_dd(f, &xs[1..]) - generic_dd(f, &xs[..k])) / spread
}

/// Confluent expansion about the mean:
/// `f[x_0..x_k] = Σ_j f^{(k+j)}(c)/(k+j)! · h_j(x − c)`.
fn taylor_dd<F: SpectralFn + ?Sized>(f: &F, xs: &[f64]) -> f64 {
    let k = xs.len() - 1;
    let center = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut h = [0.0f64; TAYLOR_TERMS];
    h[0] = 1.0;
    for &x in xs {
        let d = x - center;
        for j in 1..TAYLOR_TERMS {
            h[j] += d * h[j - 1];
        }
    }
    let mut fact = (1..=k).map(|i| i as f64).product::<f64>();
    let mut s = 0.0;
    for (j, hj) in h.iter().enumerate() {
        if j > 0 {
            fact *= (k + j) as f64;
        }
        s += f.derivative(center, k + j) / fact * hj;
    }
    s
}

/// `x ↦ e^{s x}`; divided differences via the bidiagonal exponential.
#[derive(Clone, Copy, Debug)]
pub struct Exp {
    pub s: f64,
}

impl SpectralFn for Exp {
    fn value(&self, x: f64) -> f64 {
        (self.s * x).exp()
    }

    fn derivative(&self, x: f64, k: usize) -> f64 {
        self.s.powi(k as i32) * (self.s * x).exp()
    }

    fn divided_difference(&self, xs: &[f64]) -> f64 {
        exp_divided_difference(xs, self.s)
    }
}

/// Divided difference of `e^{s x}` as the corner entry of
/// `exp(diag(s x) + E)` scaled by `s^k`.
pub fn exp_divided_difference(xs: &[f64], s: f64) -> f64 {
    let k = xs.len() - 1;
    if k == 0 {
        return (s * xs[0]).exp();
    }
    let mut j = nalgebra::DMatrix::<f64>::zeros(k + 1, k + 1);
    for (i, x) in xs.iter().enumerate() {
        j[(i, i)] = s * x;
        if i < k {
            j[(i, i + 1)] = 1.0;
        }
    }
    j.exp()[(0, k)] * s.powi(k as i32)
}

/// Indicator of `[lo, hi)`.
#[derive(Clone, Copy, Debug)]
pub struct Indicator {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralFn for Indicator {
    fn value(&self, x: f64) -> f64 {
        if x >= self.lo && x < self.hi {
            1.0
        } else {
            0.0
        }
    }

    fn derivative(&self, x: f64, k: usize) -> f64 {
        if k == 0 {
            self.value(x)
        } else {
            0.0
        }
    }
}

/// `x^{−1/2}` on `[lo, hi)`, zero elsewhere; requires `lo > 0`.
#[derive(Clone, Copy, Debug)]
pub struct InvSqrtBand {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralFn for InvSqrtBand {
    fn value(&self, x: f64) -> f64 {
        if x >= self.lo && x < self.hi {
            x.powf(-0.5)
        } else {
            0.0
        }
    }

    fn derivative(&self, x: f64, k: usize) -> f64 {
        if !(x >= self.lo && x < self.hi) {
            return 0.0;
        }
        let mut coef = 1.0;
        for i in 0..k {
            coef *= -0.5 - i as f64;
        }
        coef * x.powf(-0.5 - k as f64)
    }
}

/// `x ↦ x^{−1/2}` on `(0, ∞)`.
#[derive(Clone, Copy, Debug)]
pub struct InvSqrt;

impl SpectralFn for InvSqrt {
    fn value(&self, x: f64) -> f64 {
        x.powf(-0.5)
    }

    fn derivative(&self, x: f64, k: usize) -> f64 {
        InvSqrtBand { lo: 0.0, hi: f64::INFINITY }.derivative(x, k)
    }
}

/// Homogeneous eigen-decomposition of an even body that is self-adjoint for
/// the metric `G`: `B = V diag(ν) V⁻¹`, with `V` block diagonal.
#[derive(Clone, Debug)]
pub struct BodyEigen {
    pub p: usize,
    pub q: usize,
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub inverse: CMat,
}

impl BodyEigen {
    pub fn new(body: &CMat, p: usize, q: usize, metric: Option<&CMat>) -> Result<Self> {
        let n = p + q;
        let (s, sinv) = match metric {
            Some(g) => (linalg::herm_fn(g, f64::sqrt), linalg::herm_fn(g, |v| v.powf(-0.5))),
            None => (CMat::identity(n, n), CMat::identity(n, n)),
        };
        let b = &s * body * &sinv;
        let scale = 1.0 + max_abs(&b);
        let skew = max_abs(&(&b - b.adjoint()));
        if skew > 1e-8 * scale {
            return Err(Error::NotSelfAdjoint { residual: skew });
        }
        let odd = max_abs(&linalg::odd_part(&b, p));
        if odd > 1e-8 * scale {
            return Err(Error::Eigen(format!("body is not even (odd block {odd:.3e})")));
        }
        let mut values = Vec::with_capacity(n);
        let mut u = CMat::zeros(n, n);
        for (off, len) in [(0, p), (p, q)] {
            if len == 0 {
                continue;
            }
            let blk = b.view((off, off), (len, len)).into_owned();
            let (vals, vecs) = linalg::herm_eig(&blk);
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Eigen("non-finite eigenvalue".into()));
            }
            values.extend(vals);
            u.view_mut((off, off), (len, len)).copy_from(&vecs);
        }
        Ok(BodyEigen { p, q, values, vectors: &sinv * &u, inverse: u.adjoint() * &s })
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Eigenvectors whose eigenvalues satisfy `keep`, split into
    /// `(even columns, odd columns)`.
    pub fn select(&self, keep: impl Fn(f64) -> bool) -> (Vec<usize>, Vec<usize>) {
        let even = (0..self.p).filter(|&i| keep(self.values[i])).collect();
        let odd = (self.p..self.dim()).filter(|&i| keep(self.values[i])).collect();
        (even, odd)
    }
}

/// Divided-difference tensor `F[i_0..i_k]` for all index tuples, flattened.
struct DdTable {
    r: usize,
    levels: Vec<Vec<f64>>,
}

impl DdTable {
    fn new(values: &[f64], f: &dyn SpectralFn, max_k: usize) -> Self {
        let r = values.len();
        let mut levels = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            let size = r.pow(k as u32 + 1);
            let mut t = vec![0.0; size];
            let mut idx = vec![0usize; k + 1];
            let mut pts = vec![0.0; k + 1];
            for (flat, slot) in t.iter_mut().enumerate() {
                let mut rem = flat;
                for j in (0..=k).rev() {
                    idx[j] = rem % r;
                    rem /= r;
                }
                for j in 0..=k {
                    pts[j] = values[idx[j]];
                }
                *slot = f.divided_difference(&pts);
            }
            levels.push(t);
        }
        DdTable { r, levels }
    }

    /// `Σ_{i_1..i_{k−1}} F[i_0..i_k] M_1[i_0,i_1] … M_k[i_{k−1},i_k]`.
    fn contract(&self, ms: &[CMat]) -> CMat {
        let k = ms.len();
        let r = self.r;
        let table = &self.levels[k];
        let mut out = CMat::zeros(r, r);
        let mut idx = vec![0usize; k + 1];
        for (flat, &w) in table.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut rem = flat;
            for j in (0..=k).rev() {
                idx[j] = rem % r;
                rem /= r;
            }
            let mut prod = c(w);
            for (j, m) in ms.iter().enumerate() {
                prod *= m[(idx[j], idx[j + 1])];
                if prod == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            out[(idx[0], idx[k])] += prod;
        }
        out
    }
}

/// `f(X)` for an operator form with self-adjoint even body.
pub fn apply(f: &dyn SpectralFn, x: &OpForm, metric: Option<&CMat>) -> Result<OpForm> {
    let eig = BodyEigen::new(&x.body(), x.p(), x.q(), metric)?;
    Ok(apply_with(&eig, &x.nil(), f))
}

/// `f(B + N)` given the eigen-decomposition of `B`.
pub fn apply_with(eig: &BodyEigen, nil: &OpForm, f: &dyn SpectralFn) -> OpForm {
    let sig = nil.signature().clone();
    let (p, q) = (eig.p, eig.q);
    let r = eig.dim();
    // Nil part in the eigenbasis.
    let terms: Vec<(Monomial, CMat)> =
        nil.terms().map(|(k, m)| (k.clone(), &eig.inverse * m * &eig.vectors)).collect();
    // Ordered tuples of nil monomials with nonzero product.
    let mut tuples: Vec<(Vec<usize>, Monomial, bool)> = Vec::new();
    let mut stack: Vec<(Vec<usize>, Monomial, bool)> = vec![(Vec::new(), Monomial::one(sig.m), false)];
    while let Some((chosen, cur, neg)) = stack.pop() {
        for (idx, (k, _)) in terms.iter().enumerate() {
            if let Some((next, s)) = monomial_product(&cur, k, sig.degree) {
                let mut ch = chosen.clone();
                ch.push(idx);
                tuples.push((ch.clone(), next.clone(), neg ^ s));
                stack.push((ch, next, neg ^ s));
            }
        }
    }
    let depth = tuples.iter().map(|t| t.0.len()).max().unwrap_or(0);
    let table = DdTable::new(&eig.values, f, depth);

    let mut acc = OpForm::zero(&sig, p, q);
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(r, eig.values.iter().map(|&v| c(f.value(v)))));
    acc.add_term(Monomial::one(sig.m), diag);
    for (chosen, mono, neg) in &tuples {
        // Matrix i passes the forms of factors i+1..k.
        let mut mats = Vec::with_capacity(chosen.len());
        let mut later_parity = 0usize;
        for &j in chosen.iter().rev() {
            let (kj, mj) = &terms[j];
            mats.push(if later_parity & 1 == 1 { grade_conj(mj, p) } else { mj.clone() });
            later_parity += kj.parity();
        }
        mats.reverse();
        let m = table.contract(&mats);
        acc.add_term(mono.clone(), if *neg { -m } else { m });
    }

    acc.sandwich(&eig.vectors, &eig.inverse, p, q)
}

/// `e^{−t X}` for an even operator form.
pub fn exp_neg(x: &OpForm, t: f64, metric: Option<&CMat>) -> Result<OpForm> {
    apply(&Exp { s: -t }, x, metric)
}
