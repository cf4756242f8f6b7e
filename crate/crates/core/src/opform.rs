//! Endomorphism-valued forms `Σ ω_K M_K` over the coefficient ring, sections
//! `Σ ω_K v_K`, and first-order operators `C + D∘d`.
//!
//! Forms sit to the left of matrices. Moving a matrix `M` past an odd form
//! conjugates it by the grading `P`, so `(ωM)(ηN) = ωη (M'N)` with
//! `M' = PMP` when `η` is odd.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, max_abs, CMat, CVec};
use crate::ring::{monomial_product, Monomial, RingElement, RingSignature};

/// `PMP`: negates the odd blocks.
pub fn grade_conj(m: &CMat, p: usize) -> CMat {
    let mut r = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (i < p) != (j < p) {
                r[(i, j)] = -r[(i, j)];
            }
        }
    }
    r
}

#[derive(Clone, PartialEq)]
pub struct OpForm {
    sig: Arc<RingSignature>,
    p: usize,
    q: usize,
    terms: BTreeMap<Monomial, CMat>,
}

impl fmt::Debug for OpForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpForm")
            .field("p", &self.p)
            .field("q", &self.q)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl OpForm {
    pub fn zero(sig: &Arc<RingSignature>, p: usize, q: usize) -> Self {
        OpForm { sig: sig.clone(), p, q, terms: BTreeMap::new() }
    }

    pub fn identity(sig: &Arc<RingSignature>, p: usize, q: usize) -> Self {
        Self::from_matrix(sig, p, q, CMat::identity(p + q, p + q))
    }

    /// Constant (form-degree 0) operator.
    pub fn from_matrix(sig: &Arc<RingSignature>, p: usize, q: usize, m: CMat) -> Self {
        let mut r = Self::zero(sig, p, q);
        r.add_term(Monomial::one(sig.m), m);
        r
    }

    /// Scalar ring element times the identity.
    pub fn from_ring(r: &RingElement, p: usize, q: usize) -> Self {
        let n = p + q;
        let mut out = Self::zero(r.signature(), p, q);
        for (k, v) in r.terms() {
            out.add_term(k.clone(), CMat::identity(n, n) * *v);
        }
        out
    }

    /// `ω · M` for a ring element `ω` and a matrix `M`.
    pub fn ring_times(r: &RingElement, m: &CMat, p: usize, q: usize) -> Self {
        let mut out = Self::zero(r.signature(), p, q);
        for (k, v) in r.terms() {
            out.add_term(k.clone(), m * *v);
        }
        out
    }

    /// From a matrix whose entries are ring elements, `(Av)_i = Σ_j A_ij v_j`.
    pub fn from_entries(sig: &Arc<RingSignature>, p: usize, q: usize, entries: &[Vec<RingElement>]) -> Result<Self> {
        let n = p + q;
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("matrix of forms has the wrong shape".into()));
        }
        let mut out = Self::zero(sig, p, q);
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if **e.signature() != **sig {
                    return Err(Error::SignatureMismatch("matrix entry signature".into()));
                }
                for (k, v) in e.terms() {
                    let mut m = CMat::zeros(n, n);
                    m[(i, j)] = *v;
                    out.add_term(k.clone(), m);
                }
            }
        }
        Ok(out)
    }

    pub fn entries(&self) -> Vec<Vec<RingElement>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| RingElement::from_terms(&self.sig, self.terms.iter().map(|(k, m)| (k.clone(), m[(i, j)]))))
                    .collect()
            })
            .collect()
    }

    pub fn add_term(&mut self, mono: Monomial, m: CMat) {
        if mono.total_degree() > self.sig.degree {
            return;
        }
        assert_eq!(m.shape(), (self.dim(), self.dim()), "opform term shape");
        match self.terms.get_mut(&mono) {
            Some(cur) => {
                *cur += m;
                if cur.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                    self.terms.remove(&mono);
                }
            }
            None => {
                if m.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                    self.terms.insert(mono, m);
                }
            }
        }
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.sig
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CMat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn get(&self, mono: &Monomial) -> CMat {
        self.terms.get(mono).cloned().unwrap_or_else(|| CMat::zeros(self.dim(), self.dim()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the unit monomial.
    pub fn body(&self) -> CMat {
        self.get(&Monomial::one(self.sig.m))
    }

    pub fn nil(&self) -> Self {
        self.filter(|k| !k.is_one())
    }

    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        let mut r = Self::zero(&self.sig, self.p, self.q);
        for (k, m) in &self.terms {
            if keep(k) {
                r.terms.insert(k.clone(), m.clone());
            }
        }
        r
    }

    pub fn map(&self, mut f: impl FnMut(&Monomial, &CMat) -> CMat) -> Self {
        let mut r = Self::zero(&self.sig, self.p, self.q);
        for (k, m) in &self.terms {
            r.add_term(k.clone(), f(k, m));
        }
        r
    }

    /// Same terms with a different block structure of equal total size.
    pub fn regraded(&self, p: usize, q: usize) -> Self {
        assert_eq!(p + q, self.dim());
        OpForm { sig: self.sig.clone(), p, q, terms: self.terms.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(max_abs).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).max_abs() <= tol
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !(Arc::ptr_eq(&self.sig, &other.sig) || *self.sig == *other.sig) {
            return Err(Error::SignatureMismatch("operator forms over different rings".into()));
        }
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::Shape("operator forms of different graded rank".into()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut r = self.clone();
        for (k, m) in &other.terms {
            r.add_term(k.clone(), m.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut r = Self::zero(&self.sig, self.p, self.q);
        let twisted: Vec<(&Monomial, &CMat, CMat)> =
            self.terms.iter().map(|(k, m)| (k, m, grade_conj(m, self.p))).collect();
        for (kb, mb) in &other.terms {
            let odd_b = kb.parity() == 1;
            for (ka, ma, ta) in &twisted {
                if let Some((k, neg)) = monomial_product(ka, kb, self.sig.degree) {
                    let left = if odd_b { ta } else { *ma };
                    let prod = left * mb;
                    r.add_term(k, if neg { -prod } else { prod });
                }
            }
        }
        Ok(r)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, m| m * s)
    }

    /// Multiplication by a scalar ring element on the left.
    pub fn ring_mul(&self, r: &RingElement) -> Self {
        &OpForm::from_ring(r, self.p, self.q) * self
    }

    /// Coefficientwise exterior derivative, `d(ωM) = (dω)M`.
    pub fn d(&self) -> Self {
        let mut r = Self::zero(&self.sig, self.p, self.q);
        for (k, m) in &self.terms {
            let w = RingElement::from_terms(&self.sig, [(k.clone(), Complex64::new(1.0, 0.0))]).d();
            for (kk, v) in w.terms() {
                r.add_term(kk.clone(), m * *v);
            }
        }
        r
    }

    /// Total parity operator: `(−1)^{|X|} X` on homogeneous pieces.
    pub fn twist(&self) -> Self {
        self.map(|k, m| {
            let t = grade_conj(m, self.p);
            if k.parity() == 1 {
                -t
            } else {
                t
            }
        })
    }

    pub fn even_part(&self) -> Self {
        (self + &self.twist()).scale(c(0.5))
    }

    pub fn odd_part(&self) -> Self {
        (self - &self.twist()).scale(c(0.5))
    }

    pub fn form_part(&self, k: usize) -> Self {
        self.filter(|m| m.form_degree() == k)
    }

    /// Complex conjugate of both form coefficients and matrices.
    pub fn conjugate(&self) -> Self {
        self.map(|_, m| m.conjugate())
    }

    /// Supercommutator `[a, b]` for arbitrary (inhomogeneous) inputs.
    pub fn supercommutator(a: &Self, b: &Self) -> Self {
        let (ae, ao) = (a.even_part(), a.odd_part());
        let (be, bo) = (b.even_part(), b.odd_part());
        let ab = a * b;
        let mut r = &ab - &(&be * a);
        r = &r - &(&bo * &ae);
        &r + &(&bo * &ao)
    }

    /// Ring-valued supertrace `Σ ω_K str(M_K)`.
    pub fn supertrace(&self) -> RingElement {
        RingElement::from_terms(
            &self.sig,
            self.terms.iter().map(|(k, m)| (k.clone(), linalg::supertrace(m, self.p).expect("square"))),
        )
    }

    /// Clifford supertrace `sTr(Γ ∘ X)`; `Γ` has parity `ngen mod 2` and
    /// passes the forms with sign `(−1)^{ngen|ω|}`.
    pub fn clifford_supertrace(&self, gamma: &CMat, ngen: usize) -> RingElement {
        RingElement::from_terms(
            &self.sig,
            self.terms.iter().map(|(k, m)| {
                let s = linalg::supertrace(&(gamma * m), self.p).expect("square");
                (k.clone(), s * linalg::sign(ngen * k.parity()))
            }),
        )
    }

    /// Conjugation of every coefficient matrix, `M ↦ L M R`.
    pub fn sandwich(&self, l: &CMat, r: &CMat, p: usize, q: usize) -> Self {
        let mut out = Self::zero(&self.sig, p, q);
        for (k, m) in &self.terms {
            out.add_term(k.clone(), l * m * r);
        }
        out
    }

    pub fn odd_coefficient(&self, name: &str) -> Result<Self> {
        let j = self.sig.odd_index(name)? as u32;
        let bit = 1u32 << j;
        let mut r = Self::zero(&self.sig, self.p, self.q);
        for (k, m) in &self.terms {
            if k.odds & bit == 0 {
                continue;
            }
            let below = (k.odds & (bit - 1)).count_ones() as usize;
            let s = linalg::sign(k.form_degree() + below);
            let mono = Monomial { exps: k.exps.clone(), forms: k.forms, odds: k.odds & !bit };
            r.add_term(mono, m * c(s));
        }
        Ok(r)
    }

    pub fn without_odd(&self, name: &str) -> Result<Self> {
        let bit = 1u32 << self.sig.odd_index(name)?;
        Ok(self.filter(|k| k.odds & bit == 0))
    }

    /// Re-expresses over a signature with more odd parameters.
    pub fn embed(&self, target: &Arc<RingSignature>) -> Result<Self> {
        let mut out = Self::zero(target, self.p, self.q);
        for (k, m) in &self.terms {
            let e = RingElement::from_terms(&self.sig, [(k.clone(), Complex64::new(1.0, 0.0))]).embed(target)?;
            for (kk, v) in e.terms() {
                out.add_term(kk.clone(), m * *v);
            }
        }
        Ok(out)
    }

    /// Evaluates polynomial coefficients at a base point.
    pub fn eval_at(&self, point: &[f64]) -> Self {
        let mut out = Self::zero(&self.sig, self.p, self.q);
        for (k, m) in &self.terms {
            let w: f64 = k.exps.iter().zip(point).map(|(&e, &x)| x.powi(e as i32)).product();
            let mono = Monomial { exps: smallvec::SmallVec::from_elem(0, self.sig.m), forms: k.forms, odds: k.odds };
            out.add_term(mono, m * c(w));
        }
        out
    }

    pub fn apply(&self, s: &Section) -> Section {
        let mut out = Section::zero(&self.sig, self.dim());
        for (kv, v) in &s.terms {
            let odd_v = kv.parity() == 1;
            for (ka, m) in &self.terms {
                if let Some((k, neg)) = monomial_product(ka, kv, self.sig.degree) {
                    let left = if odd_v { grade_conj(m, self.p) } else { m.clone() };
                    let w = left * v;
                    out.add_term(k, if neg { -w } else { w });
                }
            }
        }
        out
    }
}

impl std::ops::Add for &OpForm {
    type Output = OpForm;
    fn add(self, rhs: Self) -> OpForm {
        self.try_add(rhs).expect("operator form mismatch")
    }
}

impl std::ops::Sub for &OpForm {
    type Output = OpForm;
    fn sub(self, rhs: Self) -> OpForm {
        self.try_add(&-rhs).expect("operator form mismatch")
    }
}

impl std::ops::Neg for &OpForm {
    type Output = OpForm;
    fn neg(self) -> OpForm {
        self.map(|_, m| -m)
    }
}

impl std::ops::Mul for &OpForm {
    type Output = OpForm;
    fn mul(self, rhs: Self) -> OpForm {
        self.try_mul(rhs).expect("operator form mismatch")
    }
}

/// Form-valued section `Σ ω_K v_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    sig: Arc<RingSignature>,
    dim: usize,
    terms: BTreeMap<Monomial, CVec>,
}

impl Section {
    pub fn zero(sig: &Arc<RingSignature>, dim: usize) -> Self {
        Section { sig: sig.clone(), dim, terms: BTreeMap::new() }
    }

    pub fn constant(sig: &Arc<RingSignature>, v: CVec) -> Self {
        let mut s = Self::zero(sig, v.len());
        s.add_term(Monomial::one(sig.m), v);
        s
    }

    /// `α · v` for a ring element `α`.
    pub fn ring_times(a: &RingElement, v: &CVec) -> Self {
        let mut s = Self::zero(a.signature(), v.len());
        for (k, x) in a.terms() {
            s.add_term(k.clone(), v * *x);
        }
        s
    }

    pub fn add_term(&mut self, mono: Monomial, v: CVec) {
        if mono.total_degree() > self.sig.degree {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(cur) => *cur += v,
            None => {
                self.terms.insert(mono, v);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CVec)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (k, v) in &other.terms {
            r.add_term(k.clone(), v.clone());
        }
        r
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut r = self.clone();
        for v in r.terms.values_mut() {
            *v *= s;
        }
        r
    }

    /// Left multiplication by a ring element.
    pub fn ring_mul(&self, a: &RingElement) -> Self {
        let mut out = Self::zero(&self.sig, self.dim);
        for (ka, x) in a.terms() {
            for (kv, v) in &self.terms {
                if let Some((k, neg)) = monomial_product(ka, kv, self.sig.degree) {
                    out.add_term(k, v * if neg { -*x } else { *x });
                }
            }
        }
        out
    }

    /// `d(ω v) = (dω) v` in the given trivialization.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(&self.sig, self.dim);
        for (k, v) in &self.terms {
            let w = RingElement::from_terms(&self.sig, [(k.clone(), Complex64::new(1.0, 0.0))]).d();
            for (kk, x) in w.terms() {
                out.add_term(kk.clone(), v * *x);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }
}

/// First-order operator `C + D∘d` with operator-form coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp {
    pub c: OpForm,
    pub d: OpForm,
}

impl DiffOp {
    pub fn from_opform(c: OpForm) -> Self {
        let d = OpForm::zero(c.signature(), c.p(), c.q());
        DiffOp { c, d }
    }

    /// The de Rham differential itself.
    pub fn exterior(sig: &Arc<RingSignature>, p: usize, q: usize) -> Self {
        DiffOp { c: OpForm::zero(sig, p, q), d: OpForm::identity(sig, p, q) }
    }

    /// `d + X`.
    pub fn connection(x: OpForm) -> Self {
        let id = OpForm::identity(x.signature(), x.p(), x.q());
        DiffOp { c: x, d: id }
    }

    pub fn add(&self, other: &Self) -> Self {
        DiffOp { c: &self.c + &other.c, d: &self.d + &other.d }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DiffOp { c: self.c.scale(s), d: self.d.scale(s) }
    }

    /// Composition using `d∘C = dC + (−1)^{|C|} C∘d` and `d² = 0`.
    pub fn compose(&self, other: &Self) -> Self {
        let c = &(&self.c * &other.c) + &(&self.d * &other.c.d());
        let dd = &(&(&self.c * &other.d) + &(&self.d * &other.c.twist())) + &(&self.d * &other.d.d());
        DiffOp { c, d: dd }
    }

    pub fn apply(&self, s: &Section) -> Section {
        self.c.apply(s).add(&self.d.apply(&s.d()))
    }

    /// Norm of the differential part.
    pub fn order_one_norm(&self) -> f64 {
        self.d.max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;

    fn sig() -> Arc<RingSignature> {
        RingSignature::new(2, 3, &["theta"]).unwrap()
    }

    #[test]
    fn twist_sign_on_odd_form_times_odd_matrix() {
        let s = sig();
        let dx = RingElement::dx(&s, 0);
        let odd = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let x = OpForm::ring_times(&dx, &odd, 1, 1);
        // Odd form times odd matrix is even in total.
        assert!(x.twist().approx_eq(&x, 0.0));
        let y = OpForm::ring_times(&dx, &CMat::identity(2, 2), 1, 1);
        assert!(y.twist().approx_eq(&-&y, 0.0));
    }

    #[test]
    fn product_matches_entrywise_rule() {
        let s = sig();
        let dx1 = RingElement::dx(&s, 0);
        let dx2 = RingElement::dx(&s, 1);
        let a = from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let b = from_real(2, 2, &[0.0, 3.0, 5.0, 0.0]);
        let x = OpForm::ring_times(&dx1, &a, 1, 1);
        let y = OpForm::ring_times(&dx2, &b, 1, 1);
        let expect = OpForm::ring_times(&(&dx1 * &dx2), &(grade_conj(&a, 1) * &b), 1, 1);
        assert!((&x * &y).approx_eq(&expect, 0.0));
    }

    #[test]
    fn diffop_d_squared_vanishes() {
        let s = sig();
        let d = DiffOp::exterior(&s, 1, 1);
        let dd = d.compose(&d);
        assert!(dd.c.is_zero() && dd.d.is_zero());
    }

    #[test]
    fn connection_square_is_curvature() {
        let s = sig();
        let x1 = RingElement::x(&s, 0);
        let dx2 = RingElement::dx(&s, 1);
        let a = from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let w = &OpForm::ring_times(&(&x1 * &dx2), &CMat::identity(2, 2), 1, 1)
            + &OpForm::from_matrix(&s, 1, 1, a);
        let conn = DiffOp::connection(w.clone());
        let sq = conn.compose(&conn);
        assert!(sq.d.max_abs() < 1e-14);
        let f = &w.d() + &(&w * &w);
        assert!(sq.c.approx_eq(&f, 1e-14));
    }

    #[test]
    fn apply_respects_composition() {
        let s = sig();
        let x1 = RingElement::x(&s, 0);
        let dx1 = RingElement::dx(&s, 0);
        let a = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let op1 = DiffOp::connection(OpForm::ring_times(&dx1, &a, 1, 1));
        let op2 = DiffOp::connection(OpForm::ring_times(&x1, &b, 1, 1));
        let v = CVec::from_vec(vec![c(1.0), c(2.0)]);
        let sec = Section::ring_times(&(&x1 * &x1), &v);
        let lhs = op1.compose(&op2).apply(&sec);
        let rhs = op1.apply(&op2.apply(&sec));
        let diff = lhs.add(&rhs.scale(c(-1.0)));
        assert!(diff.max_abs() < 1e-13);
    }
}
