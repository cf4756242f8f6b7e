//! Truncated supercommutative differential graded coefficient ring.
//!
//! An element is a finite sum of monomials `x^a dx_F o_O` where `x^a` is a
//! polynomial monomial in the base coordinates, `dx_F` an ordered wedge of
//! coordinate differentials and `o_O` an ordered product of auxiliary odd
//! parameters. The canonical order places forms before odd parameters, each
//! sorted by index, which fixes every Koszul sign.
//!
//! Monomials of total degree (polynomial degree + form degree) above the
//! signature bound `D` are identically zero. Odd parameters do not count
//! toward the bound. The ideal of high total degree is stable under `d` and
//! multiplication, so the quotient is a differential graded algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest number of base coordinates or odd parameters a signature can hold.
pub const MAX_GENERATORS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSignature {
    /// Base dimension.
    pub m: usize,
    /// Total-degree truncation bound.
    #[serde(rename = "D")]
    pub degree: usize,
    pub odd_params: Vec<String>,
    #[serde(default = "default_field")]
    pub field: ScalarField,
}

fn default_field() -> ScalarField {
    ScalarField::Complex
}

impl RingSignature {
    pub fn new(m: usize, degree: usize, odd_params: &[&str]) -> Result<Arc<Self>> {
        Self::with_field(m, degree, odd_params, ScalarField::Complex)
    }

    pub fn with_field(
        m: usize,
        degree: usize,
        odd_params: &[&str],
        field: ScalarField,
    ) -> Result<Arc<Self>> {
        let sig = RingSignature {
            m,
            degree,
            odd_params: odd_params.iter().map(|s| s.to_string()).collect(),
            field,
        };
        sig.validate()?;
        Ok(Arc::new(sig))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > MAX_GENERATORS || self.odd_params.len() > MAX_GENERATORS {
            return Err(Error::InvalidSignature(format!(
                "at most {MAX_GENERATORS} coordinates and odd parameters"
            )));
        }
        for (i, a) in self.odd_params.iter().enumerate() {
            if self.odd_params[..i].contains(a) {
                return Err(Error::InvalidSignature(format!("duplicate odd parameter `{a}`")));
            }
        }
        Ok(())
    }

    pub fn odd_index(&self, name: &str) -> Result<usize> {
        self.odd_params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownOddParam(name.to_string()))
    }

    /// Same base data with additional odd parameters appended.
    pub fn with_odd_params(&self, extra: &[&str]) -> Result<Arc<Self>> {
        let mut sig = self.clone();
        for e in extra {
            if !sig.odd_params.iter().any(|p| p == e) {
                sig.odd_params.push(e.to_string());
            }
        }
        sig.validate()?;
        Ok(Arc::new(sig))
    }

    /// Upper bound on the nilpotency order of any element with zero body.
    pub fn nilpotency_bound(&self) -> usize {
        self.degree + self.odd_params.len() + 1
    }
}

/// Coefficient field for ring and Clifford arithmetic: double precision
/// complex numbers, or exact complex rationals for sign cross-checks.
pub trait Scalar:
    Clone + PartialEq + fmt::Debug + Send + Sync + Zero + One + Neg<Output = Self> + 'static
where
    Self: Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>,
{
    fn conj(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn i() -> Self;
    fn abs_f64(&self) -> f64;
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn i() -> Self {
        Complex64::i()
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
}

/// Exact complex rational scalar.
pub type Exact = Complex<Rational64>;

impl Scalar for Exact {
    fn conj(&self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(Rational64::from_integer(v), Rational64::zero())
    }
    fn i() -> Self {
        Complex::new(Rational64::zero(), Rational64::one())
    }
    fn abs_f64(&self) -> f64 {
        let re = *self.re.numer() as f64 / *self.re.denom() as f64;
        let im = *self.im.numer() as f64 / *self.im.denom() as f64;
        re.hypot(im)
    }
}

/// Basis monomial `x^exps · dx_forms · o_odds` (bitmasks in ascending order).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub exps: SmallVec<[u8; 4]>,
    pub forms: u32,
    pub odds: u32,
}

impl Monomial {
    pub fn one(m: usize) -> Self {
        Monomial { exps: SmallVec::from_elem(0, m), forms: 0, odds: 0 }
    }

    pub fn poly_degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    pub fn form_degree(&self) -> usize {
        self.forms.count_ones() as usize
    }

    pub fn odd_count(&self) -> usize {
        self.odds.count_ones() as usize
    }

    pub fn total_degree(&self) -> usize {
        self.poly_degree() + self.form_degree()
    }

    /// 0 for even, 1 for odd.
    pub fn parity(&self) -> usize {
        (self.form_degree() + self.odd_count()) & 1
    }

    pub fn is_one(&self) -> bool {
        self.forms == 0 && self.odds == 0 && self.exps.iter().all(|&e| e == 0)
    }

    /// Nilpotency grade: every product of `k` grade-positive monomials has
    /// grade at least `k`.
    pub fn grade(&self) -> usize {
        self.total_degree() + self.odd_count()
    }
}

/// Number of set bits of `mask` strictly above bit `j`.
#[inline]
fn bits_above(mask: u32, j: u32) -> u32 {
    if j >= 31 {
        0
    } else {
        (mask >> (j + 1)).count_ones()
    }
}

#[inline]
fn bits_below(mask: u32, j: u32) -> u32 {
    (mask & ((1u32 << j) - 1)).count_ones()
}

/// Sign of the shuffle merging ordered set `a` followed by ordered set `b`.
#[inline]
fn merge_sign(a: u32, b: u32) -> bool {
    let mut inv = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inv += bits_above(a, j);
        rest &= rest - 1;
    }
    inv & 1 == 1
}

/// Product of two basis monomials: `None` if zero in the quotient, otherwise
/// the canonical monomial and whether the Koszul sign is negative.
pub fn monomial_product(a: &Monomial, b: &Monomial, degree: usize) -> Option<(Monomial, bool)> {
    if a.forms & b.forms != 0 || a.odds & b.odds != 0 {
        return None;
    }
    if a.total_degree() + b.total_degree() > degree {
        return None;
    }
    // b's forms pass a's odd parameters, then both shuffles are sorted.
    let mut negative = (a.odd_count() * b.form_degree()) & 1 == 1;
    negative ^= merge_sign(a.forms, b.forms);
    negative ^= merge_sign(a.odds, b.odds);
    let exps = a.exps.iter().zip(b.exps.iter()).map(|(x, y)| x + y).collect();
    Some((Monomial { exps, forms: a.forms | b.forms, odds: a.odds | b.odds }, negative))
}

#[derive(Clone, PartialEq)]
pub struct RingElement<S: Scalar = Complex64> {
    sig: Arc<RingSignature>,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> fmt::Debug for RingElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<S: Scalar> RingElement<S> {
    pub fn zero(sig: &Arc<RingSignature>) -> Self {
        RingElement { sig: sig.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(sig: &Arc<RingSignature>, c: S) -> Self {
        let mut r = Self::zero(sig);
        r.add_term(Monomial::one(sig.m), c);
        r
    }

    pub fn one(sig: &Arc<RingSignature>) -> Self {
        Self::scalar(sig, S::one())
    }

    /// Coordinate function `x_i` (0-based).
    pub fn x(sig: &Arc<RingSignature>, i: usize) -> Self {
        assert!(i < sig.m, "coordinate index out of range");
        let mut mono = Monomial::one(sig.m);
        mono.exps[i] = 1;
        Self::from_terms(sig, [(mono, S::one())])
    }

    /// Coordinate differential `dx_i` (0-based).
    pub fn dx(sig: &Arc<RingSignature>, i: usize) -> Self {
        assert!(i < sig.m, "coordinate index out of range");
        let mut mono = Monomial::one(sig.m);
        mono.forms = 1 << i;
        Self::from_terms(sig, [(mono, S::one())])
    }

    pub fn odd(sig: &Arc<RingSignature>, name: &str) -> Result<Self> {
        let j = sig.odd_index(name)?;
        let mut mono = Monomial::one(sig.m);
        mono.odds = 1 << j;
        Ok(Self::from_terms(sig, [(mono, S::one())]))
    }

    /// Builds an element, dropping monomials above the truncation bound.
    pub fn from_terms(sig: &Arc<RingSignature>, terms: impl IntoIterator<Item = (Monomial, S)>) -> Self {
        let mut r = Self::zero(sig);
        for (k, v) in terms {
            assert_eq!(k.exps.len(), sig.m, "monomial has wrong number of exponents");
            r.add_term(k, v);
        }
        r
    }

    pub fn add_term(&mut self, mono: Monomial, c: S) {
        if mono.total_degree() > self.sig.degree || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, S> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> S {
        self.terms.get(mono).cloned().unwrap_or_else(S::zero)
    }

    fn check_sig(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.sig, &other.sig) || *self.sig == *other.sig {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!("{:?} vs {:?}", self.sig, other.sig)))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        let mut r = self.clone();
        for (k, v) in &other.terms {
            r.add_term(k.clone(), v.clone());
        }
        Ok(r)
    }

    /// Supercommutative product with Koszul signs, truncated by total degree.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        let mut r = Self::zero(&self.sig);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                if let Some((k, neg)) = monomial_product(ka, kb, self.sig.degree) {
                    let c = va.clone() * vb.clone();
                    r.add_term(k, if neg { -c } else { c });
                }
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut r = Self::zero(&self.sig);
        for (k, v) in &self.terms {
            r.add_term(k.clone(), v.clone() * c.clone());
        }
        r
    }

    pub fn map_coefficients(&self, mut f: impl FnMut(&Monomial, &S) -> S) -> Self {
        Self::from_terms(&self.sig, self.terms.iter().map(|(k, v)| (k.clone(), f(k, v))))
    }

    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        Self::from_terms(
            &self.sig,
            self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())),
        )
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::one(&self.sig);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// Exterior derivative; odd parameters are constants.
    pub fn d(&self) -> Self {
        let mut r = Self::zero(&self.sig);
        for (k, v) in &self.terms {
            for i in 0..self.sig.m {
                let a = k.exps[i];
                if a == 0 || k.forms & (1 << i) != 0 {
                    continue;
                }
                let mut exps = k.exps.clone();
                exps[i] -= 1;
                let neg = bits_below(k.forms, i as u32) & 1 == 1;
                let c = v.clone() * S::from_i64(a as i64);
                r.add_term(
                    Monomial { exps, forms: k.forms | (1 << i), odds: k.odds },
                    if neg { -c } else { c },
                );
            }
        }
        r
    }

    /// Constant (empty-monomial) coefficient and the nilpotent remainder.
    pub fn body_nil_split(&self) -> (S, Self) {
        let one = Monomial::one(self.sig.m);
        let body = self.coefficient(&one);
        (body, self.filter(|k| !k.is_one()))
    }

    /// Complex conjugation; coordinates, differentials and odd parameters
    /// are real generators.
    pub fn conjugate(&self) -> Self {
        self.map_coefficients(|_, v| v.conj())
    }

    /// For `a = a0 + p·a1` with `a0, a1` free of `p`, returns `a1`.
    pub fn odd_coefficient(&self, name: &str) -> Result<Self> {
        let j = self.sig.odd_index(name)? as u32;
        let bit = 1u32 << j;
        let mut r = Self::zero(&self.sig);
        for (k, v) in &self.terms {
            if k.odds & bit == 0 {
                continue;
            }
            let neg = (k.form_degree() as u32 + bits_below(k.odds, j)) & 1 == 1;
            let mono = Monomial { exps: k.exps.clone(), forms: k.forms, odds: k.odds & !bit };
            r.add_term(mono, if neg { -v.clone() } else { v.clone() });
        }
        Ok(r)
    }

    /// Part of `a` free of the odd parameter `name`.
    pub fn without_odd(&self, name: &str) -> Result<Self> {
        let bit = 1u32 << self.sig.odd_index(name)?;
        Ok(self.filter(|k| k.odds & bit == 0))
    }

    /// Component of fixed form degree.
    pub fn form_part(&self, k: usize) -> Self {
        self.filter(|m| m.form_degree() == k)
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.parity() == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| m.parity() == 1)
    }

    /// Parity if homogeneous.
    pub fn parity(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| k.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    /// Rescales every monomial containing odd parameter `name` by `c`.
    pub fn scale_odd(&self, name: &str, c: &S) -> Result<Self> {
        let bit = 1u32 << self.sig.odd_index(name)?;
        Ok(self.map_coefficients(|k, v| if k.odds & bit != 0 { v.clone() * c.clone() } else { v.clone() }))
    }

    /// Re-expresses the element over a signature with the same base data and
    /// a superset of odd parameters.
    pub fn embed(&self, target: &Arc<RingSignature>) -> Result<Self> {
        if target.m != self.sig.m || target.degree < self.sig.degree {
            return Err(Error::SignatureMismatch("incompatible base data for embedding".into()));
        }
        let mut remap = Vec::with_capacity(self.sig.odd_params.len());
        for p in &self.sig.odd_params {
            remap.push(target.odd_index(p)?);
        }
        let mut r = Self::zero(target);
        for (k, v) in &self.terms {
            // Reorder odd generators into the target order and track the sign.
            let idx: Vec<usize> = (0..32).filter(|j| k.odds & (1 << j) != 0).map(|j| remap[j]).collect();
            let mut inv = 0usize;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    if idx[a] > idx[b] {
                        inv += 1;
                    }
                }
            }
            let odds = idx.iter().fold(0u32, |m, &j| m | (1 << j));
            let mono = Monomial { exps: k.exps.clone(), forms: k.forms, odds };
            r.add_term(mono, if inv & 1 == 1 { -v.clone() } else { v.clone() });
        }
        Ok(r)
    }
}

impl RingElement<Complex64> {
    pub fn real(sig: &Arc<RingSignature>, c: f64) -> Self {
        Self::scalar(sig, Complex64::new(c, 0.0))
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(&Complex64::new(c, 0.0))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).max_abs() <= tol
    }

    /// Evaluates the polynomial coefficients at a base point, keeping forms
    /// and odd parameters.
    pub fn eval_at(&self, point: &[f64]) -> Self {
        let mut r = Self::zero(&self.sig);
        for (k, v) in &self.terms {
            let w: f64 = k.exps.iter().zip(point).map(|(&e, &x)| x.powi(e as i32)).product();
            let mono = Monomial { exps: SmallVec::from_elem(0, self.sig.m), forms: k.forms, odds: k.odds };
            r.add_term(mono, v * w);
        }
        r
    }
}

/// Lossless conversion of an exact element to floating point.
pub fn exact_to_float(a: &RingElement<Exact>) -> RingElement<Complex64> {
    let to_f = |q: &Rational64| *q.numer() as f64 / *q.denom() as f64;
    RingElement::from_terms(
        a.signature(),
        a.terms().map(|(k, v)| (k.clone(), Complex64::new(to_f(&v.re), to_f(&v.im)))),
    )
}

impl<S: Scalar> Add for &RingElement<S> {
    type Output = RingElement<S>;
    fn add(self, rhs: Self) -> RingElement<S> {
        self.try_add(rhs).expect("ring signature mismatch")
    }
}

impl<S: Scalar> Sub for &RingElement<S> {
    type Output = RingElement<S>;
    fn sub(self, rhs: Self) -> RingElement<S> {
        self.try_add(&-rhs).expect("ring signature mismatch")
    }
}

impl<S: Scalar> Neg for &RingElement<S> {
    type Output = RingElement<S>;
    fn neg(self) -> RingElement<S> {
        self.map_coefficients(|_, v| -v.clone())
    }
}

impl<S: Scalar> Mul for &RingElement<S> {
    type Output = RingElement<S>;
    fn mul(self, rhs: Self) -> RingElement<S> {
        self.try_mul(rhs).expect("ring signature mismatch")
    }
}

impl<S: Scalar> fmt::Display for RingElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v:?})")?;
            for (i, &e) in k.exps.iter().enumerate() {
                if e > 0 {
                    write!(f, "·x{}^{}", i + 1, e)?;
                }
            }
            for i in 0..32 {
                if k.forms & (1 << i) != 0 {
                    write!(f, "·dx{}", i + 1)?;
                }
            }
            for (i, p) in self.sig.odd_params.iter().enumerate() {
                if k.odds & (1 << i) != 0 {
                    write!(f, "·{p}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn differentials_anticommute() {
        let sig = RingSignature::new(2, 3, &[]).unwrap();
        let a = &RingElement::<Complex64>::dx(&sig, 0) * &RingElement::dx(&sig, 1);
        let b = &RingElement::<Complex64>::dx(&sig, 1) * &RingElement::dx(&sig, 0);
        assert_eq!(a, -&b);
        assert!(!a.is_zero());
    }

    #[test]
    fn odd_square_vanishes() {
        let sig = RingSignature::new(1, 2, &["theta"]).unwrap();
        let t = RingElement::<Complex64>::odd(&sig, "theta").unwrap();
        assert!((&t * &t).is_zero());
    }

    #[test]
    fn truncation_by_total_degree() {
        let sig2 = RingSignature::new(1, 2, &[]).unwrap();
        let x = RingElement::<Complex64>::x(&sig2, 0);
        let sq = &x * &x;
        assert_eq!(sq.num_terms(), 1);
        let mut mono = Monomial::one(1);
        mono.exps[0] = 2;
        assert_eq!(sq.coefficient(&mono), c(1.0, 0.0));

        let sig1 = RingSignature::new(1, 1, &[]).unwrap();
        let x = RingElement::<Complex64>::x(&sig1, 0);
        assert!((&x * &x).is_zero());
    }

    #[test]
    fn d_examples() {
        let sig = RingSignature::new(2, 3, &[]).unwrap();
        let x1 = RingElement::<Complex64>::x(&sig, 0);
        let x2 = RingElement::<Complex64>::x(&sig, 1);
        let dx1 = RingElement::<Complex64>::dx(&sig, 0);
        let dx2 = RingElement::<Complex64>::dx(&sig, 1);
        assert_eq!(x1.d(), dx1);
        assert!((&x1 * &x2).d().d().is_zero());
        assert_eq!((&x1 * &dx2).d(), &dx1 * &dx2);
    }

    #[test]
    fn body_nil_examples() {
        let sig = RingSignature::new(1, 2, &["theta"]).unwrap();
        let x = RingElement::<Complex64>::x(&sig, 0);
        let dx = RingElement::<Complex64>::dx(&sig, 0);
        let a = &RingElement::real(&sig, 3.0) + &(&x * &dx);
        let (body, nil) = a.body_nil_split();
        assert_eq!(body, c(3.0, 0.0));
        assert_eq!(nil, &x * &dx);
        let t = RingElement::<Complex64>::odd(&sig, "theta").unwrap();
        let (body, nil) = t.body_nil_split();
        assert_eq!(body, c(0.0, 0.0));
        assert_eq!(nil, t);
    }

    #[test]
    fn conjugation() {
        let sig = RingSignature::new(1, 2, &[]).unwrap();
        let x = RingElement::<Complex64>::x(&sig, 0);
        let ix = x.scale(&c(0.0, 1.0));
        assert_eq!(ix.conjugate(), x.scale(&c(0.0, -1.0)));
        let dx = RingElement::<Complex64>::dx(&sig, 0);
        assert_eq!(dx.conjugate(), dx);
    }

    #[test]
    fn odd_coefficient_examples() {
        let sig = RingSignature::new(1, 2, &["theta", "eta"]).unwrap();
        let th = RingElement::<Complex64>::odd(&sig, "theta").unwrap();
        let et = RingElement::<Complex64>::odd(&sig, "eta").unwrap();
        let dx = RingElement::<Complex64>::dx(&sig, 0);
        let x = RingElement::<Complex64>::x(&sig, 0);
        let a = &RingElement::real(&sig, 5.0) + &(&th * &dx);
        assert_eq!(a.odd_coefficient("theta").unwrap(), dx);
        assert!(RingElement::real(&sig, 5.0).odd_coefficient("theta").unwrap().is_zero());
        // θ·(η x) = θ·a1 with a1 = η x.
        let b = &(&th * &et) * &x;
        assert_eq!(b.odd_coefficient("theta").unwrap(), &et * &x);
        assert!(matches!(a.odd_coefficient("zeta"), Err(Error::UnknownOddParam(_))));
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let s1 = RingSignature::new(1, 2, &[]).unwrap();
        let s2 = RingSignature::new(2, 2, &[]).unwrap();
        let a = RingElement::<Complex64>::one(&s1);
        let b = RingElement::<Complex64>::one(&s2);
        assert!(matches!(a.try_mul(&b), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn duplicate_odd_params_rejected() {
        assert!(RingSignature::new(1, 1, &["t", "t"]).is_err());
    }

    #[test]
    fn embed_reorders_odd_generators() {
        let s1 = RingSignature::new(0, 0, &["eta", "theta"]).unwrap();
        let s2 = RingSignature::new(0, 0, &["theta", "eta"]).unwrap();
        let e = RingElement::<Complex64>::odd(&s1, "eta").unwrap();
        let t = RingElement::<Complex64>::odd(&s1, "theta").unwrap();
        let et = &e * &t;
        let e2 = RingElement::<Complex64>::odd(&s2, "eta").unwrap();
        let t2 = RingElement::<Complex64>::odd(&s2, "theta").unwrap();
        assert_eq!(et.embed(&s2).unwrap(), &e2 * &t2);
    }
}
