//! Clifford algebras, star structures, graded modules, supertraces and
//! Atiyah–Bott–Shapiro classes.
//!
//! An algebra has `pos` generators `f_j` with `f_j² = −1` followed by `neg`
//! generators `e_j` with `e_j² = +1`. `Cl_n` for `n ≥ 0` is `(n, 0)` and for
//! `n < 0` is `(0, |n|)`; the KO degree of `(pos, neg)` is `pos − neg`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, i_pow, max_abs, sign, CMat, CVec, I, ONE, ZERO};
use crate::ring::{Scalar, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordAlgebra {
    pub pos: usize,
    pub neg: usize,
    pub field: ScalarField,
}

impl CliffordAlgebra {
    pub fn new(n: i32, field: ScalarField) -> Self {
        if n >= 0 {
            CliffordAlgebra { pos: n as usize, neg: 0, field }
        } else {
            CliffordAlgebra { pos: 0, neg: n.unsigned_abs() as usize, field }
        }
    }

    pub fn complex(n: i32) -> Self {
        Self::new(n, ScalarField::Complex)
    }

    /// `Cl_pos ⊗ Cl_{−neg}`.
    pub fn mixed(pos: usize, neg: usize, field: ScalarField) -> Self {
        CliffordAlgebra { pos, neg, field }
    }

    pub fn degree(&self) -> i32 {
        self.pos as i32 - self.neg as i32
    }

    pub fn num_generators(&self) -> usize {
        self.pos + self.neg
    }

    pub fn basis_size(&self) -> usize {
        1 << self.num_generators()
    }

    /// Square of generator `j`: −1 for `f`, +1 for `e`.
    pub fn gen_square(&self, j: usize) -> f64 {
        if j < self.pos {
            -1.0
        } else {
            1.0
        }
    }

    fn pos_mask(&self) -> u32 {
        (1u32 << self.pos) - 1
    }

    pub fn top_mask(&self) -> u32 {
        (1u32 << self.num_generators()) - 1
    }

    /// Product of two basis blades: resulting blade and sign.
    pub fn blade_product(&self, a: u32, b: u32) -> (u32, f64) {
        let mut inv = 0u32;
        let mut rest = b;
        while rest != 0 {
            let j = rest.trailing_zeros();
            inv += if j >= 31 { 0 } else { (a >> (j + 1)).count_ones() };
            rest &= rest - 1;
        }
        inv += (a & b & self.pos_mask()).count_ones();
        (a ^ b, sign(inv as usize))
    }

    /// Square of a basis blade (always ±1).
    pub fn blade_square(&self, a: u32) -> f64 {
        self.blade_product(a, a).1
    }

    /// Normalization `2^{−N/2}` of `Γ` for `N` generators.
    pub fn gamma_scale(&self) -> f64 {
        linalg::inv_sqrt2_pow(self.num_generators())
    }
}

#[derive(Clone, PartialEq)]
pub struct CliffordElement<S: Scalar = Complex64> {
    alg: CliffordAlgebra,
    terms: BTreeMap<u32, S>,
}

impl<S: Scalar> fmt::Debug for CliffordElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(k, v)| (format!("{k:b}"), v))).finish()
    }
}

impl<S: Scalar> CliffordElement<S> {
    pub fn zero(alg: CliffordAlgebra) -> Self {
        CliffordElement { alg, terms: BTreeMap::new() }
    }

    pub fn blade(alg: CliffordAlgebra, mask: u32, coeff: S) -> Self {
        let mut r = Self::zero(alg);
        r.add_term(mask, coeff);
        r
    }

    pub fn scalar(alg: CliffordAlgebra, coeff: S) -> Self {
        Self::blade(alg, 0, coeff)
    }

    pub fn one(alg: CliffordAlgebra) -> Self {
        Self::scalar(alg, S::one())
    }

    /// Generator `j` (0-based; `f`s first, then `e`s).
    pub fn generator(alg: CliffordAlgebra, j: usize) -> Self {
        assert!(j < alg.num_generators(), "generator index out of range");
        Self::blade(alg, 1 << j, S::one())
    }

    pub fn algebra(&self) -> CliffordAlgebra {
        self.alg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mask: u32) -> S {
        self.terms.get(&mask).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, mask: u32, v: S) {
        let cur = self.coefficient(mask) + v;
        if cur.is_zero() {
            self.terms.remove(&mask);
        } else {
            self.terms.insert(mask, cur);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn parity(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|k| (k.count_ones() & 1) as usize);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    fn check_alg(&self, other: &Self) -> Result<()> {
        if self.alg == other.alg {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(format!("{:?} vs {:?}", self.alg, other.alg)))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_alg(other)?;
        let mut r = self.clone();
        for (k, v) in &other.terms {
            r.add_term(*k, v.clone());
        }
        Ok(r)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_alg(other)?;
        let mut r = Self::zero(self.alg);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let (k, s) = self.alg.blade_product(*ka, *kb);
                let v = va.clone() * vb.clone();
                r.add_term(k, if s < 0.0 { -v } else { v });
            }
        }
        Ok(r)
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut r = Self::zero(self.alg);
        for (k, v) in &self.terms {
            r.add_term(*k, v.clone() * s.clone());
        }
        r
    }

    /// Super star: `f^* = −i f`, `e^* = i e`, antilinear, with
    /// `(ab)^* = (−1)^{|a||b|} b^* a^*`.
    pub fn star_super(&self) -> Result<Self> {
        if self.alg.field == ScalarField::Real {
            return Err(Error::RealField);
        }
        let mut r = Self::zero(self.alg);
        for (k, v) in &self.terms {
            let nf = (k & self.alg.pos_mask()).count_ones() as i64;
            let ne = k.count_ones() as i64 - nf;
            // Reversal and super signs cancel, leaving the product of
            // generator factors in the original order.
            let f = pow_i::<S>(ne - nf);
            r.add_term(*k, v.conj() * f);
        }
        Ok(r)
    }

    /// Ungraded star: `f^† = −f`, `e^† = e`, `(ab)^† = b^† a^†`.
    pub fn star_graded(&self) -> Self {
        let mut r = Self::zero(self.alg);
        for (k, v) in &self.terms {
            let n = k.count_ones() as usize;
            let nf = (k & self.alg.pos_mask()).count_ones() as usize;
            let neg = (nf + n * n.saturating_sub(1) / 2) & 1 == 1;
            r.add_term(*k, if neg { -v.conj() } else { v.conj() });
        }
        r
    }
}

fn pow_i<S: Scalar>(k: i64) -> S {
    match k.rem_euclid(4) {
        0 => S::one(),
        1 => S::i(),
        2 => -S::one(),
        _ => -S::i(),
    }
}

impl CliffordElement<Complex64> {
    /// `Γ = 2^{−N/2} g_1 g_2 … g_N`.
    pub fn gamma(alg: CliffordAlgebra) -> Self {
        Self::blade(alg, alg.top_mask(), c(alg.gamma_scale()))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let d = self.try_add(&other.scale(&c(-1.0)));
        d.is_ok_and(|d| d.terms.values().all(|v| v.norm() <= tol))
    }
}

/// `Γ_n` of `Cl_n` over ℂ.
pub fn gamma(n: i32) -> CliffordElement {
    CliffordElement::gamma(CliffordAlgebra::complex(n))
}

/// Finite-rank graded module `ℂ^{p|q}` with odd Clifford generators.
///
/// `metric` is the ordinary positive definite hermitian form `(x, y) = x†Gy`
/// in block-diagonal form; the graded form is `⟨x, y⟩ = (x, y)` on even and
/// `i(x, y)` on odd vectors. `real_structure` is a matrix `J` with
/// `x ↦ J x̄` antilinear and involutive.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedCliffordModule {
    pub p: usize,
    pub q: usize,
    pub algebra: CliffordAlgebra,
    pub generators: Vec<CMat>,
    pub metric: CMat,
    pub real_structure: Option<CMat>,
}

impl GradedCliffordModule {
    pub fn new(algebra: CliffordAlgebra, p: usize, q: usize, generators: Vec<CMat>) -> Result<Self> {
        let m = GradedCliffordModule {
            p,
            q,
            algebra,
            generators,
            metric: CMat::identity(p + q, p + q),
            real_structure: None,
        };
        m.validate(1e-10)?;
        Ok(m)
    }

    pub fn with_metric(mut self, metric: CMat) -> Result<Self> {
        self.metric = metric;
        self.validate(1e-10)?;
        Ok(self)
    }

    pub fn with_real_structure(mut self, j: CMat) -> Result<Self> {
        self.real_structure = Some(j);
        self.validate(1e-10)?;
        Ok(self)
    }

    /// Trivial module `ℂ^{p|q}` over `Cl_0`.
    pub fn trivial(p: usize, q: usize) -> Self {
        GradedCliffordModule {
            p,
            q,
            algebra: CliffordAlgebra::complex(0),
            generators: Vec::new(),
            metric: CMat::identity(p + q, p + q),
            real_structure: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn grading(&self) -> CMat {
        linalg::grading(self.p, self.q)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.dim();
        if self.generators.len() != self.algebra.num_generators() {
            return Err(Error::Shape(format!(
                "{} generator matrices for {} generators",
                self.generators.len(),
                self.algebra.num_generators()
            )));
        }
        if self.metric.shape() != (n, n) {
            return Err(Error::Shape("metric shape".into()));
        }
        for g in &self.generators {
            if g.shape() != (n, n) {
                return Err(Error::Shape("generator shape".into()));
            }
        }
        if let Some(j) = &self.real_structure {
            if j.shape() != (n, n) {
                return Err(Error::Shape("real structure shape".into()));
            }
        }
        let residual = self.relations_residual();
        if residual > tol {
            return Err(Error::CliffordRelations { residual });
        }
        let herm = max_abs(&(&self.metric - self.metric.adjoint()));
        let blocks = max_abs(&linalg::odd_part(&self.metric, self.p));
        if herm > tol || blocks > tol {
            return Err(Error::InvalidParameter("metric must be block-diagonal hermitian".into()));
        }
        linalg::inv_sqrt_psd(&self.metric)
            .map_err(|_| Error::InvalidParameter("metric must be positive definite".into()))?;
        Ok(())
    }

    /// Largest deviation from oddness and the Clifford relations.
    pub fn relations_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for (j, gj) in self.generators.iter().enumerate() {
            r = r.max(max_abs(&linalg::even_part(gj, self.p)));
            for (k, gk) in self.generators.iter().enumerate() {
                let target = if j == k {
                    CMat::identity(n, n) * c(2.0 * self.algebra.gen_square(j))
                } else {
                    CMat::zeros(n, n)
                };
                r = r.max(max_abs(&(gj * gk + gk * gj - target)));
            }
        }
        r
    }

    /// Ordinary adjoint `T† = G⁻¹ Tᴴ G`.
    pub fn adjoint(&self, t: &CMat) -> CMat {
        let ginv = self.metric.clone().try_inverse().expect("metric is invertible");
        ginv * t.adjoint() * &self.metric
    }

    /// Super adjoint `T^* = i^{|T|} T†` for homogeneous `T`.
    pub fn super_adjoint(&self, t: &CMat, parity: usize) -> CMat {
        self.adjoint(t) * i_pow(parity as i64)
    }

    /// Matrix `S` of the graded hermitian form `⟨x, y⟩ = x† S y`.
    pub fn super_metric(&self) -> CMat {
        let d = CVec::from_iterator(self.dim(), (0..self.dim()).map(|i| if i < self.p { ONE } else { I }));
        &self.metric * CMat::from_diagonal(&d)
    }

    /// Deviation of the generator action from a *-homomorphism for the
    /// super star (`f^* = −if`, `e^* = ie`).
    pub fn self_adjoint_residual(&self) -> f64 {
        self.generators
            .iter()
            .enumerate()
            .map(|(j, g)| {
                let expect = g * if self.algebra.gen_square(j) < 0.0 { -I } else { I };
                max_abs(&(self.super_adjoint(g, 1) - expect))
            })
            .fold(0.0, f64::max)
    }

    pub fn real_structure_residual(&self) -> f64 {
        let Some(j) = &self.real_structure else { return 0.0 };
        let n = self.dim();
        let mut r = max_abs(&(j * j.conjugate() - CMat::identity(n, n)));
        for g in &self.generators {
            r = r.max(max_abs(&(j * g.conjugate() - g * j)));
        }
        r
    }

    /// Matrix of a basis blade.
    pub fn blade_matrix(&self, mask: u32) -> CMat {
        let n = self.dim();
        let mut m = CMat::identity(n, n);
        for (j, g) in self.generators.iter().enumerate() {
            if mask & (1 << j) != 0 {
                m = m * g;
            }
        }
        m
    }

    /// Action of an algebra element.
    pub fn action(&self, a: &CliffordElement) -> Result<CMat> {
        if a.algebra() != self.algebra {
            return Err(Error::AlgebraMismatch("element and module algebras differ".into()));
        }
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (k, v) in a.terms() {
            m += self.blade_matrix(*k) * *v;
        }
        Ok(m)
    }

    pub fn gamma_matrix(&self) -> CMat {
        self.blade_matrix(self.algebra.top_mask()) * c(self.algebra.gamma_scale())
    }

    /// Largest supercommutator of `T` with the generators.
    pub fn clifford_linear_residual(&self, t: &CMat) -> f64 {
        let even = linalg::even_part(t, self.p);
        let odd = linalg::odd_part(t, self.p);
        self.generators
            .iter()
            .map(|g| {
                max_abs(&linalg::supercommutator(&even, 0, g, 1))
                    .max(max_abs(&linalg::supercommutator(&odd, 1, g, 1)))
            })
            .fold(0.0, f64::max)
    }

    /// Projection onto Clifford-linear operators of the given parity:
    /// `2^{−N} Σ_b (−1)^{|M||b|} b⁻¹ M b`.
    pub fn project_clifford_linear(&self, m: &CMat, parity: usize) -> CMat {
        let alg = self.algebra;
        let mut acc = CMat::zeros(self.dim(), self.dim());
        for b in 0..alg.basis_size() as u32 {
            let bm = self.blade_matrix(b);
            let binv = &bm * c(alg.blade_square(b));
            let s = sign(parity * b.count_ones() as usize);
            acc += binv * m * bm * c(s);
        }
        acc * c(1.0 / alg.basis_size() as f64)
    }

    pub fn supertrace(&self, t: &CMat) -> Result<Complex64> {
        if t.shape() != (self.dim(), self.dim()) {
            return Err(Error::Shape("operator does not match module".into()));
        }
        linalg::supertrace(t, self.p)
    }

    /// `sTr(Γ ∘ T)`. Non-Clifford-linear input is logged, not rejected.
    pub fn clifford_supertrace(&self, t: &CMat) -> Result<Complex64> {
        let r = self.clifford_linear_residual(t);
        if r > 1e-8 {
            log::warn!("clifford supertrace of non-Clifford-linear operator (residual {r:.3e})");
        }
        self.supertrace(&(self.gamma_matrix() * t))
    }

    /// Hattori–Stallings trace through the explicit dual basis
    /// `φ_j(w) = 2^{−N} Σ_b e_j^*(b⁻¹ w) b`, composed with the top-blade
    /// coefficient on `A/[A, A]`. Equals
    /// [`hattori_stallings_normalization`] times the Clifford supertrace.
    pub fn hattori_stallings(&self, t: &CMat) -> Result<Complex64> {
        let r = self.clifford_linear_residual(t);
        if r > 1e-8 {
            return Err(Error::NotCliffordLinear { residual: r });
        }
        let alg = self.algebra;
        let n = self.dim();
        let mut total = CliffordElement::zero(alg);
        for b in 0..alg.basis_size() as u32 {
            let binv = self.blade_matrix(b) * c(alg.blade_square(b));
            let bt = binv * t;
            // Σ_j (−1)^{|w_j|} e_j^*(b⁻¹ T w_j)
            let mut s = ZERO;
            for j in 0..n {
                s += bt[(j, j)] * if j < self.p { 1.0 } else { -1.0 };
            }
            total.add_term(b, s * (1.0 / alg.basis_size() as f64));
        }
        Ok(total.coefficient(alg.top_mask()))
    }

    /// Direct sum of modules over the same algebra.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch("direct sum".into()));
        }
        let (p, q) = (self.p + other.p, self.q + other.q);
        let perm = even_first_perm(self.p, self.q, other.p, other.q);
        let pm = linalg::permutation(&perm);
        let conj = |a: &CMat, b: &CMat| &pm * linalg::block_diag(&[a, b]) * pm.transpose();
        let generators = self.generators.iter().zip(&other.generators).map(|(a, b)| conj(a, b)).collect();
        let real_structure = match (&self.real_structure, &other.real_structure) {
            (Some(a), Some(b)) => Some(conj(a, b)),
            _ => None,
        };
        Ok(GradedCliffordModule {
            p,
            q,
            algebra: self.algebra,
            generators,
            metric: conj(&self.metric, &other.metric),
            real_structure,
        })
    }

    /// Parity-reversed module `ΠW`.
    pub fn parity_reversed(&self) -> Self {
        let perm: Vec<usize> = (self.p..self.dim()).chain(0..self.p).collect();
        let pm = linalg::permutation(&perm);
        let conj = |a: &CMat| &pm * a * pm.transpose();
        GradedCliffordModule {
            p: self.q,
            q: self.p,
            algebra: self.algebra,
            generators: self.generators.iter().map(|g| -conj(g)).collect(),
            metric: conj(&self.metric),
            real_structure: self.real_structure.as_ref().map(conj),
        }
    }

    /// Graded tensor product over `Cl_{a,b} ⊗ Cl_{c,d}`; generators of the
    /// second factor act as `ε ⊗ h`. The `f` generators of both factors come
    /// first in the result.
    pub fn graded_tensor(&self, other: &Self) -> Self {
        let eps = self.grading();
        let n1 = self.dim();
        let n2 = other.dim();
        let id2 = CMat::identity(n2, n2);
        let (a1, a2) = (self.algebra, other.algebra);
        let mut gens: Vec<CMat> = Vec::new();
        for j in 0..a1.pos {
            gens.push(linalg::kron(&self.generators[j], &id2));
        }
        for j in 0..a2.pos {
            gens.push(linalg::kron(&eps, &other.generators[j]));
        }
        for j in a1.pos..a1.num_generators() {
            gens.push(linalg::kron(&self.generators[j], &id2));
        }
        for j in a2.pos..a2.num_generators() {
            gens.push(linalg::kron(&eps, &other.generators[j]));
        }
        let parity: Vec<bool> = (0..n1 * n2).map(|k| (k / n2 >= self.p) != (k % n2 >= other.p)).collect();
        let mut perm: Vec<usize> = (0..n1 * n2).filter(|&k| !parity[k]).collect();
        let p = perm.len();
        perm.extend((0..n1 * n2).filter(|&k| parity[k]));
        let pm = linalg::permutation(&perm);
        let conj = |a: &CMat| &pm * a * pm.transpose();
        let field = if a1.field == ScalarField::Real && a2.field == ScalarField::Real {
            ScalarField::Real
        } else {
            ScalarField::Complex
        };
        GradedCliffordModule {
            p,
            q: n1 * n2 - p,
            algebra: CliffordAlgebra::mixed(a1.pos + a2.pos, a1.neg + a2.neg, field),
            generators: gens.iter().map(conj).collect(),
            metric: conj(&linalg::kron(&self.metric, &other.metric)),
            real_structure: match (&self.real_structure, &other.real_structure) {
                (Some(a), Some(b)) => Some(conj(&linalg::kron(a, b))),
                _ => None,
            },
        }
    }

    /// Left-regular module of the algebra, blades as an orthonormal basis,
    /// with the real structure of real coefficients.
    pub fn left_regular(alg: CliffordAlgebra) -> Self {
        let size = alg.basis_size();
        let mut blades: Vec<u32> = (0..size as u32).filter(|b| b.count_ones() % 2 == 0).collect();
        let p = blades.len();
        blades.extend((0..size as u32).filter(|b| b.count_ones() % 2 == 1));
        let pos: Vec<usize> = {
            let mut v = vec![0; size];
            for (i, b) in blades.iter().enumerate() {
                v[*b as usize] = i;
            }
            v
        };
        let generators = (0..alg.num_generators())
            .map(|j| {
                let mut m = CMat::zeros(size, size);
                for (col, b) in blades.iter().enumerate() {
                    let (r, s) = alg.blade_product(1 << j, *b);
                    m[(pos[r as usize], col)] = c(s);
                }
                m
            })
            .collect();
        GradedCliffordModule {
            p,
            q: size - p,
            algebra: alg,
            generators,
            metric: CMat::identity(size, size),
            real_structure: (alg.field == ScalarField::Real).then(|| CMat::identity(size, size)),
        }
    }

    /// Left-regular module tensored with `ℂ^{a|b}`.
    pub fn regular_tensor(alg: CliffordAlgebra, a: usize, b: usize) -> Self {
        let mut triv = Self::trivial(a, b);
        triv.algebra = CliffordAlgebra::mixed(0, 0, alg.field);
        if alg.field == ScalarField::Real {
            triv.real_structure = Some(CMat::identity(a + b, a + b));
        }
        Self::left_regular(alg).graded_tensor(&triv)
    }

    /// Complex graded irreducible module of `Cl_n`.
    pub fn irreducible(n: i32) -> Self {
        let cl1 = GradedCliffordModule {
            p: 1,
            q: 1,
            algebra: CliffordAlgebra::complex(if n >= 0 { 1 } else { -1 }),
            generators: vec![if n >= 0 {
                linalg::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0])
            } else {
                linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
            }],
            metric: CMat::identity(2, 2),
            real_structure: None,
        };
        let mut cl2 = cl1.clone();
        cl2.algebra = CliffordAlgebra::complex(if n >= 0 { 2 } else { -2 });
        // Second generator anticommuting with the first.
        let mut g2 = CMat::zeros(2, 2);
        if n >= 0 {
            g2[(0, 1)] = I;
            g2[(1, 0)] = I;
        } else {
            g2[(0, 1)] = -I;
            g2[(1, 0)] = I;
        }
        cl2.generators.push(g2);
        let k = n.unsigned_abs() as usize;
        let mut m = Self::trivial(1, 0);
        for _ in 0..k / 2 {
            m = m.graded_tensor(&cl2);
        }
        if k % 2 == 1 {
            m = m.graded_tensor(&cl1);
        }
        m.algebra = CliffordAlgebra::complex(n);
        m
    }

    /// Odd operator `X` with `X² = 1`, anticommuting with the generators,
    /// self-adjoint and compatible with the real structure, if one exists.
    pub fn find_extension(&self, seed: u64) -> Option<CMat> {
        let (p, q, n) = (self.p, self.q, self.dim());
        if p == 0 && q == 0 {
            return Some(CMat::zeros(0, 0));
        }
        // Real parametrization of the odd blocks.
        let mut slots = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if (i < p) != (j < p) {
                    slots.push((i, j, ONE));
                    slots.push((i, j, I));
                }
            }
        }
        if slots.is_empty() {
            return None;
        }
        let constraint = |x: &CMat| -> Vec<f64> {
            let mut out = Vec::new();
            for g in &self.generators {
                let r = x * g + g * x;
                out.extend(r.iter().flat_map(|z| [z.re, z.im]));
            }
            if let Some(j) = &self.real_structure {
                let r = j * x.conjugate() - x * j;
                out.extend(r.iter().flat_map(|z| [z.re, z.im]));
            }
            out
        };
        let basis: Vec<CMat> = slots
            .iter()
            .map(|&(i, j, v)| {
                let mut m = CMat::zeros(n, n);
                m[(i, j)] = v;
                m
            })
            .collect();
        let cols: Vec<Vec<f64>> = basis.iter().map(constraint).collect();
        let rows = cols.first().map_or(0, |c| c.len());
        let kernel: Vec<Vec<f64>> = if rows == 0 {
            (0..basis.len()).map(|k| (0..basis.len()).map(|l| if k == l { 1.0 } else { 0.0 }).collect()).collect()
        } else {
            let a = DMatrix::<f64>::from_fn(rows, basis.len(), |r, k| cols[k][r]);
            real_nullspace(&a, 1e-9)
        };
        if kernel.is_empty() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _attempt in 0..4 {
            let mut x = CMat::zeros(n, n);
            for v in &kernel {
                let w: f64 = rng.gen_range(-1.0..1.0);
                for (k, b) in basis.iter().enumerate() {
                    x += b * c(w * v[k]);
                }
            }
            let scale = max_abs(&x);
            let x = (&x + self.adjoint(&x)) * c(0.5);
            let res: f64 = constraint(&x).iter().fold(0.0, |m, v| m.max(v.abs()));
            if res > 1e-8 {
                continue;
            }
            // Polar part in metric-orthonormal coordinates.
            let s = linalg::herm_fn(&self.metric, f64::sqrt);
            let sinv = linalg::herm_fn(&self.metric, |v| v.powf(-0.5));
            let xt = &s * &x * &sinv;
            let (vals, _) = linalg::herm_eig(&xt);
            let min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if min <= 1e-6 * max.max(scale) {
                continue;
            }
            let u = linalg::herm_fn(&xt, f64::signum);
            return Some(sinv * u * s);
        }
        None
    }

    /// Class in the Atiyah–Bott–Shapiro quotient of the module's KO (or K)
    /// degree.
    pub fn abs_class(&self) -> Result<AbsClass> {
        let r = self.relations_residual();
        if r > 1e-8 {
            return Err(Error::CliffordRelations { residual: r });
        }
        let degree = self.algebra.degree();
        let real = self.real_structure.is_some() && self.algebra.field == ScalarField::Real;
        let index = (-degree).rem_euclid(8) as u8;
        let group = if real {
            [AbsGroup::Z, AbsGroup::Z2, AbsGroup::Z2, AbsGroup::Zero, AbsGroup::Z, AbsGroup::Zero, AbsGroup::Zero, AbsGroup::Zero]
                [index as usize]
        } else if degree % 2 == 0 {
            AbsGroup::Z
        } else {
            AbsGroup::Zero
        };
        let value = match group {
            AbsGroup::Zero => 0,
            AbsGroup::Z2 => i64::from(self.find_extension(0x5eed).is_none()),
            AbsGroup::Z => {
                let top = self.algebra.top_mask();
                let omega = self.blade_matrix(top);
                let omega = if self.algebra.blade_square(top) < 0.0 { omega * I } else { omega };
                let mut d = 2f64.powf(self.algebra.num_generators() as f64 / 2.0);
                if real && index == 4 {
                    d *= 2.0;
                }
                let v = (self.grading() * omega).trace().re / d;
                let rounded = v.round();
                if (v - rounded).abs() > 1e-6 {
                    return Err(Error::ClassMismatch(format!("non-integral ABS index {v}")));
                }
                rounded as i64
            }
        };
        let irreducible_dim = 2usize.pow(self.algebra.num_generators().div_ceil(2) as u32).max(1);
        Ok(AbsClass {
            degree,
            index,
            group,
            value,
            real,
            multiplicity: self.dim() / irreducible_dim,
        })
    }
}

/// Real null space of a real matrix, as coefficient vectors.
fn real_nullspace(a: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let g = a.transpose() * a;
    let eig = g.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] <= tol * tol * scale)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

fn even_first_perm(p1: usize, q1: usize, p2: usize, _q2: usize) -> Vec<usize> {
    // Block-diagonal order is [even1, odd1, even2, odd2].
    let n1 = p1 + q1;
    let mut v: Vec<usize> = (0..p1).collect();
    v.extend(n1..n1 + p2);
    v.extend(p1..n1);
    v.extend(n1 + p2..n1 + p2 + _q2);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbsGroup {
    Z,
    Z2,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsClass {
    pub degree: i32,
    /// `(−degree) mod 8`, the row of the group table.
    pub index: u8,
    pub group: AbsGroup,
    pub value: i64,
    pub real: bool,
    pub multiplicity: usize,
}

/// Bimodule for `Cl_a` on the left and `Cl_b` on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct Bimodule {
    pub p: usize,
    pub q: usize,
    pub left: Vec<CMat>,
    pub right: Vec<CMat>,
}

impl Bimodule {
    /// Largest deviation from the left and right Clifford relations and the
    /// commutation of the two actions.
    pub fn residual(&self) -> f64 {
        let n = self.p + self.q;
        let minus2 = CMat::identity(n, n) * c(-2.0);
        let mut r: f64 = 0.0;
        for set in [&self.left, &self.right] {
            for (j, a) in set.iter().enumerate() {
                r = r.max(max_abs(&linalg::even_part(a, self.p)));
                for (k, b) in set.iter().enumerate() {
                    let target = if j == k { minus2.clone() } else { CMat::zeros(n, n) };
                    r = r.max(max_abs(&(a * b + b * a - target)));
                }
            }
        }
        for a in &self.left {
            for b in &self.right {
                r = r.max(max_abs(&(a * b - b * a)));
            }
        }
        r
    }
}

/// Left module over `Cl_a ⊗ Cl_{−b}` from a bimodule: `E_j = R_j ε`.
pub fn bimodule_to_left(b: &Bimodule) -> Result<GradedCliffordModule> {
    if b.residual() > 1e-10 {
        return Err(Error::Shape("malformed bimodule data".into()));
    }
    let eps = linalg::grading(b.p, b.q);
    let mut generators = b.left.clone();
    generators.extend(b.right.iter().map(|r| r * &eps));
    GradedCliffordModule::new(CliffordAlgebra::mixed(b.left.len(), b.right.len(), ScalarField::Complex), b.p, b.q, generators)
}

/// Inverse of [`bimodule_to_left`]: `R_j = E_j ε`.
pub fn left_to_bimodule(m: &GradedCliffordModule) -> Result<Bimodule> {
    m.validate(1e-10)?;
    let eps = m.grading();
    let pos = m.algebra.pos;
    Ok(Bimodule {
        p: m.p,
        q: m.q,
        left: m.generators[..pos].to_vec(),
        right: m.generators[pos..].iter().map(|e| e * &eps).collect(),
    })
}

/// `2^{−N/2} · (top blade)²`, the ratio of the Hattori–Stallings trace to the
/// Clifford supertrace.
pub fn hattori_stallings_normalization(alg: CliffordAlgebra) -> f64 {
    alg.gamma_scale() * alg.blade_square(alg.top_mask())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoritaReport {
    pub f_square_residual: f64,
    pub e_square_residual: f64,
    pub anticommutator_residual: f64,
    pub generated_dimension: usize,
    pub self_adjoint_residual: f64,
    pub ok: bool,
}

/// The `Cl_1 ⊗ Cl_{−1}` action on `ℂ^{1|1}` by `f = [[0,1],[−1,0]]`,
/// `e = [[0,1],[1,0]]`.
pub fn morita_module() -> GradedCliffordModule {
    GradedCliffordModule {
        p: 1,
        q: 1,
        algebra: CliffordAlgebra::mixed(1, 1, ScalarField::Complex),
        generators: vec![
            linalg::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        ],
        metric: CMat::identity(2, 2),
        real_structure: None,
    }
}

pub fn morita_witness_check() -> MoritaReport {
    let m = morita_module();
    let (f, e) = (&m.generators[0], &m.generators[1]);
    let id = CMat::identity(2, 2);
    let f_sq = max_abs(&(f * f + &id));
    let e_sq = max_abs(&(e * e - &id));
    let anti = max_abs(&(f * e + e * f));
    let span: Vec<CMat> = vec![id.clone(), f.clone(), e.clone(), f * e];
    let flat = CMat::from_fn(4, span.len(), |r, k| span[k][(r / 2, r % 2)]);
    let dim = linalg::singular_values(&flat).iter().filter(|&&s| s > 1e-10).count();
    let sa = m.self_adjoint_residual();
    let tol = 1e-12;
    MoritaReport {
        f_square_residual: f_sq,
        e_square_residual: e_sq,
        anticommutator_residual: anti,
        generated_dimension: dim,
        self_adjoint_residual: sa,
        ok: f_sq <= tol && e_sq <= tol && anti <= tol && dim == 4 && sa <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Exact;

    fn f(alg: CliffordAlgebra, j: usize) -> CliffordElement {
        CliffordElement::generator(alg, j)
    }

    #[test]
    fn generator_squares() {
        let a = CliffordAlgebra::complex(2);
        let f1 = f(a, 0);
        assert_eq!(f1.try_mul(&f1).unwrap(), CliffordElement::scalar(a, c(-1.0)));
        let b = CliffordAlgebra::complex(-1);
        let e1 = f(b, 0);
        assert_eq!(e1.try_mul(&e1).unwrap(), CliffordElement::one(b));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(0), CliffordElement::one(CliffordAlgebra::complex(0)));
        let g1 = gamma(1);
        assert!((g1.coefficient(1) - c(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-16);
        let g = gamma(-2);
        assert_eq!(g.coefficient(0b11), c(0.5));
        let g2 = gamma(2);
        let sq = g2.try_mul(&g2).unwrap();
        assert!(sq.approx_eq(&CliffordElement::scalar(CliffordAlgebra::complex(2), c(-0.25)), 1e-15));
    }

    #[test]
    fn star_examples() {
        let a = CliffordAlgebra::complex(2);
        let f1 = f(a, 0);
        let f2 = f(a, 1);
        assert_eq!(f1.star_super().unwrap(), f1.scale(&-I));
        let f12 = f1.try_mul(&f2).unwrap();
        assert_eq!(f12.star_super().unwrap(), f2.try_mul(&f1).unwrap());
        assert_eq!(f1.star_graded(), f1.scale(&c(-1.0)));
        let b = CliffordAlgebra::complex(-2);
        let e12 = f(b, 0).try_mul(&f(b, 1)).unwrap();
        assert_eq!(e12.star_graded(), f(b, 1).try_mul(&f(b, 0)).unwrap());
        let real = CliffordAlgebra::new(1, ScalarField::Real);
        assert!(matches!(f(real, 0).star_super(), Err(Error::RealField)));
    }

    #[test]
    fn star_super_sign_rule() {
        let a = CliffordAlgebra::mixed(2, 1, ScalarField::Complex);
        for x in 0..8u32 {
            for y in 0..8u32 {
                let ex = CliffordElement::blade(a, x, ONE);
                let ey = CliffordElement::blade(a, y, ONE);
                let lhs = ex.try_mul(&ey).unwrap().star_super().unwrap();
                let s = sign((x.count_ones() * y.count_ones()) as usize);
                let rhs = ey.star_super().unwrap().try_mul(&ex.star_super().unwrap()).unwrap().scale(&c(s));
                assert!(lhs.approx_eq(&rhs, 1e-15));
                assert_eq!(ex.star_super().unwrap().star_super().unwrap(), ex);
            }
        }
    }

    #[test]
    fn exact_mode_relations() {
        let a = CliffordAlgebra::complex(3);
        let g: Vec<CliffordElement<Exact>> = (0..3).map(|j| CliffordElement::generator(a, j)).collect();
        for j in 0..3 {
            for k in 0..3 {
                let ac = g[j].try_mul(&g[k]).unwrap().try_add(&g[k].try_mul(&g[j]).unwrap()).unwrap();
                let expect = if j == k {
                    CliffordElement::scalar(a, Exact::from_i64(-2))
                } else {
                    CliffordElement::zero(a)
                };
                assert_eq!(ac, expect);
            }
        }
    }

    #[test]
    fn modules_satisfy_relations() {
        for n in -4..=4 {
            let m = GradedCliffordModule::irreducible(n);
            assert!(m.relations_residual() < 1e-12, "n = {n}");
            assert!(m.self_adjoint_residual() < 1e-12, "n = {n}");
            let r = GradedCliffordModule::left_regular(CliffordAlgebra::new(n, ScalarField::Real));
            assert!(r.relations_residual() < 1e-12);
            assert!(r.self_adjoint_residual() < 1e-12);
            assert!(r.real_structure_residual() < 1e-12);
        }
    }

    #[test]
    fn supertrace_basics() {
        let m = GradedCliffordModule::trivial(1, 1);
        assert_eq!(m.supertrace(&CMat::identity(2, 2)).unwrap(), ZERO);
        assert_eq!(GradedCliffordModule::trivial(2, 0).supertrace(&CMat::identity(2, 2)).unwrap(), c(2.0));
        assert_eq!(m.clifford_supertrace(&CMat::identity(2, 2)).unwrap(), ZERO);
    }

    #[test]
    fn hattori_stallings_matches_normalized_supertrace() {
        for alg in [
            CliffordAlgebra::complex(1),
            CliffordAlgebra::complex(2),
            CliffordAlgebra::complex(-2),
            CliffordAlgebra::mixed(1, 1, ScalarField::Complex),
        ] {
            let m = GradedCliffordModule::regular_tensor(alg, 2, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let raw = CMat::from_fn(m.dim(), m.dim(), |_, _| Complex64::new(rng.gen(), rng.gen()));
            let t = m.project_clifford_linear(&linalg::even_part(&raw, m.p), 0);
            let hs = m.hattori_stallings(&t).unwrap();
            let cs = m.clifford_supertrace(&t).unwrap();
            assert!((hs - cs * hattori_stallings_normalization(alg)).norm() < 1e-12, "{alg:?}");
        }
        let m = GradedCliffordModule::irreducible(1);
        assert_eq!(m.hattori_stallings(&CMat::zeros(2, 2)).unwrap(), ZERO);
    }

    #[test]
    fn left_right_round_trip() {
        let m = morita_module();
        let b = left_to_bimodule(&m).unwrap();
        assert!(b.residual() < 1e-14);
        let back = bimodule_to_left(&b).unwrap();
        assert_eq!(back.generators, m.generators);
        for g in &b.right {
            assert_eq!(linalg::parity(g, 1, 0.0), Some(1));
        }
    }

    #[test]
    fn morita_witness() {
        let r = morita_witness_check();
        assert!(r.ok, "{r:?}");
        assert_eq!(r.generated_dimension, 4);
    }

    #[test]
    fn abs_degree_zero_is_superdimension() {
        let m = GradedCliffordModule::trivial(3, 1);
        assert_eq!(m.abs_class().unwrap().value, 2);
    }

    #[test]
    fn abs_real_minus_one() {
        let alg = CliffordAlgebra::new(-1, ScalarField::Real);
        let irr = GradedCliffordModule::left_regular(alg);
        let c1 = irr.abs_class().unwrap();
        assert_eq!((c1.group, c1.value), (AbsGroup::Z2, 1));
        let two = irr.direct_sum(&irr).unwrap();
        assert_eq!(two.abs_class().unwrap().value, 0);
        // Over ℂ the same module extends.
        let mut cx = irr.clone();
        cx.real_structure = None;
        cx.algebra.field = ScalarField::Complex;
        assert_eq!(cx.abs_class().unwrap().group, AbsGroup::Zero);
        assert!(cx.find_extension(1).is_some());
    }

    #[test]
    fn abs_morita_module_generates() {
        let m = morita_module();
        assert!(m.find_extension(0).is_none());
        assert_eq!(m.abs_class().unwrap().value, 1);
        let pi = m.parity_reversed();
        assert!(pi.relations_residual() < 1e-14);
        assert_eq!(pi.abs_class().unwrap().value, -1);
        assert_eq!(m.direct_sum(&pi).unwrap().abs_class().unwrap().value, 0);
    }

    #[test]
    fn abs_complex_even() {
        for n in [-4, -2, 2, 4] {
            let m = GradedCliffordModule::irreducible(n);
            assert_eq!(m.abs_class().unwrap().value.abs(), 1, "n = {n}");
        }
    }
}
