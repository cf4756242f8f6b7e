//! Superconnections `𝔸 = d + X` on a trivialized graded Clifford bundle over
//! the coefficient ring, their curvature, heat operators and the
//! super-semigroup `(t, θ) ↦ e^{−t𝔸² + θ𝔸}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::GradedCliffordModule;
use crate::error::{Error, Result};
use crate::funcalc;
use crate::linalg::{self, c, i_pow, max_abs, CMat, CVec};
use crate::opform::{DiffOp, OpForm, Section};
use crate::ring::{RingElement, RingSignature};

/// Graded Clifford module with metric and real structure, trivialized over
/// the coefficient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperBundle {
    pub module: GradedCliffordModule,
    pub sig: Arc<RingSignature>,
}

impl SuperBundle {
    pub fn new(module: GradedCliffordModule, sig: Arc<RingSignature>) -> Result<Self> {
        module.validate(1e-10)?;
        Ok(SuperBundle { module, sig })
    }

    pub fn trivial(p: usize, q: usize, sig: &Arc<RingSignature>) -> Self {
        SuperBundle { module: GradedCliffordModule::trivial(p, q), sig: sig.clone() }
    }

    pub fn p(&self) -> usize {
        self.module.p
    }

    pub fn q(&self) -> usize {
        self.module.q
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn metric(&self) -> &CMat {
        &self.module.metric
    }

    pub fn num_generators(&self) -> usize {
        self.module.algebra.num_generators()
    }

    /// Same bundle over another ring signature.
    pub fn over(&self, sig: &Arc<RingSignature>) -> Self {
        SuperBundle { module: self.module.clone(), sig: sig.clone() }
    }

    fn identity_metric(&self) -> bool {
        let n = self.dim();
        max_abs(&(self.metric() - CMat::identity(n, n))) == 0.0
    }

    pub(crate) fn metric_opt(&self) -> Option<&CMat> {
        (!self.identity_metric()).then(|| self.metric())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RescaleConvention {
    /// Component `k` scaled by `u^{(k−1)/2}`.
    Getzler,
    /// Component `k` scaled by `μ^{1−k}`.
    Rg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superconnection {
    bundle: SuperBundle,
    omega: OpForm,
    components: BTreeMap<usize, OpForm>,
}

impl Superconnection {
    /// `d + ω + Σ_{k≠1} 𝔸^[k]`.
    pub fn new(bundle: SuperBundle, omega: OpForm, components: BTreeMap<usize, OpForm>) -> Result<Self> {
        let a = Superconnection { bundle, omega, components };
        a.validate(1e-10)?;
        Ok(a)
    }

    /// Splits a total odd operator form by form degree.
    pub fn from_x(bundle: SuperBundle, x: &OpForm) -> Result<Self> {
        let omega = x.form_part(1);
        let mut components = BTreeMap::new();
        for k in 0..=bundle.sig.degree.max(bundle.sig.m) {
            if k == 1 {
                continue;
            }
            let part = x.form_part(k);
            if !part.is_zero() {
                components.insert(k, part);
            }
        }
        Self::new(bundle, omega, components)
    }

    /// The flat superconnection `d`.
    pub fn trivial(bundle: SuperBundle) -> Self {
        let omega = OpForm::zero(&bundle.sig, bundle.p(), bundle.q());
        Superconnection { bundle, omega, components: BTreeMap::new() }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let sig = &self.bundle.sig;
        let (p, q) = (self.bundle.p(), self.bundle.q());
        for (k, a) in std::iter::once((1usize, &self.omega)).chain(self.components.iter().map(|(k, a)| (*k, a))) {
            if **a.signature() != **sig || (a.p(), a.q()) != (p, q) {
                return Err(Error::SignatureMismatch(format!("component {k} lives on another bundle")));
            }
            if a.terms().any(|(m, _)| m.form_degree() != k) {
                return Err(Error::InvalidParameter(format!("component {k} has the wrong form degree")));
            }
        }
        let x = self.x();
        let even = x.even_part().max_abs();
        if even > tol {
            return Err(Error::InvalidParameter(format!("superconnection is not odd (even part {even:.3e})")));
        }
        let r = self.clifford_linear_residual();
        if r > tol.max(1e-10) {
            return Err(Error::NotCliffordLinear { residual: r });
        }
        Ok(())
    }

    pub fn bundle(&self) -> &SuperBundle {
        &self.bundle
    }

    pub fn signature(&self) -> &Arc<RingSignature> {
        &self.bundle.sig
    }

    pub fn omega(&self) -> &OpForm {
        &self.omega
    }

    pub fn components(&self) -> &BTreeMap<usize, OpForm> {
        &self.components
    }

    pub fn component(&self, k: usize) -> OpForm {
        if k == 1 {
            return self.omega.clone();
        }
        self.components
            .get(&k)
            .cloned()
            .unwrap_or_else(|| OpForm::zero(&self.bundle.sig, self.bundle.p(), self.bundle.q()))
    }

    /// `X = 𝔸 − d`.
    pub fn x(&self) -> OpForm {
        self.components.values().fold(self.omega.clone(), |acc, a| &acc + a)
    }

    pub fn diffop(&self) -> DiffOp {
        DiffOp::connection(self.x())
    }

    /// Curvature `𝔸² = dX + X²`.
    pub fn square(&self) -> OpForm {
        let x = self.x();
        &x.d() + &(&x * &x)
    }

    /// `[𝔸, 𝔸²]`, which vanishes identically.
    pub fn bianchi_residual(&self) -> f64 {
        let f = self.square();
        let comm = OpForm::supercommutator(&self.x(), &f);
        (&f.d() + &comm).max_abs()
    }

    pub fn clifford_linear_residual(&self) -> f64 {
        let x = self.x();
        let sig = &self.bundle.sig;
        self.bundle
            .module
            .generators
            .iter()
            .map(|g| {
                let go = OpForm::from_matrix(sig, self.bundle.p(), self.bundle.q(), g.clone());
                OpForm::supercommutator(&x, &go).max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// `‖𝔸(αs) − dα·s − (−1)^{|α|} α𝔸s‖` for homogeneous `α`.
    pub fn check_leibniz(&self, alpha: &RingElement, s: &Section) -> f64 {
        let a = self.diffop();
        let lhs = a.apply(&s.ring_mul(alpha));
        let sign = c(linalg::sign(alpha.parity().unwrap_or(0)));
        let rhs = s.ring_mul(&alpha.d()).add(&a.apply(s).ring_mul(alpha).scale(sign));
        lhs.add(&rhs.scale(c(-1.0))).max_abs()
    }

    /// Residuals of `M_K^† = (−1)^k M_K` on each component, `†` being the
    /// ordinary adjoint for the bundle metric.
    pub fn self_adjoint_report(&self) -> SelfAdjointReport {
        let module = &self.bundle.module;
        let mut component_residuals = BTreeMap::new();
        for k in std::iter::once(1).chain(self.components.keys().copied()) {
            let s = c(linalg::sign(k));
            let r = self
                .component(k)
                .terms()
                .map(|(_, m)| max_abs(&(module.adjoint(m) - m * s)))
                .fold(0.0, f64::max);
            component_residuals.insert(k, r);
        }
        let generator_residual = module.self_adjoint_residual();
        let max = component_residuals.values().copied().fold(generator_residual, f64::max);
        SelfAdjointReport { component_residuals, generator_residual, passed: max <= 1e-10 }
    }

    /// Applies the degree-dependent rescaling of components.
    pub fn rescale(&self, u: f64, convention: RescaleConvention) -> Result<Self> {
        if !(u > 0.0) {
            return Err(Error::InvalidParameter(format!("rescaling parameter must be positive, got {u}")));
        }
        let factor = |k: usize| match convention {
            RescaleConvention::Getzler => u.powf((k as f64 - 1.0) / 2.0),
            RescaleConvention::Rg => u.powf(1.0 - k as f64),
        };
        let components = self.components.iter().map(|(k, a)| (*k, a.scale(c(factor(*k))))).collect();
        Ok(Superconnection { bundle: self.bundle.clone(), omega: self.omega.clone(), components })
    }

    /// `e^{−t𝔸²}`.
    pub fn heat(&self, t: f64) -> Result<OpForm> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("heat time must be nonnegative, got {t}")));
        }
        funcalc::exp_neg(&self.square(), t, self.bundle.metric_opt())
    }

    /// Same superconnection over a signature with more odd parameters.
    pub fn embed(&self, sig: &Arc<RingSignature>) -> Result<Self> {
        let omega = self.omega.embed(sig)?;
        let components = self
            .components
            .iter()
            .map(|(k, a)| Ok((*k, a.embed(sig)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Superconnection { bundle: self.bundle.over(sig), omega, components })
    }

    /// `e^{−T𝔸² + Θ𝔸}` at an even super-time `T = t₀ + n` and odd `Θ`, both
    /// ring elements over `sig` (which extends the base signature).
    pub fn spar_at(&self, sig: &Arc<RingSignature>, time: &RingElement, theta: &RingElement) -> Result<DiffOp> {
        let (t0, n) = time.body_nil_split();
        if t0.im.abs() > 1e-14 || t0.re < 0.0 {
            return Err(Error::InvalidParameter("super-time body must be real and nonnegative".into()));
        }
        let (p, q) = (self.bundle.p(), self.bundle.q());
        let a = self.embed(sig)?;
        let f = a.square();
        let mut h = self.heat(t0.re)?.embed(sig)?;
        if !n.is_zero() {
            let step = &OpForm::from_ring(&n, p, q) * &f;
            let mut term = OpForm::identity(sig, p, q);
            let mut series = term.clone();
            for k in 1..=sig.nilpotency_bound() {
                term = (&term * &step).scale(c(-1.0 / k as f64));
                if term.is_zero() {
                    break;
                }
                series = &series + &term;
            }
            h = &h * &series;
        }
        let th = OpForm::from_ring(theta, p, q);
        let one_plus = DiffOp { c: &OpForm::identity(sig, p, q) + &(&th * &a.x()), d: th };
        Ok(DiffOp::from_opform(h).compose(&one_plus))
    }

    /// `ρ(t, θ) = e^{−t𝔸²} + θ·𝔸e^{−t𝔸²}` with `θ` appended as an odd
    /// parameter.
    pub fn spar(&self, t: f64, theta: &str) -> Result<SemigroupRep> {
        let sig = self.bundle.sig.with_odd_params(&[theta])?;
        let time = RingElement::real(&sig, t);
        let th = RingElement::odd(&sig, theta)?;
        let value = self.spar_at(&sig, &time, &th)?;
        Ok(SemigroupRep { t, theta: theta.to_string(), value })
    }

    /// `‖ρ(s, η)ρ(t, θ) − ρ((s, η)·(t, θ))‖`.
    pub fn check_semigroup(&self, s: f64, t: f64) -> Result<f64> {
        let sig = self.bundle.sig.with_odd_params(&["eta", "theta"])?;
        let eta = RingElement::odd(&sig, "eta")?;
        let theta = RingElement::odd(&sig, "theta")?;
        let rs = self.spar_at(&sig, &RingElement::real(&sig, s), &eta)?;
        let rt = self.spar_at(&sig, &RingElement::real(&sig, t), &theta)?;
        let lhs = rs.compose(&rt);
        let (time, odd) = compose_super_euclidean(
            (&RingElement::real(&sig, s), &eta),
            (&RingElement::real(&sig, t), &theta),
        )?;
        let rhs = self.spar_at(&sig, &time, &odd)?;
        Ok((&lhs.c - &rhs.c).max_abs().max((&lhs.d - &rhs.d).max_abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfAdjointReport {
    pub component_residuals: BTreeMap<usize, f64>,
    pub generator_residual: f64,
    pub passed: bool,
}

impl SelfAdjointReport {
    pub fn max_residual(&self) -> f64 {
        self.component_residuals.values().copied().fold(self.generator_residual, f64::max)
    }
}

/// Value of the super-semigroup at `(t, θ)`, a first-order operator over the
/// ring extended by `θ`. The `+θ` expansion is stored: `ρ = A(t) + θ B(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupRep {
    pub t: f64,
    pub theta: String,
    pub value: DiffOp,
}

impl SemigroupRep {
    pub fn signature(&self) -> &Arc<RingSignature> {
        self.value.c.signature()
    }

    /// `θ`-free part, an operator form.
    pub fn even_part(&self) -> Result<DiffOp> {
        Ok(DiffOp { c: self.value.c.without_odd(&self.theta)?, d: self.value.d.without_odd(&self.theta)? })
    }

    /// `θ`-coefficient.
    pub fn theta_part(&self) -> Result<DiffOp> {
        Ok(DiffOp { c: self.value.c.odd_coefficient(&self.theta)?, d: self.value.d.odd_coefficient(&self.theta)? })
    }
}

/// Superconnection read off a semigroup value at `t = 0`.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub connection: Superconnection,
    /// `‖D − 1‖` for the `d`-coefficient of the `θ`-part; nonzero means the
    /// input was not of the form `1 + θ𝔸` (for instance constant in `θ`).
    pub derivative_residual: f64,
}

impl Extraction {
    pub fn flagged(&self) -> bool {
        self.derivative_residual > 1e-10
    }
}

/// Inverts `𝔸 ↦ ρ(0, θ)`: requires `ρ(0, 0) = 1` and returns the
/// `θ`-coefficient as a superconnection on `bundle`.
pub fn extract_superconnection(rho: &SemigroupRep, bundle: &SuperBundle) -> Result<Extraction> {
    let (p, q) = (bundle.p(), bundle.q());
    let ext_sig = rho.signature().clone();
    let body = rho.even_part()?;
    let id = OpForm::identity(&ext_sig, p, q);
    let unital = (&body.c - &id).max_abs().max(body.d.max_abs());
    if unital > 1e-10 {
        return Err(Error::NotUnital { residual: unital });
    }
    let b = rho.theta_part()?;
    let derivative_residual = (&b.d - &id).max_abs();
    let x = b.c.without_odd(&rho.theta)?;
    // Back to the base signature.
    let mut base = OpForm::zero(&bundle.sig, p, q);
    for (k, m) in x.terms() {
        if k.odds != 0 {
            return Err(Error::InvalidParameter("extracted coefficient depends on extra odd parameters".into()));
        }
        base.add_term(k.clone(), m.clone());
    }
    let connection = Superconnection::from_x(bundle.clone(), &base)?;
    Ok(Extraction { connection, derivative_residual })
}

/// `(t, θ)·(s, η) = (t + s + θη, θ + η)`.
pub fn compose_super_euclidean(
    a: (&RingElement, &RingElement),
    b: (&RingElement, &RingElement),
) -> Result<(RingElement, RingElement)> {
    let even = a.0.try_add(b.0)?.try_add(&a.1.try_mul(b.1)?)?;
    let odd = a.1.try_add(b.1)?;
    Ok((even, odd))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullbackMode {
    Source,
    Target,
}

/// Source map: `α`; target map: `α − θ dα`.
pub fn source_target_pullback(alpha: &RingElement, mode: PullbackMode, theta: &str) -> Result<RingElement> {
    let th = RingElement::odd(alpha.signature(), theta)?;
    Ok(match mode {
        PullbackMode::Source => alpha.clone(),
        PullbackMode::Target => alpha - &(&th * &alpha.d()),
    })
}

/// Form-valued function `α(t, θ) = Σ_j t^j (a_j + θ b_j)` of the super
/// time; `θ` is kept formal and sits to the left of the forms.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperTimeForm {
    pub a: Vec<RingElement>,
    pub b: Vec<RingElement>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Involution {
    /// `i^{|β|} β(−t, −iθ)`.
    Or,
    /// `(−1)^{|α|} α(t, −θ)`.
    Fl,
    /// `μ^{|α|} α(μ²t, μθ)`.
    Rg(f64),
}

impl SuperTimeForm {
    /// Form degree, if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut degs = self.a.iter().chain(&self.b).flat_map(|r| r.terms().map(|(k, _)| k.form_degree()));
        let first = degs.next().unwrap_or(0);
        degs.all(|d| d == first).then_some(first)
    }

    /// Substitutes `(t, θ) ↦ (ct, eθ)` and multiplies by `pre`.
    fn substitute(&self, ct: Complex64, e: Complex64, pre: Complex64) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut w = pre;
        for j in 0..self.a.len().max(self.b.len()) {
            if let Some(x) = self.a.get(j) {
                a.push(x.scale(&w));
            }
            if let Some(x) = self.b.get(j) {
                b.push(x.scale(&(w * e)));
            }
            w *= ct;
        }
        SuperTimeForm { a, b }
    }

    pub fn pullback(&self, which: Involution) -> Result<Self> {
        let k = self.degree().ok_or_else(|| Error::InvalidParameter("pullback needs homogeneous form degree".into()))?;
        Ok(match which {
            Involution::Or => self.substitute(c(-1.0), -linalg::I, i_pow(k as i64)),
            Involution::Fl => self.substitute(c(1.0), c(-1.0), c(linalg::sign(k))),
            Involution::Rg(mu) => {
                if !(mu > 0.0) {
                    return Err(Error::InvalidParameter("RG parameter must be positive".into()));
                }
                self.substitute(c(mu * mu), c(mu), c(mu.powi(k as i32)))
            }
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = |x: &[RingElement], y: &[RingElement]| {
            (0..x.len().max(y.len()))
                .map(|j| match (x.get(j), y.get(j)) {
                    (Some(u), Some(v)) => (u - v).max_abs(),
                    (Some(u), None) | (None, Some(u)) => u.max_abs(),
                    (None, None) => 0.0,
                })
                .fold(0.0, f64::max)
        };
        diff(&self.a, &other.a).max(diff(&self.b, &other.b))
    }
}

/// Bilinear pairing `L(αx, βy) = (−1)^{|x||β|} αβ · xᵀ S y` between sections
/// of `V₋ ≅ V̄₊` and `V₊`, `S` the graded metric.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPairing {
    pub p: usize,
    pub q: usize,
    pub super_metric: CMat,
}

impl HermitianPairing {
    pub fn from_module(m: &GradedCliffordModule) -> Self {
        HermitianPairing { p: m.p, q: m.q, super_metric: m.super_metric() }
    }

    pub fn pair(&self, v: &Section, w: &Section, sig: &Arc<RingSignature>) -> RingElement {
        let mut out = RingElement::zero(sig);
        for (ka, x) in v.terms() {
            for (kb, y) in w.terms() {
                let alpha = RingElement::from_terms(sig, [(ka.clone(), linalg::ONE)]);
                let beta = RingElement::from_terms(sig, [(kb.clone(), linalg::ONE)]);
                let ab = &alpha * &beta;
                for xpar in 0..2 {
                    let xs = split_vec(x, self.p, xpar);
                    let val = (xs.transpose() * &self.super_metric * y)[(0, 0)];
                    let s = linalg::sign(xpar * kb.parity());
                    out = &out + &ab.scale(&(val * s));
                }
            }
        }
        out
    }

    /// The superconnection on `V₋` induced by the reflection: coefficient
    /// matrices `i^{|M|} M̄` on each parity part.
    pub fn reflected(&self, a: &Superconnection) -> OpForm {
        a.x().map(|_, m| {
            let m = m.conjugate();
            let e = linalg::even_part(&m, self.p);
            let o = linalg::odd_part(&m, self.p);
            e + o * linalg::I
        })
    }

    /// Residual of `L(𝔸₋v, w) + (−1)^{|v|} L(v, 𝔸₊w) − dL(v, w)` over
    /// sections `x^a e_i`, `dx_j e_i` and constants.
    pub fn adjunction_residual(&self, a: &Superconnection, a_minus: Option<&OpForm>) -> f64 {
        let sig = a.signature();
        let n = self.p + self.q;
        let ym = a_minus.cloned().unwrap_or_else(|| self.reflected(a));
        let minus = DiffOp::connection(ym);
        let plus = a.diffop();
        let mut forms = vec![RingElement::one(sig)];
        for i in 0..sig.m {
            forms.push(RingElement::x(sig, i));
            forms.push(RingElement::dx(sig, i));
        }
        let mut worst: f64 = 0.0;
        for fa in &forms {
            for fb in &forms {
                for i in 0..n {
                    for j in 0..n {
                        let v = Section::ring_times(fa, &unit(n, i));
                        let w = Section::ring_times(fb, &unit(n, j));
                        let v_par = (fa.parity().unwrap_or(0) + usize::from(i >= self.p)) & 1;
                        let lhs = &self.pair(&minus.apply(&v), &w, sig)
                            + &self.pair(&v, &plus.apply(&w), sig).scale(&c(linalg::sign(v_par)));
                        let rhs = self.pair(&v, &w, sig).d();
                        worst = worst.max((&lhs - &rhs).max_abs());
                    }
                }
            }
        }
        worst
    }
}

fn unit(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = linalg::ONE;
    v
}

fn split_vec(x: &CVec, p: usize, parity: usize) -> CVec {
    let mut r = x.clone();
    for i in 0..x.len() {
        if (i >= p) != (parity == 1) {
            r[i] = linalg::ZERO;
        }
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealityReport {
    pub component_residual: f64,
    pub clifford_residual: f64,
    pub metric_residual: f64,
    /// Deviation of the ordinary form on the real subspace from a real
    /// symmetric matrix.
    pub real_form_residual: f64,
    pub passed: bool,
}

/// Checks that `𝔸`, the Clifford action and the metric are compatible with
/// the real structure `x ↦ J x̄`.
pub fn reality_check(a: &Superconnection, j: &CMat) -> Result<RealityReport> {
    let n = a.bundle().dim();
    if j.shape() != (n, n) {
        return Err(Error::Shape("real structure shape".into()));
    }
    let jinv = j.clone().try_inverse().ok_or_else(|| Error::InvalidParameter("real structure not invertible".into()))?;
    let fixed = |m: &CMat| max_abs(&(j * m.conjugate() * &jinv - m));
    let component_residual = a.x().terms().map(|(_, m)| fixed(m)).fold(0.0, f64::max);
    let clifford_residual = a.bundle().module.generators.iter().map(fixed).fold(0.0, f64::max);
    let g = a.bundle().metric();
    let metric_residual = max_abs(&(j.adjoint() * g * j - g.conjugate()));
    // Real subspace: span of e + J ē over e in a real basis of ℂⁿ.
    let mut cols = Vec::new();
    for k in 0..n {
        for z in [linalg::ONE, linalg::I] {
            let e = unit(n, k) * z;
            cols.push(&e + j * e.conjugate());
        }
    }
    let span = CMat::from_columns(&cols);
    let real_form_residual = if n == 0 {
        0.0
    } else {
        // Real-orthonormal basis of the real subspace via the real Gram matrix.
        let gram_re = (span.adjoint() * &span).map(|z| c(z.re));
        let (vals, vecs) = linalg::herm_eig(&gram_re);
        let top = vals.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-9 * top.max(1.0)).collect();
        let basis = CMat::from_columns(&keep.iter().map(|&i| &span * vecs.column(i).map(|z| c(z.re))).collect::<Vec<_>>());
        let form = basis.adjoint() * g * &basis;
        form.iter().map(|z| z.im.abs()).fold(0.0, f64::max).max(max_abs(&(&form - form.transpose())))
    };
    let tol = 1e-10;
    Ok(RealityReport {
        component_residual,
        clifford_residual,
        metric_residual,
        real_form_residual,
        passed: component_residual <= tol && clifford_residual <= tol && metric_residual <= tol && real_form_residual <= 1e-8,
    })
}
