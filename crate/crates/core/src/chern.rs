//! Chern forms `sTr_{Cl}(e^{−u𝔸(u)²})`, Chern–Simons transgressions, the
//! `ℓ`-parameterized partition function with its transgression partner, and
//! the Witten index of an odd supercharge.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::opform::OpForm;
use crate::quad;
use crate::ring::RingElement;
use crate::superconn::{extract_superconnection, RescaleConvention, SemigroupRep, SuperBundle, Superconnection};

/// Clifford supertrace of an endomorphism-valued form on `bundle`.
pub fn clifford_supertrace(bundle: &SuperBundle, x: &OpForm) -> RingElement {
    x.clifford_supertrace(&bundle.module.gamma_matrix(), bundle.num_generators())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UMode {
    /// Integer `u`-powers are tracked per degree and never evaluated.
    Formal,
    Numeric(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChernTerm {
    pub form: RingElement,
    /// Power of `u` multiplying `form`, on top of the overall `u^{n/2}`.
    pub u_power: i64,
}

/// `Ch(𝔸) = u^{n/2} Σ_k u^{(k−n)/2} c_k` with `c_k` of form degree `k`. In
/// numeric mode the powers are already substituted and all `u_power` are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernForm {
    pub n: i32,
    pub mode: UMode,
    pub components: BTreeMap<usize, ChernTerm>,
}

impl ChernForm {
    /// `Σ_k u^{k/2} c_k` (formal mode) or the stored sum (numeric mode).
    pub fn evaluate(&self, u: f64) -> Option<RingElement> {
        let mut it = self.components.iter();
        let (_, first) = it.next()?;
        let mut acc = RingElement::zero(first.form.signature());
        for (k, t) in &self.components {
            let w = match self.mode {
                UMode::Formal => u.powf(*k as f64 / 2.0),
                UMode::Numeric(_) => 1.0,
            };
            acc = &acc + &t.form.scale_re(w);
        }
        Some(acc)
    }

    /// Value at `u = 1`.
    pub fn total(&self) -> Option<RingElement> {
        self.evaluate(1.0)
    }

    /// Largest coefficient in degrees of the wrong parity.
    pub fn parity_residual(&self) -> f64 {
        let n = self.n.rem_euclid(2) as usize;
        self.components.iter().filter(|(k, _)| *k % 2 != n).map(|(_, t)| t.form.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient whose `u`-power (formal mode) is odd.
    pub fn odd_u_power_residual(&self) -> f64 {
        let n = self.n as i64;
        self.components
            .iter()
            .filter(|(k, _)| (**k as i64 - n).rem_euclid(4) != 0)
            .map(|(_, t)| t.form.max_abs())
            .fold(0.0, f64::max)
    }
}

pub fn chern_form(a: &Superconnection, mode: UMode) -> Result<ChernForm> {
    if let UMode::Numeric(u) = mode {
        if !(u > 0.0) {
            return Err(Error::InvalidParameter(format!("u must be positive, got {u}")));
        }
    }
    let n = a.bundle().module.algebra.degree();
    let heat = a.heat(1.0)?;
    let total = clifford_supertrace(a.bundle(), &heat);
    let mut components = BTreeMap::new();
    let kmax = a.signature().degree.min(a.signature().m);
    for k in 0..=kmax {
        let part = total.form_part(k);
        if part.is_zero() {
            continue;
        }
        let term = match mode {
            UMode::Formal => ChernTerm { form: part, u_power: (k as i64 - n as i64).div_euclid(2) },
            UMode::Numeric(u) => ChernTerm { form: part.scale_re(u.powf(k as f64 / 2.0)), u_power: 0 },
        };
        components.insert(k, term);
    }
    Ok(ChernForm { n, mode, components })
}

/// `‖d c_k‖` per degree.
pub fn check_closed(ch: &ChernForm) -> BTreeMap<usize, f64> {
    ch.components.iter().map(|(k, t)| (*k, t.form.d().max_abs())).collect()
}

/// Sign making `d CS = Ch(𝔸₁) − Ch(𝔸₀)` for `CS = σ ∫ sTr_Cl(Ẋ e^{−𝔸_s²})`.
pub(crate) fn transgression_sign(ngen: usize) -> f64 {
    -linalg::sign(ngen)
}

fn transgression_integrand(bundle: &SuperBundle, xdot: &OpForm, a: &Superconnection) -> Result<RingElement> {
    let h = a.heat(1.0)?;
    let s = transgression_sign(bundle.num_generators());
    Ok(clifford_supertrace(bundle, &(xdot * &h)).scale_re(s))
}

#[derive(Clone, Debug)]
pub struct ChernSimons {
    pub form: RingElement,
    pub error: f64,
    pub evaluations: usize,
}

/// Transgression along `𝔸_s = (1 − s)𝔸₀ + s𝔸₁`.
pub fn chern_simons(a0: &Superconnection, a1: &Superconnection, tol: f64) -> Result<ChernSimons> {
    if a0.bundle() != a1.bundle() {
        return Err(Error::SignatureMismatch("Chern–Simons endpoints live on different bundles".into()));
    }
    let x0 = a0.x();
    let x1 = a1.x();
    let xdot = &x1 - &x0;
    let bundle = a0.bundle().clone();
    let r = quad::integrate(
        |s| {
            let xs = &x0.scale(c(1.0 - s)) + &x1.scale(c(s));
            let a = Superconnection::from_x(bundle.clone(), &xs)?;
            transgression_integrand(&bundle, &xdot, &a)
        },
        0.0,
        1.0,
        tol,
        200,
    )?;
    Ok(ChernSimons { form: r.value, error: r.error, evaluations: r.evaluations })
}

/// `‖Ch(RG_μ 𝔸) − Ch(𝔸) − d CS‖` at `u = 1`.
pub fn rg_class_residual(a: &Superconnection, mu: f64, tol: f64) -> Result<f64> {
    let b = a.rescale(mu, RescaleConvention::Rg)?;
    let ch_a = chern_form(a, UMode::Numeric(1.0))?.total().unwrap_or_else(|| RingElement::zero(a.signature()));
    let ch_b = chern_form(&b, UMode::Numeric(1.0))?.total().unwrap_or_else(|| RingElement::zero(a.signature()));
    let cs = chern_simons(a, &b, tol)?;
    Ok((&(&ch_b - &ch_a) - &cs.form.d()).max_abs())
}

/// `ℓ ↦ 𝔸_ℓ = Σ_k ℓ^{(1−k)/2} 𝔸^[k]`, so that
/// `sTr_Cl(e^{−𝔸_ℓ²})` is `ℓ^{−deg/2} sTr_Cl(e^{−ℓ𝔸²})`.
fn ell_family(a: &Superconnection, ell: f64) -> Result<Superconnection> {
    a.rescale(1.0 / ell, RescaleConvention::Getzler)
}

fn ell_derivative(a: &Superconnection, ell: f64) -> OpForm {
    let mut out = OpForm::zero(a.signature(), a.bundle().p(), a.bundle().q());
    for (k, m) in a.components() {
        let e = (1.0 - *k as f64) / 2.0;
        out = &out + &m.scale(c(e * ell.powf(e - 1.0)));
    }
    out
}

/// `Z(ℓ) = ℓ^{−deg/2} sTr_Cl(e^{−ℓ𝔸²})`.
pub fn partition_function(a: &Superconnection, ell: f64) -> Result<RingElement> {
    let al = ell_family(a, ell)?;
    Ok(clifford_supertrace(a.bundle(), &al.heat(1.0)?))
}

/// `Z_ℓ = σ sTr_Cl(∂_ℓ𝔸_ℓ e^{−𝔸_ℓ²})`, normalized so that `∂_ℓ Z = d Z_ℓ`.
pub fn partition_transgression(a: &Superconnection, ell: f64) -> Result<RingElement> {
    let al = ell_family(a, ell)?;
    transgression_integrand(a.bundle(), &ell_derivative(a, ell), &al)
}

pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let r = (hi / lo).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| lo * r.powi(i as i32)).collect()
}

#[derive(Clone, Debug)]
pub struct PfaffianSection {
    pub n: i32,
    pub ells: Vec<f64>,
    pub z: Vec<RingElement>,
    pub z_ell: Vec<RingElement>,
    pub closed_residual: f64,
    pub transgression_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PfaffianReport {
    pub closed_residual: f64,
    pub transgression_residual: f64,
    pub parity_residual: f64,
    pub mod4_residual: f64,
}

impl PfaffianSection {
    fn degree_residual(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.z
            .iter()
            .flat_map(|z| z.terms().filter(|(k, _)| !keep(k.form_degree())).map(|(_, v)| v.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient of `Z` in degrees of parity other than `n`.
    pub fn parity_residual(&self) -> f64 {
        let n = self.n.rem_euclid(2) as usize;
        self.degree_residual(|k| k % 2 == n)
    }

    /// Largest coefficient of `Z` in degrees `≢ n mod 4`.
    pub fn mod4_residual(&self) -> f64 {
        let n = self.n.rem_euclid(4) as usize;
        self.degree_residual(|k| k % 4 == n)
    }

    pub fn report(&self) -> PfaffianReport {
        PfaffianReport {
            closed_residual: self.closed_residual,
            transgression_residual: self.transgression_residual,
            parity_residual: self.parity_residual(),
            mod4_residual: self.mod4_residual(),
        }
    }
}

/// Central differences with two Richardson steps, relative step `h`.
fn richardson_derivative(f: impl Fn(f64) -> Result<RingElement>, x: f64, h: f64) -> Result<RingElement> {
    let diff = |step: f64| -> Result<RingElement> {
        let up = f(x + step)?;
        let dn = f(x - step)?;
        Ok((&up - &dn).scale_re(0.5 / step))
    };
    let step = h * x;
    let d1 = diff(step)?;
    let d2 = diff(step / 2.0)?;
    let d4 = diff(step / 4.0)?;
    let r1 = (&d2.scale_re(4.0) - &d1).scale_re(1.0 / 3.0);
    let r2 = (&d4.scale_re(4.0) - &d2).scale_re(1.0 / 3.0);
    Ok((&r2.scale_re(16.0) - &r1).scale_re(1.0 / 15.0))
}

pub fn pfaffian_section(a: &Superconnection, ells: &[f64]) -> Result<PfaffianSection> {
    if ells.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("ℓ-grid must be positive".into()));
    }
    let rows: Vec<(RingElement, RingElement, f64, f64)> = ells
        .par_iter()
        .map(|&ell| {
            let z = partition_function(a, ell)?;
            let zl = partition_transgression(a, ell)?;
            let dz = richardson_derivative(|l| partition_function(a, l), ell, 0.02)?;
            let closed = z.d().max_abs();
            let trans = (&dz - &zl.d()).max_abs();
            Ok((z, zl, closed, trans))
        })
        .collect::<Result<_>>()?;
    let mut out = PfaffianSection {
        n: a.bundle().module.algebra.degree(),
        ells: ells.to_vec(),
        z: Vec::new(),
        z_ell: Vec::new(),
        closed_residual: 0.0,
        transgression_residual: 0.0,
    };
    for (z, zl, closed, trans) in rows {
        out.z.push(z);
        out.z_ell.push(zl);
        out.closed_residual = out.closed_residual.max(closed);
        out.transgression_residual = out.transgression_residual.max(trans);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct WittenReport {
    pub index: i64,
    pub even_kernel: usize,
    pub odd_kernel: usize,
    /// `(t, sTr e^{−tQ²})`.
    pub partition: Vec<(f64, f64)>,
    pub max_drift: f64,
}

/// Graded kernel dimension of an odd hermitian `Q` on `ℂ^{p|q}`, checked
/// against `sTr(e^{−tQ²})` on `t_grid`.
pub fn witten_index(q_op: &CMat, p: usize, q: usize, t_grid: &[f64]) -> Result<WittenReport> {
    let n = p + q;
    if q_op.shape() != (n, n) {
        return Err(Error::Shape(format!("supercharge is {:?}, expected {n}x{n}", q_op.shape())));
    }
    let scale = linalg::max_abs(q_op).max(1.0);
    let herm = linalg::max_abs(&(q_op - q_op.adjoint()));
    let even = linalg::max_abs(&linalg::even_part(q_op, p));
    if herm > 1e-10 * scale || even > 1e-10 * scale {
        return Err(Error::NotSelfAdjoint { residual: herm.max(even) });
    }
    // Q maps even → odd by the lower-left block C.
    let cblk = q_op.view((p, 0), (q, p)).clone_owned();
    let rank = |m: &CMat| {
        let s = linalg::singular_values(m);
        let top = s.first().copied().unwrap_or(0.0);
        s.iter().filter(|&&v| v > 1e-9 * top.max(1.0)).count()
    };
    let r = rank(&cblk);
    let even_kernel = p - r;
    let odd_kernel = q - r;
    let index = even_kernel as i64 - odd_kernel as i64;
    let (vals, vecs) = linalg::herm_eig(&(q_op * q_op));
    let mut partition = Vec::with_capacity(t_grid.len());
    let mut max_drift: f64 = 0.0;
    for &t in t_grid {
        let d = nalgebra::DVector::from_iterator(n, vals.iter().map(|&v| c((-t * v.max(0.0)).exp())));
        let h = &vecs * CMat::from_diagonal(&d) * vecs.adjoint();
        let z: Complex64 = linalg::supertrace(&h, p)?;
        max_drift = max_drift.max((z - c(index as f64)).norm());
        partition.push((t, z.re));
    }
    Ok(WittenReport { index, even_kernel, odd_kernel, partition, max_drift })
}

/// Compares the Clifford supertrace of independently supplied semigroup
/// values with `sTr_Cl(e^{−t𝔸²})` for the superconnection extracted from the
/// `t = 0` sample.
pub fn infinitesimal_generation_check(samples: &[SemigroupRep], bundle: &SuperBundle) -> Result<f64> {
    let zero = samples
        .iter()
        .find(|s| s.t == 0.0)
        .ok_or_else(|| Error::InvalidParameter("no t = 0 sample".into()))?;
    let a = extract_superconnection(zero, bundle)?.connection;
    let mut worst: f64 = 0.0;
    for s in samples {
        let body = s.even_part()?;
        let supplied = clifford_supertrace(bundle, &body.c.without_odd(&s.theta)?);
        let mut base = RingElement::zero(&bundle.sig);
        for (k, v) in supplied.terms() {
            if k.odds == 0 {
                base.add_term(k.clone(), *v);
            }
        }
        let expect = clifford_supertrace(bundle, &a.heat(s.t)?);
        worst = worst.max((&base - &expect).max_abs());
    }
    Ok(worst)
}
