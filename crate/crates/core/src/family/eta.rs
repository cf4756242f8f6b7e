//! Local jet computations at a grid point: Chern forms of the superconnection
//! and of the cutoff connection, eta forms and band transgressions.
//!
//! Sub-bundles are handled through jet-valued projectors `Π` rather than
//! frames: the compression `Π𝔹Π` of `𝔹 = d + Y` has curvature
//! `ΠFΠ + ΠKKΠ` with `F = dY + Y²` and `K = dΠ + [Y, Π]`.

use serde::Serialize;

use super::FamilySample;
use crate::chern::{self, clifford_supertrace};
use crate::error::Result;
use crate::funcalc::{self, Indicator, InvSqrtBand};
use crate::linalg::{self, c, CMat};
use crate::opform::OpForm;
use crate::quad;
use crate::ring::RingElement;
use crate::superconn::{SuperBundle, Superconnection};

/// Upper integration point used to estimate `lim_{s→∞} Ch(𝔸_λ(s))`.
const LIMIT_S: f64 = 30.0;
const MAX_INTERVALS: usize = 400;

/// Jet of the spectral projector onto `spec(𝔸^[0]²) < λ`.
pub fn cutoff_projector(jet: &Superconnection, lambda: f64) -> Result<OpForm> {
    let a0 = jet.component(0);
    funcalc::apply(&Indicator { lo: -1.0, hi: lambda }, &(&a0 * &a0), jet.bundle().metric_opt())
}

/// `sTr_Cl(Π e^{−R} Π)` for the compression of `d + Y` by `Π`.
pub fn compressed_heat(bundle: &SuperBundle, y: &OpForm, pi: &OpForm) -> Result<OpForm> {
    let f = &y.d() + &(y * y);
    let k = &pi.d() + &(&(y * pi) - &(pi * y));
    let r = &(&(pi * &f) * pi) + &(&(&(pi * &k) * &k) * pi);
    let h = funcalc::exp_neg(&r, 1.0, bundle.metric_opt())?;
    Ok(&(pi * &h) * pi)
}

pub fn compressed_chern(bundle: &SuperBundle, y: &OpForm, pi: &OpForm) -> Result<RingElement> {
    Ok(clifford_supertrace(bundle, &compressed_heat(bundle, y, pi)?))
}

/// `V ⊕ ΠV`, with operators assembled from `V`-coordinate blocks.
struct Doubled {
    bundle: SuperBundle,
    perm: CMat,
    rev: CMat,
    p: usize,
    q: usize,
}

impl Doubled {
    fn new(b: &SuperBundle) -> Result<Self> {
        let (p, q) = (b.p(), b.q());
        let n = p + q;
        let module = b.module.direct_sum(&b.module.parity_reversed())?;
        let order: Vec<usize> = (0..p).chain(n..n + q).chain(p..n).chain(n + q..2 * n).collect();
        let rev: Vec<usize> = (p..n).chain(0..p).collect();
        Ok(Doubled {
            bundle: SuperBundle::new(module, b.sig.clone())?,
            perm: linalg::permutation(&order),
            rev: linalg::permutation(&rev),
            p,
            q,
        })
    }

    /// Block operator `[[tl, tr], [bl, br]]`, all blocks written in the
    /// coordinates of `V`.
    fn assemble(&self, tl: &OpForm, tr: &OpForm, bl: &OpForm, br: &OpForm) -> OpForm {
        let n = self.p + self.q;
        let sig = tl.signature();
        let mut out = OpForm::zero(sig, n, n);
        let mut keys: Vec<_> = tl.terms().chain(tr.terms()).chain(bl.terms()).chain(br.terms()).map(|(k, _)| k.clone()).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            let mut raw = CMat::zeros(2 * n, 2 * n);
            raw.view_mut((0, 0), (n, n)).copy_from(&tl.get(&k));
            raw.view_mut((0, n), (n, n)).copy_from(&(tr.get(&k) * self.rev.transpose()));
            raw.view_mut((n, 0), (n, n)).copy_from(&(&self.rev * bl.get(&k)));
            raw.view_mut((n, n), (n, n)).copy_from(&(&self.rev * br.get(&k) * self.rev.transpose()));
            out.add_term(k, &self.perm * raw * self.perm.transpose());
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalForms {
    pub idx: usize,
    #[serde(skip)]
    pub chern: RingElement,
    #[serde(skip)]
    pub chern_cutoff: RingElement,
    #[serde(skip)]
    pub eta: RingElement,
    /// `‖dη − (Ch(𝔸) − Ch(∇^{<λ}))‖`.
    pub satisfies_residual: f64,
    /// `‖Ch(𝔸_λ(s))‖` at large `s`, the obstruction to the identity above.
    pub limit_chern: f64,
    pub quad_error: f64,
}

/// Eta form of the chart `λ` at grid point `idx`, from the family
/// `[[𝔸^[0](1 + s(1−Π)), s·i],[s·p, 0]] + 𝔸^[1] ⊕ ∇^{<λ} + 𝔸^[>1] ⊕ 0` on
/// `V ⊕ ΠH^{<λ}`, integrated over `s ∈ [0, ∞)`. Both the coupling and the
/// part of `𝔸^[0]` above the cutoff grow with `s`, so the Chern form of the
/// family decays to zero.
pub fn eta_form(family: &FamilySample, idx: usize, lambda: f64, tol: f64) -> Result<LocalForms> {
    let jet = family.jet_at(&family.grid.point(idx))?;
    let b = jet.bundle();
    let sig = jet.signature().clone();
    let (p, q) = (b.p(), b.q());
    let proj = cutoff_projector(&jet, lambda)?;
    let omega = jet.omega().clone();
    let chern_total = clifford_supertrace(b, &jet.heat(1.0)?);
    let chern_cutoff = compressed_chern(b, &omega, &proj)?;

    let dbl = Doubled::new(b)?;
    let zero = OpForm::zero(&sig, p, q);
    let id = OpForm::identity(&sig, p, q);
    let pi = dbl.assemble(&id, &zero, &zero, &proj);
    let y0 = dbl.assemble(&jet.x(), &zero, &zero, &omega);
    let a0 = jet.component(0);
    let above = &a0 - &(&a0 * &proj);
    let ydot = dbl.assemble(&above, &proj, &proj, &zero);
    let sign = chern::transgression_sign(b.num_generators());
    let integrand = |s: f64| -> Result<RingElement> {
        let y = &y0 + &ydot.scale(c(s));
        let h = compressed_heat(&dbl.bundle, &y, &pi)?;
        Ok(clifford_supertrace(&dbl.bundle, &(&ydot * &h)).scale_re(-sign))
    };
    let r = quad::integrate_to_infinity(integrand, 0.0, tol, MAX_INTERVALS)?;
    let eta = r.value;
    let limit = compressed_chern(&dbl.bundle, &(&y0 + &ydot.scale(c(LIMIT_S))), &pi)?;
    let satisfies_residual = (&eta.d() - &(&chern_total - &chern_cutoff)).max_abs();
    Ok(LocalForms {
        idx,
        chern: chern_total,
        chern_cutoff,
        eta,
        satisfies_residual,
        limit_chern: limit.max_abs(),
        quad_error: r.error,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BandTransgression {
    pub idx: usize,
    #[serde(skip)]
    pub eta: RingElement,
    /// `‖Ch(∇^{<μ}) − Ch(∇^{<λ}) − dη_band‖`.
    pub residual: f64,
    pub quad_error: f64,
}

/// Transgression between `∇^{<μ}` and `∇^{<λ}` along `∇^{<μ} + s e^{λμ}`.
pub fn band_eta(family: &FamilySample, idx: usize, lambda: f64, mu: f64, tol: f64) -> Result<BandTransgression> {
    let jet = family.jet_at(&family.grid.point(idx))?;
    let b = jet.bundle();
    let metric = b.metric_opt();
    let a0 = jet.component(0);
    let sq = &a0 * &a0;
    let p_lo = funcalc::apply(&Indicator { lo: -1.0, hi: lambda }, &sq, metric)?;
    let p_hi = funcalc::apply(&Indicator { lo: -1.0, hi: mu }, &sq, metric)?;
    let e = &a0 * &funcalc::apply(&InvSqrtBand { lo: lambda, hi: mu }, &sq, metric)?;
    let omega = jet.omega().clone();
    let ch_lo = compressed_chern(b, &omega, &p_lo)?;
    let ch_hi = compressed_chern(b, &omega, &p_hi)?;
    let sign = chern::transgression_sign(b.num_generators());
    let r = quad::integrate_to_infinity(
        |s| {
            let y = &omega + &e.scale(c(s));
            let h = compressed_heat(b, &y, &p_hi)?;
            Ok(clifford_supertrace(b, &(&e * &h)).scale_re(-sign))
        },
        0.0,
        tol,
        MAX_INTERVALS,
    )?;
    let residual = (&r.value.d() - &(&ch_hi - &ch_lo)).max_abs();
    Ok(BandTransgression { idx, eta: r.value, residual, quad_error: r.error })
}
