//! Inclusions `g_{λμ}: ℋ^{<λ} ↪ ℋ^{<μ}` and the odd involutions `e^{λμ}`
//! given by `ν^{−1/2} 𝔸^[0]` on each eigenspace of the band `[λ, μ)`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::cutoff::CutoffBundle;
use super::{FamilySample, PointSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{self, c, max_abs, CMat};

#[derive(Clone, Debug)]
pub struct GluingData {
    pub lambda: f64,
    pub mu: f64,
    pub points: Vec<usize>,
    pub inclusions: BTreeMap<usize, CMat>,
    /// `e^{λμ}` as an operator on the whole fiber (zero off the band).
    pub involutions: BTreeMap<usize, CMat>,
    pub report: GluingReport,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GluingReport {
    pub isometry: f64,
    pub clifford_map: f64,
    pub oddness: f64,
    pub involution: f64,
    pub supercommutation: f64,
}

impl GluingReport {
    pub fn max(&self) -> f64 {
        self.isometry.max(self.clifford_map).max(self.oddness).max(self.involution).max(self.supercommutation)
    }
}

/// Band projector and involution at one point, as operators on the fiber.
pub fn band_operators(
    family: &FamilySample,
    spec: &PointSpectrum,
    lambda: f64,
    mu: f64,
    idx: usize,
) -> Result<(CMat, CMat)> {
    let n = family.dim();
    let g = family.bundle().metric();
    let a0 = family.a0_at(idx);
    let (ev, od) = spec.eig.select(|v| v >= lambda && v < mu);
    let mut proj = CMat::zeros(n, n);
    let mut inv = CMat::zeros(n, n);
    for j in ev.into_iter().chain(od) {
        let nu = spec.eig.values[j];
        if nu < family.margin.max(1e-12) {
            return Err(Error::Margin(format!("eigenvalue {nu:.3e} in the band [{lambda}, {mu}) is too small")));
        }
        let v = spec.eig.vectors.column(j).into_owned();
        let dual = v.adjoint() * g;
        let pj = &v * &dual;
        inv += &a0 * &pj * c(nu.powf(-0.5));
        proj += pj;
    }
    Ok((proj, inv))
}

pub fn gluing(
    family: &FamilySample,
    scan: &[PointSpectrum],
    lower: &CutoffBundle,
    upper: &CutoffBundle,
) -> Result<GluingData> {
    let (lambda, mu) = (lower.lambda, upper.lambda);
    if !(lambda < mu) {
        return Err(Error::InvalidParameter(format!("gluing needs λ < μ, got {lambda} and {mu}")));
    }
    let g = family.bundle().metric();
    let p = family.bundle().p();
    let n = family.dim();
    let gens = &family.bundle().module.generators;
    let points: Vec<usize> = lower.frames.keys().copied().filter(|i| upper.frames.contains_key(i)).collect();
    let mut inclusions = BTreeMap::new();
    let mut involutions = BTreeMap::new();
    let mut report = GluingReport::default();
    for &idx in &points {
        let ul = lower.frames[&idx].matrix();
        let uu = upper.frames[&idx].matrix();
        let incl = uu.adjoint() * g * &ul;
        let r = incl.ncols();
        report.isometry = report.isometry.max(max_abs(&(incl.adjoint() * &incl - CMat::identity(r, r))));
        let cl = lower.generators_at(family, idx);
        let cu = upper.generators_at(family, idx);
        for (a, b) in cl.iter().zip(&cu) {
            report.clifford_map = report.clifford_map.max(max_abs(&(&incl * a - b * &incl)));
        }
        let (proj, e) = band_operators(family, &scan[idx], lambda, mu, idx)?;
        report.oddness = report.oddness.max(max_abs(&linalg::even_part(&e, p)));
        report.involution = report.involution.max(max_abs(&(&e * &e - &proj)));
        for gen in gens {
            report.supercommutation = report.supercommutation.max(max_abs(&(&e * gen + gen * &e)));
        }
        debug_assert_eq!(e.nrows(), n);
        inclusions.insert(idx, incl);
        involutions.insert(idx, e);
    }
    Ok(GluingData { lambda, mu, points, inclusions, involutions, report })
}

/// `‖e^{λρ} − e^{λμ} − e^{μρ}‖` on the triple overlap.
pub fn triple_residual(a: &GluingData, b: &GluingData, c: &GluingData) -> Result<f64> {
    if !(a.lambda == c.lambda && a.mu == b.lambda && b.mu == c.mu) {
        return Err(Error::InvalidParameter("gluing data do not form a triple λ < μ < ρ".into()));
    }
    let mut worst: f64 = 0.0;
    for (idx, e_lr) in &c.involutions {
        if let (Some(e_lm), Some(e_mr)) = (a.involutions.get(idx), b.involutions.get(idx)) {
            worst = worst.max(max_abs(&(e_lr - e_lm - e_mr)));
        }
    }
    Ok(worst)
}
