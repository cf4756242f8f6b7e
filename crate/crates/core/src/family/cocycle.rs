//! Assembly and validation of the differential cocycle
//! `{ℋ^{<λ}, ∇^{<λ}, g_{λμ}, e^{λμ}, η_λ}`, refinement and RG checks, and the
//! flows-to-zero criterion.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::cutoff::{self, CutoffBundle, CutoffCover, ProjectedConnection};
use super::eta::{self, BandTransgression, LocalForms};
use super::gluing::{self, GluingData, GluingReport};
use super::{spectral_scan, FamilySample, PointSpectrum};
use crate::clifford::AbsClass;
use crate::error::{Error, Result};
use crate::linalg::{self, c, max_abs, CMat};

#[derive(Clone, Copy, Debug)]
pub struct IndexOptions {
    pub eta_tol: f64,
    /// Local jet computations run at every `jet_stride`-th point of a chart.
    pub jet_stride: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { eta_tol: 1e-9, jet_stride: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct ChartRecord {
    pub bundle: CutoffBundle,
    pub connection: ProjectedConnection,
    pub local: BTreeMap<usize, LocalForms>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentSummary {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub points: usize,
    pub rank: (usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartSummary {
    pub lambda: f64,
    pub components: Vec<ComponentSummary>,
    pub min_alignment: f64,
    pub clifford_invariance: f64,
    pub connection_metric_residual: f64,
    pub connection_clifford_residual: f64,
    pub satisfies_residual: f64,
    pub limit_chern: f64,
    pub quad_error: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CechReport {
    /// `‖d Ch‖` over the global and cutoff Chern forms.
    pub closed: f64,
    /// `‖Ch(∇^{<μ}) − Ch(∇^{<λ}) − d(η_λ − η_μ)‖` on overlaps.
    pub overlap: f64,
    /// `‖Ch(∇^{<μ}) − Ch(∇^{<λ}) − dη_band‖` from the gluing data.
    pub band: f64,
    /// `‖e^{λρ} − e^{λμ} − e^{μρ}‖` on triple overlaps.
    pub triple: f64,
    /// `‖Ch(𝔸) − Ch(∇^{<λ}) − dη_λ‖`.
    pub global: f64,
}

impl CechReport {
    pub fn max(&self) -> f64 {
        self.closed.max(self.overlap).max(self.band).max(self.triple).max(self.global)
    }
}

#[derive(Clone, Debug)]
pub struct DifferentialCocycle {
    pub n: i32,
    pub cover: CutoffCover,
    pub charts: Vec<ChartRecord>,
    pub gluing: Vec<GluingData>,
    pub bands: Vec<(f64, f64, Vec<BandTransgression>)>,
    pub cech: CechReport,
}

impl DifferentialCocycle {
    pub fn chart(&self, lambda: f64) -> Option<&ChartRecord> {
        self.charts.iter().find(|c| c.bundle.lambda == lambda)
    }

    pub fn gluing_report(&self) -> GluingReport {
        let mut r = GluingReport::default();
        for g in &self.gluing {
            r.isometry = r.isometry.max(g.report.isometry);
            r.clifford_map = r.clifford_map.max(g.report.clifford_map);
            r.oddness = r.oddness.max(g.report.oddness);
            r.involution = r.involution.max(g.report.involution);
            r.supercommutation = r.supercommutation.max(g.report.supercommutation);
        }
        r
    }

    pub fn summaries(&self, family: &FamilySample) -> Vec<ChartSummary> {
        self.charts
            .iter()
            .map(|ch| {
                let components = ch
                    .bundle
                    .components
                    .iter()
                    .zip(&ch.bundle.ranks)
                    .map(|(comp, &rank)| ComponentSummary {
                        from: family.grid.point(comp[0]),
                        to: family.grid.point(*comp.last().expect("nonempty component")),
                        points: comp.len(),
                        rank,
                    })
                    .collect();
                let fold = |f: fn(&LocalForms) -> f64| ch.local.values().map(f).fold(0.0, f64::max);
                ChartSummary {
                    lambda: ch.bundle.lambda,
                    components,
                    min_alignment: ch.bundle.min_alignment,
                    clifford_invariance: ch.bundle.clifford_invariance,
                    connection_metric_residual: ch.connection.metric_residual,
                    connection_clifford_residual: ch.connection.clifford_residual,
                    satisfies_residual: fold(|l| l.satisfies_residual),
                    limit_chern: fold(|l| l.limit_chern),
                    quad_error: fold(|l| l.quad_error),
                }
            })
            .collect()
    }
}

fn jet_points(points: &[usize], stride: usize) -> Vec<usize> {
    points.iter().copied().step_by(stride.max(1)).collect()
}

fn band_transgressions(
    family: &FamilySample,
    lambda: f64,
    mu: f64,
    points: &[usize],
    tol: f64,
) -> Result<Vec<BandTransgression>> {
    points.par_iter().map(|&i| eta::band_eta(family, i, lambda, mu, tol)).collect()
}

/// Cover, cutoff bundles, connections, gluing, eta forms and Čech checks.
pub fn assemble_index(family: &FamilySample, lambdas: &[f64], opts: IndexOptions) -> Result<DifferentialCocycle> {
    let scan = spectral_scan(family).map_err(|e| e.at("scan"))?;
    let cover = cutoff::build_cover(family, &scan, lambdas).map_err(|e| e.at("cover"))?;
    let mut charts = Vec::new();
    for ch in &cover.charts {
        let bundle = cutoff::cutoff_bundle(family, &scan, ch).map_err(|e| e.at("cutoff"))?;
        let connection = cutoff::projected_connection(family, &bundle);
        let pts = jet_points(&ch.points, opts.jet_stride);
        let local: BTreeMap<usize, LocalForms> = pts
            .par_iter()
            .map(|&i| eta::eta_form(family, i, ch.lambda, opts.eta_tol).map(|l| (i, l)))
            .collect::<Result<_>>()
            .map_err(|e| e.at("eta"))?;
        charts.push(ChartRecord { bundle, connection, local });
    }
    let mut glue = Vec::new();
    let mut bands = Vec::new();
    let mut cech = CechReport::default();
    for ch in &charts {
        for l in ch.local.values() {
            cech.closed = cech.closed.max(l.chern.d().max_abs()).max(l.chern_cutoff.d().max_abs());
            cech.global = cech.global.max(l.satisfies_residual);
        }
    }
    for i in 0..charts.len() {
        for j in i + 1..charts.len() {
            let (lo, hi) = (&charts[i], &charts[j]);
            let g = gluing::gluing(family, &scan, &lo.bundle, &hi.bundle).map_err(|e| e.at("gluing"))?;
            for (idx, a) in &lo.local {
                if let Some(b) = hi.local.get(idx) {
                    let lhs = &b.chern_cutoff - &a.chern_cutoff;
                    let rhs = (&a.eta - &b.eta).d();
                    cech.overlap = cech.overlap.max((&lhs - &rhs).max_abs());
                }
            }
            if j == i + 1 {
                let pts: Vec<usize> = lo.local.keys().copied().filter(|k| hi.local.contains_key(k)).collect();
                let bt = band_transgressions(family, lo.bundle.lambda, hi.bundle.lambda, &pts, opts.eta_tol)
                    .map_err(|e| e.at("band"))?;
                cech.band = bt.iter().map(|b| b.residual).fold(cech.band, f64::max);
                bands.push((lo.bundle.lambda, hi.bundle.lambda, bt));
            }
            glue.push(g);
        }
    }
    let find = |a: f64, b: f64| glue.iter().find(|g| g.lambda == a && g.mu == b);
    let ls = cover.lambdas();
    for w in ls.windows(3) {
        if let (Some(a), Some(b), Some(c)) = (find(w[0], w[1]), find(w[1], w[2]), find(w[0], w[2])) {
            cech.triple = cech.triple.max(gluing::triple_residual(a, b, c)?);
        }
    }
    Ok(DifferentialCocycle { n: family.clifford_degree(), cover, charts, gluing: glue, bands, cech })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub points_checked: usize,
    pub class_mismatches: Vec<usize>,
    pub band_extension: f64,
    pub coboundary: f64,
}

impl RefinementReport {
    pub fn classes_agree(&self) -> bool {
        self.class_mismatches.is_empty()
    }
}

fn same_class(a: &AbsClass, b: &AbsClass) -> bool {
    a.group == b.group && a.value == b.value && a.degree == b.degree
}

/// Compares pointwise classes of all cutoff fibers over `Λ′ ⊇ Λ` and the
/// band transgressions relating the coarse and fine cocycles.
pub fn refinement_check(
    family: &FamilySample,
    coarse: &[f64],
    fine: &[f64],
    opts: IndexOptions,
) -> Result<RefinementReport> {
    if coarse.iter().any(|l| !fine.contains(l)) {
        return Err(Error::InvalidParameter("Λ′ must refine Λ".into()));
    }
    let scan = spectral_scan(family)?;
    cutoff::build_cover(family, &scan, coarse)?;
    let cover = cutoff::build_cover(family, &scan, fine)?;
    let bundles: Vec<CutoffBundle> =
        cover.charts.iter().map(|ch| cutoff::cutoff_bundle(family, &scan, ch)).collect::<Result<_>>()?;
    let mut class_mismatches = Vec::new();
    for idx in 0..scan.len() {
        let mut first: Option<AbsClass> = None;
        for b in bundles.iter().filter(|b| b.frames.contains_key(&idx)) {
            let cl = b.fiber_class(family, idx)?;
            match &first {
                None => first = Some(cl),
                Some(f) if !same_class(f, &cl) => {
                    class_mismatches.push(idx);
                    break;
                }
                _ => {}
            }
        }
    }
    let mut band_extension: f64 = 0.0;
    let mut coboundary: f64 = 0.0;
    for i in 0..bundles.len() {
        for j in i + 1..bundles.len() {
            let (lo, hi) = (&bundles[i], &bundles[j]);
            let mixed = coarse.contains(&lo.lambda) != coarse.contains(&hi.lambda);
            if !mixed && !coarse.contains(&lo.lambda) {
                continue;
            }
            let g = gluing::gluing(family, &scan, lo, hi)?;
            band_extension = band_extension.max(g.report.max());
            let pts = jet_points(&g.points, opts.jet_stride);
            for b in band_transgressions(family, lo.lambda, hi.lambda, &pts, opts.eta_tol)? {
                coboundary = coboundary.max(b.residual);
            }
        }
    }
    Ok(RefinementReport {
        coarse: coarse.to_vec(),
        fine: fine.to_vec(),
        points_checked: scan.len(),
        class_mismatches,
        band_extension,
        coboundary,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RgReport {
    pub mu: f64,
    pub lambda: f64,
    /// Threshold forced by cutting off `spec(𝔸^[0]²)`: `λ/μ²`.
    pub forced_threshold: f64,
    pub span_distance: f64,
    pub connection_difference: f64,
    pub points_compared: usize,
    /// The linear threshold `μλ`, recorded for comparison.
    pub linear_threshold: f64,
    pub linear_span_distance: f64,
}

fn projector_at(family: &FamilySample, spec: &PointSpectrum, lambda: f64) -> CMat {
    let (ev, od) = spec.eig.select(|v| v < lambda);
    let g = family.bundle().metric();
    let n = family.dim();
    let mut pr = CMat::zeros(n, n);
    for j in ev.into_iter().chain(od) {
        let v = spec.eig.vectors.column(j).into_owned();
        pr += &v * (v.adjoint() * g);
    }
    pr
}

/// `P ∂_i P + P ω_i P` from grid differences of projectors, or `None` at
/// isolated points.
fn projected_operator(family: &FamilySample, projs: &BTreeMap<usize, CMat>, idx: usize) -> Vec<CMat> {
    let grid = &family.grid;
    let omega = family.omega_at(idx);
    let p = &projs[&idx];
    (0..grid.dims())
        .map(|d| {
            let h = grid.spacing(d);
            let f = grid.step(idx, d, 1).filter(|j| projs.contains_key(j));
            let b = grid.step(idx, d, -1).filter(|j| projs.contains_key(j));
            let dp = match (b, f) {
                (Some(b), Some(f)) => (&projs[&f] - &projs[&b]) * c(0.5 / h),
                (None, Some(f)) => (&projs[&f] - p) * c(1.0 / h),
                (Some(b), None) => (p - &projs[&b]) * c(1.0 / h),
                (None, None) => CMat::zeros(p.nrows(), p.ncols()),
            };
            p * dp + p * &omega[d] * p
        })
        .collect()
}

fn projector_distance(family: &FamilySample, a: &CMat, b: &CMat) -> f64 {
    let g = family.bundle().metric();
    let s = linalg::herm_fn(g, f64::sqrt);
    let sinv = linalg::herm_fn(g, |v| v.powf(-0.5));
    linalg::singular_values(&(&s * (a - b) * &sinv)).first().copied().unwrap_or(0.0)
}

/// Compares the `λ`-cutoff of `RG^μ` with the `λ/μ²`-cutoff of the family.
pub fn rg_cutoff_check(family: &FamilySample, mu: f64, lambda: f64) -> Result<RgReport> {
    let rescaled = family.rg(mu)?;
    let scan = spectral_scan(family)?;
    let scan_rg = spectral_scan(&rescaled)?;
    let forced = lambda / (mu * mu);
    let linear = mu * lambda;
    let ok = |s: &PointSpectrum, l: f64| s.values.iter().all(|&v| (v - l).abs() >= family.margin);
    let points: Vec<usize> = (0..scan.len()).filter(|&i| ok(&scan_rg[i], lambda) && ok(&scan[i], forced)).collect();
    let mut orig = BTreeMap::new();
    let mut resc = BTreeMap::new();
    let mut span_distance: f64 = 0.0;
    let mut linear_span_distance: f64 = 0.0;
    for &i in &points {
        let a = projector_at(&rescaled, &scan_rg[i], lambda);
        let b = projector_at(family, &scan[i], forced);
        span_distance = span_distance.max(projector_distance(family, &a, &b));
        let lin = projector_at(family, &scan[i], linear);
        linear_span_distance = linear_span_distance.max(projector_distance(family, &a, &lin));
        resc.insert(i, a);
        orig.insert(i, b);
    }
    let mut connection_difference: f64 = 0.0;
    for &i in &points {
        let x = projected_operator(&rescaled, &resc, i);
        let y = projected_operator(family, &orig, i);
        for (u, v) in x.iter().zip(&y) {
            connection_difference = connection_difference.max(max_abs(&(u - v)));
        }
    }
    Ok(RgReport {
        mu,
        lambda,
        forced_threshold: forced,
        span_distance,
        connection_difference,
        points_compared: points.len(),
        linear_threshold: linear,
        linear_span_distance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowsReport {
    pub flows_to_zero: bool,
    pub min_eigenvalue: f64,
    /// `μ` for which the `λ = 1` cutoff of `RG^μ` is empty on the subset.
    pub witness_mu: Option<f64>,
    pub witness_confirmed: bool,
}

/// Whether `𝔸^[0]` is invertible (beyond the margin) on the given points.
pub fn flows_to_zero(family: &FamilySample, subset: &[usize]) -> Result<FlowsReport> {
    let scan = spectral_scan(family)?;
    if let Some(&bad) = subset.iter().find(|&&i| i >= scan.len()) {
        return Err(Error::InvalidParameter(format!("grid point {bad} out of range")));
    }
    let min_eigenvalue =
        subset.iter().flat_map(|&i| scan[i].values.first().copied()).fold(f64::INFINITY, f64::min);
    let flows = min_eigenvalue > family.margin;
    let (witness_mu, witness_confirmed) = if flows && min_eigenvalue.is_finite() {
        let lambda = 1.0;
        let mu = (2.0 * lambda / min_eigenvalue).sqrt();
        let rs = spectral_scan(&family.rg(mu)?)?;
        let empty = subset.iter().all(|&i| rs[i].values.iter().all(|&v| v >= lambda + family.margin));
        (Some(mu), empty)
    } else {
        (None, !flows)
    };
    Ok(FlowsReport { flows_to_zero: flows, min_eigenvalue, witness_mu, witness_confirmed })
}
