//! Cutoff cover `U_λ`, cutoff bundles `ℋ^{<λ}` with aligned frames, and the
//! projected connection `p ∘ 𝔸^[1] ∘ p`.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{FamilySample, PointSpectrum};
use crate::clifford::{AbsClass, GradedCliffordModule};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, CMat};

/// Alignment threshold on singular values of neighbor frame overlaps.
pub const ALIGNMENT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct Chart {
    pub lambda: f64,
    pub points: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

impl Chart {
    pub fn contains(&self, idx: usize) -> bool {
        self.points.binary_search(&idx).is_ok()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffCover {
    pub margin: f64,
    pub charts: Vec<Chart>,
}

impl CutoffCover {
    pub fn lambdas(&self) -> Vec<f64> {
        self.charts.iter().map(|c| c.lambda).collect()
    }

    pub fn chart(&self, lambda: f64) -> Option<&Chart> {
        self.charts.iter().find(|c| c.lambda == lambda)
    }
}

/// `U_λ = {x : dist(λ, spec 𝔸^[0](x)²) ≥ margin}`.
pub fn chart(family: &FamilySample, scan: &[PointSpectrum], lambda: f64) -> Chart {
    let points: Vec<usize> = (0..scan.len())
        .filter(|&i| scan[i].values.iter().all(|&v| (v - lambda).abs() >= family.margin))
        .collect();
    let components = family.grid.components(&points);
    Chart { lambda, points, components }
}

pub fn build_cover(family: &FamilySample, scan: &[PointSpectrum], lambdas: &[f64]) -> Result<CutoffCover> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("cutoff levels must be positive and strictly increasing".into()));
    }
    let charts: Vec<Chart> = lambdas.iter().map(|&l| chart(family, scan, l)).collect();
    let uncovered: Vec<usize> = (0..scan.len()).filter(|&i| !charts.iter().any(|c| c.contains(i))).collect();
    if !uncovered.is_empty() {
        let shown: Vec<String> = uncovered.iter().take(8).map(|i| format!("{:?}", family.grid.point(*i))).collect();
        return Err(Error::Cover(format!(
            "{} grid point(s) not covered by λ ∈ {lambdas:?}, e.g. {}",
            uncovered.len(),
            shown.join(", ")
        )));
    }
    Ok(CutoffCover { margin: family.margin, charts })
}

/// Homogeneous frame of a cutoff fiber: even columns, then odd, orthonormal
/// for the bundle metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub even: CMat,
    pub odd: CMat,
}

impl Frame {
    pub fn rank(&self) -> (usize, usize) {
        (self.even.ncols(), self.odd.ncols())
    }

    pub fn matrix(&self) -> CMat {
        let n = self.even.nrows();
        let mut m = CMat::zeros(n, self.even.ncols() + self.odd.ncols());
        m.view_mut((0, 0), (n, self.even.ncols())).copy_from(&self.even);
        m.view_mut((0, self.even.ncols()), (n, self.odd.ncols())).copy_from(&self.odd);
        m
    }

    /// `U U† G`.
    pub fn projector(&self, g: &CMat) -> CMat {
        let u = self.matrix();
        &u * u.adjoint() * g
    }
}

#[derive(Clone, Debug)]
pub struct CutoffBundle {
    pub lambda: f64,
    pub frames: BTreeMap<usize, Frame>,
    /// `(even, odd)` rank per connected component of the chart.
    pub ranks: Vec<(usize, usize)>,
    pub components: Vec<Vec<usize>>,
    pub min_alignment: f64,
    pub clifford_invariance: f64,
}

impl CutoffBundle {
    pub fn rank_at(&self, idx: usize) -> Option<(usize, usize)> {
        self.frames.get(&idx).map(Frame::rank)
    }

    /// Clifford generators in frame coordinates, `U† G g U`.
    pub fn generators_at(&self, family: &FamilySample, idx: usize) -> Vec<CMat> {
        let u = self.frames[&idx].matrix();
        let g = family.bundle().metric();
        family.bundle().module.generators.iter().map(|c| u.adjoint() * g * c * &u).collect()
    }

    /// The fiber at `idx` as a graded Clifford module.
    pub fn fiber_module(&self, family: &FamilySample, idx: usize) -> Result<GradedCliffordModule> {
        let (r0, r1) = self.frames[&idx].rank();
        let algebra = family.bundle().module.algebra;
        let gens = self.generators_at(family, idx);
        GradedCliffordModule::new(algebra, r0, r1, gens)
    }

    pub fn fiber_class(&self, family: &FamilySample, idx: usize) -> Result<AbsClass> {
        self.fiber_module(family, idx)?.abs_class()
    }
}

fn raw_frame(family: &FamilySample, spec: &PointSpectrum, lambda: f64) -> Result<Frame> {
    let (even_idx, odd_idx) = spec.eig.select(|v| v < lambda);
    let v = &spec.eig.vectors;
    let pick = |cols: &[usize]| CMat::from_columns(&cols.iter().map(|&j| v.column(j).into_owned()).collect::<Vec<_>>());
    let n = family.dim();
    let (p, q) = (family.bundle().p(), family.bundle().q());
    let g = family.bundle().metric();
    let block = |cols: &[usize], off: usize, len: usize| -> Result<CMat> {
        if cols.is_empty() {
            return Ok(CMat::zeros(n, 0));
        }
        if cols.len() == len {
            // Full block: use the coordinate basis, orthonormalized.
            let mut e = CMat::zeros(n, len);
            for k in 0..len {
                e[(off + k, k)] = linalg::ONE;
            }
            return linalg::orthonormalize(&e, g);
        }
        Ok(pick(cols))
    };
    Ok(Frame { even: block(&even_idx, 0, p)?, odd: block(&odd_idx, p, q)? })
}

/// Rotates `u` (columns orthonormal for `g`) to best match `prev`; returns the
/// smallest singular value of the overlap.
fn align(u: &CMat, prev: &CMat, g: &CMat) -> (CMat, f64) {
    if u.ncols() == 0 {
        return (u.clone(), 1.0);
    }
    let m = u.adjoint() * g * prev;
    let smin = linalg::singular_values(&m).last().copied().unwrap_or(0.0);
    (u * linalg::polar_unitary(&m), smin)
}

pub fn cutoff_bundle(family: &FamilySample, scan: &[PointSpectrum], chart: &Chart) -> Result<CutoffBundle> {
    let lambda = chart.lambda;
    let g = family.bundle().metric();
    let mut frames = BTreeMap::new();
    let mut ranks = Vec::new();
    let mut min_alignment: f64 = 1.0;
    for comp in &chart.components {
        let start = comp[0];
        let first = raw_frame(family, &scan[start], lambda)?;
        let rank = first.rank();
        frames.insert(start, first);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for u in family.grid.neighbors(v) {
                if !chart.contains(u) || frames.contains_key(&u) {
                    continue;
                }
                let raw = raw_frame(family, &scan[u], lambda)?;
                if raw.rank() != rank {
                    return Err(Error::NoSmoothCutoff {
                        lambda,
                        reason: format!(
                            "rank jumps from {rank:?} to {:?} between {:?} and {:?}",
                            raw.rank(),
                            family.grid.point(v),
                            family.grid.point(u)
                        ),
                    });
                }
                let prev = &frames[&v];
                let (even, s0) = align(&raw.even, &prev.even, g);
                let (odd, s1) = align(&raw.odd, &prev.odd, g);
                let s = s0.min(s1);
                min_alignment = min_alignment.min(s);
                if s < ALIGNMENT_THRESHOLD {
                    return Err(Error::NoSmoothCutoff {
                        lambda,
                        reason: format!(
                            "frame overlap {s:.3} below {ALIGNMENT_THRESHOLD} between {:?} and {:?}",
                            family.grid.point(v),
                            family.grid.point(u)
                        ),
                    });
                }
                frames.insert(u, Frame { even, odd });
                queue.push_back(u);
            }
        }
        ranks.push(rank);
    }
    let n = family.dim();
    let mut clifford_invariance: f64 = 0.0;
    for f in frames.values() {
        let pr = f.projector(g);
        let comp = CMat::identity(n, n) - &pr;
        for gen in &family.bundle().module.generators {
            clifford_invariance = clifford_invariance.max(max_abs(&(&comp * gen * &pr)));
        }
    }
    Ok(CutoffBundle { lambda, frames, ranks, components: chart.components.clone(), min_alignment, clifford_invariance })
}

/// `Θ_i = U†G(∂_i U + ω_i U)` per grid point, with grid differences.
#[derive(Clone, Debug)]
pub struct ProjectedConnection {
    pub lambda: f64,
    pub coefficients: BTreeMap<usize, Vec<CMat>>,
    pub metric_residual: f64,
    pub clifford_residual: f64,
}

pub fn projected_connection(family: &FamilySample, bundle: &CutoffBundle) -> ProjectedConnection {
    let g = family.bundle().metric();
    let grid = &family.grid;
    let mut coefficients = BTreeMap::new();
    let mut metric_residual: f64 = 0.0;
    let mut clifford_residual: f64 = 0.0;
    for (&idx, frame) in &bundle.frames {
        let u = frame.matrix();
        let omega = family.omega_at(idx);
        let mut theta = Vec::with_capacity(grid.dims());
        for d in 0..grid.dims() {
            let h = grid.spacing(d);
            let fwd = grid.step(idx, d, 1).filter(|j| bundle.frames.contains_key(j));
            let bwd = grid.step(idx, d, -1).filter(|j| bundle.frames.contains_key(j));
            let du = match (bwd, fwd) {
                (Some(b), Some(f)) => (bundle.frames[&f].matrix() - bundle.frames[&b].matrix()) * linalg::c(0.5 / h),
                (None, Some(f)) => (bundle.frames[&f].matrix() - &u) * linalg::c(1.0 / h),
                (Some(b), None) => (&u - bundle.frames[&b].matrix()) * linalg::c(1.0 / h),
                (None, None) => CMat::zeros(u.nrows(), u.ncols()),
            };
            let t = u.adjoint() * g * (du + &omega[d] * &u);
            metric_residual = metric_residual.max(max_abs(&(&t + t.adjoint())));
            theta.push(t);
        }
        for c in bundle.generators_at(family, idx) {
            for t in &theta {
                clifford_residual = clifford_residual.max(max_abs(&(t * &c - &c * t)));
            }
        }
        coefficients.insert(idx, theta);
    }
    ProjectedConnection { lambda: bundle.lambda, coefficients, metric_residual, clifford_residual }
}
