//! Families of superconnections sampled over a grid, and the index pipeline:
//! spectral scan, cutoff cover, cutoff bundles with projected connections,
//! gluing data, eta forms and the differential cocycle.

pub mod cocycle;
pub mod cutoff;
pub mod eta;
pub mod gluing;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::BodyEigen;
use crate::linalg::CMat;
use crate::opform::OpForm;
use crate::ring::{Monomial, RingElement, RingSignature};
use crate::superconn::{RescaleConvention, SuperBundle, Superconnection};

pub use cocycle::{assemble_index, flows_to_zero, refinement_check, rg_cutoff_check, DifferentialCocycle};
pub use cutoff::{build_cover, cutoff_bundle, projected_connection, CutoffBundle, CutoffCover};
pub use eta::{eta_form, LocalForms};
pub use gluing::{gluing, GluingData};

/// Uniform grid on a box, or a discrete torus when `periodic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub extents: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub periodic: bool,
}

impl Grid {
    pub fn new(extents: Vec<(f64, f64)>, resolution: Vec<usize>, periodic: bool) -> Result<Self> {
        if extents.len() != resolution.len() {
            return Err(Error::InvalidParameter("grid extents and resolution differ in length".into()));
        }
        if resolution.iter().any(|&r| r == 0) || extents.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidParameter("grid needs positive resolution and nonempty extents".into()));
        }
        Ok(Grid { extents, resolution, periodic })
    }

    /// Zero-dimensional base.
    pub fn single_point() -> Self {
        Grid { extents: Vec::new(), resolution: Vec::new(), periodic: false }
    }

    pub fn dims(&self) -> usize {
        self.resolution.len()
    }

    pub fn num_points(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims()];
        for d in (0..self.dims()).rev() {
            out[d] = idx % self.resolution[d];
            idx /= self.resolution[d];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.resolution).fold(0, |acc, (&j, &r)| acc * r + j)
    }

    pub fn spacing(&self, d: usize) -> f64 {
        let (a, b) = self.extents[d];
        let r = self.resolution[d];
        if self.periodic {
            (b - a) / r as f64
        } else if r > 1 {
            (b - a) / (r - 1) as f64
        } else {
            0.0
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(d, &j)| self.extents[d].0 + self.spacing(d) * j as f64)
            .collect()
    }

    /// Neighbor along dimension `d` in direction `dir = ±1`.
    pub fn step(&self, idx: usize, d: usize, dir: i64) -> Option<usize> {
        let mut m = self.multi_index(idx);
        let r = self.resolution[d] as i64;
        let j = m[d] as i64 + dir;
        let j = if self.periodic {
            j.rem_euclid(r)
        } else if (0..r).contains(&j) {
            j
        } else {
            return None;
        };
        if j as usize == m[d] {
            return None;
        }
        m[d] = j as usize;
        Some(self.flat_index(&m))
    }

    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let mut v = Vec::with_capacity(2 * self.dims());
        for d in 0..self.dims() {
            for dir in [-1, 1] {
                if let Some(j) = self.step(idx, d, dir) {
                    if !v.contains(&j) {
                        v.push(j);
                    }
                }
            }
        }
        v
    }

    /// Connected components of a point subset, each sorted.
    pub fn components(&self, points: &[usize]) -> Vec<Vec<usize>> {
        let inside: std::collections::BTreeSet<usize> = points.iter().copied().collect();
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for &start in points {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in self.neighbors(v) {
                    if inside.contains(&u) && seen.insert(u) {
                        comp.push(u);
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort();
        out
    }
}

/// A superconnection with polynomial coefficients on `ℝ^m`, sampled on a
/// grid. Local computations use jets of order `jet_order` at grid points.
#[derive(Clone, Debug)]
pub struct FamilySample {
    pub name: String,
    pub grid: Grid,
    pub global: Superconnection,
    pub jet_order: usize,
    pub margin: f64,
}

impl FamilySample {
    pub fn new(name: &str, grid: Grid, global: Superconnection, jet_order: usize, margin: f64) -> Result<Self> {
        if grid.dims() != global.signature().m {
            return Err(Error::InvalidParameter(format!(
                "grid has {} dimensions, superconnection lives on ℝ^{}",
                grid.dims(),
                global.signature().m
            )));
        }
        if !(margin >= 0.0) {
            return Err(Error::InvalidParameter("margin must be nonnegative".into()));
        }
        if !global.signature().odd_params.is_empty() {
            return Err(Error::InvalidParameter("family coefficients may not involve odd parameters".into()));
        }
        Ok(FamilySample { name: name.to_string(), grid, global, jet_order, margin })
    }

    pub fn bundle(&self) -> &SuperBundle {
        self.global.bundle()
    }

    pub fn dim(&self) -> usize {
        self.bundle().dim()
    }

    pub fn clifford_degree(&self) -> i32 {
        self.bundle().module.algebra.degree()
    }

    pub fn a0_at(&self, idx: usize) -> CMat {
        self.global.component(0).eval_at(&self.grid.point(idx)).body()
    }

    /// `ω_i(x)` for each base direction.
    pub fn omega_at(&self, idx: usize) -> Vec<CMat> {
        let w = self.global.component(1).eval_at(&self.grid.point(idx));
        let sig = self.global.signature();
        (0..sig.m)
            .map(|i| {
                let mut mono = Monomial::one(sig.m);
                mono.forms = 1 << i;
                w.get(&mono)
            })
            .collect()
    }

    pub fn jet_signature(&self) -> Result<Arc<RingSignature>> {
        RingSignature::new(self.grid.dims(), self.jet_order, &[])
    }

    /// Taylor jet of the superconnection at a base point.
    pub fn jet_at(&self, point: &[f64]) -> Result<Superconnection> {
        let sig = self.jet_signature()?;
        let x = translate_opform(&self.global.x(), point, &sig);
        Superconnection::from_x(self.bundle().over(&sig), &x)
    }

    /// RG action `𝔸^[k] ↦ μ^{1−k} 𝔸^[k]`.
    pub fn rg(&self, mu: f64) -> Result<Self> {
        Ok(FamilySample { global: self.global.rescale(mu, RescaleConvention::Rg)?, ..self.clone() })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Re-expands polynomial coefficients around `x0`: `p(x) ↦ p(x0 + y)`, then
/// truncates to the target signature.
pub fn translate(r: &RingElement, x0: &[f64], target: &Arc<RingSignature>) -> RingElement {
    let mut out = RingElement::zero(target);
    for (k, v) in r.terms() {
        let a: Vec<usize> = k.exps.iter().map(|&e| e as usize).collect();
        let mut b = vec![0usize; a.len()];
        loop {
            let w: f64 = (0..a.len()).map(|i| binomial(a[i], b[i]) * x0[i].powi((a[i] - b[i]) as i32)).product();
            let mono = Monomial { exps: b.iter().map(|&e| e as u8).collect(), forms: k.forms, odds: k.odds };
            out.add_term(mono, v * w);
            // Odometer over 0 ≤ b ≤ a.
            let mut d = 0;
            while d < a.len() && b[d] == a[d] {
                b[d] = 0;
                d += 1;
            }
            if d == a.len() {
                break;
            }
            b[d] += 1;
        }
    }
    out
}

pub fn translate_opform(x: &OpForm, x0: &[f64], target: &Arc<RingSignature>) -> OpForm {
    let mut out = OpForm::zero(target, x.p(), x.q());
    for (k, m) in x.terms() {
        let r = RingElement::from_terms(x.signature(), [(k.clone(), crate::linalg::ONE)]);
        for (kk, v) in translate(&r, x0, target).terms() {
            out.add_term(kk.clone(), m * *v);
        }
    }
    out
}

/// Eigen-data of `𝔸^[0](x)²` at one grid point.
#[derive(Clone, Debug)]
pub struct PointSpectrum {
    /// All eigenvalues, ascending, clamped at 0.
    pub values: Vec<f64>,
    pub eig: BodyEigen,
}

pub fn spectral_scan(family: &FamilySample) -> Result<Vec<PointSpectrum>> {
    let b = family.bundle();
    let metric = b.metric_opt();
    (0..family.grid.num_points())
        .into_par_iter()
        .map(|idx| {
            let a0 = family.a0_at(idx);
            let sq = &a0 * &a0;
            let mut eig = BodyEigen::new(&sq, b.p(), b.q(), metric)?;
            for v in &mut eig.values {
                if *v < -1e-10 {
                    return Err(Error::Eigen(format!("negative eigenvalue {v} of the squared degree-0 part")));
                }
                *v = v.max(0.0);
            }
            let mut values = eig.values.clone();
            values.sort_by(f64::total_cmp);
            Ok(PointSpectrum { values, eig })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_components() {
        let g = Grid::new(vec![(-1.0, 1.0)], vec![5], false).unwrap();
        assert_eq!(g.point(4), vec![1.0]);
        assert_eq!(g.components(&[0, 1, 3, 4]), vec![vec![0, 1], vec![3, 4]]);
        let t = Grid::new(vec![(0.0, 1.0)], vec![5], true).unwrap();
        assert_eq!(t.components(&[0, 1, 3, 4]), vec![vec![0, 1, 3, 4]]);
        let g2 = Grid::new(vec![(0.0, 1.0), (0.0, 1.0)], vec![3, 4], false).unwrap();
        assert_eq!(g2.num_points(), 12);
        assert_eq!(g2.neighbors(0), vec![4, 1]);
    }

    #[test]
    fn translation_is_taylor() {
        let s = RingSignature::new(2, 4, &[]).unwrap();
        let x = RingElement::x(&s, 0);
        let y = RingElement::x(&s, 1);
        let p = &(&x * &x) * &y;
        let t = translate(&p, &[2.0, -1.0], &s);
        // (2 + x)²(−1 + y) = −4 − 4x − x² + 4y + 4xy + x²y
        let one = RingElement::one(&s);
        let expect = &(&(&one.scale_re(-4.0) - &x.scale_re(4.0)) - &(&x * &x))
            + &(&(&y.scale_re(4.0) + &(&x * &y).scale_re(4.0)) + &(&(&x * &x) * &y));
        assert!(t.approx_eq(&expect, 1e-14));
    }
}
