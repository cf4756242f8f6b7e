//! Example superconnections and families: a seeded random corpus of
//! self-adjoint Clifford-linear superconnections, truncated supercharges, and
//! one-parameter families with known cutoff structure.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::clifford::{CliffordAlgebra, GradedCliffordModule};
use crate::error::{Error, Result};
use crate::family::{FamilySample, Grid};
use crate::linalg::{self, c, CMat, CVec, I};
use crate::opform::OpForm;
use crate::ring::{Monomial, RingElement, RingSignature, ScalarField};
use crate::superconn::{SuperBundle, Superconnection};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomOptions {
    pub max_rank: usize,
    pub max_m: usize,
    pub max_degree: usize,
    /// Real matrices and a real Clifford module with real structure `J = 1`.
    pub real: bool,
    /// Overall size of the random coefficients.
    pub scale: f64,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions { max_rank: 8, max_m: 2, max_degree: 3, real: false, scale: 0.6 }
    }
}

/// Exponent vectors of total degree at most `d` in `m` variables.
fn poly_monomials(m: usize, d: usize) -> Vec<SmallVec<[u8; 4]>> {
    let mut out = vec![SmallVec::from_elem(0u8, m)];
    for var in 0..m {
        let mut next = Vec::new();
        for e in &out {
            let used: usize = e.iter().map(|&v| v as usize).sum();
            for k in 0..=(d - used) {
                let mut f = e.clone();
                f[var] = k as u8;
                next.push(f);
            }
        }
        out = next;
    }
    out.sort();
    out
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, real: bool) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        let re = rng.gen_range(-1.0..1.0);
        let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
        Complex64::new(re, im)
    })
}

/// Candidate modules of dimension at most `max_rank`.
fn candidate_modules(max_rank: usize, real: bool) -> Vec<GradedCliffordModule> {
    let field = if real { ScalarField::Real } else { ScalarField::Complex };
    let mut out = Vec::new();
    for p in 1..max_rank {
        for q in 1..=(max_rank - p) {
            if real {
                out.push(GradedCliffordModule::regular_tensor(CliffordAlgebra::mixed(0, 0, field), p, q));
            } else {
                out.push(GradedCliffordModule::trivial(p, q));
            }
        }
    }
    for n in [-3i32, -2, -1, 1, 2, 3] {
        let alg = CliffordAlgebra::new(n, field);
        let size = alg.basis_size();
        for a in 0..=max_rank / size {
            for b in 0..=(max_rank / size - a) {
                if a + b > 0 {
                    out.push(GradedCliffordModule::regular_tensor(alg, a, b));
                }
            }
        }
    }
    out
}

/// Block-diagonal positive matrix `S`, used to twist a module to the metric
/// `S²`.
fn random_metric_root(rng: &mut ChaCha8Rng, p: usize, q: usize) -> CMat {
    let block = |rng: &mut ChaCha8Rng, k: usize| {
        let r = random_matrix(rng, k, false) * c(0.3);
        linalg::herm_fn(&(&r * r.adjoint() + CMat::identity(k, k)), f64::sqrt)
    };
    let (a, b) = (block(rng, p), block(rng, q));
    linalg::block_diag(&[&a, &b])
}

/// Seeded random self-adjoint Clifford-linear superconnection.
pub fn random_superconnection(seed: u64, opts: &RandomOptions) -> Result<Superconnection> {
    if opts.max_rank < 2 || !(opts.scale > 0.0) {
        return Err(Error::InvalidParameter("random superconnections need rank ≥ 2 and positive scale".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mods = candidate_modules(opts.max_rank, opts.real);
    let mut module = mods[rng.gen_range(0..mods.len())].clone();
    let m = rng.gen_range(0..=opts.max_m);
    let degree = rng.gen_range(1..=opts.max_degree.max(1));
    let sig = RingSignature::new(m, degree, &[])?;
    let (p, q, n) = (module.p, module.q, module.dim());
    let twist = (!opts.real && rng.gen_bool(0.3)).then(|| random_metric_root(&mut rng, p, q));

    let mut components: BTreeMap<usize, OpForm> = BTreeMap::new();
    for k in 0..=m.min(degree) {
        let parity = (k + 1) % 2;
        let sign = c(linalg::sign(k));
        let mut part = OpForm::zero(&sig, p, q);
        for forms in (0u32..1 << m).filter(|f| f.count_ones() as usize == k) {
            for exps in poly_monomials(m, degree - k) {
                let pd: usize = exps.iter().map(|&e| e as usize).sum();
                if pd > 0 && rng.gen_bool(0.5) {
                    continue;
                }
                let r = random_matrix(&mut rng, n, opts.real);
                let r = if parity == 0 { linalg::even_part(&r, p) } else { linalg::odd_part(&r, p) };
                let sa = (&r + r.adjoint() * sign) * c(0.5);
                let mat = module.project_clifford_linear(&sa, parity) * c(opts.scale / (1.0 + pd as f64));
                part.add_term(Monomial { exps, forms, odds: 0 }, mat);
            }
        }
        if !part.is_zero() {
            components.insert(k, part);
        }
    }
    if let Some(s) = &twist {
        let sinv = s.clone().try_inverse().ok_or_else(|| Error::Eigen("metric root not invertible".into()))?;
        let conj = |m: &CMat| &sinv * m * s;
        module.generators = module.generators.iter().map(conj).collect();
        module = module.with_metric(s * s)?;
        for part in components.values_mut() {
            *part = part.map(|_, m| conj(m));
        }
    }
    let omega = components.remove(&1).unwrap_or_else(|| OpForm::zero(&sig, p, q));
    Superconnection::new(SuperBundle::new(module, sig)?, omega, components)
}

/// `count` random superconnections seeded from `seed`.
pub fn random_corpus(seed: u64, count: usize, opts: &RandomOptions) -> Result<Vec<Superconnection>> {
    (0..count as u64).map(|i| random_superconnection(seed.wrapping_mul(0x9e37_79b9).wrapping_add(i), opts)).collect()
}

/// Odd self-adjoint operator on a point, with an optional Clifford action.
#[derive(Clone, Debug)]
pub struct Supercharge {
    pub name: String,
    pub matrix: CMat,
    pub p: usize,
    pub q: usize,
    pub module: Option<GradedCliffordModule>,
}

impl Supercharge {
    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// `𝔸 = Q` over the zero-dimensional base.
    pub fn superconnection(&self) -> Result<Superconnection> {
        let sig = RingSignature::new(0, 1, &[])?;
        let module = self.module.clone().unwrap_or_else(|| GradedCliffordModule::trivial(self.p, self.q));
        let a0 = OpForm::from_matrix(&sig, self.p, self.q, self.matrix.clone());
        Superconnection::new(
            SuperBundle::new(module, sig.clone())?,
            OpForm::zero(&sig, self.p, self.q),
            BTreeMap::from([(0, a0)]),
        )
    }
}

/// `Q = [[0, C†], [C, 0]]` on `ℂ^{N|N−1}` with `C e_k = √k e_{k−1}` the
/// lowering operator truncated to `N` modes. `Q²` is `diag(0, 1, …, N−1)`
/// on the even part and `diag(1, …, N−1)` on the odd part.
pub fn susy_oscillator(n: usize) -> Result<Supercharge> {
    if n < 2 {
        return Err(Error::InvalidParameter("susy_oscillator needs N ≥ 2".into()));
    }
    let dim = 2 * n - 1;
    let mut q = CMat::zeros(dim, dim);
    for k in 1..n {
        let v = c((k as f64).sqrt());
        // C maps even mode k to odd mode k−1.
        q[(n + k - 1, k)] = v;
        q[(k, n + k - 1)] = v;
    }
    Ok(Supercharge { name: format!("susy_oscillator({n})"), matrix: q, p: n, q: n - 1, module: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Periodic,
    Antiperiodic,
}

/// Grading of the truncated circle Dirac operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleGrading {
    /// Spinors `ℂ^{1|1} ⊗ ℂ^M` with `Cl_{−1}` acting by `σ_y ⊗ 1`.
    Spinor,
    /// Both zero modes declared even; no Clifford action survives.
    ZeroModeEven,
}

/// Truncated Dirac operator `−i d/dθ` on the circle, `Q = σ_x ⊗ diag(k)` over
/// the modes `|k| ≤ N` (periodic) or `k ∈ ½ + ℤ, |k| < N` (antiperiodic).
pub fn circle_dirac(n: usize, spin: Spin, grading: CircleGrading) -> Result<Supercharge> {
    if n < 1 {
        return Err(Error::InvalidParameter("circle_dirac needs N ≥ 1".into()));
    }
    let modes: Vec<f64> = match spin {
        Spin::Periodic => (-(n as i64)..=n as i64).map(|k| k as f64).collect(),
        Spin::Antiperiodic => (-(n as i64)..n as i64).map(|k| k as f64 + 0.5).collect(),
    };
    let m = modes.len();
    let diag = CMat::from_diagonal(&CVec::from_iterator(m, modes.iter().map(|&k| c(k))));
    let sx = linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let mut sy = CMat::zeros(2, 2);
    sy[(0, 1)] = -I;
    sy[(1, 0)] = I;
    let q = linalg::kron(&sx, &diag);
    let gen = linalg::kron(&sy, &CMat::identity(m, m));
    let name = format!("circle_dirac({n}, {spin:?}, {grading:?})");
    match grading {
        CircleGrading::Spinor => {
            let module = GradedCliffordModule::new(CliffordAlgebra::complex(-1), m, m, vec![gen])?;
            Ok(Supercharge { name, matrix: q, p: m, q: m, module: Some(module) })
        }
        CircleGrading::ZeroModeEven => {
            let zero: Vec<usize> = (0..m).filter(|&k| modes[k] == 0.0).collect();
            // Move odd zero modes to the end of the even block.
            let mut order: Vec<usize> = (0..m).collect();
            order.extend(zero.iter().map(|&k| m + k));
            order.extend((0..m).filter(|k| !zero.contains(k)).map(|k| m + k));
            let perm = linalg::permutation(&order);
            let matrix = &perm * q * perm.transpose();
            let p = m + zero.len();
            Ok(Supercharge { name, matrix, p, q: 2 * m - p, module: None })
        }
    }
}

/// `𝔸 = x σ_x` on `ℂ^{1|1}` over `[−extent, extent]`, with `ω = 0`. The
/// margin is `extent·h` for grid spacing `h`: `x²` moves by at most `2·extent·h`
/// between neighbors, so every level crossing excludes a grid point.
pub fn spectral_flow_family(extent: f64, resolution: usize) -> Result<FamilySample> {
    if !(extent > 0.0) {
        return Err(Error::InvalidParameter("extent must be positive".into()));
    }
    let sig = RingSignature::new(1, 2, &[])?;
    let a0 = OpForm::ring_times(&RingElement::x(&sig, 0), &linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]), 1, 1);
    let global = Superconnection::new(SuperBundle::trivial(1, 1, &sig), OpForm::zero(&sig, 1, 1), BTreeMap::from([(0, a0)]))?;
    let grid = Grid::new(vec![(-extent, extent)], vec![resolution], false)?;
    let margin = extent * grid.spacing(0);
    FamilySample::new("spectral_flow", grid, global, 2, margin)
}

/// Constant `𝔸^[0] = [[0, D], [D, 0]]` with `D = diag(1, 2)` on `ℂ^{2|2}`, so
/// `spec(𝔸^[0]²) = {1, 4}` everywhere, and a flat connection varying in `x`.
pub fn constant_spectrum_family(extent: f64, resolution: usize) -> Result<FamilySample> {
    if !(extent > 0.0) {
        return Err(Error::InvalidParameter("extent must be positive".into()));
    }
    let sig = RingSignature::new(1, 2, &[])?;
    let a0 = OpForm::from_matrix(
        &sig,
        2,
        2,
        linalg::from_real(4, 4, &[0., 0., 1., 0., 0., 0., 0., 2., 1., 0., 0., 0., 0., 2., 0., 0.]),
    );
    let w = CMat::from_diagonal(&CVec::from_vec(vec![c(0.3) * I, c(-0.2) * I, c(0.1) * I, c(0.4) * I]));
    let omega = OpForm::ring_times(&(&RingElement::x(&sig, 0) * &RingElement::dx(&sig, 0)), &w, 2, 2);
    let global = Superconnection::new(SuperBundle::trivial(2, 2, &sig), omega, BTreeMap::from([(0, a0)]))?;
    let grid = Grid::new(vec![(-extent, extent)], vec![resolution], false)?;
    FamilySample::new("constant_spectrum", grid, global, 2, 1e-3)
}

/// Cutoff levels used with the named families.
pub fn default_lambdas(family: &str) -> Option<Vec<f64>> {
    match family {
        "spectral_flow" => Some(vec![0.25, 0.5625]),
        "constant_spectrum" => Some(vec![2.0]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid() {
        let opts = RandomOptions::default();
        for a in random_corpus(7, 40, &opts).unwrap() {
            assert!(a.bundle().dim() <= 8);
            assert!(a.self_adjoint_report().passed, "{:?}", a.self_adjoint_report());
            assert!(a.clifford_linear_residual() < 1e-12);
        }
        let real = RandomOptions { real: true, ..opts };
        for a in random_corpus(7, 20, &real).unwrap() {
            let j = a.bundle().module.real_structure.clone().unwrap();
            assert!(crate::superconn::reality_check(&a, &j).unwrap().passed);
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let opts = RandomOptions::default();
        let a = random_superconnection(42, &opts).unwrap();
        let b = random_superconnection(42, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn supercharges_are_odd_self_adjoint() {
        let qs = [
            susy_oscillator(5).unwrap(),
            circle_dirac(3, Spin::Periodic, CircleGrading::Spinor).unwrap(),
            circle_dirac(3, Spin::Periodic, CircleGrading::ZeroModeEven).unwrap(),
            circle_dirac(3, Spin::Antiperiodic, CircleGrading::Spinor).unwrap(),
        ];
        for s in &qs {
            assert!(linalg::max_abs(&(&s.matrix - s.matrix.adjoint())) == 0.0);
            assert!(linalg::max_abs(&linalg::even_part(&s.matrix, s.p)) == 0.0);
            s.superconnection().unwrap();
        }
    }
}
