//! Slow reference implementations used to check the fast paths. None of them
//! calls the sparse sign engine, the blade tables or the divided-difference
//! calculus.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::clifford::{CliffordAlgebra, CliffordElement, GradedCliffordModule};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::opform::OpForm;
use crate::ring::{Monomial, RingElement, RingSignature};

pub const MAX_RING_DIM: usize = 4096;
pub const MAX_RANK: usize = 8;
pub const MAX_BIG_DIM: usize = 2048;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sorts a word of odd generators by adjacent swaps. Returns `None` if a
/// generator repeats, otherwise the sorted word and the swap parity.
fn sort_word(mut w: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut odd = false;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] == w[j + 1] {
                return None;
            }
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((w, odd))
}

/// Dense coefficient vectors over an explicit monomial basis.
pub struct DenseRing {
    sig: Arc<RingSignature>,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl DenseRing {
    pub fn new(sig: &Arc<RingSignature>) -> Result<Self> {
        let (m, d, k) = (sig.m, sig.degree, sig.odd_params.len());
        let mut exps: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..m {
            exps = exps
                .into_iter()
                .flat_map(|e| {
                    let used: usize = e.iter().map(|&x| x as usize).sum();
                    (0..=d.saturating_sub(used)).map(move |j| {
                        let mut f = e.clone();
                        f.push(j as u8);
                        f
                    })
                })
                .collect();
        }
        let mut basis = Vec::new();
        for e in &exps {
            let pd: usize = e.iter().map(|&x| x as usize).sum();
            for forms in 0u32..1 << m {
                if pd + forms.count_ones() as usize > d {
                    continue;
                }
                for odds in 0u32..1 << k {
                    basis.push(Monomial { exps: SmallVec::from_slice(e), forms, odds });
                    if basis.len() > MAX_RING_DIM {
                        return Err(Error::SizeGuard(format!("ring dimension exceeds {MAX_RING_DIM}")));
                    }
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        Ok(DenseRing { sig: sig.clone(), basis, index })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn to_dense(&self, a: &RingElement) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dim()];
        for (k, c) in a.terms() {
            v[self.index[k]] += *c;
        }
        v
    }

    pub fn from_dense(&self, v: &[Complex64]) -> RingElement {
        RingElement::from_terms(&self.sig, self.basis.iter().cloned().zip(v.iter().copied()))
    }

    /// Generator word: forms first, then odd parameters, each ascending.
    fn word(&self, b: &Monomial) -> Vec<usize> {
        let m = self.sig.m;
        let mut w: Vec<usize> = (0..m).filter(|i| b.forms & (1 << i) != 0).collect();
        w.extend((0..self.sig.odd_params.len()).filter(|j| b.odds & (1 << j) != 0).map(|j| m + j));
        w
    }

    /// Product of basis elements `i` and `j`: target index and sign.
    pub fn basis_product(&self, i: usize, j: usize) -> Option<(usize, f64)> {
        let (a, b) = (&self.basis[i], &self.basis[j]);
        let mut w = self.word(a);
        w.extend(self.word(b));
        let (sorted, odd) = sort_word(w)?;
        let m = self.sig.m;
        let forms = sorted.iter().filter(|&&g| g < m).fold(0u32, |acc, &g| acc | 1 << g);
        let odds = sorted.iter().filter(|&&g| g >= m).fold(0u32, |acc, &g| acc | 1 << (g - m));
        let exps: SmallVec<[u8; 4]> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
        let target = Monomial { exps, forms, odds };
        let idx = *self.index.get(&target)?;
        Some((idx, if odd { -1.0 } else { 1.0 }))
    }

    pub fn mul(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| **x != ZERO) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| **y != ZERO) {
                if let Some((k, s)) = self.basis_product(i, j) {
                    out[k] += x * y * s;
                }
            }
        }
        out
    }

    fn is_odd(&self, i: usize) -> bool {
        let b = &self.basis[i];
        (b.forms.count_ones() + b.odds.count_ones()) % 2 == 1
    }

    /// Matrix of `s ↦ X s` on the free module `R^n`, index `β·n + i` for basis
    /// element `β` and vector slot `i`.
    pub fn big_matrix(&self, x: &OpForm) -> Result<CMat> {
        let n = x.dim();
        if n > MAX_RANK || n * self.dim() > MAX_BIG_DIM {
            return Err(Error::SizeGuard(format!("operator of rank {n} over a ring of dimension {}", self.dim())));
        }
        let big = n * self.dim();
        let p = x.p();
        let mut out = CMat::zeros(big, big);
        for (k, mk) in x.terms() {
            let ki = self.index[k];
            for beta in 0..self.dim() {
                let Some((gamma, s)) = self.basis_product(ki, beta) else { continue };
                // The matrix passes b, picking up the grading when b is odd.
                let odd = self.is_odd(beta);
                for i in 0..n {
                    for j in 0..n {
                        let flip = odd && ((i < p) != (j < p));
                        let v = mk[(i, j)] * if flip { -s } else { s };
                        out[(gamma * n + i, beta * n + j)] += v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Operator form read off from the images of `1 ⊗ e_j`.
    pub fn from_big(&self, big: &CMat, p: usize, q: usize) -> OpForm {
        let n = p + q;
        let one = self.index[&Monomial::one(self.sig.m)];
        let mut out = OpForm::zero(&self.sig, p, q);
        for (beta, b) in self.basis.iter().enumerate() {
            let mut m = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = big[(beta * n + i, one * n + j)];
                }
            }
            out.add_term(b.clone(), m);
        }
        out
    }
}

/// `e^{A}` by Taylor series with scaling and squaring.
pub fn series_expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm: f64 = (0..n).map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * Complex64::new(scale, 0.0);
    let mut term = CMat::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &x * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{−tF}` over the ring, from the exponential of the big matrix.
pub fn series_heat(f: &OpForm, t: f64) -> Result<OpForm> {
    let ring = DenseRing::new(f.signature())?;
    let big = ring.big_matrix(f)?;
    let h = series_expm(&(big * Complex64::new(-t, 0.0)));
    Ok(ring.from_big(&h, f.p(), f.q()))
}

/// Blade product by shuffling generators: `f`-generators square to −1 and
/// come first, `e`-generators square to +1.
pub fn naive_blade_product(alg: CliffordAlgebra, a: u32, b: u32) -> (u32, f64) {
    let n = alg.num_generators();
    let mut w: Vec<usize> = (0..n).filter(|j| a & (1 << j) != 0).collect();
    w.extend((0..n).filter(|j| b & (1 << j) != 0));
    let mut sign = 1.0;
    // Bubble adjacent pairs into order; cancel equal neighbors.
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < w.len() {
            if w[i] == w[i + 1] {
                sign *= if w[i] < alg.pos { -1.0 } else { 1.0 };
                w.drain(i..i + 2);
                changed = true;
            } else if w[i] > w[i + 1] {
                w.swap(i, i + 1);
                sign = -sign;
                changed = true;
                i += 1;
            } else {
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
    (w.iter().fold(0u32, |acc, &j| acc | 1 << j), sign)
}

pub fn naive_clifford_mul(a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement> {
    if a.algebra() != b.algebra() {
        return Err(Error::AlgebraMismatch("oracle product of different algebras".into()));
    }
    let alg = a.algebra();
    if alg.num_generators() > 12 {
        return Err(Error::SizeGuard("too many generators for the oracle".into()));
    }
    let mut out = CliffordElement::zero(alg);
    for (ka, va) in a.terms() {
        for (kb, vb) in b.terms() {
            let (k, s) = naive_blade_product(alg, *ka, *kb);
            out.add_term(k, va * vb * s);
        }
    }
    Ok(out)
}

/// `Σ_K ω_K (−1)^{N|K|} str(Γ M_K)` with `Γ = 2^{−N/2} g_1⋯g_N` multiplied
/// out from the generator matrices.
pub fn naive_clifford_supertrace(module: &GradedCliffordModule, x: &OpForm) -> Result<RingElement> {
    let n = module.dim();
    if n > MAX_RANK {
        return Err(Error::SizeGuard(format!("rank {n} exceeds {MAX_RANK}")));
    }
    let ngen = module.generators.len();
    let mut gamma = CMat::identity(n, n);
    for g in &module.generators {
        gamma = gamma * g;
    }
    gamma *= Complex64::new(0.5f64.powf(ngen as f64 / 2.0), 0.0);
    let mut out = RingElement::zero(x.signature());
    for (k, m) in x.terms() {
        let gm = &gamma * m;
        let mut s = ZERO;
        for i in 0..n {
            s += if i < module.p { gm[(i, i)] } else { -gm[(i, i)] };
        }
        let odd_form = (k.forms.count_ones() + k.odds.count_ones()) % 2 == 1;
        let flip = odd_form && ngen % 2 == 1;
        out.add_term(k.clone(), if flip { -s } else { s });
    }
    Ok(out)
}
