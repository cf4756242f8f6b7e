//! Dense complex matrix helpers shared by the Clifford, heat and family code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Powers of `i`, indexed mod 4.
pub fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// `(-1)^k` as `f64`.
pub fn sign(k: usize) -> f64 {
    if k & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `2^{-k/2}`, exact for even `k`.
pub fn inv_sqrt2_pow(k: usize) -> f64 {
    let half = 0.5f64.powi((k / 2) as i32);
    if k & 1 == 1 {
        half * std::f64::consts::FRAC_1_SQRT_2
    } else {
        half
    }
}

/// Grading operator `diag(1,…,1,−1,…,−1)` on `ℂ^{p|q}`.
pub fn grading(p: usize, q: usize) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        p + q,
        (0..p + q).map(|i| if i < p { ONE } else { -ONE }),
    ))
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Diagonal-block part with respect to the grading `p|q`.
pub fn even_part(m: &CMat, p: usize) -> CMat {
    let mut r = m.clone();
    let n = m.nrows();
    for i in 0..n {
        for j in 0..m.ncols() {
            if (i < p) != (j < p) {
                r[(i, j)] = ZERO;
            }
        }
    }
    r
}

pub fn odd_part(m: &CMat, p: usize) -> CMat {
    m - even_part(m, p)
}

/// Parity of a homogeneous matrix, or `None` if mixed beyond `tol`.
pub fn parity(m: &CMat, p: usize, tol: f64) -> Option<usize> {
    let odd = max_abs(&odd_part(m, p));
    let even = max_abs(&even_part(m, p));
    if odd <= tol {
        Some(0)
    } else if even <= tol {
        Some(1)
    } else {
        None
    }
}

/// Trace of the even block minus trace of the odd block.
pub fn supertrace(m: &CMat, p: usize) -> Result<Complex64> {
    if !m.is_square() || m.nrows() < p {
        return Err(Error::Shape(format!("supertrace of {}x{} with p = {p}", m.nrows(), m.ncols())));
    }
    let mut s = ZERO;
    for i in 0..m.nrows() {
        if i < p {
            s += m[(i, i)];
        } else {
            s -= m[(i, i)];
        }
    }
    Ok(s)
}

/// Graded commutator `ab − (−1)^{|a||b|} ba` of homogeneous matrices.
pub fn supercommutator(a: &CMat, pa: usize, b: &CMat, pb: usize) -> CMat {
    a * b - b * a * c(sign(pa * pb))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cc: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = CMat::zeros(r, cc);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        m.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    m
}

/// Permutation matrix `P` with `P e_{perm[k]} = e_k`, i.e. row `k` of
/// `P x` is `x[perm[k]]`.
pub fn permutation(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut m = CMat::zeros(n, n);
    for (k, &j) in perm.iter().enumerate() {
        m[(k, j)] = ONE;
    }
    m
}

/// Eigen-decomposition of a hermitian matrix, ascending eigenvalues.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `f(H)` for hermitian `H`.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let d = CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(f(v))));
    &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
}

/// Inverse square root of a positive definite hermitian matrix.
pub fn inv_sqrt_psd(m: &CMat) -> Result<CMat> {
    let (vals, _) = herm_eig(m);
    if vals.first().is_some_and(|&v| v <= 0.0) {
        return Err(Error::Eigen("matrix is not positive definite".into()));
    }
    Ok(herm_fn(m, |v| v.powf(-0.5)))
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm: f64 = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let a = m * c(0.5f64.powi(s));
    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..=20 {
        term = &term * &a * c(1.0 / k as f64);
        sum += &term;
        if max_abs(&term) < 1e-18 * max_abs(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Orthonormal basis (as columns) of the null space of `m`, via the
/// eigen-decomposition of `m†m`.
pub fn nullspace(m: &CMat, tol: f64) -> CMat {
    let g = m.adjoint() * m;
    let (vals, vecs) = herm_eig(&g);
    let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= tol * tol * scale).collect();
    let mut r = CMat::zeros(m.ncols(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        r.set_column(k, &vecs.column(i));
    }
    r
}

/// Unitary polar factor `U` of `m = U |m|`.
pub fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Orthonormalizes the columns of `m` against the inner product `x†Gy`.
pub fn orthonormalize(m: &CMat, g: &CMat) -> Result<CMat> {
    let gram = m.adjoint() * g * m;
    Ok(m * inv_sqrt_psd(&gram)?)
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Distance between the column spans of two matrices with orthonormal
/// columns: operator norm of the difference of orthogonal projectors.
pub fn span_distance(a: &CMat, b: &CMat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    let pa = a * a.adjoint();
    let pb = b * b.adjoint();
    singular_values(&(pa - pb)).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_rotation() {
        let t = 0.7;
        let m = from_real(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&m);
        let expect = from_real(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!(max_abs(&(e - expect)) < 1e-14);
    }

    #[test]
    fn expm_large_norm() {
        let m = from_real(2, 2, &[-30.0, 0.0, 0.0, 5.0]);
        let e = expm(&m);
        assert!((e[(0, 0)].re - (-30f64).exp()).abs() < 1e-25);
        assert!((e[(1, 1)].re / 5f64.exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn supertrace_examples() {
        assert_eq!(supertrace(&CMat::identity(2, 2), 1).unwrap(), ZERO);
        assert_eq!(supertrace(&CMat::identity(2, 2), 2).unwrap(), c(2.0));
        let odd = from_real(2, 2, &[0.0, 1.0, 3.0, 0.0]);
        assert_eq!(supertrace(&odd, 1).unwrap(), ZERO);
        assert!(supertrace(&CMat::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn nullspace_finds_kernel() {
        let m = from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let k = nullspace(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].norm() - 1.0).abs() < 1e-12);
    }
}
