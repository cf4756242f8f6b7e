//! Globally adaptive Gauss–Kronrod (7/15) quadrature for integrands valued in
//! any finite-dimensional vector space.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::opform::OpForm;
use crate::ring::RingElement;

/// Values that can be integrated.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&self, a: f64, other: &Self) -> Self;
    fn dist(&self, other: &Self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + a * other
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl QuadValue for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self.iter().zip(other).map(|(x, y)| x + a * y).collect()
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

impl QuadValue for RingElement {
    fn zero_like(&self) -> Self {
        RingElement::zero(self.signature())
    }
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + &other.scale_re(a)
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

impl QuadValue for OpForm {
    fn zero_like(&self) -> Self {
        OpForm::zero(self.signature(), self.p(), self.q())
    }
    fn axpy(&self, a: f64, other: &Self) -> Self {
        self + &other.scale(crate::linalg::c(a))
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<T: QuadValue>(f: &mut impl FnMut(f64) -> Result<T>, a: f64, b: f64) -> Result<Segment<T>> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid)?;
    let mut k = fc.zero_like().axpy(WGK[7], &fc);
    let mut g = fc.zero_like().axpy(WG[3], &fc);
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx)?;
        let f2 = f(mid + dx)?;
        k = k.axpy(WGK[j], &f1).axpy(WGK[j], &f2);
        if j % 2 == 1 {
            g = g.axpy(WG[j / 2], &f1).axpy(WG[j / 2], &f2);
        }
    }
    let zero = k.zero_like();
    let k = zero.axpy(half, &k);
    let g = zero.axpy(half, &g);
    let error = k.dist(&g);
    Ok(Segment { a, b, value: k, error })
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the worst interval.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<QuadResult<T>> {
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let mut total_err = first.error;
    heap.push(first);
    let mut evaluations = 15;
    while total_err > tol {
        if heap.len() >= max_intervals {
            return Err(Error::Quadrature { achieved: total_err, requested: tol });
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            return Err(Error::Quadrature { achieved: total_err, requested: tol });
        }
        let l = kronrod(&mut f, worst.a, m)?;
        let r = kronrod(&mut f, m, worst.b)?;
        evaluations += 30;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    let intervals = heap.len();
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let total_err = segs.iter().map(|s| s.error).sum();
    let mut value = segs[0].value.zero_like();
    for s in &segs {
        value = value.axpy(1.0, &s.value);
    }
    Ok(QuadResult { value, error: total_err, evaluations, intervals })
}

/// `∫_a^∞ f` through `s = a + r/(1 − r)`.
pub fn integrate_to_infinity<T: QuadValue>(
    mut f: impl FnMut(f64) -> Result<T>,
    a: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<QuadResult<T>> {
    integrate(
        |r| {
            let om = 1.0 - r;
            let v = f(a + r / om)?;
            Ok(v.zero_like().axpy(1.0 / (om * om), &v))
        },
        0.0,
        1.0,
        tol,
        max_intervals,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| Ok(x.powi(5) - 2.0 * x), 0.0, 2.0, 1e-14, 10).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_infinity(|s: f64| Ok((-s * s).exp()), 0.0, 1e-12, 200).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
        let r = integrate_to_infinity(|s: f64| Ok(1.0 / (1.0 + s * s)), 0.0, 1e-12, 200).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn reports_failure() {
        let e = integrate(|x: f64| Ok(1.0 / (x.abs() + 1e-12)), -1.0, 1.0, 1e-14, 8).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }
}
