//! Gaussian elimination over exact fields: the rationals and rational
//! functions of the parameters.

use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::expr::{Expr, Rational};

/// Operations needed by elimination.  `is_zero` must be exact.
pub trait Scalar: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Divides by a nonzero element.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Rough cost used to choose pivots; lower is preferred.
    fn weight(&self) -> usize {
        0
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Expr::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Expr::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Expr::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Expr::div(self, o).expect("nonzero pivot")
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn weight(&self) -> usize {
        self.factors().map(|(p, e)| p.terms().len() * e.unsigned_abs() as usize).sum()
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<T: Scalar>(m: &mut [Vec<T>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| m[i][c].weight());
        let Some(p) = best else { continue };
        m.swap(r, p);
        let inv = T::one().div(&m[r][c]);
        for j in c..cols {
            m[r][j] = m[r][j].mul(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    if !m[r][j].is_zero() {
                        let v = m[i][j].sub(&f.mul(&m[r][j]));
                        m[i][j] = v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Scalar>(m: &[Vec<T>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of `{v : m v = 0}` for a matrix with `cols` columns.
pub fn kernel<T: Scalar>(m: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![T::zero(); cols];
        v[free] = T::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = a[i][free].neg();
        }
        out.push(v);
    }
    out
}

/// One solution of `a x = b`, or `None` when inconsistent.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![T::zero(); cols];
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[i][cols].clone();
    }
    Some(x)
}

/// Determinant by cofactor expansion (no division, suited to small symbolic matrices).
pub fn det<T: Scalar>(m: &[Vec<T>]) -> T {
    let n = m.len();
    match n {
        0 => T::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = T::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<T>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect()).collect();
                let t = m[0][j].mul(&det(&minor));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let inner = b.len();
    let cols = b.first().map(|r| r.len()).unwrap_or(0);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(T::zero(), |acc, k| if row[k].is_zero() { acc } else { acc.add(&row[k].mul(&b[k][j])) }))
                .collect()
        })
        .collect()
}

pub fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
}

/// Numerical rank by singular values above `tol * max(1, sigma_max)`.
pub fn numeric_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > tol * smax.max(1.0)).count()
}

/// Closest rational with denominator at most `max_den` by continued
/// fractions, if it lies within `tol` of `x`.
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol * x.abs().max(1.0) {
            return Some(Rational::new(h1.into(), k1.into()));
        }
        let frac = v - a;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    (k1 != 0 && ((h1 as f64) / (k1 as f64) - x).abs() <= tol * x.abs().max(1.0)).then(|| Rational::new(h1.into(), k1.into()))
}

/// Complex eigenvalues with a bounded number of QR sweeps.  Matrices on
/// which the iteration stalls are retried with a looser tolerance.
pub fn complex_eigenvalues(m: &nalgebra::DMatrix<f64>) -> Vec<nalgebra::Complex<f64>> {
    for eps in [f64::EPSILON, 1e-13, 1e-10] {
        if let Some(s) = nalgebra::Schur::try_new(m.clone(), eps, 5_000) {
            return s.complex_eigenvalues().iter().cloned().collect();
        }
    }
    let n = m.nrows();
    let nudged = m + nalgebra::DMatrix::from_fn(n, n, |i, j| 1e-12 * ((i * n + j) as f64 + 1.0));
    nalgebra::Schur::try_new(nudged, 1e-10, 50_000).map(|s| s.complex_eigenvalues().iter().cloned().collect()).unwrap_or_default()
}

/// Singular value decomposition with a bounded number of sweeps.
pub fn svd(m: &nalgebra::DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    for eps in [f64::EPSILON, 1e-13, 1e-10] {
        if let Some(s) = nalgebra::SVD::try_new(m.clone(), true, true, eps, 5_000) {
            return s;
        }
    }
    nalgebra::SVD::try_new(m.clone(), true, true, 1e-8, 50_000).expect("svd converges")
}
