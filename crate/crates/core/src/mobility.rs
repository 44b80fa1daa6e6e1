//! Classification of one-parameter linear and projective groups and the
//! free-mobility test on linear isotropy.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::algebra::{self, LieAlgebra};
use crate::expr::{int, rat, to_f64, Atom, Expr, Monomial, Rational, Symbols};
use crate::fields::VectorField;
use crate::invariants;
use crate::linalg::{self, snap_rational};
use crate::sample;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MotionTag {
    Zero,
    /// Every orbit closes; `omega` is the fundamental angular frequency.
    Periodic { omega: f64 },
    /// Periodic after removing the scalar part `shift * I`.
    ProjectivelyPeriodic { omega: f64, shift: f64 },
    Spiral,
    RealHyperbolic,
    Nilpotent,
}

impl MotionTag {
    pub fn name(&self) -> &'static str {
        match self {
            MotionTag::Zero => "Zero",
            MotionTag::Periodic { .. } => "Periodic",
            MotionTag::ProjectivelyPeriodic { .. } => "ProjectivelyPeriodic",
            MotionTag::Spiral => "Spiral",
            MotionTag::RealHyperbolic => "RealHyperbolic",
            MotionTag::Nilpotent => "Nilpotent",
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, MotionTag::Periodic { .. } | MotionTag::ProjectivelyPeriodic { .. })
    }
}

impl std::fmt::Display for MotionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MotionTag::Periodic { omega } => write!(f, "Periodic({omega})"),
            MotionTag::ProjectivelyPeriodic { omega, shift } => write!(f, "ProjectivelyPeriodic({omega}, {shift})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Classification of `exp(tM)` with the eigenvalues `(re, im)` it was read from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearMotionClass {
    pub tag: MotionTag,
    pub eigenvalues: Vec<(f64, f64)>,
}

type RMat = Vec<Vec<Rational>>;

fn to_dmatrix(m: &RMat) -> nalgebra::DMatrix<f64> {
    let n = m.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| to_f64(&m[i][j]))
}

fn eigenvalues(m: &RMat) -> Vec<(f64, f64)> {
    linalg::complex_eigenvalues(&to_dmatrix(m)).iter().map(|z| (z.re, z.im)).collect()
}

fn is_zero_matrix(m: &RMat) -> bool {
    m.iter().flatten().all(Zero::is_zero)
}

fn scaled_identity(n: usize, k: &Rational) -> RMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { k.clone() } else { Rational::zero() }).collect()).collect()
}

fn mat_add(a: &RMat, b: &RMat) -> RMat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect()).collect()
}

fn gcd_rational(a: &Rational, b: &Rational) -> Rational {
    use num_integer::Integer;
    let num = a.numer() * b.denom();
    let num2 = b.numer() * a.denom();
    let den = a.denom() * b.denom();
    Rational::new(num.gcd(&num2), den)
}

/// Largest denominator accepted for ratios of frequencies.
pub const MAX_FREQUENCY_DENOMINATOR: i64 = 64;

/// Exact classification of `exp(tM)` for a rational matrix.
///
/// A periodic shape (after removing `a = tr M / n`, the only possible common
/// real part) is certified exactly: `N^[m>0] * prod (N^2 + w_j^2)` must vanish,
/// which forces `N` to be diagonalisable with spectrum in `{0, +-i w_j}`.
///
/// A rotation combined with a dilation moves points along spirals, so it is
/// `Spiral` here; see [`classify_on_directions`].
pub fn classify_exact(m: &RMat) -> LinearMotionClass {
    let eigenvalues = eigenvalues(m);
    let tag = exact_tag(m, false);
    LinearMotionClass { tag, eigenvalues }
}

/// Classification of the induced motion of lines through the origin, where a
/// common dilation is invisible: rotation plus dilation is
/// `ProjectivelyPeriodic` instead of `Spiral`.
pub fn classify_on_directions(m: &RMat) -> LinearMotionClass {
    let eigenvalues = eigenvalues(m);
    let tag = exact_tag(m, true);
    LinearMotionClass { tag, eigenvalues }
}

fn shifted_tag(omega: f64, a: &Rational, on_directions: bool) -> Option<MotionTag> {
    if a.is_zero() {
        Some(MotionTag::Periodic { omega })
    } else if on_directions {
        Some(MotionTag::ProjectivelyPeriodic { omega, shift: to_f64(a) })
    } else {
        None
    }
}

fn exact_tag(m: &RMat, on_directions: bool) -> MotionTag {
    let n = m.len();
    let eig_m = distinct_eigenvalues(m);
    if is_zero_matrix(m) {
        return MotionTag::Zero;
    }
    let tr: Rational = (0..n).map(|i| m[i][i].clone()).sum();
    let a = &tr / int(n as i64);
    let nm = mat_add(m, &scaled_identity(n, &-&a));
    let scale = eig_m.iter().map(|(r, i)| r.hypot(*i)).fold(1.0, f64::max);
    let eps = 1e-8 * scale;
    if !is_zero_matrix(&nm) {
        let eig = distinct_eigenvalues(&nm);
        if eig.iter().all(|(r, _)| r.abs() < eps) {
            if let Some(w2) = single_frequency_square(&nm) {
                if let Some(t) = shifted_tag(to_f64(&w2).sqrt(), &a, on_directions) {
                    return t;
                }
            }
            let omega = match distinct_omega_squares(&eig, eps) {
                Some((has_zero, w2)) => periodic_frequency(&nm, has_zero, &w2),
                // frequencies too far from small rationals to certify
                None => {
                    let m: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(to_f64).collect()).collect();
                    return classify_numeric(&m, on_directions).tag;
                }
            };
            if let Some(t) = omega.and_then(|w| shifted_tag(w, &a, on_directions)) {
                return t;
            }
        }
    }
    if eig_m.iter().any(|(r, i)| i.abs() >= eps && r.abs() >= eps) {
        return MotionTag::Spiral;
    }
    // all real parts zero but not periodic: nilpotent part or incommensurable
    if eig_m.iter().all(|(r, _)| r.abs() < eps) {
        return MotionTag::Nilpotent;
    }
    MotionTag::RealHyperbolic
}

/// Characteristic polynomial, lowest coefficient first (Faddeev-LeVerrier).
fn charpoly(m: &RMat) -> Vec<Rational> {
    let n = m.len();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = int(1);
    let mut mk: RMat = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        mk = mat_add(&linalg::mat_mul(m, &mk), &scaled_identity(n, &c[n - k + 1]));
        let prod = linalg::mat_mul(m, &mk);
        let tr: Rational = (0..n).map(|i| prod[i][i].clone()).sum();
        c[n - k] = -tr / int(k as i64);
    }
    c
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Quotient and remainder of polynomial division.
fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let lead = b.last().expect("nonzero divisor").clone();
    let mut q = vec![Rational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - b.len();
        let k = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &k * bc;
        }
        q[shift] = k;
        r.pop();
        r = trim(r);
        if r.is_empty() {
            r.push(Rational::zero());
        }
    }
    (q, r)
}

fn poly_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = poly_divmod(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Distinct eigenvalues: roots of the squarefree part of the characteristic
/// polynomial, which are simple and so numerically well conditioned.
fn distinct_eigenvalues(m: &RMat) -> Vec<(f64, f64)> {
    let p = charpoly(m);
    let dp: Vec<Rational> = p.iter().enumerate().skip(1).map(|(k, c)| c * int(k as i64)).collect();
    let g = poly_gcd(&p, &dp);
    let (sq, _) = poly_divmod(&p, &g);
    let sq = trim(sq);
    let d = sq.len() - 1;
    if d == 0 {
        return vec![];
    }
    let lead = to_f64(&sq[d]);
    let companion = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -to_f64(&sq[d - 1 - j]) / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    linalg::complex_eigenvalues(&companion).iter().map(|z| (z.re, z.im)).collect()
}

/// `w^2 > 0` with `N^3 = -w^2 N`, read off exactly from one entry.
fn single_frequency_square(nm: &RMat) -> Option<Rational> {
    let n3 = linalg::mat_mul(&linalg::mat_mul(nm, nm), nm);
    let (i, j) = (0..nm.len()).flat_map(|i| (0..nm.len()).map(move |j| (i, j))).find(|&(i, j)| !nm[i][j].is_zero())?;
    let w2 = -&n3[i][j] / &nm[i][j];
    if !w2.is_positive() {
        return None;
    }
    let ok = n3.iter().zip(nm).all(|(r3, r)| r3.iter().zip(r).all(|(a, b)| (a + &w2 * b).is_zero()));
    ok.then_some(w2)
}

fn distinct_omega_squares(eig: &[(f64, f64)], eps: f64) -> Option<(bool, Vec<Rational>)> {
    let has_zero = eig.iter().any(|(_, i)| i.abs() < eps);
    let mut w2: Vec<Rational> = Vec::new();
    for (_, i) in eig {
        if i.abs() < eps {
            continue;
        }
        let s = snap_rational(i * i, 1_000_000, 1e-9)?;
        if !w2.contains(&s) {
            w2.push(s);
        }
    }
    Some((has_zero, w2))
}

fn annihilates(nm: &RMat, has_zero: bool, w2: &[Rational]) -> bool {
    let n = nm.len();
    let mut p: RMat = linalg::identity(n);
    if has_zero {
        p = linalg::mat_mul(&p, nm);
    }
    let sq = linalg::mat_mul(nm, nm);
    for w in w2 {
        p = linalg::mat_mul(&p, &mat_add(&sq, &scaled_identity(n, w)));
    }
    is_zero_matrix(&p)
}

fn periodic_frequency(nm: &RMat, has_zero: bool, w2: &[Rational]) -> Option<f64> {
    if w2.is_empty() || !annihilates(nm, has_zero, w2) {
        return None;
    }
    // w_j / w_1 must be rational with a small denominator
    let base = w2[0].clone();
    let mut ratios = Vec::new();
    for w in w2 {
        let r = crate::expr::rational_sqrt(&(w / &base))?;
        if r.denom() > &num_bigint::BigInt::from(MAX_FREQUENCY_DENOMINATOR) {
            return None;
        }
        ratios.push(r);
    }
    let g = ratios.iter().skip(1).fold(ratios[0].clone(), |acc, r| gcd_rational(&acc, r));
    Some(to_f64(&base).sqrt() * to_f64(&g))
}

/// Snaps a floating matrix to rationals and classifies it exactly; falls
/// back to the numeric eigenvalues when snapping fails.
pub fn classify_linear(m: &[Vec<f64>]) -> LinearMotionClass {
    let snapped: Option<RMat> = m.iter().map(|row| row.iter().map(|v| snap_rational(*v, 1_000_000, 1e-12)).collect()).collect();
    match snapped {
        Some(r) => classify_exact(&r),
        None => classify_numeric(m, false),
    }
}

fn classify_numeric(m: &[Vec<f64>], on_directions: bool) -> LinearMotionClass {
    let n = m.len();
    let full = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let eigenvalues: Vec<(f64, f64)> = linalg::complex_eigenvalues(&full).iter().map(|z| (z.re, z.im)).collect();
    let eps = 1e-8 * full.amax().max(1.0);
    let tag = if full.amax() < 1e-14 {
        MotionTag::Zero
    } else {
        let a = full.trace() / n as f64;
        let shifted: Vec<(f64, f64)> = eigenvalues.iter().map(|(r, i)| (r - a, *i)).collect();
        let omegas: Vec<f64> = shifted.iter().filter(|(_, i)| i.abs() >= eps).map(|(_, i)| i.abs()).collect();
        let single_omega = omegas.windows(2).all(|w| (w[0] - w[1]).abs() < eps);
        if shifted.iter().all(|(r, _)| r.abs() < eps) && !omegas.is_empty() && single_omega {
            if a.abs() < eps {
                MotionTag::Periodic { omega: omegas[0] }
            } else if on_directions {
                MotionTag::ProjectivelyPeriodic { omega: omegas[0], shift: a }
            } else {
                MotionTag::Spiral
            }
        } else if eigenvalues.iter().any(|(r, i)| i.abs() >= eps && r.abs() >= eps) {
            MotionTag::Spiral
        } else if eigenvalues.iter().all(|(r, _)| r.abs() < eps) {
            MotionTag::Nilpotent
        } else {
            MotionTag::RealHyperbolic
        }
    };
    LinearMotionClass { tag, eigenvalues }
}

fn coefficient(p: &crate::expr::Poly, i: u32, j: u32) -> Rational {
    let mut powers = Vec::new();
    if i > 0 {
        powers.push((Atom::Var(0), i));
    }
    if j > 0 {
        powers.push((Atom::Var(1), j));
    }
    let m = Monomial(powers);
    p.terms().iter().find(|(k, _)| *k == m).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
}

/// The 3x3 matrix of a planar projective field acting on `(xi, eta, 1)`,
/// normalised so that the corner entry is zero.
pub fn projective_matrix(field: &VectorField) -> Option<RMat> {
    if field.dim() != 2 {
        return None;
    }
    let a = field.coeffs[0].to_poly()?;
    let b = field.coeffs[1].to_poly()?;
    if a.degree() > 2 || b.degree() > 2 || a.atoms().iter().chain(b.atoms().iter()).any(|t| !matches!(t, Atom::Var(0) | Atom::Var(1))) {
        return None;
    }
    let m31 = -coefficient(&a, 2, 0);
    let m32 = -coefficient(&a, 1, 1);
    let consistent = coefficient(&a, 0, 2).is_zero()
        && coefficient(&b, 2, 0).is_zero()
        && coefficient(&b, 1, 1) == -&m31
        && coefficient(&b, 0, 2) == -&m32;
    if !consistent {
        return None;
    }
    Some(vec![
        vec![coefficient(&a, 1, 0), coefficient(&a, 0, 1), coefficient(&a, 0, 0)],
        vec![coefficient(&b, 1, 0), coefficient(&b, 0, 1), coefficient(&b, 0, 0)],
        vec![m31, m32, Rational::zero()],
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormReport {
    pub index: usize,
    pub form: String,
    pub class: MotionTag,
    /// Invariant lines on which the group has a real fixed point.
    pub witnesses: Vec<String>,
    pub rejected: bool,
}

fn line_text(l: &[Rational]) -> String {
    if l[0].is_zero() && l[1].is_zero() {
        return "line at infinity".into();
    }
    let sym = Symbols::new(&["xi", "eta"], &[] as &[&str]);
    let e = Expr::constant(l[0].clone())
        .mul(&Expr::var(0))
        .add(&Expr::constant(l[1].clone()).mul(&Expr::var(1)))
        .add(&Expr::constant(l[2].clone()));
    // normalise the leading coefficient
    let lead = e.coeff().clone();
    format!("{} = 0", e.scale(&lead.recip()).to_string_with(&sym))
}

/// Invariant lines `l . (xi, eta, 1) = 0` carrying a real fixed point of the
/// induced action, where that action is not a scalar.
pub fn invariant_line_witnesses(m: &RMat) -> Vec<String> {
    let mt = linalg::transpose(m);
    let mut out = Vec::new();
    let mut seen: Vec<Rational> = Vec::new();
    for (re, im) in eigenvalues(&mt) {
        if im.abs() > 1e-9 {
            continue;
        }
        let Some(mu) = snap_rational(re, 1_000_000, 1e-9) else { continue };
        if seen.contains(&mu) {
            continue;
        }
        seen.push(mu.clone());
        let shifted = mat_add(&mt, &scaled_identity(3, &-&mu));
        for l in linalg::kernel(&shifted, 3) {
            let basis = linalg::kernel(&[l.clone()], 3);
            // restricted action on the points of the line
            let cols: Vec<Vec<Rational>> = basis.iter().map(|v| (0..3).map(|i| (0..3).map(|j| &m[i][j] * &v[j]).sum()).collect()).collect();
            let bt = linalg::transpose(&basis);
            let mut r = vec![vec![Rational::zero(); 2]; 2];
            for (k, c) in cols.iter().enumerate() {
                let coords = linalg::solve(&bt, c).expect("invariant subspace");
                r[0][k] = coords[0].clone();
                r[1][k] = coords[1].clone();
            }
            let tr = &r[0][0] + &r[1][1];
            let det = &r[0][0] * &r[1][1] - &r[0][1] * &r[1][0];
            let disc = &tr * &tr - int(4) * det;
            let scalar = r[0][1].is_zero() && r[1][0].is_zero() && r[0][0] == r[1][1];
            if !disc.is_negative() && !scalar {
                out.push(line_text(&l));
            }
        }
    }
    out.sort();
    out
}

/// The seven normal forms of planar projective one-parameter groups, with
/// sample values `c = 2` in the fifth and `c = 1/2` in the sixth.
pub fn seven_forms() -> Vec<(String, VectorField)> {
    let sym = Symbols::new(&["xi", "eta"], &[] as &[&str]);
    let texts = ["p + eta*q", "p + xi*q", "eta*q", "q", "xi*p + 2*eta*q", "eta*p - xi*q + 1/2*(xi*p + eta*q)", "eta*p - xi*q"];
    texts.iter().map(|t| (t.to_string(), VectorField::parse(t, &sym).expect("form parses"))).collect()
}

pub fn classify_seven_forms() -> Vec<FormReport> {
    seven_forms()
        .into_iter()
        .enumerate()
        .map(|(i, (text, f))| {
            let m = projective_matrix(&f).expect("projective form");
            let class = classify_exact(&m).tag;
            let witnesses = invariant_line_witnesses(&m);
            let rejected = !class.is_periodic();
            FormReport { index: i + 1, form: text, class, witnesses, rejected }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MobilityVerdict {
    pub free_mobility: bool,
    /// First failing stage: `a`, `b` or `c`.
    pub failing_stage: Option<String>,
    pub failed_stages: Vec<String>,
    pub isotropy_dim: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MobilityError {
    #[error("free mobility is implemented for dimensions 2 and 3, got {0}")]
    UnsupportedDimension(usize),
}

type FMat = Vec<Vec<f64>>;

fn f_mat(m: &[Vec<Expr>], params: &[Rational]) -> Option<RMat> {
    m.iter().map(|row| row.iter().map(|e| e.eval_rational(&[], params).ok()).collect()).collect()
}

fn apply(m: &RMat, v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Linear conditions on `lambda` for `(sum lambda_k A_k) v` to be parallel to `v`.
fn parallel_conditions(mats: &[RMat], v: &[Rational]) -> Vec<Vec<Rational>> {
    let n = v.len();
    let images: Vec<Vec<Rational>> = mats.iter().map(|a| apply(a, v)).collect();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            rows.push(images.iter().map(|w| &w[i] * &v[j] - &w[j] * &v[i]).collect());
        }
    }
    rows
}

/// Real directions fixed by every matrix.
fn common_real_eigenvector(mats: &[FMat]) -> bool {
    let n = mats.first().map(|m| m.len()).unwrap_or(0);
    let nonscalar: Vec<&FMat> = mats
        .iter()
        .filter(|m| (0..n).any(|i| (0..n).any(|j| if i == j { (m[i][i] - m[0][0]).abs() > 1e-12 } else { m[i][j].abs() > 1e-12 })))
        .collect();
    let Some(first) = nonscalar.first() else { return true };
    let d = nalgebra::DMatrix::from_fn(n, n, |i, j| first[i][j]);
    let check = |v: &nalgebra::DVector<f64>| {
        nonscalar.iter().all(|m| {
            let a = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
            let w = &a * v;
            let along = w.dot(v) / v.dot(v);
            (w - v * along).norm() < 1e-8 * a.norm().max(1.0) * v.norm()
        })
    };
    for z in linalg::complex_eigenvalues(&d).iter() {
        if z.im.abs() > 1e-9 {
            continue;
        }
        let shifted = &d - nalgebra::DMatrix::identity(n, n) * z.re;
        let svd = linalg::svd(&shifted);
        let vt = svd.v_t.expect("v");
        let null: Vec<nalgebra::DVector<f64>> =
            (0..n).filter(|k| svd.singular_values[*k] < 1e-9 * d.norm().max(1.0)).map(|k| vt.row(k).transpose()).collect();
        match null.len() {
            0 => {}
            1 => {
                if check(&null[0]) {
                    return true;
                }
            }
            _ => {
                // search the eigenplane: directions a*u + b*w
                let (u, w) = (&null[0], &null[1]);
                let mut forms: Vec<[f64; 3]> = Vec::new();
                for m in &nonscalar {
                    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
                    let (au, aw) = (&a * u, &a * w);
                    for i in 0..n {
                        for j in i + 1..n {
                            // (A v)_i v_j - (A v)_j v_i as a binary quadratic form in (a, b)
                            let c_aa = au[i] * u[j] - au[j] * u[i];
                            let c_bb = aw[i] * w[j] - aw[j] * w[i];
                            let c_ab = au[i] * w[j] + aw[i] * u[j] - au[j] * w[i] - aw[j] * u[i];
                            forms.push([c_aa, c_ab, c_bb]);
                        }
                    }
                }
                let dirs = binary_form_roots(&forms);
                for (a, b) in dirs {
                    if check(&(u * a + w * b)) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn binary_form_roots(forms: &[[f64; 3]]) -> Vec<(f64, f64)> {
    let big = forms.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let Some(f) = forms.iter().find(|f| f.iter().any(|v| v.abs() > 1e-10 * big)) else {
        return vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    };
    let [a, b, c] = *f;
    let tol = 1e-10 * big;
    let mut out = Vec::new();
    if a.abs() <= tol {
        out.push((1.0, 0.0));
    }
    // roots (s, 1) of a s^2 + b s + c
    if a.abs() > tol {
        let disc = b * b - 4.0 * a * c;
        if disc >= -tol * tol.max(1.0) {
            let r = disc.max(0.0).sqrt();
            out.push(((-b + r) / (2.0 * a), 1.0));
            out.push(((-b - r) / (2.0 * a), 1.0));
        }
    } else if b.abs() > tol {
        out.push((-c / b, 1.0));
    }
    out
}

/// Free mobility in the plane (two stages) and in space (three stages),
/// read off the linear isotropy at `base`.  Generic line and surface
/// elements are drawn from `seed`.
pub fn free_mobility_infinitesimal(l: &LieAlgebra, base: &[Rational], seed: u64) -> Result<MobilityVerdict, MobilityError> {
    let n = l.n();
    if !(2..=3).contains(&n) {
        return Err(MobilityError::UnsupportedDimension(n));
    }
    let jac = algebra::isotropy_jacobians(l, base);
    let mats: Vec<RMat> = jac.iter().filter_map(|m| f_mat(m, &[])).collect();
    let fmats: Vec<FMat> = mats.iter().map(|m| m.iter().map(|r| r.iter().map(to_f64).collect()).collect()).collect();
    let iso_dim = mats.len();
    let mut failed = Vec::new();
    let mut rng = sample::rng(seed ^ 0xf3ee);
    let random_vec = |rng: &mut sample::SeededRng| -> Vec<Rational> {
        (0..n).map(|_| rat(rng.gen_range(-97..=97), rng.gen_range(1..=97))).collect()
    };
    let fixes_direction = common_real_eigenvector(&fmats);
    match n {
        2 => {
            if iso_dim == 0 || fixes_direction {
                failed.push("a".to_string());
            }
            let stab_dims: Vec<usize> = (0..8).map(|_| {
                let v = random_vec(&mut rng);
                iso_dim - linalg::rank(&parallel_conditions(&mats, &v))
            }).collect();
            if stab_dims.iter().any(|d| *d > 0) {
                failed.push("b".to_string());
            }
        }
        3 => {
            let mut a_ok = true;
            let mut b_ok = true;
            for _ in 0..8 {
                let v = random_vec(&mut rng);
                let cond = parallel_conditions(&mats, &v);
                let stab = linalg::kernel(&cond, iso_dim);
                if stab.is_empty() {
                    a_ok = false;
                    continue;
                }
                // quotient action of a random stabiliser element on R^3 / v
                let lam: Vec<Rational> = (0..stab.len()).map(|_| sample::generic_rational(&mut rng)).collect();
                let mut s: RMat = vec![vec![Rational::zero(); 3]; 3];
                for (k, basis_vec) in stab.iter().enumerate() {
                    for (c, m) in basis_vec.iter().zip(&mats) {
                        for i in 0..3 {
                            for j in 0..3 {
                                s[i][j] += &lam[k] * c * &m[i][j];
                            }
                        }
                    }
                }
                let u1 = random_vec(&mut rng);
                let u2 = random_vec(&mut rng);
                let q = quotient_matrix(&s, &v, &u1, &u2);
                let tr = &q[0][0] + &q[1][1];
                let det = &q[0][0] * &q[1][1] - &q[0][1] * &q[1][0];
                if !(&tr * &tr - int(4) * det).is_negative() {
                    a_ok = false;
                }
                // additionally fix the plane spanned by v and u1
                let mut rows = cond.clone();
                let images: Vec<Vec<Rational>> = mats.iter().map(|m| apply(m, &u1)).collect();
                // A u1 must lie in span(v, u1): determinant condition
                rows.push(images.iter().map(|w| det3(&v, &u1, w)).collect());
                if linalg::rank(&rows) < iso_dim {
                    b_ok = false;
                }
            }
            if !a_ok {
                failed.push("a".to_string());
            }
            if !b_ok {
                failed.push("b".to_string());
            }
            if fixes_direction {
                failed.push("c".to_string());
            }
        }
        _ => unreachable!(),
    }
    Ok(MobilityVerdict { free_mobility: failed.is_empty(), failing_stage: failed.first().cloned(), failed_stages: failed, isotropy_dim: iso_dim })
}

/// Free mobility at a generic point after fixing the parameters.
pub fn free_mobility_generic(l: &LieAlgebra, params: &[Rational], seed: u64) -> Result<MobilityVerdict, MobilityError> {
    let l = l.instantiate(params);
    let base = invariants::generic_base(&l, seed);
    free_mobility_infinitesimal(&l, &base, seed)
}

fn det3(a: &[Rational], b: &[Rational], c: &[Rational]) -> Rational {
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0]) + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

/// Matrix of the map induced by `s` on `R^3 / v` in the basis `u1, u2`.
fn quotient_matrix(s: &RMat, v: &[Rational], u1: &[Rational], u2: &[Rational]) -> RMat {
    let basis = vec![v.to_vec(), u1.to_vec(), u2.to_vec()];
    let bt = linalg::transpose(&basis);
    let mut q = vec![vec![Rational::zero(); 2]; 2];
    for (k, u) in [u1, u2].iter().enumerate() {
        let img = apply(s, u);
        let coords = linalg::solve(&bt, &img).expect("basis");
        q[0][k] = coords[1].clone();
        q[1][k] = coords[2].clone();
    }
    q
}

/// Linear parts of the isotropy generators at `base`, classified by their
/// action on line elements.
pub fn classify_isotropy(l: &LieAlgebra, params: &[Rational], seed: u64) -> Vec<LinearMotionClass> {
    let l = l.instantiate(params);
    let base = invariants::generic_base(&l, seed);
    algebra::linear_isotropy(&l, &base).iter().filter_map(|m| f_mat(m, &[])).map(|m| classify_on_directions(&m)).collect()
}
