//! Joint invariants of several points, infinitesimal invariants and the
//! determinant test for the existence of a two-point invariant.

use rand::Rng;
use serde::Serialize;

use crate::algebra::{self, LieAlgebra, Matrix};
use crate::expr::{to_f64, EvalError, Expr, Rational, ZeroTest};
use crate::fields::{self, VectorField};
use crate::linalg;
use crate::sample;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum InvariantError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no admissible sample points found ({0})")]
    DomainExhausted(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exact zero test; inconclusive cases fall back to sampling.
    Symbolic,
    Numeric,
    /// Same as `Symbolic`: the numeric test runs only when the zero test is
    /// inconclusive.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    Proven,
    NumericallySupported { max_residual: f64 },
    Refuted { generator: usize, residual: String, witness: Option<Vec<f64>> },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proven => "Proven",
            Verdict::NumericallySupported { .. } => "NumericallySupported",
            Verdict::Refuted { .. } => "Refuted",
        }
    }
}

/// `s*n - generic rank` of the generators acting on `s` points at once.
pub fn joint_invariant_count(l: &LieAlgebra, s: usize, seed: u64) -> usize {
    let pp = fields::prolong_points(&l.gens, s);
    s * l.n() - fields::generic_rank(&pp, seed)
}

/// Residuals `X_k^{(s)} J` for every generator.
pub fn invariance_residuals(l: &LieAlgebra, j: &Expr, s: usize) -> Vec<Expr> {
    fields::prolong_points(&l.gens, s).iter().map(|x| x.apply(j)).collect()
}

fn random_config(rng: &mut sample::SeededRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let distinct = (0..dim).all(|a| (a + 1..dim).all(|b| (v[a] - v[b]).abs() > 1e-3));
        if distinct {
            return v;
        }
    }
}

/// Evaluates the residuals at random configurations and returns the largest
/// relative residual, or the first failing point.
fn numeric_check(
    residuals: &[Expr],
    j: &Expr,
    dim: usize,
    params: &[f64],
    seed: u64,
) -> Result<Result<f64, (usize, f64, Vec<f64>)>, InvariantError> {
    let comp: Vec<_> = residuals.iter().map(Expr::compile).collect();
    let jc = j.compile();
    let grads: Vec<_> = (0..dim).map(|i| j.diff(i).compile()).collect();
    let mut rng = sample::rng(seed ^ 0x1eaf);
    let mut good = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..32 * 16 {
        if good == 32 {
            break;
        }
        let x = random_config(&mut rng, dim);
        if jc.eval(&x, params).is_err() {
            continue;
        }
        let scale = grads.iter().filter_map(|g| g.eval(&x, params).ok()).fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let vals: Result<Vec<f64>, EvalError> = comp.iter().map(|c| c.eval(&x, params)).collect();
        let Ok(vals) = vals else { continue };
        good += 1;
        for (k, v) in vals.iter().enumerate() {
            let rel = v.abs() / scale;
            if !(rel < 1e-8) {
                return Ok(Err((k, *v, x)));
            }
            worst = worst.max(rel);
        }
    }
    if good < 32 {
        return Err(InvariantError::DomainExhausted(format!("{good} admissible configurations")));
    }
    Ok(Ok(worst))
}

/// Decides whether `j` (a function of `s` points) is annihilated by every
/// prolonged generator.  Parameters of `l` stay symbolic in the symbolic
/// test; `params` supplies values for numeric evaluation.
pub fn verify_joint_invariant(
    l: &LieAlgebra,
    j: &Expr,
    s: usize,
    mode: VerifyMode,
    params: &[Rational],
    seed: u64,
) -> Result<Verdict, InvariantError> {
    let residuals = invariance_residuals(l, j, s);
    let dim = s * l.n();
    let pf: Vec<f64> = params.iter().map(to_f64).collect();
    let psym = symbols_for(l, s);
    if mode != VerifyMode::Numeric {
        let tests: Vec<ZeroTest> = residuals.iter().map(Expr::is_identically_zero).collect();
        if tests.iter().all(|t| *t == ZeroTest::Yes) {
            return Ok(Verdict::Proven);
        }
        if let Some(k) = tests.iter().position(|t| *t == ZeroTest::No) {
            let witness = witness_point(&residuals[k], dim, &pf, seed);
            return Ok(Verdict::Refuted { generator: k, residual: residuals[k].to_string_with(&psym), witness });
        }
    }
    match numeric_check(&residuals, j, dim, &pf, seed)? {
        Ok(worst) => Ok(Verdict::NumericallySupported { max_residual: worst }),
        Err((k, _, x)) => Ok(Verdict::Refuted { generator: k, residual: residuals[k].to_string_with(&psym), witness: Some(x) }),
    }
}

fn witness_point(e: &Expr, dim: usize, params: &[f64], seed: u64) -> Option<Vec<f64>> {
    let c = e.compile();
    let mut rng = sample::rng(seed ^ 0x3a7);
    for _ in 0..256 {
        let x = random_config(&mut rng, dim);
        if let Ok(v) = c.eval(&x, params) {
            if v.abs() > 1e-9 {
                return Some(x);
            }
        }
    }
    None
}

pub fn symbols_for(l: &LieAlgebra, s: usize) -> crate::expr::Symbols {
    l.sym.for_points(s)
}

/// Base point used for local questions: the origin when the generators span
/// there, otherwise a random rational point of full rank.
pub fn generic_base(l: &LieAlgebra, seed: u64) -> Vec<Rational> {
    let o = fields::origin(l.n());
    if fields::rank_at(&l.gens, &o) == fields::generic_rank(&l.gens, seed) {
        return o;
    }
    let mut rng = sample::rng(seed ^ 0xba5e);
    let target = fields::generic_rank(&l.gens, seed);
    loop {
        let pt = sample::point(&mut rng, l.n());
        if fields::rank_at(&l.gens, &pt) == target {
            return pt;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub base: Vec<String>,
    pub isotropy: Vec<String>,
    pub determinant: String,
    pub determinant_zero: ZeroTest,
    pub minor_nonzero: bool,
    pub passes: bool,
}

/// For a transitive six-parameter group of space: the isotropy fields at a
/// generic point have identically vanishing determinant but some nonzero
/// 2x2 minor.
pub fn two_point_invariant_criterion(l: &LieAlgebra, seed: u64) -> Result<CriterionReport, InvariantError> {
    if l.n() != 3 || l.r() != 6 {
        return Err(InvariantError::Precondition(format!("needs 6 generators in 3 variables, got {} in {}", l.r(), l.n())));
    }
    if !algebra::is_transitive(l, seed) {
        return Err(InvariantError::Precondition("group is not transitive".into()));
    }
    let base = generic_base(l, seed);
    let iso = algebra::isotropy_at(l, &base);
    if iso.len() != 3 {
        return Err(InvariantError::Precondition(format!("isotropy has dimension {}", iso.len())));
    }
    let m: Matrix = iso.iter().map(|f| f.coeffs.clone()).collect();
    let det = linalg::det(&m);
    let determinant_zero = det.is_identically_zero();
    let mut minor_nonzero = false;
    for (r1, r2) in [(0, 1), (0, 2), (1, 2)] {
        for (c1, c2) in [(0, 1), (0, 2), (1, 2)] {
            let minor = m[r1][c1].mul(&m[r2][c2]).sub(&m[r1][c2].mul(&m[r2][c1]));
            if minor.is_identically_zero() != ZeroTest::Yes {
                minor_nonzero = true;
            }
        }
    }
    Ok(CriterionReport {
        base: base.iter().map(|r| r.to_string()).collect(),
        isotropy: iso.iter().map(|f| f.to_string_with(&l.sym)).collect(),
        determinant: det.to_string_with(&l.sym),
        determinant_zero,
        minor_nonzero,
        passes: determinant_zero == ZeroTest::Yes && minor_nonzero,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialReport {
    pub count: usize,
    pub pullback_rank: usize,
    pub essential: bool,
}

/// Rank of the gradients of `fs` (functions of `dim` variables) at generic points.
pub fn functional_rank(fs: &[Expr], dim: usize, params: &[Rational], seed: u64) -> usize {
    if fs.is_empty() {
        return 0;
    }
    let grads: Vec<Vec<Expr>> = fs.iter().map(|f| (0..dim).map(|i| f.diff(i)).collect()).collect();
    let pf: Vec<f64> = params.iter().map(to_f64).collect();
    let mut rng = sample::rng(seed ^ 0x9ad);
    let mut best = 0;
    let mut done = 0;
    for _ in 0..200 {
        if done == 8 {
            break;
        }
        let pt = sample::point(&mut rng, dim);
        let exact: Option<Vec<Vec<Rational>>> =
            grads.iter().map(|row| row.iter().map(|g| g.eval_rational(&pt, params).ok()).collect()).collect();
        let r = match exact {
            Some(m) => linalg::rank(&m),
            None => {
                let x: Vec<f64> = pt.iter().map(to_f64).collect();
                let num: Option<Vec<Vec<f64>>> = grads.iter().map(|row| row.iter().map(|g| g.eval_f64(&x, &pf).ok()).collect()).collect();
                match num {
                    Some(m) => linalg::numeric_rank(&m, 1e-8),
                    None => continue,
                }
            }
        };
        best = best.max(r);
        done += 1;
    }
    best
}

/// Compares the number of `s`-point invariants with the number obtained from
/// pair invariants pulled back to every pair of the `s` points.
pub fn essential_invariant_check(
    l: &LieAlgebra,
    s: usize,
    pair_invariants: &[Expr],
    params: &[Rational],
    seed: u64,
) -> Result<EssentialReport, InvariantError> {
    let n = l.n();
    if pair_invariants.is_empty() && joint_invariant_count(l, 2, seed) > 0 {
        return Err(InvariantError::Precondition("pair invariants exist but none were supplied".into()));
    }
    let count = joint_invariant_count(l, s, seed);
    let mut pulled = Vec::new();
    for a in 0..s {
        for b in a + 1..s {
            let map: Vec<usize> = (0..2 * n).map(|i| if i < n { a * n + i } else { b * n + (i - n) }).collect();
            for j in pair_invariants {
                pulled.push(j.rename_vars(&map));
            }
        }
    }
    let pullback_rank = functional_rank(&pulled, s * n, params, seed);
    Ok(EssentialReport { count, pullback_rank, essential: count > pullback_rank })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfinitesimalReport {
    pub exists: bool,
    pub transitive: bool,
    /// Generic rank of the linear isotropy acting on differentials.
    pub isotropy_rank: usize,
    /// Generic rank of the generators prolonged to differentials.
    pub prolonged_rank: usize,
    pub cross_check_agrees: bool,
}

/// Whether some function of a point and a differential is invariant.
pub fn infinitesimal_invariant_exists(l: &LieAlgebra, seed: u64) -> InfinitesimalReport {
    let n = l.n();
    let base_rank = fields::generic_rank(&l.gens, seed);
    let transitive = base_rank == n;
    let prol: Vec<VectorField> = l.gens.iter().map(fields::prolong_differentials).collect();
    let prolonged_rank = fields::generic_rank(&prol, seed);
    let via_prolongation = 2 * n - prolonged_rank > n - base_rank;
    let base = generic_base(l, seed);
    let lin: Vec<VectorField> = algebra::linear_isotropy(l, &base).iter().map(algebra::linear_field).collect();
    let isotropy_rank = fields::generic_rank(&lin, seed);
    let exists = if transitive { isotropy_rank < n } else { true };
    InfinitesimalReport { exists, transitive, isotropy_rank, prolonged_rank, cross_check_agrees: exists == via_prolongation }
}

/// An infinitesimal invariant exists and the identity matrix is not in the
/// span of the linear isotropy (so invariants need not be homogeneous of
/// degree zero in the differentials).
pub fn arc_length_invariant_exists(l: &LieAlgebra, seed: u64) -> bool {
    if !infinitesimal_invariant_exists(l, seed).exists {
        return false;
    }
    let base = generic_base(l, seed);
    let lin = algebra::linear_isotropy(l, &base);
    let n = l.n();
    let mut rows: Vec<Vec<Expr>> = lin.iter().map(|m| m.iter().flatten().cloned().collect()).collect();
    let r0 = linalg::rank(&rows);
    let id: Matrix = linalg::identity(n);
    rows.push(id.into_iter().flatten().collect());
    linalg::rank(&rows) > r0
}

/// `(L_X g)_ij = X(g_ij) + sum_k g_kj d_i xi_k + sum_k g_ik d_j xi_k`.
pub fn lie_derivative_quadratic_form(x: &VectorField, g: &Matrix) -> Matrix {
    let n = x.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = x.apply(&g[i][j]);
                    for k in 0..n {
                        if !g[k][j].is_zero() {
                            acc = acc.add(&g[k][j].mul(&x.coeffs[k].diff(i)));
                        }
                        if !g[i][k].is_zero() {
                            acc = acc.add(&g[i][k].mul(&x.coeffs[k].diff(j)));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Prolonged generators acting on differentials, for checking a candidate
/// infinitesimal invariant in `x, dx`.
pub fn verify_infinitesimal_invariant(l: &LieAlgebra, w: &Expr) -> Vec<ZeroTest> {
    l.gens.iter().map(|g| fields::prolong_differentials(g).apply(w).is_identically_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Symbols;

    fn alg(vars: &[&str], gens: &[&str]) -> LieAlgebra {
        LieAlgebra::parse(Symbols::new(vars, &["c"]), gens).unwrap()
    }

    fn euclid() -> LieAlgebra {
        alg(&["x", "y", "z"], &["p", "q", "r", "x*q - y*p", "y*r - z*q", "z*p - x*r"])
    }

    #[test]
    fn euclidean_distance_is_proven() {
        let l = euclid();
        let s = l.sym.for_points(2);
        let j = Expr::parse("(x1-x2)^2 + (y1-y2)^2 + (z1-z2)^2", &s).unwrap();
        assert_eq!(verify_joint_invariant(&l, &j, 2, VerifyMode::Auto, &[], 0).unwrap(), Verdict::Proven);
        let bad = Expr::parse("(x1-x2)^2 + (y1-y2)^2", &s).unwrap();
        assert!(matches!(verify_joint_invariant(&l, &bad, 2, VerifyMode::Auto, &[], 0).unwrap(), Verdict::Refuted { .. }));
        assert_eq!(joint_invariant_count(&l, 2, 0), 1);
    }

    #[test]
    fn numeric_mode_supports() {
        let l = euclid();
        let s = l.sym.for_points(2);
        let j = Expr::parse("log((x1-x2)^2 + (y1-y2)^2 + (z1-z2)^2)", &s).unwrap();
        assert!(matches!(
            verify_joint_invariant(&l, &j, 2, VerifyMode::Numeric, &[], 0).unwrap(),
            Verdict::NumericallySupported { .. }
        ));
    }

    #[test]
    fn euclidean_criterion_and_arc_length() {
        let l = euclid();
        let rep = two_point_invariant_criterion(&l, 0).unwrap();
        assert!(rep.passes, "{rep:?}");
        assert!(arc_length_invariant_exists(&l, 0));
        let rep = infinitesimal_invariant_exists(&l, 0);
        assert!(rep.exists && rep.cross_check_agrees);
    }

    #[test]
    fn similarity_plane_has_no_arc_length() {
        let l = alg(&["x", "y"], &["p", "q", "x*p + y*q"]);
        assert!(infinitesimal_invariant_exists(&l, 0).exists);
        assert!(!arc_length_invariant_exists(&l, 0));
        let s = l.sym.for_points(2);
        let j = Expr::parse("(y2-y1)/(x2-x1)", &s).unwrap();
        assert_eq!(verify_joint_invariant(&l, &j, 2, VerifyMode::Auto, &[], 0).unwrap(), Verdict::Proven);
    }

    #[test]
    fn essential_check_euclidean() {
        let l = euclid();
        let s = l.sym.for_points(2);
        let j = Expr::parse("(x1-x2)^2 + (y1-y2)^2 + (z1-z2)^2", &s).unwrap();
        let rep = essential_invariant_check(&l, 3, &[j], &[], 0).unwrap();
        assert_eq!(rep, EssentialReport { count: 3, pullback_rank: 3, essential: false });
    }

    #[test]
    fn lie_derivative_of_euclidean_metric() {
        let l = euclid();
        let g: Matrix = linalg::identity(3);
        for x in &l.gens {
            let d = lie_derivative_quadratic_form(x, &g);
            assert!(d.iter().flatten().all(Expr::is_zero));
        }
        let dil = VectorField::parse("x*p + y*q + z*r", &l.sym).unwrap();
        let d = lie_derivative_quadratic_form(&dil, &g);
        assert_eq!(d[0][0], Expr::int(2));
    }
}
