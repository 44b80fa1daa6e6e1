//! Finite-dimensional Lie algebras of vector fields.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::expr::{Atom, Expr, Monomial, Poly, Rational, Symbols};
use crate::fields::{self, FieldError, VectorField};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("bracket [X{}, X{}] leaves the span; residual {residual_text}", .j + 1, .k + 1)]
    NotClosed { j: usize, k: usize, residual: VectorField, residual_text: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("structure constants depend on the variables at [X{}, X{}]", .0 + 1, .1 + 1)]
    NonConstant(usize, usize),
}

/// Generators of an algebra of fields together with the names of its
/// coordinates and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    pub sym: Symbols,
    pub gens: Vec<VectorField>,
}

impl LieAlgebra {
    pub fn new(sym: Symbols, gens: Vec<VectorField>) -> Self {
        LieAlgebra { sym, gens }
    }

    pub fn parse<S: AsRef<str>>(sym: Symbols, gens: &[S]) -> Result<Self, FieldError> {
        let gens = gens.iter().map(|g| VectorField::parse(g.as_ref(), &sym)).collect::<Result<_, _>>()?;
        Ok(LieAlgebra { sym, gens })
    }

    /// Dimension of the underlying space.
    pub fn n(&self) -> usize {
        self.sym.vars.len()
    }

    /// Number of generators.
    pub fn r(&self) -> usize {
        self.gens.len()
    }

    /// Substitutes rational values for all parameters.
    pub fn instantiate(&self, values: &[Rational]) -> LieAlgebra {
        LieAlgebra { sym: self.sym.clone(), gens: self.gens.iter().map(|g| g.instantiate(values)).collect() }
    }

    pub fn gen_strings(&self) -> Vec<String> {
        self.gens.iter().map(|g| g.to_string_with(&self.sym)).collect()
    }
}

/// `c[j][k][s]` is the coefficient of `X_s` in `[X_j, X_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    pub c: Vec<Vec<Vec<Expr>>>,
}

impl StructureConstants {
    pub fn r(&self) -> usize {
        self.c.len()
    }

    pub fn get(&self, j: usize, k: usize, s: usize) -> &Expr {
        &self.c[j][k][s]
    }

    pub fn instantiate(&self, params: &[Rational]) -> Option<Vec<Vec<Vec<Rational>>>> {
        self.c
            .iter()
            .map(|row| row.iter().map(|v| v.iter().map(|e| e.eval_rational(&[], params).ok()).collect()).collect())
            .collect()
    }

    /// Lines `[Xj, Xk] = ...` for the nonzero brackets with `j < k`.
    pub fn describe(&self, sym: &Symbols) -> Vec<String> {
        let r = self.r();
        let mut out = Vec::new();
        for j in 0..r {
            for k in j + 1..r {
                let combo = format_combination(&self.c[j][k], sym);
                out.push(format!("[X{}, X{}] = {}", j + 1, k + 1, combo));
            }
        }
        out
    }
}

fn format_combination(coeffs: &[Expr], sym: &Symbols) -> String {
    let mut s = String::new();
    for (t, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let x = format!("X{}", t + 1);
        let text = c.to_string_with(sym);
        let sum_form = text[1..].contains(" + ") || text[1..].contains(" - ");
        let (neg, body) = if c.is_one() {
            (false, x)
        } else if c.neg().is_one() {
            (true, x)
        } else if sum_form {
            (false, format!("({text})*{x}"))
        } else if let Some(rest) = text.strip_prefix('-') {
            (true, format!("{rest}*{x}"))
        } else {
            (false, format!("{text}*{x}"))
        };
        match (s.is_empty(), neg) {
            (true, true) => s.push('-'),
            (true, false) => {}
            (false, true) => s.push_str(" - "),
            (false, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn var_like(a: &Atom) -> bool {
    match a {
        Atom::Var(_) => true,
        Atom::Param(_) => false,
        Atom::Func(_, e) => !e.is_var_free(),
    }
}

/// Splits a polynomial in atoms into `variable monomial -> parameter coefficient`.
fn split_by_var_monomial(p: &Poly) -> BTreeMap<Monomial, Poly> {
    let mut groups: BTreeMap<Monomial, Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (v, q): (Vec<_>, Vec<_>) = m.powers().iter().cloned().partition(|(a, _)| var_like(a));
        groups.entry(Monomial(v)).or_default().push((Monomial(q), c.clone()));
    }
    groups.into_iter().map(|(m, ts)| (m, Poly::from_terms(ts))).collect()
}

/// Linear system expressing "B is a constant combination of the generators",
/// one row per (component, variable monomial).
struct SpanSystem {
    /// `rows[i][s]` for generator `s`; last column is the target.
    rows: Vec<Vec<Expr>>,
    keys: Vec<(usize, Monomial)>,
    denominators: Vec<Expr>,
}

fn span_system(gens: &[VectorField], target: &VectorField) -> SpanSystem {
    let n = target.dim();
    let mut rows = Vec::new();
    let mut keys = Vec::new();
    let mut denominators = Vec::new();
    for i in 0..n {
        let mut lcm: BTreeMap<Poly, i32> = BTreeMap::new();
        for e in gens.iter().map(|g| &g.coeffs[i]).chain(std::iter::once(&target.coeffs[i])) {
            for (p, k) in e.factors() {
                if k < 0 {
                    let slot = lcm.entry(p.clone()).or_insert(0);
                    *slot = (*slot).max(-k);
                }
            }
        }
        let den = lcm.iter().fold(Expr::one(), |acc, (p, k)| acc.mul(&Expr::from_poly(p.clone()).pow(*k).expect("power")));
        let cols: Vec<BTreeMap<Monomial, Poly>> = gens
            .iter()
            .map(|g| &g.coeffs[i])
            .chain(std::iter::once(&target.coeffs[i]))
            .map(|e| split_by_var_monomial(&e.mul(&den).to_poly().expect("cleared denominator")))
            .collect();
        let mut monos: Vec<Monomial> = cols.iter().flat_map(|m| m.keys().cloned()).collect();
        monos.sort();
        monos.dedup();
        for m in monos.into_iter().rev() {
            let row = cols.iter().map(|c| c.get(&m).map(|p| Expr::from_poly(p.clone())).unwrap_or_else(Expr::zero)).collect();
            rows.push(row);
            keys.push((i, m));
        }
        denominators.push(den);
    }
    SpanSystem { rows, keys, denominators }
}

/// Constant coefficients `lambda` with `target = sum lambda_s gens_s`, or the
/// part of `target` left after reduction against the span.
pub fn express_in_span(gens: &[VectorField], target: &VectorField) -> Result<Vec<Expr>, VectorField> {
    let r = gens.len();
    let sys = span_system(gens, target);
    let a: Vec<Vec<Expr>> = sys.rows.iter().map(|row| row[..r].to_vec()).collect();
    let b: Vec<Expr> = sys.rows.iter().map(|row| row[r].clone()).collect();
    if let Some(x) = linalg::solve(&a, &b) {
        let check = target.sub(&VectorField::combination(gens, &x));
        if check.is_zero() {
            return Ok(x);
        }
    }
    // residual: reduce the target row against an echelon basis of the generator rows
    let gen_rows: Vec<Vec<Expr>> = linalg::transpose(&a);
    let mut ech = gen_rows;
    let pivots = linalg::rref(&mut ech);
    let mut t = b;
    for (row, &pc) in ech.iter().zip(&pivots) {
        let f = t[pc].clone();
        if !f.is_zero() {
            for (tj, rj) in t.iter_mut().zip(row) {
                *tj = tj.sub(&f.mul(rj));
            }
        }
    }
    let n = target.dim();
    let mut coeffs = vec![Expr::zero(); n];
    for ((i, m), v) in sys.keys.iter().zip(&t) {
        if v.is_zero() {
            continue;
        }
        let mono = Expr::from_poly(Poly(vec![(m.clone(), Rational::from_integer(1.into()))]));
        coeffs[*i] = coeffs[*i].add(&v.mul(&mono));
    }
    for (c, d) in coeffs.iter_mut().zip(&sys.denominators) {
        *c = c.div(d).expect("nonzero denominator");
    }
    Err(VectorField::new(coeffs))
}

/// Checks that all brackets fall in the constant span of the generators.
pub fn check_closure(l: &LieAlgebra) -> Result<StructureConstants, AlgebraError> {
    let r = l.r();
    let mut c = vec![vec![vec![Expr::zero(); r]; r]; r];
    for j in 0..r {
        for k in j + 1..r {
            let b = l.gens[j].bracket(&l.gens[k])?;
            match express_in_span(&l.gens, &b) {
                Ok(lam) => {
                    if lam.iter().any(|e| !e.is_var_free()) {
                        return Err(AlgebraError::NonConstant(j, k));
                    }
                    c[k][j] = lam.iter().map(Expr::neg).collect();
                    c[j][k] = lam;
                }
                Err(residual) => {
                    let residual_text = residual.to_string_with(&l.sym);
                    return Err(AlgebraError::NotClosed { j, k, residual, residual_text });
                }
            }
        }
    }
    Ok(StructureConstants { c })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StructureReport {
    pub antisymmetric: bool,
    pub jacobi: bool,
    /// First `(j, k, l, t)` where the Jacobi sum is nonzero.
    pub jacobi_violation: Option<(usize, usize, usize, usize)>,
}

impl StructureReport {
    pub fn ok(&self) -> bool {
        self.antisymmetric && self.jacobi
    }
}

/// Antisymmetry and the Jacobi identity in terms of the constants, exactly.
pub fn verify_structure(sc: &StructureConstants) -> StructureReport {
    let r = sc.r();
    let c = &sc.c;
    let antisymmetric = (0..r).all(|j| (0..r).all(|k| (0..r).all(|s| c[j][k][s].add(&c[k][j][s]).is_zero())));
    let mut violation = None;
    'outer: for j in 0..r {
        for k in j + 1..r {
            for l in k + 1..r {
                for t in 0..r {
                    let mut acc = Expr::zero();
                    for s in 0..r {
                        for (a, b) in [(&c[j][k][s], &c[s][l][t]), (&c[k][l][s], &c[s][j][t]), (&c[l][j][s], &c[s][k][t])] {
                            if !a.is_zero() && !b.is_zero() {
                                acc = acc.add(&a.mul(b));
                            }
                        }
                    }
                    if !acc.is_zero() {
                        violation = Some((j, k, l, t));
                        break 'outer;
                    }
                }
            }
        }
    }
    StructureReport { antisymmetric, jacobi: violation.is_none(), jacobi_violation: violation }
}

/// Generic rank of the generators equals the dimension.
pub fn is_transitive(l: &LieAlgebra, seed: u64) -> bool {
    fields::generic_rank(&l.gens, seed) == l.n()
}

/// Coefficient vectors `lambda` spanning the generators vanishing at `base`.
pub fn isotropy_coefficients(l: &LieAlgebra, base: &[Rational]) -> Vec<Vec<Expr>> {
    let vals: Vec<Vec<Expr>> = l.gens.iter().map(|g| g.value_at(base)).collect();
    let mut basis = linalg::kernel(&linalg::transpose(&vals), l.r());
    for v in basis.iter_mut() {
        clear_denominators(v);
    }
    basis
}

/// Scales a vector of parameter expressions so its entries have no
/// rational denominators and the first nonzero entry is positive.
fn clear_denominators(v: &mut [Expr]) {
    let mut l = num_bigint::BigInt::from(1);
    for e in v.iter() {
        l = num_integer::Integer::lcm(&l, e.coeff().denom());
    }
    let mut k = Rational::from_integer(l);
    if let Some(first) = v.iter().find(|e| !e.is_zero()) {
        if first.coeff().is_negative() {
            k = -k;
        }
    }
    for e in v.iter_mut() {
        *e = e.scale(&k);
    }
}

/// Isotropy subalgebra at `base` as fields.
pub fn isotropy_at(l: &LieAlgebra, base: &[Rational]) -> Vec<VectorField> {
    isotropy_coefficients(l, base).iter().map(|lam| VectorField::combination(&l.gens, lam)).collect()
}

pub type Matrix = Vec<Vec<Expr>>;

/// Jacobians at `base` of an isotropy basis (not pruned).
pub fn isotropy_jacobians(l: &LieAlgebra, base: &[Rational]) -> Vec<Matrix> {
    isotropy_at(l, base).iter().map(|f| f.jacobian_at(base)).collect()
}

/// Linearly independent Jacobians of the isotropy fields at `base`.
pub fn linear_isotropy(l: &LieAlgebra, base: &[Rational]) -> Vec<Matrix> {
    prune_matrices(isotropy_jacobians(l, base))
}

pub fn prune_matrices(ms: Vec<Matrix>) -> Vec<Matrix> {
    let mut kept: Vec<Matrix> = Vec::new();
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for m in ms {
        let flat: Vec<Expr> = m.iter().flatten().cloned().collect();
        rows.push(flat);
        if linalg::rank(&rows) == kept.len() + 1 {
            kept.push(m);
        } else {
            rows.pop();
        }
    }
    kept
}

/// The linear field `sum_nu (sum_mu a[nu][mu] x_mu) d/dx_nu`.
pub fn linear_field(a: &Matrix) -> VectorField {
    VectorField::new(
        a.iter()
            .map(|row| row.iter().enumerate().fold(Expr::zero(), |acc, (mu, v)| if v.is_zero() { acc } else { acc.add(&v.mul(&Expr::var(mu))) }))
            .collect(),
    )
}

/// Translations together with the linear isotropy fields at `base`.
pub fn reduced_algebra(l: &LieAlgebra, base: &[Rational]) -> LieAlgebra {
    let n = l.n();
    let mut gens: Vec<VectorField> = (0..n).map(|i| VectorField::partial(n, i)).collect();
    gens.extend(linear_isotropy(l, base).iter().map(linear_field));
    LieAlgebra { sym: l.sym.clone(), gens }
}

/// `K_jk = sum_{s,t} c_js^t c_kt^s`.
pub fn killing_form(sc: &StructureConstants) -> Matrix {
    let r = sc.r();
    let c = &sc.c;
    (0..r)
        .map(|j| {
            (0..r)
                .map(|k| {
                    let mut acc = Expr::zero();
                    for s in 0..r {
                        for t in 0..r {
                            if !c[j][s][t].is_zero() && !c[k][t][s].is_zero() {
                                acc = acc.add(&c[j][s][t].mul(&c[k][t][s]));
                            }
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `(positive, zero, negative)` inertia of a symmetric rational matrix.
pub fn signature(m: &[Vec<Rational>]) -> (usize, usize, usize) {
    let n = m.len();
    let mut a = m.to_vec();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(i, k);
                for row in a.iter_mut() {
                    row.swap(i, k);
                }
            } else if let Some((i, j)) = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero()) {
                // x_i += x_j makes the diagonal entry 2 a_ij
                for col in 0..n {
                    let v = a[j][col].clone();
                    a[i][col] += v;
                }
                for row in a.iter_mut() {
                    let v = row[j].clone();
                    row[i] += v;
                }
                if i != k {
                    a.swap(i, k);
                    for row in a.iter_mut() {
                        row.swap(i, k);
                    }
                }
            } else {
                break;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let f = &a[i][k] / &p;
            if f.is_zero() {
                continue;
            }
            for col in k..n {
                let v = &f * &a[k][col];
                a[i][col] -= v;
            }
            for row in a.iter_mut() {
                let v = &f * &row[k];
                row[i] -= v;
            }
        }
    }
    (pos, n - pos - neg, neg)
}

/// Inertia of the Killing form after fixing the parameters.
pub fn killing_form_signature(sc: &StructureConstants, params: &[Rational]) -> Option<(usize, usize, usize)> {
    let k = killing_form(sc);
    let kr: Option<Vec<Vec<Rational>>> = k.iter().map(|row| row.iter().map(|e| e.eval_rational(&[], params).ok()).collect()).collect();
    kr.map(|m| signature(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::int;

    fn sym() -> Symbols {
        Symbols::new(&["x", "y", "z"], &["c"])
    }

    fn alg(gens: &[&str]) -> LieAlgebra {
        LieAlgebra::parse(sym(), gens).unwrap()
    }

    #[test]
    fn rotations_close_with_killing_form() {
        let l = alg(&["x*q - y*p", "y*r - z*q", "z*p - x*r"]);
        let sc = check_closure(&l).unwrap();
        assert!(verify_structure(&sc).ok());
        assert_eq!(killing_form_signature(&sc, &[]), Some((0, 0, 3)));
        let k = killing_form(&sc);
        assert_eq!(k[0][0], Expr::int(-2));
        assert!(k[0][1].is_zero());
    }

    #[test]
    fn not_closed_residual() {
        let l = alg(&["p", "x*q"]);
        match check_closure(&l) {
            Err(AlgebraError::NotClosed { j: 0, k: 1, residual_text, .. }) => assert_eq!(residual_text, "q"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parameter_dependent_constants() {
        let l = alg(&["p", "q", "x*p + c*y*q"]);
        let sc = check_closure(&l).unwrap();
        assert_eq!(sc.c[1][2][1], Expr::param(0));
        assert!(verify_structure(&sc).ok());
    }

    #[test]
    fn jacobi_violation_detected() {
        // constants of a non-Lie bracket: [1,2]=3, [2,3]=1, [3,1]=1
        let mut c = vec![vec![vec![Expr::zero(); 3]; 3]; 3];
        let mut set = |j: usize, k: usize, s: usize| {
            c[j][k][s] = Expr::one();
            c[k][j][s] = Expr::int(-1);
        };
        set(0, 1, 2);
        set(1, 2, 0);
        set(2, 0, 0);
        let rep = verify_structure(&StructureConstants { c });
        assert!(rep.antisymmetric);
        assert!(!rep.jacobi);
    }

    #[test]
    fn isotropy_and_reduction() {
        let l = alg(&["q", "p", "x*q + r", "x^2*q + 2*x*r", "x*p + y*q + c*r", "x^2*p + 2*x*y*q + 2*(c*x + y)*r"]);
        let o = fields::origin(3);
        assert_eq!(isotropy_at(&l, &o).len(), 3);
        let red = reduced_algebra(&l, &o);
        let expected = alg(&["q", "p", "r", "x*r", "x*p + y*q - c*x*q", "y*r"]);
        assert!(fields::spans_equal_over_constants(&red.gens, &expected.gens, &o));
    }

    #[test]
    fn signature_with_zero_diagonal() {
        let m = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(signature(&m), (1, 0, 1));
        let m = vec![vec![int(1), int(2), int(0)], vec![int(2), int(4), int(0)], vec![int(0), int(0), int(-3)]];
        assert_eq!(signature(&m), (1, 1, 1));
    }
}
