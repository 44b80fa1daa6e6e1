//! Vector fields `X = sum xi_i(x) d/dx_i` with symbolic coefficients.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;

use crate::expr::{int, Compiled, EvalError, Expr, ParseError, Rational, Symbols};
use crate::linalg;
use crate::sample;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("not a vector field: {0}")]
    NotLinearInBasis(String),
    #[error("operation needs dimension {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    pub coeffs: Vec<Expr>,
}

/// Basis symbols used when reading and writing fields over `sym`.
pub fn basis_names(sym: &Symbols) -> Vec<String> {
    let n = sym.vars.len();
    if n <= 3 {
        ["p", "q", "r"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("d{i}")).collect()
    }
}

impl VectorField {
    pub fn new(coeffs: Vec<Expr>) -> Self {
        VectorField { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        VectorField { coeffs: vec![Expr::zero(); n] }
    }

    /// The coordinate field `d/dx_i`.
    pub fn partial(n: usize, i: usize) -> Self {
        let mut f = VectorField::zero(n);
        f.coeffs[i] = Expr::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expr::is_zero)
    }

    /// `X f = sum xi_i df/dx_i`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.diff(i);
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        acc
    }

    /// `[X, Y]` with components `X(eta_i) - Y(xi_i)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        if self.dim() != other.dim() {
            return Err(FieldError::DimensionMismatch(self.dim(), other.dim()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(xi, eta)| self.apply(eta).sub(&other.apply(xi))).collect();
        Ok(VectorField { coeffs })
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, k: &Expr) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().map(|a| a.mul(k)).collect() }
    }

    /// `sum k_i X_i`.
    pub fn combination(fields: &[VectorField], k: &[Expr]) -> VectorField {
        let n = fields.first().map(|f| f.dim()).unwrap_or(0);
        fields.iter().zip(k).fold(VectorField::zero(n), |acc, (f, c)| if c.is_zero() { acc } else { acc.add(&f.scale(c)) })
    }

    pub fn subst_params(&self, vals: &[Option<Expr>]) -> VectorField {
        VectorField { coeffs: self.coeffs.iter().map(|c| c.subst_params(vals)).collect() }
    }

    /// Fixes every parameter to a rational value.
    pub fn instantiate(&self, params: &[Rational]) -> VectorField {
        let vals: Vec<Option<Expr>> = params.iter().map(|r| Some(Expr::constant(r.clone()))).collect();
        self.subst_params(&vals)
    }

    /// Coefficients at a rational point, parameters kept symbolic.
    pub fn value_at(&self, point: &[Rational]) -> Vec<Expr> {
        self.coeffs.iter().map(|c| c.at_point(point)).collect()
    }

    /// `J[nu][mu] = d xi_nu / d x_mu` at a rational point.
    pub fn jacobian_at(&self, point: &[Rational]) -> Vec<Vec<Expr>> {
        let n = self.dim();
        self.coeffs.iter().map(|c| (0..n).map(|mu| c.diff(mu).at_point(point)).collect()).collect()
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_polynomial() && !c.has_funcs())
    }

    pub fn compile(&self) -> CompiledField {
        CompiledField { coeffs: self.coeffs.iter().map(Expr::compile).collect() }
    }

    pub fn parse(src: &str, sym: &Symbols) -> Result<VectorField, FieldError> {
        let n = sym.vars.len();
        let names = basis_names(sym);
        let mut ext = sym.clone();
        let mut slots = Vec::new();
        for (i, b) in names.iter().enumerate() {
            if !sym.vars.contains(b) && !sym.params.contains(b) {
                ext.vars.push(b.clone());
                slots.push((i, ext.vars.len() - 1));
            }
        }
        if n <= 3 {
            for i in 0..n {
                let alt = format!("d{}", i + 1);
                if !sym.vars.contains(&alt) && !sym.params.contains(&alt) {
                    ext.vars.push(alt);
                    slots.push((i, ext.vars.len() - 1));
                }
            }
        }
        let e = Expr::parse(src, &ext)?;
        let mut coeffs = vec![Expr::zero(); n];
        let mut rest = e.clone();
        for &(i, v) in &slots {
            let c = e.diff(v);
            rest = rest.sub(&c.mul(&Expr::var(v)));
            coeffs[i] = coeffs[i].add(&c);
        }
        let leaks = coeffs.iter().any(|c| slots.iter().any(|(_, v)| c.depends_on_var(*v)));
        if !rest.is_zero() || leaks {
            return Err(FieldError::NotLinearInBasis(src.to_string()));
        }
        Ok(VectorField { coeffs })
    }

    pub fn display<'a>(&'a self, sym: &'a Symbols) -> FieldDisplay<'a> {
        FieldDisplay { field: self, sym }
    }

    pub fn to_string_with(&self, sym: &Symbols) -> String {
        self.display(sym).to_string()
    }
}

pub struct FieldDisplay<'a> {
    field: &'a VectorField,
    sym: &'a Symbols,
}

fn is_sum_form(e: &Expr) -> bool {
    let mut fs = e.factors();
    match (fs.next(), fs.next()) {
        (Some((p, 1)), None) => p.terms().len() > 1,
        _ => false,
    }
}

impl fmt::Display for FieldDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = basis_names(self.sym);
        let mut first = true;
        for (i, c) in self.field.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let tok = &names[i];
            let (neg, body) = if c.is_one() {
                (false, tok.clone())
            } else if c.neg().is_one() {
                (true, tok.clone())
            } else if is_sum_form(c) {
                (false, format!("({})*{tok}", c.display(self.sym)))
            } else {
                let s = c.display(self.sym).to_string();
                match s.strip_prefix('-') {
                    Some(rest) => (true, format!("{rest}*{tok}")),
                    None => (false, format!("{s}*{tok}")),
                }
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A field prepared for fast floating-point evaluation.
#[derive(Clone, Debug)]
pub struct CompiledField {
    coeffs: Vec<Compiled>,
}

impl CompiledField {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[f64], params: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.coeffs.iter().map(|c| c.eval(x, params)).collect()
    }

    pub fn eval_into(&self, x: &[f64], params: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.eval(x, params)?;
        }
        Ok(())
    }
}

/// Simultaneous action on `s` copies of the space (point `sigma` uses
/// variables `sigma*n .. sigma*n + n`).
pub fn prolong_points(fields: &[VectorField], s: usize) -> Vec<VectorField> {
    fields
        .iter()
        .map(|f| {
            let n = f.dim();
            let mut coeffs = Vec::with_capacity(n * s);
            for sigma in 0..s {
                let map: Vec<usize> = (0..n).map(|j| sigma * n + j).collect();
                for c in &f.coeffs {
                    coeffs.push(if sigma == 0 { c.clone() } else { c.rename_vars(&map) });
                }
            }
            VectorField { coeffs }
        })
        .collect()
}

/// First-order jet prolongation of a planar field `xi p + eta q` to `(x, y, z = y')`.
pub fn prolong_jet1(field: &VectorField) -> Result<VectorField, FieldError> {
    if field.dim() != 2 {
        return Err(FieldError::UnsupportedDimension { expected: 2, got: field.dim() });
    }
    let (xi, eta) = (&field.coeffs[0], &field.coeffs[1]);
    let z = Expr::var(2);
    let third = eta.diff(0).add(&eta.diff(1).sub(&xi.diff(0)).mul(&z)).sub(&xi.diff(1).mul(&z).mul(&z));
    Ok(VectorField { coeffs: vec![xi.clone(), eta.clone(), third] })
}

/// Action on points and differentials: variables `x_1..x_n, dx_1..dx_n`.
pub fn prolong_differentials(field: &VectorField) -> VectorField {
    let n = field.dim();
    let mut coeffs = field.coeffs.clone();
    for nu in 0..n {
        let mut acc = Expr::zero();
        for tau in 0..n {
            let d = field.coeffs[nu].diff(tau);
            if !d.is_zero() {
                acc = acc.add(&d.mul(&Expr::var(n + tau)));
            }
        }
        coeffs.push(acc);
    }
    VectorField { coeffs }
}

/// Value plus linear part at `base`, written in coordinates centred at `base`.
pub fn truncate_to_linear(field: &VectorField, base: &[Rational]) -> VectorField {
    let n = field.dim();
    let val = field.value_at(base);
    let jac = field.jacobian_at(base);
    let coeffs = (0..n)
        .map(|nu| {
            let mut acc = val[nu].clone();
            for mu in 0..n {
                acc = acc.add(&jac[nu][mu].mul(&Expr::var(mu)));
            }
            acc
        })
        .collect();
    VectorField { coeffs }
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).fold(int(1), |acc, i| acc * int(i))
}

/// Taylor coefficients of every component up to `order` at `base`.
pub fn taylor_vector(field: &VectorField, base: &[Rational], order: u32) -> Vec<Expr> {
    let n = field.dim();
    let mut out = Vec::new();
    for c in &field.coeffs {
        let mut cache: HashMap<Vec<u32>, Expr> = HashMap::new();
        cache.insert(vec![0; n], c.clone());
        let mut layer = vec![vec![0u32; n]];
        out.push(c.at_point(base));
        for _deg in 1..=order {
            let mut next = Vec::new();
            for alpha in &layer {
                let start = alpha.iter().position(|a| *a > 0).unwrap_or(n);
                // extend only at or before the first nonzero index, so each multi-index appears once
                for j in 0..n.min(start + 1) {
                    let mut beta = alpha.clone();
                    beta[j] += 1;
                    let d = cache[alpha].diff(j);
                    let denom: Rational = beta.iter().map(|k| factorial(*k)).product();
                    out.push(d.at_point(base).scale(&(int(1) / denom)));
                    cache.insert(beta.clone(), d);
                    next.push(beta);
                }
            }
            layer = next;
        }
    }
    out
}

/// Number of fields linearly independent over constants, from exact Taylor
/// coefficients at `base` (parameters are treated as indeterminates).
pub fn linear_independence_over_constants(fields: &[VectorField], base: &[Rational], max_order: u32) -> usize {
    let poly_deg = fields
        .iter()
        .flat_map(|f| f.coeffs.iter())
        .map(|c| if c.is_polynomial() && !c.has_funcs() { c.numerator_poly().degree() } else { max_order })
        .max()
        .unwrap_or(0);
    let order = poly_deg.min(max_order);
    let rows: Vec<Vec<Expr>> = fields.iter().map(|f| taylor_vector(f, base, order)).collect();
    linalg::rank(&rows)
}

/// Whether two families span the same space over the constants.
pub fn spans_equal_over_constants(a: &[VectorField], b: &[VectorField], base: &[Rational]) -> bool {
    let ra = linear_independence_over_constants(a, base, 6);
    let rb = linear_independence_over_constants(b, base, 6);
    let both: Vec<VectorField> = a.iter().chain(b).cloned().collect();
    ra == rb && linear_independence_over_constants(&both, base, 6) == ra
}

/// Values of the fields at a rational point, `None` if some coefficient is undefined
/// there or not rational.
pub fn exact_values(fields: &[VectorField], point: &[Rational], params: &[Rational]) -> Option<Vec<Vec<Rational>>> {
    fields.iter().map(|f| f.coeffs.iter().map(|c| c.eval_rational(point, params).ok()).collect::<Option<Vec<_>>>()).collect()
}

/// Rank of the fields at a point where all coordinates (and parameters) are
/// drawn at random: the maximum over 8 draws.
pub fn generic_rank(fields: &[VectorField], seed: u64) -> usize {
    if fields.is_empty() {
        return 0;
    }
    let n = fields[0].dim();
    let np = fields.iter().flat_map(|f| f.coeffs.iter()).map(Expr::param_bound).max().unwrap_or(0);
    let mut rng = sample::rng(seed);
    let mut best = 0;
    let mut done = 0;
    let mut attempts = 0;
    while done < 8 && attempts < 200 {
        attempts += 1;
        let pt = sample::point(&mut rng, n);
        let params: Vec<Rational> = (0..np).map(|_| sample::generic_rational(&mut rng)).collect();
        let r = match exact_values(fields, &pt, &params) {
            Some(m) => linalg::rank(&m),
            None => {
                let x: Vec<f64> = pt.iter().map(crate::expr::to_f64).collect();
                let c: Vec<f64> = params.iter().map(crate::expr::to_f64).collect();
                let rows: Option<Vec<Vec<f64>>> = fields.iter().map(|f| f.compile().eval(&x, &c).ok()).collect();
                match rows {
                    Some(rows) => linalg::numeric_rank(&rows, 1e-9),
                    None => continue,
                }
            }
        };
        best = best.max(r);
        done += 1;
    }
    best
}

/// Rank of the fields at an exact point with parameters symbolic.
pub fn rank_at(fields: &[VectorField], point: &[Rational]) -> usize {
    let rows: Vec<Vec<Expr>> = fields.iter().map(|f| f.value_at(point)).collect();
    linalg::rank(&rows)
}

pub fn origin(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym3() -> Symbols {
        Symbols::new(&["x", "y", "z"], &["c"])
    }

    fn f(s: &str) -> VectorField {
        VectorField::parse(s, &sym3()).unwrap()
    }

    #[test]
    fn bracket_example() {
        let b = f("p").bracket(&f("x^2*q + 2*x*r")).unwrap();
        assert_eq!(b.to_string_with(&sym3()), "2*x*q + 2*r");
        let b = f("x*q - y*p").bracket(&f("y*r - z*q")).unwrap();
        assert_eq!(b.to_string_with(&sym3()), "-z*p + x*r");
    }

    #[test]
    fn parse_rejects_nonlinear() {
        assert!(matches!(VectorField::parse("p*q", &sym3()), Err(FieldError::NotLinearInBasis(_))));
        assert!(matches!(VectorField::parse("x + p", &sym3()), Err(FieldError::NotLinearInBasis(_))));
        assert!(VectorField::parse("x*d1 + d3", &sym3()).unwrap() == f("x*p + r"));
    }

    #[test]
    fn field_printing_signs() {
        assert_eq!(f("-y/(x^2+y^2)*p + (x + y)*q - r").to_string_with(&sym3()), "-y/(x^2 + y^2)*p + (x + y)*q - r");
        assert_eq!(f("0*p").to_string_with(&sym3()), "0");
    }

    #[test]
    fn jet_prolongation_of_rotation() {
        let s2 = Symbols::new(&["x", "y"], &[] as &[&str]);
        let x = VectorField::parse("y*p - x*q", &s2).unwrap();
        let j = prolong_jet1(&x).unwrap();
        assert_eq!(j.to_string_with(&sym3()), "y*p - x*q + (-z^2 - 1)*r");
    }

    #[test]
    fn differentials_of_dilation() {
        let d = prolong_differentials(&f("x*p + 2*y*q"));
        let s = sym3().with_differentials();
        assert_eq!(d.dim(), 6);
        let inv = Expr::parse("dy/dx^2", &s).unwrap();
        assert!(d.apply(&inv).is_zero());
    }

    #[test]
    fn truncation_at_point() {
        let t = truncate_to_linear(&f("x^2*p + y*q"), &[int(1), int(0), int(0)]);
        assert_eq!(t.to_string_with(&sym3()), "(2*x + 1)*p + y*q");
    }

    #[test]
    fn ranks() {
        let fs = vec![f("r"), f("x*r"), f("y*r")];
        assert_eq!(generic_rank(&fs, 0), 1);
        assert_eq!(linear_independence_over_constants(&fs, &origin(3), 4), 3);
        let fs = vec![f("p"), f("q"), f("x*p + y*q")];
        assert_eq!(generic_rank(&fs, 0), 2);
        let pp = prolong_points(&fs, 2);
        assert_eq!(generic_rank(&pp, 0), 3);
    }

    #[test]
    fn prolonged_names() {
        let pp = prolong_points(&[f("x*q")], 2);
        let s = sym3().for_points(2);
        assert_eq!(pp[0].to_string_with(&s), "x1*d2 + x2*d5");
    }

    fn arb_field() -> impl Strategy<Value = VectorField> {
        let term = prop_oneof![
            Just("1"), Just("x"), Just("y"), Just("z"), Just("x*y"), Just("x^2"), Just("c*z"), Just("y*z")
        ];
        proptest::collection::vec((term, -2i64..3), 3).prop_map(|cs| {
            VectorField::new(cs.into_iter().map(|(t, k)| Expr::parse(t, &sym3()).unwrap().scale(&int(k))).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_antisymmetric(a in arb_field(), b in arb_field()) {
            let s = a.bracket(&b).unwrap().add(&b.bracket(&a).unwrap());
            prop_assert!(s.is_zero());
        }

        #[test]
        fn jacobi_identity(a in arb_field(), b in arb_field(), c in arb_field()) {
            let j = a.bracket(&b.bracket(&c).unwrap()).unwrap()
                .add(&b.bracket(&c.bracket(&a).unwrap()).unwrap())
                .add(&c.bracket(&a.bracket(&b).unwrap()).unwrap());
            prop_assert!(j.is_zero());
        }

        #[test]
        fn bracket_is_commutator(a in arb_field(), b in arb_field()) {
            let g = Expr::parse("x^2*y + z*c", &sym3()).unwrap();
            let lhs = a.bracket(&b).unwrap().apply(&g);
            let rhs = a.apply(&b.apply(&g)).sub(&b.apply(&a.apply(&g)));
            prop_assert!(lhs.sub(&rhs).is_zero());
        }

        #[test]
        fn field_print_round_trip(a in arb_field()) {
            let back = VectorField::parse(&a.to_string_with(&sym3()), &sym3()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
