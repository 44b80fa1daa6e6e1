//! Exact symbolic expressions.
//!
//! An [`Expr`] is a rational function over *atoms*: variables `x_i`, parameters
//! `c_j` and applications of `log`, `exp`, `atan`, `sqrt` to other expressions.
//! It is stored as `coeff * prod(f_k ^ e_k)` where every `f_k` is a monic,
//! non-constant polynomial in the atoms and `e_k` is a nonzero integer.  Sums are
//! brought over a common denominator on construction, so an expression is zero
//! exactly when its numerator polynomial vanishes.

mod eval;
mod parse;
pub mod poly;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use eval::{Compiled, EvalError};
pub use parse::ParseError;
pub use poly::{Monomial, Poly};

pub type Rational = BigRational;

/// Rational from a machine integer pair.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FnKind {
    Log,
    Exp,
    Atan,
    Sqrt,
}

impl FnKind {
    pub fn name(self) -> &'static str {
        match self {
            FnKind::Log => "log",
            FnKind::Exp => "exp",
            FnKind::Atan => "atan",
            FnKind::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<FnKind> {
        match s {
            "log" => Some(FnKind::Log),
            "exp" => Some(FnKind::Exp),
            "atan" => Some(FnKind::Atan),
            "sqrt" => Some(FnKind::Sqrt),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(usize),
    Param(usize),
    Func(FnKind, Box<Expr>),
}

impl Atom {
    fn depends_on_var(&self, v: usize) -> bool {
        match self {
            Atom::Var(i) => *i == v,
            Atom::Param(_) => false,
            Atom::Func(_, a) => a.depends_on_var(v),
        }
    }
}

/// Names used to read and print expressions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub vars: Vec<String>,
    pub params: Vec<String>,
}

impl Symbols {
    pub fn new<S: AsRef<str>>(vars: &[S], params: &[S]) -> Self {
        Symbols {
            vars: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// `x y z` becomes `x1 y1 z1 x2 y2 z2 ...` for `s` points.
    pub fn for_points(&self, s: usize) -> Symbols {
        let mut vars = Vec::new();
        for sigma in 1..=s {
            for v in &self.vars {
                vars.push(format!("{v}{sigma}"));
            }
        }
        Symbols { vars, params: self.params.clone() }
    }

    /// `x y z` becomes `x y z dx dy dz`.
    pub fn with_differentials(&self) -> Symbols {
        let mut vars = self.vars.clone();
        for v in &self.vars {
            vars.push(format!("d{v}"));
        }
        Symbols { vars, params: self.params.clone() }
    }
}

/// Three-valued answer of the zero test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ZeroTest {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    coeff: Rational,
    factors: BTreeMap<Poly, i32>,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr { coeff: Rational::zero(), factors: BTreeMap::new() }
    }

    pub fn one() -> Expr {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Expr {
        Expr { coeff: c, factors: BTreeMap::new() }
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(int(n))
    }

    pub fn var(i: usize) -> Expr {
        Expr::from_atom(Atom::Var(i))
    }

    pub fn param(i: usize) -> Expr {
        Expr::from_atom(Atom::Param(i))
    }

    pub fn from_atom(a: Atom) -> Expr {
        let mut factors = BTreeMap::new();
        factors.insert(Poly::atom(a), 1);
        Expr { coeff: Rational::one(), factors }
    }

    /// Applies an elementary function, folding the trivial constant cases.
    pub fn func(kind: FnKind, arg: Expr) -> Expr {
        if let Some(c) = arg.as_rational() {
            match kind {
                FnKind::Log if c.is_one() => return Expr::zero(),
                FnKind::Exp | FnKind::Atan if c.is_zero() => {
                    return if kind == FnKind::Exp { Expr::one() } else { Expr::zero() }
                }
                FnKind::Sqrt => {
                    if let Some(r) = rational_sqrt(&c) {
                        return Expr::constant(r);
                    }
                }
                _ => {}
            }
        }
        Expr::from_atom(Atom::Func(kind, Box::new(arg)))
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::func(FnKind::Log, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(FnKind::Exp, arg)
    }

    pub fn atan(arg: Expr) -> Expr {
        Expr::func(FnKind::Atan, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::func(FnKind::Sqrt, arg)
    }

    /// Builds the canonical form of a polynomial.
    pub fn from_poly(p: Poly) -> Expr {
        if p.is_zero() {
            return Expr::zero();
        }
        let content = p.monomial_content();
        let rest = if content.is_one() { p } else { p.div_monomial(&content) };
        let mut factors = BTreeMap::new();
        for (a, e) in content.powers() {
            factors.insert(Poly::atom(a.clone()), *e as i32);
        }
        if let Some(c) = rest.constant_value() {
            return Expr { coeff: c, factors };
        }
        let lc = rest.leading().expect("nonzero").1.clone();
        let monic = rest.scale(&lc.recip());
        factors.insert(monic, 1);
        Expr { coeff: lc, factors }
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Poly, i32)> {
        self.factors.iter().map(|(p, e)| (p, *e))
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.coeff.is_one() && self.factors.is_empty()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.factors.is_empty().then(|| self.coeff.clone())
    }

    /// Expanded numerator polynomial (including the coefficient).
    pub fn numerator_poly(&self) -> Poly {
        let mut p = Poly::constant(self.coeff.clone());
        for (f, e) in &self.factors {
            if *e > 0 {
                p = p.mul(&f.pow(*e as u32));
            }
        }
        p
    }

    /// Expanded denominator polynomial (monic).
    pub fn denominator_poly(&self) -> Poly {
        let mut p = Poly::constant(Rational::one());
        for (f, e) in &self.factors {
            if *e < 0 {
                p = p.mul(&f.pow((-e) as u32));
            }
        }
        p
    }

    pub fn numerator(&self) -> Expr {
        Expr {
            coeff: self.coeff.clone(),
            factors: self.factors.iter().filter(|(_, e)| **e > 0).map(|(p, e)| (p.clone(), *e)).collect(),
        }
    }

    pub fn denominator(&self) -> Expr {
        Expr {
            coeff: Rational::one(),
            factors: self.factors.iter().filter(|(_, e)| **e < 0).map(|(p, e)| (p.clone(), -*e)).collect(),
        }
    }

    /// `Some(p)` when the expression has no denominator.
    pub fn to_poly(&self) -> Option<Poly> {
        self.factors.values().all(|e| *e > 0).then(|| self.numerator_poly())
    }

    pub fn is_polynomial(&self) -> bool {
        self.factors.values().all(|e| *e > 0)
    }

    fn atoms_iter(&self) -> impl Iterator<Item = &Atom> {
        self.factors.keys().flat_map(|p| p.terms().iter().flat_map(|(m, _)| m.powers().iter().map(|(a, _)| a)))
    }

    pub fn depends_on_var(&self, v: usize) -> bool {
        self.atoms_iter().any(|a| a.depends_on_var(v))
    }

    /// True when no variable occurs (parameters and constants are allowed).
    pub fn is_var_free(&self) -> bool {
        self.atoms_iter().all(|a| match a {
            Atom::Var(_) => false,
            Atom::Param(_) => true,
            Atom::Func(_, e) => e.is_var_free(),
        })
    }

    /// True when some `log`, `exp`, `atan` or `sqrt` occurs.
    pub fn has_funcs(&self) -> bool {
        self.atoms_iter().any(|a| matches!(a, Atom::Func(..)))
    }

    /// One past the largest variable index used (0 when none).
    pub fn var_bound(&self) -> usize {
        self.atoms_iter()
            .map(|a| match a {
                Atom::Var(i) => i + 1,
                Atom::Param(_) => 0,
                Atom::Func(_, e) => e.var_bound(),
            })
            .max()
            .unwrap_or(0)
    }

    pub fn param_bound(&self) -> usize {
        self.atoms_iter()
            .map(|a| match a {
                Atom::Var(_) => 0,
                Atom::Param(i) => i + 1,
                Atom::Func(_, e) => e.param_bound(),
            })
            .max()
            .unwrap_or(0)
    }

    pub fn neg(&self) -> Expr {
        Expr { coeff: -&self.coeff, factors: self.factors.clone() }
    }

    pub fn scale(&self, k: &Rational) -> Expr {
        if k.is_zero() || self.is_zero() {
            return Expr::zero();
        }
        Expr { coeff: &self.coeff * k, factors: self.factors.clone() }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let mut factors = self.factors.clone();
        for (p, e) in &other.factors {
            merge_factor(&mut factors, p, *e);
        }
        let mut out = Expr { coeff: &self.coeff * &other.coeff, factors };
        out.cancel_factors();
        out
    }

    /// Divides numerator factors by denominator factors where exact.
    fn cancel_factors(&mut self) {
        let dens: Vec<Poly> = self.factors.iter().filter(|(_, e)| **e < 0).map(|(p, _)| p.clone()).collect();
        if dens.is_empty() || self.factors.values().all(|e| *e < 0) {
            return;
        }
        for d in dens {
            loop {
                let de = match self.factors.get(&d) {
                    Some(e) if *e < 0 => *e,
                    _ => break,
                };
                let hit = self.factors.iter().find_map(|(p, e)| {
                    if *e > 0 && p.terms().len() > 1 && p.degree() > d.degree() {
                        p.div_exact(&d).map(|q| (p.clone(), *e, q))
                    } else {
                        None
                    }
                });
                let Some((p, pe, q)) = hit else { break };
                // p^pe / d^-de with p = d*q
                let k = pe.min(-de);
                merge_factor(&mut self.factors, &p, -k);
                merge_factor(&mut self.factors, &d, k);
                let qe = Expr::from_poly(q);
                self.coeff *= num_traits::pow(qe.coeff.clone(), k as usize);
                for (f, e) in qe.factors {
                    merge_factor(&mut self.factors, &f, e * k);
                }
            }
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn recip(&self) -> Option<Expr> {
        if self.is_zero() {
            return None;
        }
        Some(Expr {
            coeff: self.coeff.recip(),
            factors: self.factors.iter().map(|(p, e)| (p.clone(), -e)).collect(),
        })
    }

    pub fn div(&self, other: &Expr) -> Option<Expr> {
        other.recip().map(|r| self.mul(&r))
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn pow(&self, e: i32) -> Option<Expr> {
        if e == 0 {
            return Some(Expr::one());
        }
        if self.is_zero() {
            return if e > 0 { Some(Expr::zero()) } else { None };
        }
        let c = if e > 0 {
            num_traits::pow(self.coeff.clone(), e as usize)
        } else {
            num_traits::pow(self.coeff.recip(), (-e) as usize)
        };
        Some(Expr { coeff: c, factors: self.factors.iter().map(|(p, k)| (p.clone(), k * e)).collect() })
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.factors == other.factors {
            let c = &self.coeff + &other.coeff;
            return if c.is_zero() { Expr::zero() } else { Expr { coeff: c, factors: self.factors.clone() } };
        }
        // split off the common part: min exponents (so the lcm of denominators)
        let mut common: BTreeMap<Poly, i32> = BTreeMap::new();
        let mut ra = Poly::constant(self.coeff.clone());
        let mut rb = Poly::constant(other.coeff.clone());
        let mut keys: Vec<&Poly> = self.factors.keys().chain(other.factors.keys()).collect();
        keys.sort();
        keys.dedup();
        for p in keys {
            let ea = self.factors.get(p).copied().unwrap_or(0);
            let eb = other.factors.get(p).copied().unwrap_or(0);
            let ec = ea.min(eb);
            if ec != 0 {
                common.insert(p.clone(), ec);
            }
            if ea > ec {
                ra = ra.mul(&p.pow((ea - ec) as u32));
            }
            if eb > ec {
                rb = rb.mul(&p.pow((eb - ec) as u32));
            }
        }
        let mut s = ra.add(&rb);
        if s.is_zero() {
            return Expr::zero();
        }
        // cancel against denominators where possible
        for (p, e) in common.iter_mut() {
            while *e < 0 {
                match s.div_exact(p) {
                    Some(q) => {
                        s = q;
                        *e += 1;
                    }
                    None => break,
                }
            }
        }
        common.retain(|_, e| *e != 0);
        let sum = Expr::from_poly(s);
        let mut factors = common;
        for (p, e) in &sum.factors {
            merge_factor(&mut factors, p, *e);
        }
        Expr { coeff: sum.coeff, factors }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), |acc, e| acc.add(e))
    }

    /// Partial derivative with respect to the variable `x_v`.
    pub fn diff(&self, v: usize) -> Expr {
        if self.is_zero() || !self.depends_on_var(v) {
            return Expr::zero();
        }
        // logarithmic derivative over the factors
        let mut total = Expr::zero();
        for (p, e) in &self.factors {
            let dp = diff_poly(p, v);
            if dp.is_zero() {
                continue;
            }
            let pe = Expr::from_poly(p.clone());
            let term = dp.div(&pe).expect("factor nonzero").scale(&int(*e as i64));
            total = total.add(&term);
        }
        self.mul(&total)
    }

    /// Replaces atoms according to `f` (returning `None` keeps the atom).
    /// Function arguments are rewritten recursively.
    pub fn substitute(&self, f: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        let mut out = Expr::constant(self.coeff.clone());
        for (p, e) in &self.factors {
            let q = subst_poly(p, f);
            let qe = q.pow(*e).unwrap_or_else(Expr::zero);
            out = out.mul(&qe);
            if out.is_zero() {
                break;
            }
        }
        out
    }

    /// Substitutes expressions for variables (`None` keeps the variable).
    pub fn subst_vars(&self, vals: &[Option<Expr>]) -> Expr {
        self.substitute(&|a| match a {
            Atom::Var(i) => vals.get(*i).cloned().flatten(),
            _ => None,
        })
    }

    pub fn subst_params(&self, vals: &[Option<Expr>]) -> Expr {
        self.substitute(&|a| match a {
            Atom::Param(i) => vals.get(*i).cloned().flatten(),
            _ => None,
        })
    }

    /// Renames variable `i` to `map[i]`.
    pub fn rename_vars(&self, map: &[usize]) -> Expr {
        self.substitute(&|a| match a {
            Atom::Var(i) => Some(Expr::var(map[*i])),
            _ => None,
        })
    }

    /// Exact value at rational variable values, parameters kept symbolic.
    pub fn at_point(&self, point: &[Rational]) -> Expr {
        let vals: Vec<Option<Expr>> = point.iter().map(|r| Some(Expr::constant(r.clone()))).collect();
        self.subst_vars(&vals)
    }

    /// Parses with the given names; see [`parse::parse_expr`] for the grammar.
    pub fn parse(src: &str, sym: &Symbols) -> Result<Expr, ParseError> {
        parse::parse_expr(src, sym)
    }

    pub fn display<'a>(&'a self, sym: &'a Symbols) -> print::Display<'a> {
        print::Display { expr: self, sym }
    }

    pub fn to_string_with(&self, sym: &Symbols) -> String {
        self.display(sym).to_string()
    }

    /// Zero test: exact for rational expressions, numerical fallback when
    /// function atoms survive cancellation.
    pub fn is_identically_zero(&self) -> ZeroTest {
        if self.is_zero() {
            return ZeroTest::Yes;
        }
        if !self.has_funcs() {
            return ZeroTest::No;
        }
        let nv = self.var_bound();
        let np = self.param_bound();
        let compiled = self.compile();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2e70);
        let mut evaluated = 0;
        for _ in 0..64 * 8 {
            if evaluated >= 64 {
                break;
            }
            let x: Vec<f64> = (0..nv).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let c: Vec<f64> = (0..np).map(|_| rng.gen_range(-2.0..2.0)).collect();
            match compiled.eval(&x, &c) {
                Ok(v) => {
                    evaluated += 1;
                    if !(v.abs() < 1e-10) {
                        return ZeroTest::No;
                    }
                }
                Err(_) => continue,
            }
        }
        ZeroTest::Unknown
    }

    /// Exact rational value at a point; fails on surviving function atoms.
    pub fn eval_rational(&self, vars: &[Rational], params: &[Rational]) -> Result<Rational, EvalError> {
        eval::eval_rational(self, vars, params)
    }

    pub fn eval_f64(&self, vars: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        self.compile().eval(vars, params)
    }

    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }
}

fn merge_factor(factors: &mut BTreeMap<Poly, i32>, p: &Poly, e: i32) {
    if e == 0 {
        return;
    }
    let remove = match factors.get_mut(p) {
        Some(x) => {
            *x += e;
            *x == 0
        }
        None => {
            factors.insert(p.clone(), e);
            false
        }
    };
    if remove {
        factors.remove(p);
    }
}

fn diff_atom(a: &Atom, v: usize) -> Expr {
    match a {
        Atom::Var(i) => {
            if *i == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Param(_) => Expr::zero(),
        Atom::Func(kind, arg) => {
            let da = arg.diff(v);
            if da.is_zero() {
                return Expr::zero();
            }
            match kind {
                FnKind::Log => da.div(arg).expect("log argument nonzero"),
                FnKind::Exp => da.mul(&Expr::from_atom(a.clone())),
                FnKind::Atan => {
                    let den = Expr::one().add(&arg.mul(arg));
                    da.div(&den).expect("1 + a^2 nonzero")
                }
                FnKind::Sqrt => {
                    let den = Expr::from_atom(a.clone()).scale(&int(2));
                    da.div(&den).expect("sqrt nonzero")
                }
            }
        }
    }
}

fn diff_poly(p: &Poly, v: usize) -> Expr {
    let mut out = Expr::from_poly(p.diff_atom(&Atom::Var(v)));
    for a in p.atoms() {
        if let Atom::Func(..) = a {
            if a.depends_on_var(v) {
                let da = diff_atom(&a, v);
                if !da.is_zero() {
                    out = out.add(&Expr::from_poly(p.diff_atom(&a)).mul(&da));
                }
            }
        }
    }
    out
}

fn subst_atom(a: &Atom, f: &dyn Fn(&Atom) -> Option<Expr>) -> Option<Expr> {
    if let Some(e) = f(a) {
        return Some(e);
    }
    match a {
        Atom::Func(kind, arg) => {
            let new_arg = arg.substitute(f);
            if new_arg == **arg {
                None
            } else {
                Some(Expr::func(*kind, new_arg))
            }
        }
        _ => None,
    }
}

fn subst_poly(p: &Poly, f: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
    let mut repl: BTreeMap<Atom, Expr> = BTreeMap::new();
    for a in p.atoms() {
        if let Some(e) = subst_atom(&a, f) {
            repl.insert(a, e);
        }
    }
    if repl.is_empty() {
        return Expr::from_poly(p.clone());
    }
    // polynomial replacements can be expanded directly
    let polys: Option<BTreeMap<Atom, Poly>> = repl.iter().map(|(a, e)| e.to_poly().map(|q| (a.clone(), q))).collect();
    if let Some(polys) = polys {
        let mut acc = Poly::zero();
        for (m, c) in p.terms() {
            let mut t = Poly::constant(c.clone());
            let mut kept = Vec::new();
            for (a, e) in m.powers() {
                match polys.get(a) {
                    Some(q) => t = t.mul(&q.pow(*e)),
                    None => kept.push((a.clone(), *e)),
                }
            }
            if !kept.is_empty() {
                t = t.mul_term(&Monomial(kept), &Rational::one());
            }
            acc = acc.add(&t);
        }
        return Expr::from_poly(acc);
    }
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut t = Expr::constant(c.clone());
        for (a, e) in m.powers() {
            let base = repl.get(a).cloned().unwrap_or_else(|| Expr::from_atom(a.clone()));
            t = t.mul(&base.pow(*e as i32).expect("positive power"));
        }
        acc = acc.add(&t);
    }
    acc
}

/// Square root of a nonnegative rational when it is a perfect square.
pub fn rational_sqrt(c: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    (&n * &n == *c.numer() && &d * &d == *c.denom()).then(|| Rational::new(n, d))
}

/// Nearest-f64 conversion of a rational.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = Symbols {
            vars: (0..self.var_bound()).map(|i| format!("x{}", i + 1)).collect(),
            params: (0..self.param_bound()).map(|i| format!("c{}", i + 1)).collect(),
        };
        write!(f, "{}", self.display(&sym))
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
