//! Canonical text form.  The output re-parses to the same expression.

use std::fmt;

use num_traits::{One, Signed};

use super::{Atom, Expr, Monomial, Poly, Rational, Symbols};

pub struct Display<'a> {
    pub(super) expr: &'a Expr,
    pub(super) sym: &'a Symbols,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_expr(self.expr, self.sym))
    }
}

fn atom_str(a: &Atom, sym: &Symbols) -> String {
    match a {
        Atom::Var(i) => sym.vars.get(*i).cloned().unwrap_or_else(|| format!("x{}", i + 1)),
        Atom::Param(i) => sym.params.get(*i).cloned().unwrap_or_else(|| format!("c{}", i + 1)),
        Atom::Func(k, arg) => format!("{}({})", k.name(), fmt_expr(arg, sym)),
    }
}

fn mono_str(m: &Monomial, sym: &Symbols) -> String {
    let mut parts: Vec<(u8, String)> = m
        .powers()
        .iter()
        .map(|(a, e)| {
            let rank = match a {
                Atom::Param(_) => 0,
                Atom::Var(_) => 1,
                Atom::Func(..) => 2,
            };
            let s = atom_str(a, sym);
            (rank, if *e > 1 { format!("{s}^{e}") } else { s })
        })
        .collect();
    parts.sort_by_key(|(r, _)| *r);
    parts.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join("*")
}

/// Sign and magnitude text of `c * m`.
fn term_str(m: &Monomial, c: &Rational, sym: &Symbols) -> (bool, String) {
    let a = c.abs();
    let body = if m.is_one() {
        a.to_string()
    } else {
        let mut s = String::new();
        if !a.numer().is_one() {
            s.push_str(&a.numer().to_string());
            s.push('*');
        }
        s.push_str(&mono_str(m, sym));
        if !a.denom().is_one() {
            s.push('/');
            s.push_str(&a.denom().to_string());
        }
        s
    };
    (c.is_negative(), body)
}

fn poly_str(p: &Poly, k: &Rational, sym: &Symbols) -> String {
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().enumerate() {
        let (neg, body) = term_str(m, &(c * k), sym);
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

fn factor_str(p: &Poly, e: i32, sym: &Symbols) -> String {
    let base = if p.terms().len() == 1 {
        mono_str(&p.terms()[0].0, sym)
    } else {
        format!("({})", poly_str(p, &Rational::one(), sym))
    };
    if e > 1 {
        format!("{base}^{e}")
    } else {
        base
    }
}

pub(super) fn fmt_expr(e: &Expr, sym: &Symbols) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let num: Vec<(&Poly, i32)> = e.factors().filter(|(_, k)| *k > 0).collect();
    let den: Vec<(&Poly, i32)> = e.factors().filter(|(_, k)| *k < 0).collect();
    if den.is_empty() && num.len() == 1 && num[0].1 == 1 && num[0].0.terms().len() > 1 {
        return poly_str(num[0].0, e.coeff(), sym);
    }
    let a = e.coeff().abs();
    let mut num_items = Vec::new();
    if !a.numer().is_one() || num.is_empty() {
        num_items.push(a.numer().to_string());
    }
    num_items.extend(num.iter().map(|(p, k)| factor_str(p, *k, sym)));
    let mut den_items = Vec::new();
    if !a.denom().is_one() {
        den_items.push(a.denom().to_string());
    }
    den_items.extend(den.iter().map(|(p, k)| factor_str(p, -k, sym)));
    let mut s = String::new();
    if e.coeff().is_negative() {
        s.push('-');
    }
    s.push_str(&num_items.join("*"));
    if !den_items.is_empty() {
        s.push('/');
        if den_items.len() > 1 {
            s.push('(');
            s.push_str(&den_items.join("*"));
            s.push(')');
        } else {
            s.push_str(&den_items[0]);
        }
    }
    s
}
