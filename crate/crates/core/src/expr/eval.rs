//! Floating-point and exact evaluation.

use num_traits::{One, ToPrimitive, Zero};

use super::{to_f64, Atom, Expr, FnKind, Poly, Rational};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error ({reason}) at {subexpr}")]
    Domain { subexpr: Expr, reason: &'static str },
    #[error("no value supplied for {0}")]
    Missing(String),
    #[error("value is not rational: {0}")]
    NotRational(Expr),
}

#[derive(Clone, Debug)]
enum CAtom {
    Var(usize),
    Param(usize),
    Func(FnKind, Box<Compiled>, Expr),
}

#[derive(Clone, Debug)]
struct CFactor {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
    exp: i32,
    source: Poly,
}

/// An expression prepared for repeated floating-point evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    atoms: Vec<CAtom>,
    coeff: f64,
    factors: Vec<CFactor>,
}

impl Compiled {
    pub fn new(e: &Expr) -> Compiled {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut factors = Vec::new();
        for (p, exp) in e.factors() {
            let mut terms = Vec::new();
            for (m, c) in p.terms() {
                let mut mono = Vec::new();
                for (a, k) in m.powers() {
                    let idx = match atoms.iter().position(|b| b == a) {
                        Some(i) => i,
                        None => {
                            atoms.push(a.clone());
                            atoms.len() - 1
                        }
                    };
                    mono.push((idx, *k as i32));
                }
                terms.push((to_f64(c), mono));
            }
            factors.push(CFactor { terms, exp, source: p.clone() });
        }
        let atoms = atoms
            .into_iter()
            .map(|a| match a {
                Atom::Var(i) => CAtom::Var(i),
                Atom::Param(i) => CAtom::Param(i),
                Atom::Func(k, arg) => {
                    let c = Compiled::new(&arg);
                    CAtom::Func(k, Box::new(c), Expr::from_atom(Atom::Func(k, arg)))
                }
            })
            .collect();
        Compiled { atoms, coeff: to_f64(e.coeff()), factors }
    }

    pub fn eval(&self, vars: &[f64], params: &[f64]) -> Result<f64, EvalError> {
        if self.coeff == 0.0 {
            return Ok(0.0);
        }
        let mut vals = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let v = match a {
                CAtom::Var(i) => *vars.get(*i).ok_or_else(|| EvalError::Missing(format!("variable {}", i + 1)))?,
                CAtom::Param(i) => *params.get(*i).ok_or_else(|| EvalError::Missing(format!("parameter {}", i + 1)))?,
                CAtom::Func(kind, arg, src) => {
                    let x = arg.eval(vars, params)?;
                    match kind {
                        FnKind::Log => {
                            if !(x > 0.0) {
                                return Err(EvalError::Domain { subexpr: src.clone(), reason: "log of a non-positive value" });
                            }
                            x.ln()
                        }
                        FnKind::Sqrt => {
                            if x < 0.0 {
                                return Err(EvalError::Domain { subexpr: src.clone(), reason: "sqrt of a negative value" });
                            }
                            x.sqrt()
                        }
                        FnKind::Exp => x.exp(),
                        FnKind::Atan => x.atan(),
                    }
                }
            };
            vals.push(v);
        }
        let mut out = self.coeff;
        for f in &self.factors {
            let mut s = 0.0;
            for (c, mono) in &f.terms {
                let mut t = *c;
                for (i, k) in mono {
                    t *= vals[*i].powi(*k);
                }
                s += t;
            }
            if f.exp < 0 && s == 0.0 {
                return Err(EvalError::Domain {
                    subexpr: Expr::from_poly(f.source.clone()),
                    reason: "zero denominator",
                });
            }
            out *= s.powi(f.exp);
        }
        Ok(out)
    }
}

fn atom_rational(a: &Atom, vars: &[Rational], params: &[Rational]) -> Result<Rational, EvalError> {
    match a {
        Atom::Var(i) => vars.get(*i).cloned().ok_or_else(|| EvalError::Missing(format!("variable {}", i + 1))),
        Atom::Param(i) => params.get(*i).cloned().ok_or_else(|| EvalError::Missing(format!("parameter {}", i + 1))),
        Atom::Func(kind, arg) => {
            let x = eval_rational(arg, vars, params)?;
            if *kind == FnKind::Log && x <= Rational::zero() {
                return Err(EvalError::Domain { subexpr: Expr::from_atom(a.clone()), reason: "log of a non-positive value" });
            }
            if *kind == FnKind::Sqrt && x < Rational::zero() {
                return Err(EvalError::Domain { subexpr: Expr::from_atom(a.clone()), reason: "sqrt of a negative value" });
            }
            let folded = Expr::func(*kind, Expr::constant(x));
            folded.as_rational().ok_or(EvalError::NotRational(folded))
        }
    }
}

pub(super) fn eval_rational(e: &Expr, vars: &[Rational], params: &[Rational]) -> Result<Rational, EvalError> {
    let mut out = e.coeff().clone();
    if out.is_zero() {
        return Ok(out);
    }
    for (p, exp) in e.factors() {
        let mut s = Rational::zero();
        for (m, c) in p.terms() {
            let mut t = c.clone();
            for (a, k) in m.powers() {
                let v = atom_rational(a, vars, params)?;
                t *= num_traits::pow(v, k.to_usize().unwrap_or(0));
            }
            s += t;
        }
        if exp < 0 {
            if s.is_zero() {
                return Err(EvalError::Domain { subexpr: Expr::from_poly(p.clone()), reason: "zero denominator" });
            }
            out *= num_traits::pow(s.recip(), (-exp) as usize);
        } else {
            out *= num_traits::pow(s, exp as usize);
        }
    }
    if out.is_one() {
        return Ok(Rational::one());
    }
    Ok(out)
}
