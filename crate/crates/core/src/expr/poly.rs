//! Sparse multivariate polynomials over the rationals whose indeterminates are
//! [`Atom`]s (variables, parameters or function applications).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{Atom, Rational};

/// A power product of atoms, kept sorted by atom with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub(crate) Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn powers(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < *a {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == *a {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((a.clone(), e - f));
                }
                j += 1;
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Greatest common divisor of two monomials.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1.min(other.0[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }
}

/// Graded lexicographic order; smaller atoms count as larger variables.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.0.cmp(&b.0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match a.1.cmp(&b.1) {
                    Ordering::Equal => {}
                    o => return o,
                },
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Terms sorted by decreasing monomial, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly(pub(crate) Vec<(Monomial, Rational)>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![(Monomial::one(), c)])
        }
    }

    pub fn atom(a: Atom) -> Self {
        Poly(vec![(Monomial::atom(a, 1), Rational::one())])
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(Rational::zero) += c;
        }
        Poly(map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect())
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty() || (self.0.len() == 1 && self.0[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 if self.0[0].0.is_one() => Some(self.0[0].1.clone()),
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<&(Monomial, Rational)> {
        self.0.first()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Greater => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.0[i].1 + &other.0[j].1;
                    if !c.is_zero() {
                        out.push((self.0[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        // multiplying by a monomial preserves the order
        Poly(self.0.iter().map(|(n, c)| (n.mul(m), c * k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.0.len() == 1 {
            return other.mul_term(&self.0[0].0, &self.0[0].1);
        }
        if other.0.len() == 1 {
            return self.mul_term(&other.0[0].0, &other.0[0].1);
        }
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in &self.0 {
            for (n, d) in &other.0 {
                let k = m.mul(n);
                let v = c * d;
                match map.get_mut(&k) {
                    Some(x) => *x += v,
                    None => {
                        map.insert(k, v);
                    }
                }
            }
        }
        Poly(map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::constant(Rational::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?.clone();
        let mut r = self.clone();
        let mut q: Vec<(Monomial, Rational)> = Vec::new();
        while let Some((m, c)) = r.leading().cloned() {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            r = r.sub(&d.mul_term(&qm, &qc));
            q.push((qm, qc));
        }
        Some(Poly::from_terms(q))
    }

    /// Greatest common monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.0.iter();
        let first = match it.next() {
            Some((m, _)) => m.clone(),
            None => return Monomial::one(),
        };
        it.fold(first, |g, (m, _)| g.gcd(m))
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly(
            self.0
                .iter()
                .map(|(n, c)| (n.div(m).expect("monomial divides"), c.clone()))
                .collect(),
        )
    }

    /// Formal partial derivative with respect to an atom.
    pub fn diff_atom(&self, a: &Atom) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.0 {
            let e = m.exponent(a);
            if e == 0 {
                continue;
            }
            let rest: Vec<(Atom, u32)> = m
                .0
                .iter()
                .filter_map(|(b, f)| {
                    if b == a {
                        (e > 1).then(|| (b.clone(), e - 1))
                    } else {
                        Some((b.clone(), *f))
                    }
                })
                .collect();
            terms.push((Monomial(rest), c * Rational::from_integer(e.into())));
        }
        Poly::from_terms(terms)
    }

    /// Every distinct atom occurring in some monomial (not looking inside functions).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self
            .0
            .iter()
            .flat_map(|(m, _)| m.0.iter().map(|(a, _)| a.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn map_coeffs<F: FnMut(&Rational) -> Rational>(&self, mut f: F) -> Poly {
        Poly::from_terms(self.0.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn leading_coeff_is_positive(&self) -> bool {
        self.0.first().map(|(_, c)| c.is_positive()).unwrap_or(true)
    }
}
