//! One-parameter groups generated by fields: Lie series, Runge-Kutta
//! integration, complete systems and return times of periodic flows.

use rand::Rng;
use serde::Serialize;

use crate::algebra::{LieAlgebra, Matrix};
use crate::expr::{to_f64, Atom, EvalError, Expr, FnKind, Rational, ZeroTest};
use crate::fields::{self, CompiledField, VectorField};
use crate::linalg;
use crate::sample;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("Lie series looks divergent at order {order}: last term {last:e} vs first {first:e}")]
    DivergenceSuspected { order: usize, last: f64, first: f64 },
    #[error(transparent)]
    Domain(#[from] EvalError),
    #[error("cannot normalise by the coefficient of variable {0}: it vanishes identically")]
    NormalizationImpossible(usize),
    #[error("{0}")]
    BadInput(String),
}

/// Truncated power series in `t`.
#[derive(Clone, Debug)]
struct Series(Vec<f64>);

impl Series {
    fn constant(c: f64, len: usize) -> Series {
        let mut v = vec![0.0; len];
        v[0] = c;
        Series(v)
    }

    fn add_assign(&mut self, o: &Series, k: f64) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a += k * b;
        }
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(out)
    }

    fn powi(&self, e: u32) -> Series {
        let mut r = Series::constant(1.0, self.0.len());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    fn recip(&self) -> Option<Series> {
        let n = self.0.len();
        let a0 = self.0[0];
        if a0 == 0.0 {
            return None;
        }
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.0[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Some(Series(b))
    }

    fn derivative_coeffs(&self) -> Vec<f64> {
        (1..self.0.len()).map(|k| k as f64 * self.0[k]).collect()
    }

    /// `f` with `f' = g * self'` and `f(0) = f0`.
    fn integrate_product(g: &Series, da: &[f64], f0: f64) -> Series {
        let n = g.0.len();
        let mut f = vec![0.0; n];
        f[0] = f0;
        for k in 1..n {
            let s: f64 = (0..k).map(|j| g.0[j] * da[k - 1 - j]).sum();
            f[k] = s / k as f64;
        }
        Series(f)
    }

    fn exp(&self) -> Series {
        let n = self.0.len();
        let da = self.derivative_coeffs();
        let mut f = vec![0.0; n];
        f[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (0..k).map(|j| f[j] * da[k - 1 - j]).sum();
            f[k] = s / k as f64;
        }
        Series(f)
    }

    fn log(&self) -> Option<Series> {
        if !(self.0[0] > 0.0) {
            return None;
        }
        let inv = self.recip()?;
        Some(Series::integrate_product(&inv, &self.derivative_coeffs(), self.0[0].ln()))
    }

    fn atan(&self) -> Option<Series> {
        let one_plus = Series::constant(1.0, self.0.len());
        let mut d = self.mul(self);
        d.add_assign(&one_plus, 1.0);
        let inv = d.recip()?;
        Some(Series::integrate_product(&inv, &self.derivative_coeffs(), self.0[0].atan()))
    }

    fn sqrt(&self) -> Option<Series> {
        let n = self.0.len();
        let a0 = self.0[0];
        if !(a0 > 0.0) {
            return None;
        }
        let mut b = vec![0.0; n];
        b[0] = a0.sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (self.0[k] - s) / (2.0 * b[0]);
        }
        Some(Series(b))
    }
}

fn series_of(e: &Expr, vars: &[Series], params: &[f64], len: usize) -> Result<Series, EvalError> {
    let mut out = Series::constant(to_f64(e.coeff()), len);
    if e.is_zero() {
        return Ok(out);
    }
    for (p, k) in e.factors() {
        let mut s = Series::constant(0.0, len);
        for (m, c) in p.terms() {
            let mut t = Series::constant(to_f64(c), len);
            for (a, pw) in m.powers() {
                let base = match a {
                    Atom::Var(i) => vars.get(*i).cloned().ok_or_else(|| EvalError::Missing(format!("variable {}", i + 1)))?,
                    Atom::Param(i) => {
                        Series::constant(*params.get(*i).ok_or_else(|| EvalError::Missing(format!("parameter {}", i + 1)))?, len)
                    }
                    Atom::Func(kind, arg) => {
                        let inner = series_of(arg, vars, params, len)?;
                        let src = Expr::from_atom(a.clone());
                        let r = match kind {
                            FnKind::Exp => Some(inner.exp()),
                            FnKind::Log => inner.log(),
                            FnKind::Atan => inner.atan(),
                            FnKind::Sqrt => inner.sqrt(),
                        };
                        r.ok_or(EvalError::Domain { subexpr: src, reason: "function not analytic here" })?
                    }
                };
                t = t.mul(&base.powi(*pw));
            }
            s.add_assign(&t, 1.0);
        }
        let s = if k < 0 {
            s.recip()
                .ok_or_else(|| EvalError::Domain { subexpr: Expr::from_poly(p.clone()), reason: "zero denominator" })?
                .powi((-k) as u32)
        } else {
            s.powi(k as u32)
        };
        out = out.mul(&s);
    }
    Ok(out)
}

/// Coefficients `a_k = X^k(x_i)(x0) / k!` for `k <= order`, computed as the
/// Taylor coefficients of the orbit through `x0`.
pub fn lie_series_coefficients(x: &VectorField, x0: &[f64], params: &[f64], order: usize) -> Result<Vec<Vec<f64>>, FlowError> {
    let n = x.dim();
    if x0.len() != n {
        return Err(FlowError::BadInput(format!("start point has {} coordinates, field has {}", x0.len(), n)));
    }
    let len = order + 1;
    let mut a: Vec<Vec<f64>> = x0.iter().map(|v| {
        let mut s = vec![0.0; len];
        s[0] = *v;
        s
    }).collect();
    for k in 0..order {
        let vars: Vec<Series> = a.iter().map(|c| Series(c[..k + 1].to_vec())).collect();
        for j in 0..n {
            let s = series_of(&x.coeffs[j], &vars, params, k + 1)?;
            a[j][k + 1] = s.0[k] / (k + 1) as f64;
        }
    }
    Ok(a)
}

/// Exact iterated derivatives `X^k(x_i)` for `k <= order`.
pub fn lie_series_terms(x: &VectorField, i: usize, order: usize) -> Vec<Expr> {
    let mut out = vec![Expr::var(i)];
    for _ in 0..order {
        let next = x.apply(out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LieSeriesResult {
    pub point: Vec<f64>,
    pub order_used: usize,
    pub truncation_estimate: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `sum_{k <= order} t^k / k! X^k(x_i)` at `x0`; the order is doubled once
/// when the last term exceeds `1e-10`.
pub fn lie_series_flow(x: &VectorField, x0: &[f64], params: &[f64], t: f64, order: usize) -> Result<LieSeriesResult, FlowError> {
    let mut order = order.max(1);
    for attempt in 0..2 {
        let a = lie_series_coefficients(x, x0, params, order)?;
        let term = |k: usize| -> Vec<f64> { a.iter().map(|c| c[k] * t.powi(k as i32)).collect() };
        let first = norm(&term(1));
        let last = norm(&term(order));
        if first > 0.0 && last > 1e3 * first {
            return Err(FlowError::DivergenceSuspected { order, last, first });
        }
        if last > 1e-10 && attempt == 0 {
            order *= 2;
            continue;
        }
        let point = a.iter().map(|c| c.iter().rev().fold(0.0, |acc, v| acc * t + v)).collect();
        return Ok(LieSeriesResult { point, order_used: order, truncation_estimate: last });
    }
    unreachable!("loop returns on the second attempt")
}

fn rk4_step(f: &CompiledField, x: &[f64], params: &[f64], h: f64, out: &mut [f64]) -> Result<(), EvalError> {
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f.eval_into(x, params, &mut k1)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    f.eval_into(&tmp, params, &mut k2)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    f.eval_into(&tmp, params, &mut k3)?;
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f.eval_into(&tmp, params, &mut k4)?;
    for i in 0..n {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta with `steps` equal steps; returns the
/// sampled trajectory `(t_k, x_k)` including both end points.
pub fn numeric_trajectory(x: &VectorField, x0: &[f64], params: &[f64], t: f64, steps: usize) -> Result<Vec<(f64, Vec<f64>)>, FlowError> {
    if x0.len() != x.dim() || steps == 0 {
        return Err(FlowError::BadInput("start point dimension or step count".into()));
    }
    let f = x.compile();
    let h = t / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; cur.len()];
    out.push((0.0, cur.clone()));
    for k in 1..=steps {
        rk4_step(&f, &cur, params, h, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
        out.push((k as f64 * h, cur.clone()));
    }
    Ok(out)
}

/// End point of the RK4 integration.
pub fn numeric_flow(x: &VectorField, x0: &[f64], params: &[f64], t: f64, steps: usize) -> Result<Vec<f64>, FlowError> {
    if x0.len() != x.dim() || steps == 0 {
        return Err(FlowError::BadInput("start point dimension or step count".into()));
    }
    let f = x.compile();
    let h = t / steps as f64;
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..steps {
        rk4_step(&f, &cur, params, h, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// CSV text with header `t,<names>`.
pub fn trajectory_csv(traj: &[(f64, Vec<f64>)], names: &[String]) -> String {
    let mut s = String::from("t");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (t, x) in traj {
        s.push_str(&format!("{t:.12e}"));
        for v in x {
            s.push_str(&format!(",{v:.12e}"));
        }
        s.push('\n');
    }
    s
}

fn steps_for(t: f64) -> usize {
    ((t.abs() / 1e-3).ceil() as usize).max(200)
}

/// `|phi_{t2}(phi_{t1}(x0)) - phi_{t1+t2}(x0)|` by RK4 with step at most `1e-3`.
pub fn one_param_group_law_check(x: &VectorField, x0: &[f64], params: &[f64], t1: f64, t2: f64) -> Result<f64, FlowError> {
    let a = numeric_flow(x, x0, params, t1, steps_for(t1))?;
    let b = numeric_flow(x, &a, params, t2, steps_for(t2))?;
    let c = numeric_flow(x, x0, params, t1 + t2, steps_for(t1 + t2))?;
    Ok(norm(&b.iter().zip(&c).map(|(u, v)| u - v).collect::<Vec<_>>()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompleteSystem {
    pub fields: Vec<VectorField>,
    /// Input positions dropped as dependent on earlier ones.
    pub pruned: Vec<usize>,
    /// Brackets adjoined, as positions in the growing list.
    pub adjoined: Vec<(usize, usize)>,
}

fn in_function_span(cur: &[VectorField], y: &VectorField, seed: u64) -> bool {
    let mut with: Vec<VectorField> = cur.to_vec();
    with.push(y.clone());
    let r0 = fields::generic_rank(cur, seed);
    if fields::generic_rank(&with, seed) > r0 {
        return false;
    }
    // confirm a tie on fresh points
    let s2 = seed.wrapping_add(0x51ed);
    fields::generic_rank(&with, s2) <= fields::generic_rank(cur, s2).max(r0)
}

/// Adjoins brackets until the system is closed up to function multiples.
pub fn complete_system_complete(input: &[VectorField], seed: u64) -> Result<CompleteSystem, FlowError> {
    let Some(first) = input.first() else {
        return Err(FlowError::BadInput("empty system".into()));
    };
    let n = first.dim();
    let mut cur: Vec<VectorField> = Vec::new();
    let mut pruned = Vec::new();
    for (i, f) in input.iter().enumerate() {
        if f.is_zero() || in_function_span(&cur, f, seed) {
            pruned.push(i);
        } else {
            cur.push(f.clone());
        }
    }
    let mut adjoined = Vec::new();
    'grow: loop {
        if cur.len() >= n {
            break;
        }
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                let b = cur[i].bracket(&cur[j]).map_err(|e| FlowError::BadInput(e.to_string()))?;
                if !b.is_zero() && !in_function_span(&cur, &b, seed) {
                    cur.push(b);
                    adjoined.push((i, j));
                    continue 'grow;
                }
            }
        }
        break;
    }
    Ok(CompleteSystem { fields: cur, pruned, adjoined })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleSolution {
    /// `omega_k` for every `k != pivot`, in order.
    pub integrals: Vec<Expr>,
    /// Whether every series terminated and `X(omega_k) = 0` was shown exactly.
    pub exact: bool,
    pub max_residual: f64,
}

/// Integrals of `X f = 0` from the series
/// `omega_k = sum_j (-x_p)^j / j! * Xn^j(x_k)` with `Xn = X / xi_p`.
pub fn complete_system_solve_single(x: &VectorField, pivot: usize, order: usize, seed: u64) -> Result<SingleSolution, FlowError> {
    let n = x.dim();
    if pivot >= n {
        return Err(FlowError::BadInput(format!("pivot {} out of range", pivot + 1)));
    }
    let c = &x.coeffs[pivot];
    let inv = c.recip().ok_or(FlowError::NormalizationImpossible(pivot))?;
    let xn = x.scale(&inv);
    let xp = Expr::var(pivot).neg();
    let mut integrals = Vec::new();
    let mut terminated = true;
    for k in (0..n).filter(|k| *k != pivot) {
        let mut term = Expr::var(k);
        let mut acc = Expr::zero();
        let mut power = Expr::one();
        let mut fact = Rational::from_integer(1.into());
        let mut done = false;
        for j in 0..=order {
            if term.is_zero() {
                done = true;
                break;
            }
            acc = acc.add(&power.mul(&term).scale(&fact.recip()));
            term = xn.apply(&term);
            power = power.mul(&xp);
            fact *= Rational::from_integer((j as i64 + 1).into());
        }
        if !done && !term.is_zero() {
            terminated = false;
        }
        integrals.push(acc);
    }
    let residuals: Vec<Expr> = integrals.iter().map(|w| x.apply(w)).collect();
    let exact = terminated && residuals.iter().all(|r| r.is_identically_zero() == ZeroTest::Yes);
    let mut worst: f64 = 0.0;
    if !exact {
        let comp: Vec<_> = residuals.iter().map(Expr::compile).collect();
        let np = x.coeffs.iter().map(Expr::param_bound).max().unwrap_or(0);
        let mut rng = sample::rng(seed);
        let params: Vec<f64> = (0..np).map(|_| rng.gen_range(0.2..1.5)).collect();
        let mut good = 0;
        for _ in 0..256 {
            if good == 16 {
                break;
            }
            let pt: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let vals: Result<Vec<f64>, _> = comp.iter().map(|c| c.eval(&pt, &params)).collect();
            if let Ok(v) = vals {
                good += 1;
                worst = v.iter().fold(worst, |a, b| a.max(b.abs()));
            }
        }
    }
    Ok(SingleSolution { integrals, exact, max_residual: worst })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyReport {
    pub period: Option<f64>,
    /// First return time per start point (`None` when none was found).
    pub returns: Vec<Option<f64>>,
    /// Smallest distance to the start seen at a local minimum, per start.
    pub closest: Vec<f64>,
    pub skipped_stationary: usize,
}

/// First `t* > tol` with `|phi_t*(x0) - x0| < tol` for one start point.
fn first_return(f: &CompiledField, x0: &[f64], params: &[f64], t_max: f64, steps: usize, tol: f64) -> Result<(Option<f64>, f64), FlowError> {
    let n = x0.len();
    let h = t_max / steps as f64;
    let g = |x: &[f64]| -> Result<f64, EvalError> {
        let v = f.eval(x, params)?;
        Ok((0..n).map(|i| (x[i] - x0[i]) * v[i]).sum())
    };
    let dist = |x: &[f64]| norm(&(0..n).map(|i| x[i] - x0[i]).collect::<Vec<_>>());
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; n];
    let mut g_prev = g(&cur)?;
    let mut closest = f64::INFINITY;
    for k in 1..=steps {
        rk4_step(f, &cur, params, h, &mut next)?;
        let g_now = g(&next)?;
        let t_prev = (k - 1) as f64 * h;
        if g_prev < 0.0 && g_now >= 0.0 && t_prev + h > tol {
            // local minimum of the distance inside [t_prev, t_prev + h]
            let (mut lo, mut hi) = (0.0, h);
            let mut probe = vec![0.0; n];
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                rk4_step(f, &cur, params, mid, &mut probe)?;
                if g(&probe)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            rk4_step(f, &cur, params, tau, &mut probe)?;
            let d = dist(&probe);
            closest = closest.min(d);
            if d < tol {
                return Ok((Some(t_prev + tau), closest));
            }
        }
        g_prev = g_now;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok((None, closest))
}

/// Common first return time of the flow for all `starts`, within `tol`.
pub fn monodromy_period(
    x: &VectorField,
    starts: &[Vec<f64>],
    params: &[f64],
    t_max: f64,
    steps: usize,
    tol: f64,
) -> Result<MonodromyReport, FlowError> {
    let f = x.compile();
    let mut returns = Vec::new();
    let mut closest = Vec::new();
    let mut skipped = 0;
    for s in starts {
        if norm(&f.eval(s, params)?) < 1e-12 {
            skipped += 1;
            continue;
        }
        let (r, c) = first_return(&f, s, params, t_max, steps, tol)?;
        returns.push(r);
        closest.push(c);
    }
    let found: Vec<f64> = returns.iter().flatten().cloned().collect();
    let period = if !found.is_empty() && found.len() == returns.len() {
        let lo = found.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = found.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo < tol).then(|| found.iter().sum::<f64>() / found.len() as f64)
    } else {
        None
    };
    Ok(MonodromyReport { period, returns, closest, skipped_stationary: skipped })
}

/// `count` start points: `x0` and random perturbations of it of size `radius`.
pub fn sample_starts(x0: &[f64], count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = sample::rng(seed ^ 0x57a7);
    let mut out = vec![x0.to_vec()];
    while out.len() < count {
        out.push(x0.iter().map(|v| v + rng.gen_range(-radius..radius)).collect());
    }
    out
}

/// Generator combinations vanishing at every given point.
pub fn stabilizer_of_points(l: &LieAlgebra, points: &[Vec<Rational>]) -> Vec<VectorField> {
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for p in points {
        let vals: Vec<Vec<Expr>> = l.gens.iter().map(|g| g.value_at(p)).collect();
        rows.extend(linalg::transpose(&vals));
    }
    linalg::kernel(&rows, l.r()).iter().map(|lam| VectorField::combination(&l.gens, lam)).collect()
}

/// Rescales a field whose linear part at `base` has eigenvalues `0, +-i w`
/// so that `w = 1`.  Returns `None` when the linear part is not of that kind.
pub fn normalize_rotation(x: &VectorField, base: &[Rational], params: &[Rational]) -> Option<VectorField> {
    let j: Matrix = x.jacobian_at(base);
    let jr: Option<Vec<Vec<f64>>> = j.iter().map(|row| row.iter().map(|e| e.eval_rational(&[], params).ok().map(|r| to_f64(&r))).collect()).collect();
    let jr = jr?;
    let n = jr.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |a, b| jr[a][b]);
    let w = linalg::complex_eigenvalues(&m).iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if w < 1e-12 {
        return None;
    }
    let w2 = linalg::snap_rational(w * w, 1_000_000, 1e-10)?;
    let k = match crate::expr::rational_sqrt(&w2) {
        Some(r) => Expr::constant(r.recip()),
        None => Expr::sqrt(Expr::constant(w2)).recip()?,
    };
    Some(x.scale(&k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, Symbols};

    fn sym() -> Symbols {
        Symbols::new(&["x", "y", "z"], &["c"])
    }

    fn f(s: &str) -> VectorField {
        VectorField::parse(s, &sym()).unwrap()
    }

    #[test]
    fn taylor_coefficients_match_symbolic_terms() {
        let x = f("x^2*p + x*y*q + (y^2/2 + x)*r");
        let x0 = [0.3, -0.2, 0.1];
        let a = lie_series_coefficients(&x, &x0, &[], 6).unwrap();
        let pt: Vec<Rational> = vec![crate::expr::rat(3, 10), crate::expr::rat(-2, 10), crate::expr::rat(1, 10)];
        for i in 0..3 {
            let terms = lie_series_terms(&x, i, 6);
            let mut fact = 1.0;
            for (k, t) in terms.iter().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                let exact = to_f64(&t.eval_rational(&pt, &[]).unwrap()) / fact;
                assert!((exact - a[i][k]).abs() < 1e-14, "{i} {k}");
            }
        }
    }

    #[test]
    fn rotation_flow() {
        let x = f("-y*p + x*q");
        let r = lie_series_flow(&x, &[1.0, 0.0, 0.0], &[], 0.2, 24).unwrap();
        assert!((r.point[0] - 0.2f64.cos()).abs() < 1e-14);
        assert!((r.point[1] - 0.2f64.sin()).abs() < 1e-14);
        let n = numeric_flow(&x, &[1.0, 0.0, 0.0], &[], 0.2, 200).unwrap();
        assert!((n[0] - r.point[0]).abs() < 1e-12);
        let csv = trajectory_csv(&numeric_trajectory(&x, &[1.0, 0.0, 0.0], &[], 0.1, 2).unwrap(), &sym().vars);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("t,x,y,z\n"));
    }

    #[test]
    fn transcendental_coefficients_in_series() {
        let x = f("exp(x)*p + log(1 + y^2)*q + atan(x)*r");
        let x0 = [0.1, 0.5, 0.0];
        let r = lie_series_flow(&x, &x0, &[], 0.1, 24).unwrap();
        let n = numeric_flow(&x, &x0, &[], 0.1, 1000).unwrap();
        for i in 0..3 {
            assert!((r.point[i] - n[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_detected() {
        let x = f("x^2*p");
        assert!(matches!(lie_series_flow(&x, &[1.0, 0.0, 0.0], &[], 2.0, 24), Err(FlowError::DivergenceSuspected { .. })));
    }

    #[test]
    fn group_law_small() {
        let x = f("x^2*p + x*y*q");
        let d = one_param_group_law_check(&x, &[0.2, 0.1, 0.0], &[], 0.3, -0.1).unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn complete_system_adjoins_bracket() {
        let cs = complete_system_complete(&[f("p"), f("q + x*r")], 0).unwrap();
        assert_eq!(cs.fields.len(), 3);
        assert_eq!(cs.fields[2], f("r"));
        let cs = complete_system_complete(&[f("p"), f("2*p"), f("q")], 0).unwrap();
        assert_eq!(cs.pruned, vec![1]);
    }

    #[test]
    fn single_equation_integrals() {
        let s = complete_system_solve_single(&f("p + x*r"), 0, 8, 0).unwrap();
        assert!(s.exact);
        assert_eq!(s.integrals[0].to_string_with(&sym()), "y");
        assert_eq!(s.integrals[1].to_string_with(&sym()), "-x^2/2 + z");
        assert!(matches!(complete_system_solve_single(&f("q"), 0, 8, 0), Err(FlowError::NormalizationImpossible(0))));
    }

    #[test]
    fn rotation_returns_after_two_pi() {
        let x = f("-y*p + x*q");
        let starts = sample_starts(&[0.5, 0.2, 0.0], 8, 0.1, 1);
        let rep = monodromy_period(&x, &starts, &[], 8.0, 20000, 1e-6).unwrap();
        let p = rep.period.unwrap();
        assert!((p - std::f64::consts::TAU).abs() < 1e-6, "{p}");
        let shear = f("x*r");
        let rep = monodromy_period(&shear, &starts, &[], 20.0, 2000, 1e-6).unwrap();
        assert!(rep.period.is_none());
    }

    #[test]
    fn stabilizer_and_normalisation() {
        let l = LieAlgebra::parse(sym(), &["p", "q", "r", "x*q - y*p", "y*r - z*q", "z*p - x*r"]).unwrap();
        let st = stabilizer_of_points(&l, &[vec![int(0), int(0), int(0)], vec![int(0), int(0), int(1)]]);
        assert_eq!(st.len(), 1);
        let w = normalize_rotation(&st[0].scale(&Expr::int(3)), &fields::origin(3), &[]).unwrap();
        let j = w.jacobian_at(&fields::origin(3));
        assert_eq!(j[0][1].neg().mul(&j[1][0]), Expr::one());
    }
}
