//! Cross-module properties.

use proptest::prelude::*;

use transgroups::algebra::{self, LieAlgebra, Matrix};
use transgroups::catalog;
use transgroups::expr::{int, rat, Expr, Rational, Symbols, ZeroTest};
use transgroups::fields::{self, VectorField};
use transgroups::flows;
use transgroups::invariants;
use transgroups::linalg;
use transgroups::mobility::{self, MotionTag};

fn xyz() -> Symbols {
    Symbols::new(&["x", "y", "z"], &[] as &[&str])
}

/// Polynomial of degree <= 3 in x, y, z from a coefficient vector.
fn poly3(cs: &[i64]) -> Expr {
    let monos: [[u32; 3]; 10] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [0, 1, 1], [2, 0, 0], [0, 0, 2], [2, 1, 0], [0, 1, 2]];
    let mut acc = Expr::zero();
    for (c, m) in cs.iter().zip(monos.iter()) {
        if *c == 0 {
            continue;
        }
        let mut t = Expr::int(*c);
        for (v, e) in m.iter().enumerate() {
            t = t.mul(&Expr::var(v).pow(*e as i32).unwrap());
        }
        acc = acc.add(&t);
    }
    acc
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(prop_oneof![3 => Just(0i64), 2 => -3i64..4], 10)
}

fn field3() -> impl Strategy<Value = VectorField> {
    proptest::collection::vec(coeffs(), 3).prop_map(|cs| VectorField::new(cs.iter().map(|c| poly3(c)).collect()))
}

fn planar_field() -> impl Strategy<Value = VectorField> {
    // coefficients depend on x, y only
    proptest::collection::vec(proptest::collection::vec(-2i64..3, 6), 2).prop_map(|cs| {
        VectorField::new(cs.iter().map(|c| poly3(&[c[0], c[1], c[2], 0, c[3], 0, c[4], 0, c[5], 0])).collect())
    })
}

fn same(a: &VectorField, b: &VectorField) -> bool {
    a.sub(b).is_zero()
}

fn mat_eq(a: &Matrix, b: &Matrix) -> bool {
    a.iter().zip(b).all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| x.sub(y).is_zero()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_is_linear(a in coeffs(), b in coeffs(), ka in -5i64..6, kb in 1i64..7, v in 0usize..3) {
        let (ea, eb) = (poly3(&a), poly3(&b).div(&poly3(&[1, 0, 0, 0, 0, 0, 1, 1, 0, 0])).unwrap());
        let (p, q) = (rat(ka, 3), rat(1, kb));
        let lhs = ea.scale(&p).add(&eb.scale(&q)).diff(v);
        let rhs = ea.diff(v).scale(&p).add(&eb.diff(v).scale(&q));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn derivative_matches_finite_differences(a in coeffs(), v in 0usize..3, px in -9i64..10, py in -9i64..10) {
        let e = Expr::log(poly3(&a).pow(2).unwrap().add(&Expr::one())).add(&Expr::atan(poly3(&a)));
        let pt = [px as f64 / 7.0, py as f64 / 5.0, 0.3];
        let d = e.diff(v).eval_f64(&pt, &[]).unwrap();
        let h = 1e-5;
        let (mut hi, mut lo) = (pt, pt);
        hi[v] += h;
        lo[v] -= h;
        let fd = (e.eval_f64(&hi, &[]).unwrap() - e.eval_f64(&lo, &[]).unwrap()) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{} vs {}", d, fd);
    }

    #[test]
    fn prolongations_commute_with_bracket(x in field3(), y in field3()) {
        let b = x.bracket(&y).unwrap();
        let px = fields::prolong_points(&[x.clone(), y.clone(), b.clone()], 2);
        prop_assert!(same(&px[0].bracket(&px[1]).unwrap(), &px[2]));
        let (dx, dy, db) = (fields::prolong_differentials(&x), fields::prolong_differentials(&y), fields::prolong_differentials(&b));
        prop_assert!(same(&dx.bracket(&dy).unwrap(), &db));
    }

    #[test]
    fn jet_prolongation_commutes_with_bracket(x in planar_field(), y in planar_field()) {
        let x2 = VectorField::new(x.coeffs[..2].to_vec());
        let y2 = VectorField::new(y.coeffs[..2].to_vec());
        let b = x2.bracket(&y2).unwrap();
        let lhs = fields::prolong_jet1(&x2).unwrap().bracket(&fields::prolong_jet1(&y2).unwrap()).unwrap();
        prop_assert!(same(&lhs, &fields::prolong_jet1(&b).unwrap()));
    }

    #[test]
    fn generic_rank_is_monotone(fs in proptest::collection::vec(field3(), 1..5), extra in field3()) {
        let r0 = fields::generic_rank(&fs, 3);
        let mut more = fs.clone();
        more.push(extra);
        let r1 = fields::generic_rank(&more, 3);
        prop_assert!(r0 <= r1 && r1 <= r0 + 1);
        prop_assert!(r1 <= more.len().min(3));
    }

    #[test]
    fn lie_derivative_of_forms(x in field3(), y in field3(), g in proptest::collection::vec(-3i64..4, 6), k in -4i64..5) {
        let sym = |i: usize, j: usize| -> Expr {
            let idx = [[0, 1, 2], [1, 3, 4], [2, 4, 5]][i][j];
            Expr::int(g[idx]).add(&Expr::var(i).mul(&Expr::var(j)))
        };
        let gm: Matrix = (0..3).map(|i| (0..3).map(|j| sym(i, j)).collect()).collect();
        let g2: Matrix = gm.iter().map(|r| r.iter().map(|e| e.scale(&int(k))).collect()).collect();
        let sum: Matrix = gm.iter().zip(&g2).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p.add(q)).collect()).collect();
        let l = |v: &VectorField, m: &Matrix| invariants::lie_derivative_quadratic_form(v, m);
        let lin: Matrix = l(&x, &gm).iter().zip(&l(&x, &g2)).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p.add(q)).collect()).collect();
        prop_assert!(mat_eq(&l(&x, &sum), &lin));
        let b = x.bracket(&y).unwrap();
        let comm: Matrix = l(&x, &l(&y, &gm)).iter().zip(&l(&y, &l(&x, &gm))).map(|(a, c)| a.iter().zip(c).map(|(p, q)| p.sub(q)).collect()).collect();
        prop_assert!(mat_eq(&l(&b, &gm), &comm));
    }
}

#[test]
fn catalog_structural_properties() {
    for e in catalog::builtin_entries() {
        for p in e.runs() {
            let l = e.algebra().instantiate(&p);
            let n = l.n();
            let rank = fields::generic_rank(&l.gens, 0);
            let c1 = invariants::joint_invariant_count(&l, 1, 0);
            assert_eq!(c1, n - rank, "{}", e.id);
            assert_eq!(c1 == 0, algebra::is_transitive(&l, 0), "{}", e.id);
            let c2 = invariants::joint_invariant_count(&l, 2, 0);
            let c3 = invariants::joint_invariant_count(&l, 3, 0);
            assert!(c2 >= c1 && c3 >= c2 + c1, "{}: {c1} {c2} {c3}", e.id);
            if n == 3 && l.r() == 6 && algebra::is_transitive(&l, 0) {
                let crit = invariants::two_point_invariant_criterion(&l, 0).unwrap();
                assert_eq!(crit.passes, c2 == 1, "{}", e.id);
            }
            if c2 >= 1 {
                let prolonged: Vec<VectorField> = l.gens.iter().map(fields::prolong_differentials).collect();
                assert!(fields::generic_rank(&prolonged, 0) < 2 * n, "{}", e.id);
                assert!(invariants::infinitesimal_invariant_exists(&l, 0).exists, "{}", e.id);
            }
            let inf = invariants::infinitesimal_invariant_exists(&l, 0);
            assert!(inf.cross_check_agrees, "{}", e.id);
            let red = algebra::reduced_algebra(&l, &fields::origin(n));
            assert!(algebra::check_closure(&red).is_ok(), "reduced group of {} is not closed", e.id);
        }
    }
}

#[test]
fn complete_systems_are_certified() {
    let sym = xyz();
    let systems: [&[&str]; 4] = [&["p", "q + x*r"], &["x*q - y*p", "y*r - z*q"], &["p + y*r", "q"], &["x*p + y*q", "z*r"]];
    for s in systems {
        let fs: Vec<VectorField> = s.iter().map(|t| VectorField::parse(t, &sym).unwrap()).collect();
        let done = flows::complete_system_complete(&fs, 0).unwrap();
        assert!(done.fields.len() <= 3);
        let rank = fields::generic_rank(&done.fields, 1);
        for a in &done.fields {
            for b in &done.fields {
                let mut with = done.fields.clone();
                with.push(a.bracket(b).unwrap());
                assert_eq!(fields::generic_rank(&with, 1), rank, "{s:?}");
            }
        }
    }
}

fn linear_field(m: &[Vec<Rational>]) -> VectorField {
    let em: Matrix = m.iter().map(|r| r.iter().cloned().map(Expr::constant).collect()).collect();
    algebra::linear_field(&em)
}

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    linalg::mat_mul(a, b)
}

/// `P B P^-1` for an invertible integer `P`.
fn conjugate(p: &[Vec<Rational>], b: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = p.len();
    let mut inv = vec![vec![rat(0, 1); n]; n];
    for j in 0..n {
        let e: Vec<Rational> = (0..n).map(|i| if i == j { rat(1, 1) } else { rat(0, 1) }).collect();
        let col = linalg::solve(p, &e)?;
        for i in 0..n {
            inv[i][j] = col[i].clone();
        }
    }
    Some(mat_mul(&mat_mul(p, b), &inv))
}

fn block(kind: usize, n: usize, w: Rational, a: Rational) -> Vec<Vec<Rational>> {
    let z = || rat(0, 1);
    let mut m = vec![vec![z(); n]; n];
    match kind {
        // rotation
        0 => {
            m[0][1] = -w.clone();
            m[1][0] = w;
        }
        // spiral
        1 => {
            m[0][1] = -w.clone();
            m[1][0] = w;
            m[0][0] = a.clone();
            m[1][1] = a;
        }
        // nilpotent
        _ => {
            m[0][1] = w;
            if n == 3 {
                m[1][2] = rat(1, 1);
            }
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Periodic implies a return at 2 pi / omega; spiral and nilpotent motions never return.
    #[test]
    fn classification_agrees_with_monodromy(
        n in 2usize..4,
        kind in 0usize..3,
        p in proptest::collection::vec(-2i64..3, 9),
        w in prop_oneof![Just(rat(1, 1)), Just(rat(2, 1)), Just(rat(1, 2)), Just(rat(3, 2))],
        a in prop_oneof![Just(rat(1, 4)), Just(rat(-1, 3))],
    ) {
        let pm: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| rat(p[i * 3 + j] + if i == j { 3 } else { 0 }, 1)).collect()).collect();
        prop_assume!(linalg::det(&pm) != rat(0, 1));
        let m = conjugate(&pm, &block(kind, n, w.clone(), a)).unwrap();
        let class = mobility::classify_exact(&m);
        let x = linear_field(&m);
        let start: Vec<f64> = [0.3, -0.2, 0.25][..n].to_vec();
        let starts = flows::sample_starts(&start, 4, 0.1, 5);
        match class.tag {
            MotionTag::Periodic { omega } => {
                prop_assert_eq!(kind, 0);
                prop_assert!((omega - transgroups::expr::to_f64(&w)).abs() < 1e-12);
                let period = std::f64::consts::TAU / omega;
                let t_max = 1.5 * period;
                let rep = flows::monodromy_period(&x, &starts, &[], t_max, (t_max * 1000.0) as usize, 1e-6).unwrap();
                let got = rep.period.expect("periodic motion returns");
                prop_assert!((got - period).abs() < 1e-5, "{} vs {}", got, period);
            }
            MotionTag::Spiral | MotionTag::Nilpotent => {
                prop_assert!(kind != 0);
                let rep = flows::monodromy_period(&x, &starts, &[], 50.0, 20_000, 1e-6).unwrap();
                prop_assert!(rep.period.is_none());
            }
            other => prop_assert!(false, "unexpected class {:?} for kind {}", other, kind),
        }
    }
}

#[test]
fn example_matrices_and_seven_forms() {
    let r = |rows: &[&[i64]]| -> Vec<Vec<Rational>> { rows.iter().map(|row| row.iter().map(|v| int(*v)).collect()).collect() };
    let rot = r(&[&[0, -1], &[1, 0]]);
    let spiral = r(&[&[1, -1], &[1, 1]]);
    let nil = r(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
    let start = flows::sample_starts(&[0.4, 0.1], 4, 0.1, 1);
    let rep = flows::monodromy_period(&linear_field(&rot), &start, &[], 10.0, 10_000, 1e-6).unwrap();
    assert_eq!(mobility::classify_exact(&rot).tag, MotionTag::Periodic { omega: 1.0 });
    assert!((rep.period.unwrap() - std::f64::consts::TAU).abs() < 1e-5);
    assert_eq!(mobility::classify_exact(&spiral).tag, MotionTag::Spiral);
    let rep = flows::monodromy_period(&linear_field(&spiral), &start, &[], 50.0, 20_000, 1e-6).unwrap();
    assert!(rep.period.is_none());
    assert_eq!(mobility::classify_exact(&nil).tag, MotionTag::Nilpotent);
    let s3 = flows::sample_starts(&[0.4, 0.1, 0.2], 4, 0.1, 1);
    assert!(flows::monodromy_period(&linear_field(&nil), &s3, &[], 50.0, 20_000, 1e-6).unwrap().period.is_none());

    let periodic = mobility::classify_seven_forms().iter().filter(|f| f.class.is_periodic()).count();
    assert_eq!(periodic, 1);
}

#[test]
fn degenerate_killing_form_of_reduced_group() {
    let l = catalog::find_entry("ex94-24r").unwrap().algebra();
    let sc = algebra::check_closure(&l).unwrap();
    let (_, zero, _) = algebra::killing_form_signature(&sc, &[]).unwrap();
    assert!(zero > 0);
    let e = catalog::find_entry("thm37-1").unwrap().algebra();
    let rot = LieAlgebra::new(e.sym.clone(), e.gens[3..].to_vec());
    let sc = algebra::check_closure(&rot).unwrap();
    assert_eq!(algebra::killing_form_signature(&sc, &[]), Some((0, 0, 3)));
    assert_eq!(Expr::int(0).is_identically_zero(), ZeroTest::Yes);
}
