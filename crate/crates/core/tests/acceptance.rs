//! Acceptance criteria 1 to 12, one line each, with tolerances and time budgets.

use std::time::{Duration, Instant};

use rand::Rng;

use transgroups::algebra::{self, LieAlgebra};
use transgroups::catalog::{self, CatalogEntry};
use transgroups::expr::{rat, to_f64, Expr, Symbols, ZeroTest};
use transgroups::fields::{self, VectorField};
use transgroups::flows;
use transgroups::invariants::{self, Verdict, VerifyMode};
use transgroups::mobility::{self, MotionTag};
use transgroups::sample;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn entry(id: &str) -> CatalogEntry {
    catalog::find_entry(id).unwrap_or_else(|| panic!("no entry {id}"))
}

fn c1_closure() -> Outcome {
    let all = catalog::builtin_entries();
    let mut bad = Vec::new();
    for e in &all {
        match algebra::check_closure(&e.algebra()) {
            Ok(sc) if algebra::verify_structure(&sc).ok() => {}
            Ok(_) => bad.push(format!("{} violates Jacobi", e.id)),
            Err(err) => bad.push(format!("{}: {err}", e.id)),
        }
    }
    outcome(all.len() >= 24 && bad.is_empty(), format!("{} entries closed with constant structure constants; problems: {bad:?}", all.len()))
}

fn c2_invariant_identities() -> Outcome {
    let ids = [
        "thm37-1", "thm37-3", "thm37-8", "thm37-9", "thm37-10", "thm37-11", "ex87-38", "ex89-58", "ex90-60a", "ex90-60b", "ex90-60c", "ex90-60d", "ex90-62a", "ex90-62b",
    ];
    let mut checked = 0;
    let mut bad = Vec::new();
    for id in ids {
        let e = entry(id);
        let l = e.algebra();
        for j in e.pair_invariants() {
            checked += 1;
            match invariants::verify_joint_invariant(&l, &j, 2, VerifyMode::Symbolic, &[], 0) {
                Ok(Verdict::Proven) => {}
                other => bad.push(format!("{id}: {other:?}")),
            }
        }
    }
    outcome(bad.is_empty() && checked >= 14, format!("{checked} published invariants Proven; failures: {bad:?}"))
}

/// `2n - rank` of the fields prolonged to pairs, at 8 random exact pairs.
fn pair_counts_at_points(l: &LieAlgebra, seed: u64) -> Vec<usize> {
    let pro = fields::prolong_points(&l.gens, 2);
    let mut rng = sample::rng(seed);
    (0..8).map(|_| 2 * l.n() - fields::rank_at(&pro, &sample::point(&mut rng, 2 * l.n()))).collect()
}

fn c3_counts() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (id, want) in [("ex94-21", 1), ("ex94-21r", 2), ("ex94-22", 0), ("ex94-22r", 1)] {
        let l = entry(id).algebra();
        let got = invariants::joint_invariant_count(&l, 2, 0);
        let at_points = pair_counts_at_points(&l, 11);
        ok &= got == want && at_points.iter().all(|c| *c == want);
        notes.push(format!("{id}={got}"));
    }
    // three fields of the reduced group (23') sharing integral curves
    let e = entry("ex94-23r");
    let l = e.algebra().instantiate(&[rat(1, 2)]);
    let mut triples = Vec::new();
    for a in 0..l.r() {
        for b in a + 1..l.r() {
            for c in b + 1..l.r() {
                let t = [l.gens[a].clone(), l.gens[b].clone(), l.gens[c].clone()];
                let mut rng = sample::rng(5);
                let drops = (0..8).all(|_| fields::rank_at(&t, &sample::point(&mut rng, 3)) == 1);
                if fields::generic_rank(&t, 0) == 1 && drops {
                    triples.push(format!("{{{}, {}, {}}}", e.gens[a], e.gens[b], e.gens[c]));
                }
            }
        }
    }
    ok &= triples == ["{r, x*r, y*r}"];
    notes.push(format!("ex94-23r common integral curves {triples:?}"));
    outcome(ok, notes.join(", "))
}

fn c4_determinants() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    // identically zero with the parameter left symbolic
    for id in ["ex87-32", "ex87-38"] {
        let e = entry(id);
        let rep = invariants::two_point_invariant_criterion(&e.algebra(), 0).unwrap();
        ok &= rep.determinant_zero == ZeroTest::Yes;
        notes.push(format!("{id} det {}", rep.determinant));
    }
    for id in ["ex87-28", "ex87-30"] {
        let rep = invariants::two_point_invariant_criterion(&entry(id).algebra(), 0).unwrap();
        ok &= rep.determinant_zero == ZeroTest::No;
        notes.push(format!("{id} det nonzero"));
    }
    let accept = [("ex87-28", false), ("ex87-30", false), ("ex87-32", true), ("ex87-38", true), ("ex87-45", true), ("ex87-52", true)];
    for (id, want) in accept {
        let e = entry(id);
        for p in e.runs() {
            let rep = invariants::two_point_invariant_criterion(&e.algebra().instantiate(&p), 0).unwrap();
            ok &= rep.passes == want;
        }
    }
    notes.push("accept/reject matches for 28, 30, 32, 38, 45, 52".into());
    outcome(ok, notes.join("; "))
}

fn period_of(id: &str, seed: u64) -> (Option<f64>, String) {
    let e = entry(id);
    let setup = e.monodromy.clone().unwrap();
    let l = e.algebra();
    let x = catalog::fixed_point_motion(&l, &setup).expect("one-parameter motion");
    let starts = flows::sample_starts(&setup.center, setup.starts, setup.radius, seed);
    let rep = flows::monodromy_period(&x, &starts, &[], setup.t_max, setup.steps, setup.tol).unwrap();
    (rep.period, x.to_string_with(&l.sym))
}

fn c5_monodromy() -> Outcome {
    let e = entry("ex94-24");
    let s = e.monodromy.as_ref().unwrap();
    let budget_ok = s.steps == 20_000 && s.starts == 8 && s.tol == 1e-6;
    let (p24, _) = period_of("ex94-24", 7);
    let (p24r, x24r) = period_of("ex94-24r", 7);
    let near = p24.is_some_and(|t| (t - std::f64::consts::TAU).abs() < 1e-6);
    let reduced_is_shear = x24r == "(-x + y)*r";
    outcome(budget_ok && near && p24r.is_none() && reduced_is_shear, format!("group (24) period {p24:?}; reduced motion {x24r} period {p24r:?} up to t = 100"))
}

fn c6_seven_forms() -> Outcome {
    let reps = mobility::classify_seven_forms();
    let periodic: Vec<usize> = reps.iter().filter(|f| f.class.is_periodic()).map(|f| f.index).collect();
    let first_five = reps[..5].iter().all(|f| f.rejected && !f.witnesses.is_empty());
    let sixth = reps[5].class == MotionTag::Spiral && reps[5].rejected;
    let classes: Vec<String> = reps.iter().map(|f| f.class.to_string()).collect();
    outcome(periodic == [7] && first_five && sixth, format!("classes {classes:?}"))
}

fn c7_free_mobility() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in ["thm37-1", "thm37-3", "thm37-4"] {
        let v = mobility::free_mobility_generic(&entry(id).algebra(), &[], 0).unwrap();
        ok &= v.free_mobility;
        notes.push(format!("{id} {}", v.free_mobility));
    }
    let planar = entry("ex90-62a").algebra();
    for c in [rat(0, 1), rat(1, 2)] {
        let v = mobility::free_mobility_generic(&planar, &[c.clone()], 0).unwrap();
        ok &= v.free_mobility;
        notes.push(format!("planar c={c} {}", v.free_mobility));
    }
    for id in ["thm37-8", "thm37-9", "thm37-10", "thm37-11"] {
        let e = entry(id);
        for p in e.runs() {
            let v = mobility::free_mobility_generic(&e.algebra(), &p, 0).unwrap();
            ok &= !v.free_mobility && v.failing_stage.is_some();
            if p == e.runs()[0] {
                notes.push(format!("{id} false at stage {:?}", v.failing_stage));
            }
        }
    }
    outcome(ok, notes.join(", "))
}

fn random_start(rng: &mut sample::SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect()
}

fn c8_flows() -> Outcome {
    let all = catalog::builtin_entries();
    let mut rng = sample::rng(8);
    let mut worst_series = 0.0f64;
    let mut fields_checked = 0;
    for e in &all {
        let p: Vec<f64> = e.runs()[0].iter().map(to_f64).collect();
        for g in &e.algebra().gens {
            fields_checked += 1;
            let x0 = random_start(&mut rng, e.vars.len());
            for t in [-0.2, -0.1, 0.1, 0.2] {
                let s = flows::lie_series_flow(g, &x0, &p, t, 20).unwrap();
                let r = flows::numeric_flow(g, &x0, &p, t, 2000).unwrap();
                let d = s.point.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst_series = worst_series.max(d);
            }
        }
    }
    let mut worst_law = 0.0f64;
    for _ in 0..50 {
        let e = &all[rng.gen_range(0..all.len())];
        let l = e.algebra();
        let g = &l.gens[rng.gen_range(0..l.r())];
        let p: Vec<f64> = e.runs()[0].iter().map(to_f64).collect();
        let x0 = random_start(&mut rng, e.vars.len());
        let (t1, t2) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        worst_law = worst_law.max(flows::one_param_group_law_check(g, &x0, &p, t1, t2).unwrap());
    }
    // Proven invariants along flows of the generators acting on both points
    let mut worst_drift = 0.0f64;
    let mut drift_runs = 0;
    let mut truncated = 0;
    for e in &all {
        let l = e.algebra();
        let pr = &e.runs()[0];
        let p: Vec<f64> = pr.iter().map(to_f64).collect();
        let n = l.n();
        for j in e.pair_invariants() {
            if !matches!(invariants::verify_joint_invariant(&l, &j, 2, VerifyMode::Symbolic, &[], 0), Ok(Verdict::Proven)) {
                continue;
            }
            let f = j.compile();
            for g in &l.gens {
                let a = random_start(&mut rng, n);
                let b: Vec<f64> = a.iter().map(|v| v + rng.gen_range(0.2..0.4)).collect();
                let mut pts = vec![a.clone(), b.clone()];
                let j0 = f.eval(&[a.clone(), b.clone()].concat(), &p).unwrap();
                let steps = 10_000;
                let traj_a = flows::numeric_trajectory(g, &a, &p, 1.0, steps).unwrap();
                let traj_b = flows::numeric_trajectory(g, &b, &p, 1.0, steps).unwrap();
                // a formula like atan(dy/dx) only holds on one component of
                // its domain; stop where the path jumps to another branch
                let mut prev = j0;
                for ((_, xa), (_, xb)) in traj_a.iter().zip(&traj_b).step_by(10) {
                    pts[0] = xa.clone();
                    pts[1] = xb.clone();
                    let Ok(v) = f.eval(&pts.concat(), &p) else {
                        truncated += 1;
                        break;
                    };
                    if (v - prev).abs() > 0.5 {
                        truncated += 1;
                        break;
                    }
                    prev = v;
                    worst_drift = worst_drift.max((v - j0).abs());
                }
                drift_runs += 1;
            }
        }
    }
    let ok = worst_series < 1e-8 && worst_law < 1e-9 && worst_drift < 1e-6;
    outcome(ok, format!("series vs rk4 {worst_series:.1e} over {fields_checked} generators; group law {worst_law:.1e} over 50 draws; invariant drift {worst_drift:.1e} over {drift_runs} flows ({truncated} stopped at a branch cut)"))
}

fn c9_complete_systems() -> Outcome {
    let sym = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let f = |s: &str| VectorField::parse(s, &sym).unwrap();
    let done = flows::complete_system_complete(&[f("p"), f("q + x*r")], 0).unwrap();
    let completed = done.fields.len() == 3 && done.adjoined == [(0, 1)] && done.fields[2].sub(&f("r")).is_zero();
    let x = f("p + x*r");
    let sol = flows::complete_system_solve_single(&x, 0, 8, 0).unwrap();
    let want = [Expr::parse("y", &sym).unwrap(), Expr::parse("z - x^2/2", &sym).unwrap()];
    let exact = sol.exact && sol.integrals.len() == 2 && sol.integrals.iter().zip(&want).all(|(a, b)| a.sub(b).is_zero());
    let annihilated = sol.integrals.iter().all(|w| x.apply(w).is_identically_zero() == ZeroTest::Yes);
    let names: Vec<String> = sol.integrals.iter().map(|w| w.to_string_with(&sym)).collect();
    outcome(completed && exact && annihilated, format!("completion adds r; integrals {names:?}"))
}

fn c10_infinitesimal() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for e in catalog::builtin_entries() {
        for p in e.runs() {
            let l = e.algebra().instantiate(&p);
            if invariants::joint_invariant_count(&l, 2, 0) >= 1 {
                checked += 1;
                if !invariants::infinitesimal_invariant_exists(&l, 0).exists {
                    bad.push(e.id.clone());
                }
            }
        }
    }
    let e22 = entry("ex94-22");
    let l = e22.algebra();
    let w = Expr::parse("dy - z*dx", &e22.symbols().with_differentials()).unwrap();
    let verified = invariants::verify_infinitesimal_invariant(&l, &w).iter().all(|t| *t == ZeroTest::Yes);
    let no_pairs = invariants::joint_invariant_count(&l, 2, 0) == 0;
    outcome(bad.is_empty() && verified && no_pairs, format!("{checked} algebras with pair invariants all have infinitesimal ones; dy - z dx verified for (22) with no pair invariant; failures {bad:?}"))
}

fn c11_prolongation() -> Outcome {
    let plane = Symbols::new(&["x", "y"], &[] as &[&str]);
    let lifted: Vec<VectorField> = ["p", "q", "x*q", "y*q", "x*p", "y*p"].iter().map(|g| fields::prolong_jet1(&VectorField::parse(g, &plane).unwrap()).unwrap()).collect();
    let g28 = entry("ex87-28").algebra().gens;
    let inside = |a: &[VectorField], b: &[VectorField]| {
        a.iter().all(|f| matches!(algebra::express_in_span(b, f), Ok(lam) if lam.iter().all(Expr::is_var_free)))
    };
    outcome(inside(&lifted, &g28) && inside(&g28, &lifted), "prolonged general linear group spans exactly the algebra of (28)")
}

fn c12_arc_length() -> Outcome {
    let dil = invariants::arc_length_invariant_exists(&entry("ex101-dil").algebra(), 0);
    let euc = invariants::arc_length_invariant_exists(&entry("thm37-1").algebra(), 0);
    outcome(!dil && euc, format!("dilations {dil}, Euclidean {euc}"))
}

#[test]
fn acceptance() {
    type Criterion = (usize, &'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "catalog closure", 10, c1_closure),
        (2, "invariant identities", 30, c2_invariant_identities),
        (3, "invariant counts", 5, c3_counts),
        (4, "determinant criteria", 2, c4_determinants),
        (5, "monodromy", 10, c5_monodromy),
        (6, "seven forms", 1, c6_seven_forms),
        (7, "free mobility", 5, c7_free_mobility),
        (8, "flows", 60, c8_flows),
        (9, "complete systems", 1, c9_complete_systems),
        (10, "infinitesimal invariants", 5, c10_infinitesimal),
        (11, "prolongation identity", 1, c11_prolongation),
        (12, "arc-length criterion", 1, c12_arc_length),
    ];
    let mut failed = Vec::new();
    for (k, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = o.ok && in_time;
        println!(
            "criterion {k:>2} {name:<26} {} {:>7.3}s / {budget}s  {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        if !pass {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
