//! The built-in catalog against its expectations.

use transgroups::catalog::{self, Format};
use transgroups::expr::rat;
use transgroups::invariants;

#[test]
fn every_entry_passes_at_two_seeds() {
    let all = catalog::builtin_entries();
    assert!(all.len() >= 24);
    let ids: Vec<&str> = all.iter().map(|e| e.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for seed in [0, 3] {
        for e in &all {
            let rep = catalog::verify_entry(e, seed);
            let failing: Vec<_> = rep.checks.iter().filter(|c| !c.passed()).collect();
            assert!(failing.is_empty(), "{} seed {seed}: {failing:?}", e.id);
        }
    }
}

#[test]
fn theorem_37_groups_have_one_pair_invariant_and_no_essential_ones() {
    for e in catalog::builtin_entries().iter().filter(|e| e.id.starts_with("thm37-")) {
        for p in e.runs() {
            let l = e.algebra().instantiate(&p);
            assert_eq!(invariants::joint_invariant_count(&l, 2, 0), 1, "{}", e.id);
            let rep = invariants::essential_invariant_check(&l, 3, &e.pair_invariants(), &p, 0).unwrap();
            assert!(!rep.essential, "{} {p:?}", e.id);
        }
    }
}

#[test]
fn reduced_groups_match_the_table() {
    for (id, reduced) in [("ex94-21", "ex94-21r"), ("ex94-22", "ex94-22r"), ("ex94-23", "ex94-23r"), ("ex94-24", "ex94-24r")] {
        let e = catalog::find_entry(id).unwrap();
        assert_eq!(e.reduced.as_deref(), Some(reduced));
        let rep = catalog::verify_entry(&e, 0);
        let check = rep.checks.iter().find(|c| c.name.starts_with("reduced_group")).unwrap();
        assert!(check.passed(), "{id}: {check:?}");
    }
}

#[test]
fn criterion_of_51_holds_only_at_zero() {
    let e = catalog::find_entry("ex87-51").unwrap();
    for c in [rat(0, 1), rat(-2, 1), rat(1, 2), rat(3, 1), rat(-1, 3)] {
        let l = e.algebra().instantiate(&[c.clone()]);
        let rep = invariants::two_point_invariant_criterion(&l, 0).unwrap();
        assert_eq!(rep.passes, c == rat(0, 1), "c = {c}: det {}", rep.determinant);
    }
}

#[test]
fn json_report_schema() {
    let reports: Vec<_> = ["ex90-60c", "thm37-8"].iter().map(|id| catalog::verify_entry(&catalog::find_entry(id).unwrap(), 5)).collect();
    let text = catalog::export_report(&reports, Format::Json);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for (r, id) in arr.iter().zip(["ex90-60c", "thm37-8"]) {
        assert_eq!(r["entry"], id);
        assert_eq!(r["seed"], 5);
        for c in r["checks"].as_array().unwrap() {
            for key in ["name", "expected", "observed", "status", "diagnostics"] {
                assert!(c.get(key).is_some(), "{key} missing in {c}");
            }
        }
    }
    assert_eq!(text, catalog::export_report(&reports, Format::Json));
    assert!(catalog::export_report(&reports, Format::Text).starts_with("ex90-60c (seed 5): pass\n"));
}
