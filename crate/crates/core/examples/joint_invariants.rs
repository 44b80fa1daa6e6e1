//! Counting and verifying two-point invariants.

use transgroups::algebra::LieAlgebra;
use transgroups::expr::{rat, Expr, Symbols};
use transgroups::invariants::{self, VerifyMode};

fn main() {
    let sym = Symbols::new(&["x", "y", "z"], &["c"]);
    let gens = ["p", "q", "x*q + r", "x^2*q + 2*x*r", "x*p + y*q + c*r", "x^2*p + 2*x*y*q + 2*(y + c*x)*r"];
    let l = LieAlgebra::parse(sym.clone(), &gens).unwrap();
    let at_half = l.instantiate(&[rat(1, 2)]);
    println!("pair invariants: {}", invariants::joint_invariant_count(&at_half, 2, 0));
    println!("three-point invariants: {}", invariants::joint_invariant_count(&at_half, 3, 0));

    let j = Expr::parse("z1 + z2 - c*log((x2 - x1)^2) - 2*(y2 - y1)/(x2 - x1)", &sym.for_points(2)).unwrap();
    let v = invariants::verify_joint_invariant(&l, &j, 2, VerifyMode::Symbolic, &[], 0).unwrap();
    println!("J = {}: {v:?}", j.to_string_with(&sym.for_points(2)));

    let wrong = Expr::parse("z1 - z2", &sym.for_points(2)).unwrap();
    let v = invariants::verify_joint_invariant(&l, &wrong, 2, VerifyMode::Symbolic, &[], 0).unwrap();
    println!("z1 - z2: {}", v.label());

    let rep = invariants::two_point_invariant_criterion(&at_half, 0).unwrap();
    println!("determinant criterion at c = 1/2: det {} passes {}", rep.determinant, rep.passes);
    let ess = invariants::essential_invariant_check(&at_half, 3, &[j], &[rat(1, 2)], 0).unwrap();
    println!("three-point invariants essential: {}", ess.essential);
}
