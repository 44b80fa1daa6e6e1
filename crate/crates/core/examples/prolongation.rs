//! First-jet prolongation of the planar linear group, and its reduced group.

use transgroups::algebra::{self, LieAlgebra};
use transgroups::catalog;
use transgroups::expr::Symbols;
use transgroups::fields::{self, VectorField};
use transgroups::invariants;

fn main() {
    let plane = Symbols::new(&["x", "y"], &[] as &[&str]);
    let space = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let gl = ["p", "q", "x*q", "y*q", "x*p", "y*p"];
    let lifted: Vec<VectorField> = gl.iter().map(|g| fields::prolong_jet1(&VectorField::parse(g, &plane).unwrap()).unwrap()).collect();
    for f in &lifted {
        println!("  {}", f.to_string_with(&space));
    }
    let e28 = catalog::find_entry("ex87-28").unwrap().algebra();
    let o = fields::origin(3);
    println!("same span as ex87-28: {}", fields::spans_equal_over_constants(&lifted, &e28.gens, &o));

    let l = LieAlgebra::new(space.clone(), lifted);
    let inf = invariants::infinitesimal_invariant_exists(&l, 0);
    println!("pair invariants {}, infinitesimal invariant exists {}", invariants::joint_invariant_count(&l, 2, 0), inf.exists);

    let e22 = catalog::find_entry("ex94-22").unwrap().algebra();
    let red = algebra::reduced_algebra(&e22, &o);
    println!("reduced group of ex94-22: {}", red.gen_strings().join(", "));
    println!("its pair invariants: {}", invariants::joint_invariant_count(&red, 2, 0));
}
