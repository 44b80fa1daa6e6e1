//! Brackets, closure and structure constants of the Euclidean motions.

use transgroups::algebra::{self, LieAlgebra};
use transgroups::expr::Symbols;
use transgroups::fields::VectorField;

fn main() {
    let sym = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let a = VectorField::parse("p", &sym).unwrap();
    let b = VectorField::parse("x^2*q + 2*x*r", &sym).unwrap();
    println!("[p, x^2 q + 2x r] = {}", a.bracket(&b).unwrap().to_string_with(&sym));

    let l = LieAlgebra::parse(sym.clone(), &["p", "q", "r", "x*q - y*p", "y*r - z*q", "z*p - x*r"]).unwrap();
    let sc = algebra::check_closure(&l).unwrap();
    for line in sc.describe(&sym) {
        println!("{line}");
    }
    println!("jacobi holds: {}", algebra::verify_structure(&sc).ok());

    let rotations = LieAlgebra::new(sym.clone(), l.gens[3..].to_vec());
    let sc = algebra::check_closure(&rotations).unwrap();
    println!("killing signature of rotations (n+, n0, n-): {:?}", algebra::killing_form_signature(&sc, &[]));

    let broken = LieAlgebra::parse(sym, &["p", "x*q"]).unwrap();
    match algebra::check_closure(&broken) {
        Ok(_) => println!("unexpectedly closed"),
        Err(e) => println!("{{p, xq}}: {e}"),
    }
}
