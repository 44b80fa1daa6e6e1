//! Completing a system of operators and integrating a single one.

use transgroups::expr::Symbols;
use transgroups::fields::VectorField;
use transgroups::flows;

fn main() {
    let sym = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let sys = [VectorField::parse("p", &sym).unwrap(), VectorField::parse("q + x*r", &sym).unwrap()];
    let done = flows::complete_system_complete(&sys, 0).unwrap();
    for f in &done.fields {
        println!("  {}", f.to_string_with(&sym));
    }
    println!("adjoined brackets: {:?}", done.adjoined);

    let x = VectorField::parse("p + x*r", &sym).unwrap();
    let sol = flows::complete_system_solve_single(&x, 0, 8, 0).unwrap();
    let names: Vec<String> = sol.integrals.iter().map(|w| w.to_string_with(&sym)).collect();
    println!("integrals of {}: {} (exact {})", x.to_string_with(&sym), names.join(", "), sol.exact);
}
