//! The motion left after fixing two points, and whether it returns.

use transgroups::catalog;
use transgroups::flows;

fn main() {
    for id in ["ex94-24", "ex94-24r"] {
        let e = catalog::find_entry(id).unwrap();
        let setup = e.monodromy.clone().unwrap();
        let l = e.algebra();
        let x = catalog::fixed_point_motion(&l, &setup).unwrap();
        let starts = flows::sample_starts(&setup.center, setup.starts, setup.radius, 7);
        let rep = flows::monodromy_period(&x, &starts, &[], setup.t_max, setup.steps, setup.tol).unwrap();
        println!("{id}: motion {}", x.to_string_with(&l.sym));
        match rep.period {
            Some(t) => println!("  returns after t = {t:.9} (2 pi = {:.9})", std::f64::consts::TAU),
            None => println!("  no return up to t = {}", setup.t_max),
        }
    }
}
