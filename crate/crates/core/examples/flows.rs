//! Lie series against RK4, and a trajectory exported as CSV.

use transgroups::expr::Symbols;
use transgroups::fields::VectorField;
use transgroups::flows;

fn main() {
    let sym = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
    let x = VectorField::parse("x^2*p + x*y*q + y^2/2*r", &sym).unwrap();
    let x0 = [0.3, -0.2, 0.5];
    for t in [0.05, 0.1, 0.2] {
        let series = flows::lie_series_flow(&x, &x0, &[], t, 12).unwrap();
        let rk = flows::numeric_flow(&x, &x0, &[], t, 400).unwrap();
        let gap = series.point.iter().zip(&rk).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t = {t}: series order {} vs rk4 differ by {gap:.2e}", series.order_used);
    }
    let dev = flows::one_param_group_law_check(&x, &x0, &[], 0.1, 0.07).unwrap();
    println!("group law deviation: {dev:.2e}");

    let rot = VectorField::parse("y*p - x*q", &sym).unwrap();
    let traj = flows::numeric_trajectory(&rot, &[1.0, 0.0, 0.0], &[], 1.0, 4).unwrap();
    print!("{}", flows::trajectory_csv(&traj, &["x".into(), "y".into(), "z".into()]));
}
