//! Motion classes of the seven planar projective forms and free mobility.

use transgroups::catalog;
use transgroups::mobility;

fn main() {
    for f in mobility::classify_seven_forms() {
        let verdict = if f.rejected { "rejected" } else { "kept" };
        println!("{}. {:<40} {:<16} {verdict} {:?}", f.index, f.form, f.class.to_string(), f.witnesses);
    }
    for id in ["thm37-1", "thm37-3", "thm37-8", "thm37-11", "ex90-62a"] {
        let e = catalog::find_entry(id).unwrap();
        let p = e.runs().into_iter().next().unwrap();
        let v = mobility::free_mobility_generic(&e.algebra(), &p, 0).unwrap();
        println!("{id}: free mobility {} (isotropy {}, failing stage {:?})", v.free_mobility, v.isotropy_dim, v.failing_stage);
    }
}
