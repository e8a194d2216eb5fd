//! Bisection of the census count: where the bistable cubic loses its
//! middle set.
use snbif::bifurcation::CountPredicate;
use snbif::{locate_bifurcation, Family, RhsModel, Scenario};

fn main() {
    let mut s = Scenario::autonomous(RhsModel::cubic_const([0.0, 1.0, 0.0, -1.0]), Family::Additive);
    s.numerics.bisect_tol = 1e-8;
    let three = CountPredicate::parse("count=3").unwrap();
    let loc = locate_bifurcation(&s, 0.0, 1.0, |r| three.holds(r)).expect("locate");
    let exact = 2.0 / (3.0 * 3f64.sqrt());
    println!("saddle-node at {:.9} ± {:.1e} (exact {exact:.9})", loc.location, loc.width);
}
