//! Schwarzian derivative of the fiber flow: zero at t = 0, slope f_xxx, and
//! negative afterwards when f_xxx < 0.
use snbif::{schwarzian, BaseFlowSpec, BasePoint, Family, RhsModel, Scenario};

fn main() {
    let s = Scenario::new(BaseFlowSpec::periodic(1.0), RhsModel::cubic_const([0.0, 1.0, 0.0, -1.0]), Family::Additive);
    let omega = BasePoint::new(vec![0.25]);
    for x0 in [-1.5, 0.0, 0.8] {
        print!("x0 = {x0:+.1}:");
        for t in [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0] {
            let v = schwarzian(&s, 0.0, &omega, x0, t).unwrap();
            print!("  S({t}) = {v:+.4}");
        }
        println!();
    }
}
