//! Standardized module of d-concavity: closed form for a cubic, and the
//! measure of its positivity set for a dead zone whose width oscillates.
use snbif::dconcavity::classify_sdc;
use snbif::{standardized_module, BaseFlowSpec, BasePoint, DcInterval, Family, RhsModel, Scenario, TrigPoly};

fn main() {
    let j = DcInterval::new(-1.0, 1.0).unwrap();
    let cubic = RhsModel::cubic_const([0.0, 0.0, 0.0, -1.0]);
    for eps in [0.1, 0.25, 0.5, 1.0] {
        let b = standardized_module(&cubic, &BasePoint::new(vec![]), j, eps).unwrap();
        println!("-x^3, ε = {eps:<4}: b = {b:.8} (3ε³/32 = {:.8})", 3.0 * eps.powi(3) / 32.0);
    }

    // w(θ) = sin²(πθ)/2
    let w = TrigPoly::cosine(0.25, &[(vec![1], -0.25, 0.0)]);
    let mut s = Scenario::new(BaseFlowSpec::periodic(1.0), RhsModel::deadzone(w), Family::Additive);
    s.numerics.birkhoff_t = 1e3;
    let r = classify_sdc(&s, j, &[0.05, 0.1, 0.25]).unwrap();
    for (e, m) in r.eps_grid.iter().zip(&r.measures) {
        println!("dead zone, ε = {e:<4}: measure {m:.4} (closed form {:.4})", 2.0 / std::f64::consts::PI * e.sqrt().asin());
    }
    println!("{:?}, trend {:?}", r.classification, r.trend);
}
