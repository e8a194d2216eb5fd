//! Delimiters of the global attractor by pullback, their Lyapunov
//! exponents, and the repeller between them.
use snbif::base_flow::BasePoint;
use snbif::equilibria::{bisect_repeller, lyapunov_exponent, pullback_detailed, Track};
use snbif::{BaseFlowSpec, Family, RhsModel, Scenario, Side, TrigPoly};

fn main() {
    let c0 = TrigPoly::cosine(0.0, &[(vec![1, 0], 0.15, 0.0)]);
    let m = RhsModel::cubic(c0, TrigPoly::constant(1.0), TrigPoly::constant(0.0), TrigPoly::constant(-1.0));
    let s = Scenario::new(BaseFlowSpec::golden(), m, Family::Additive);
    let omega = BasePoint::new(vec![0.2, 0.7]);
    let lambda = 0.1;
    let lower = pullback_detailed(&s, lambda, &omega, Side::Lower).unwrap();
    let upper = pullback_detailed(&s, lambda, &omega, Side::Upper).unwrap();
    println!("alpha = {:.10} ({:?}, horizon {})", lower.values[0], lower.status, lower.horizon);
    println!("beta  = {:.10} ({:?}, horizon {})", upper.values[0], upper.status, upper.horizon);
    match bisect_repeller(&s, lambda, &omega, lower.values[0], upper.values[0]).unwrap() {
        Some(k) => println!("kappa = {k:.10}"),
        None => println!("no repeller between the delimiters"),
    }
    for track in [Track::Alpha, Track::Kappa, Track::Beta] {
        let g = lyapunov_exponent(&s, lambda, &omega, track).unwrap();
        println!("exponent along {track:?}: {g:+.5}");
    }
}
