//! Adaptive Dormand–Prince integration of a fiber against the closed-form
//! logistic-type solution of x' = x − x³.
use snbif::integrator::SolveStatus;
use snbif::{solve, BasePoint, Family, RhsModel, Scenario};

fn main() {
    let s = Scenario::autonomous(RhsModel::cubic_const([0.0, 1.0, 0.0, -1.0]), Family::Additive);
    let omega = BasePoint::new(vec![]);
    let x0: f64 = 0.1;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let sol = solve(&s, 0.0, &omega, x0, t, true);
        assert_eq!(sol.status, SolveStatus::Ok);
        let exact = x0 / (x0 * x0 + (1.0 - x0 * x0) * (-2.0 * t).exp()).sqrt();
        println!(
            "t = {t}: x = {:.12} exact {exact:.12} err {:.1e}  u_x = {:.6}",
            sol.x_end,
            (sol.x_end - exact).abs(),
            sol.ux.unwrap()
        );
    }
    // backwards in time everything outside the attractor escapes
    let back = solve(&s, 0.0, &omega, 1.5, -5.0, false);
    println!("from 1.5 backwards: {:?} at t = {:.6}, x = {:.3}", back.status, back.t_end, back.x_end);
}
