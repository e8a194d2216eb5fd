//! Spectrum bracket of the quadratic coefficient of a quasiperiodic
//! pitchfork family, and the verdict the spectrum rule draws from it.
use snbif::bifurcation::spectrum_rule;
use snbif::{estimate_spectrum, BaseFlowSpec, Family, Observable, RhsModel, Scenario, TrigPoly};

fn main() {
    for mean in [0.0, 0.5] {
        let c2 = TrigPoly::cosine(mean, &[(vec![1, 0], 0.3, 0.0)]);
        let m = RhsModel::cubic(TrigPoly::constant(0.0), TrigPoly::constant(0.0), c2, TrigPoly::constant(-1.0));
        let s = Scenario::new(BaseFlowSpec::golden(), m, Family::Linear);
        let e = estimate_spectrum(&s, Observable::A2Coefficient, &[100.3, 1000.3, 10000.3]).unwrap();
        for (t, lo, hi) in &e.spread_history {
            println!("mean {mean}: T = {t:>8}: [{lo:+.3e}, {hi:+.3e}]");
        }
        println!("mean {mean}: rule says {:?}\n", spectrum_rule(&s).map(|c| c.as_str()));
    }
}
