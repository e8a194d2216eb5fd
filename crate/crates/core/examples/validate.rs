//! Coercivity and d-concavity checks for a forced cubic, one that fails and
//! one that passes.
use snbif::{validate_model, BaseFlowSpec, Family, RhsModel, Scenario, TrigPoly};

fn main() {
    let c3_bad = TrigPoly::cosine(-0.2, &[(vec![1, 0], 0.5, 0.0)]);
    let c3_good = TrigPoly::cosine(-1.0, &[(vec![1, 0], 0.5, 0.0)]);
    for c3 in [c3_bad, c3_good] {
        let m = RhsModel::cubic(TrigPoly::constant(0.0), TrigPoly::constant(1.0), TrigPoly::constant(0.0), c3);
        let s = Scenario::new(BaseFlowSpec::golden(), m, Family::Additive);
        for c in validate_model(&s).checks {
            println!("{:<14} {:<5} via {:<10} {}", c.name, c.passed, c.decided_by, c.detail);
        }
        println!();
    }
}
