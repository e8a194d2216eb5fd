//! Minimal sets of a quasiperiodically forced bistable cubic at a few
//! parameter values.
use snbif::{census, BaseFlowSpec, Family, RhsModel, Scenario, TrigPoly};

fn main() {
    let c0 = TrigPoly::cosine(0.0, &[(vec![1, 0], 0.1, 0.0), (vec![0, 1], 0.05, 1.0)]);
    let m = RhsModel::cubic(c0, TrigPoly::constant(1.0), TrigPoly::constant(0.0), TrigPoly::constant(-1.0));
    let mut s = Scenario::new(BaseFlowSpec::golden(), m, Family::Additive);
    s.numerics.grid_n = 64;
    for lambda in [-0.6, -0.2, 0.0, 0.2, 0.6] {
        let r = census(&s, lambda).expect("census");
        let sets: Vec<String> = r
            .sets
            .iter()
            .map(|x| format!("{:?} mean {:+.4} exponent {:+.4}", x.role, x.mean, x.exponent))
            .collect();
        println!("λ = {lambda:+.1}: {} set(s)", r.count);
        for line in sets {
            println!("    {line}");
        }
    }
}
