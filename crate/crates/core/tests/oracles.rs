mod common;

use common::{deadzone_fx, module_grid_oracle, root_census, AutonomousCubic};
use snbif::{standardized_module, BasePoint, DcInterval, RhsModel, TrigPoly};

#[test]
fn root_census_factorises() {
    let c = root_census(&AutonomousCubic::new(0.0, 1.0, 0.0, -1.0));
    assert_eq!(c.roots.len(), 3);
    for (r, want) in c.roots.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((r - want).abs() < 1e-11);
    }
    assert_eq!(c.stabilities, vec![-1, 1, -1]);
    assert!(!c.degenerate);
}

#[test]
fn root_census_single_root() {
    let c = root_census(&AutonomousCubic::new(0.5, 1.0, 0.0, -1.0));
    assert_eq!(c.roots.len(), 1);
    assert!((c.roots[0] - 1.1915).abs() < 1e-4);
    assert_eq!(c.stabilities, vec![-1]);
}

#[test]
fn root_census_flags_the_triple_root() {
    let c = root_census(&AutonomousCubic::new(0.0, 0.0, 0.0, -1.0));
    assert_eq!(c.roots.len(), 1);
    assert!(c.roots[0].abs() < 1e-11);
    assert!(c.degenerate);
}

#[test]
fn root_census_finds_the_double_root() {
    // −(x − 1)²(x + 2)
    let c = root_census(&AutonomousCubic::new(-2.0, 3.0, 0.0, -1.0));
    assert_eq!(c.roots.len(), 2);
    assert!((c.roots[0] + 2.0).abs() < 1e-11 && (c.roots[1] - 1.0).abs() < 1e-9);
    assert!(c.degenerate);
}

#[test]
fn module_oracle_examples() {
    let b = module_grid_oracle(|x| -3.0 * x * x, -1.0, 1.0, 0.5, 100_000);
    assert!((b - 0.01171875).abs() < 1e-12);
    assert!(module_grid_oracle(|x| 2.0 * x - 1.0, -1.0, 1.0, 0.5, 1000).abs() < 1e-15);
}

#[test]
fn deadzone_module_matches_the_engine() {
    let j = DcInterval::new(-1.0, 1.0).unwrap();
    let p = BasePoint::new(vec![]);
    for w in [0.0, 0.1, 0.25, 0.5] {
        let m = RhsModel::deadzone(TrigPoly::constant(w));
        for eps in [0.1, 0.3, 0.5, 1.0] {
            let engine = standardized_module(&m, &p, j, eps).unwrap();
            let oracle = module_grid_oracle(|x| deadzone_fx(w, x), -1.0, 1.0, eps, 100_000);
            assert!((engine - oracle).abs() < 1e-9, "w={w} ε={eps}: {engine} vs {oracle}");
        }
    }
    let b = module_grid_oracle(|x| deadzone_fx(0.1, x), -1.0, 1.0, 0.5, 100_000);
    assert!(b > 0.0);
}
