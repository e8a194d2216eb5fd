//! The standardized ε-module of d-concavity and strict d-concavity evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::base_flow::{advance, BasePoint};
use crate::model::{deadzone_derivs, RhsModel};
use crate::scenario::{validate_model, Scenario};

/// Threshold separating a positive module from roundoff.
pub const POS_TOL: f64 = 1e-12;

const GRID: usize = 257;
const SAMPLES_PER_CYCLE: f64 = 64.0;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Error, PartialEq)]
pub enum DcError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty ε grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DcInterval {
    pub lo: f64,
    pub hi: f64,
}

impl DcInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DcError> {
        if !(lo < hi) {
            return Err(DcError::Domain(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    fn require_module_eps(&self, eps: f64) -> Result<(), DcError> {
        if !(eps > 0.0 && 2.0 * eps <= self.len()) {
            return Err(DcError::Domain(format!("need 0 < 2ε ≤ l(J), got ε = {eps}, l(J) = {}", self.len())));
        }
        Ok(())
    }
}

/// `2 f_x(x) − f_x(x − ε/2) − f_x(x + ε/2)` for the dead zone of half-width `w`.
fn deadzone_bracket(w: f64, x: f64, eps: f64) -> f64 {
    let fx = |y: f64| deadzone_derivs(w, y).fx;
    2.0 * fx(x) - fx(x - eps / 2.0) - fx(x + eps / 2.0)
}

fn golden_min<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if b - a < 1e-14 {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc <= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// `b_{J,ε}(ω) = ε/(4 l(J)²) · min over J_ε of the bracket above`.
pub fn standardized_module(m: &RhsModel, omega: &BasePoint, j: DcInterval, eps: f64) -> Result<f64, DcError> {
    let l = j.len();
    if !(0.0..=l).contains(&eps) {
        return Err(DcError::Domain(format!("ε = {eps} outside [0, {l}]")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let scale = eps / (4.0 * l * l);
    let min = match m {
        RhsModel::Cubic { c3, .. } => {
            // the bracket of a cubic is −(3/2) c3 ε², whatever x is
            -1.5 * c3.eval(&omega.theta) * eps * eps
        }
        RhsModel::Deadzone { w } => {
            let (a, b) = (j.lo + eps / 2.0, j.hi - eps / 2.0);
            let wv = w.eval(&omega.theta);
            let g = |x: f64| deadzone_bracket(wv, x, eps);
            let step = (b - a) / (GRID - 1) as f64;
            let mut best = (a, g(a));
            for i in 1..GRID {
                let x = if i + 1 == GRID { b } else { a + i as f64 * step };
                let v = g(x);
                if v < best.1 {
                    best = (x, v);
                }
            }
            if step > 0.0 {
                let r = golden_min(g, (best.0 - step).max(a), (best.0 + step).min(b));
                if r.1 < best.1 {
                    best = r;
                }
            }
            let mut min = best.1;
            for x in [0.0, wv, -wv, wv - eps / 2.0, wv + eps / 2.0, -wv - eps / 2.0, -wv + eps / 2.0] {
                min = min.min(g(x.clamp(a, b)));
            }
            min
        }
    };
    Ok(scale * min)
}

fn random_point<R: Rng>(rng: &mut R, dim: usize) -> BasePoint {
    BasePoint::new((0..dim).map(|_| rng.gen::<f64>()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleCheck {
    pub passed: bool,
    pub trials: usize,
    pub min_slack: f64,
    pub witness_omega: Vec<f64>,
    /// `[x0, x1, x2, x3]` at the smallest slack.
    pub witness_x: [f64; 4],
}

/// Samples the module inequality
/// `f(ω,[x1,x0,x2]) ≥ f(ω,[x1,x0,x3]) + b_{J,ε}(ω)` at random admissible points.
pub fn check_module_inequality(
    m: &RhsModel,
    dim: usize,
    j: DcInterval,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ModuleCheck, DcError> {
    j.require_module_eps(eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ModuleCheck {
        passed: true,
        trials,
        min_slack: f64::INFINITY,
        witness_omega: Vec::new(),
        witness_x: [0.0; 4],
    };
    let mut done = 0;
    while done < trials {
        let omega = random_point(&mut rng, dim);
        let x1 = rng.gen_range(j.lo..=j.hi - 2.0 * eps);
        let x2 = rng.gen_range(x1 + eps..=j.hi - eps);
        let x3 = rng.gen_range(x2 + eps..=j.hi);
        let x0 = rng.gen_range(j.lo..=j.hi);
        if x0 == x1 || x0 == x2 || x0 == x3 {
            continue;
        }
        done += 1;
        let b = standardized_module(m, &omega, j, eps)?;
        let lhs = m.divided_difference(&omega, &[x1, x0, x2]).expect("distinct");
        let rhs = m.divided_difference(&omega, &[x1, x0, x3]).expect("distinct");
        let slack = lhs - rhs - b;
        if slack < out.min_slack {
            out.min_slack = slack;
            out.witness_omega = omega.theta.clone();
            out.witness_x = [x0, x1, x2, x3];
        }
    }
    out.passed = out.min_slack >= -1e-10;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub measure: f64,
    pub horizon: f64,
    /// Sampling interval between sign evaluations; positivity runs shorter
    /// than this can be missed.
    pub spacing: f64,
}

/// Fraction of `[0, birkhoff_T]` during which `b_{J,ε}(ω₀·s) > POS_TOL`,
/// starting from the base origin.
pub fn measure_positive_module(s: &Scenario, j: DcInterval, eps: f64) -> Result<f64, DcError> {
    measure_positive_module_detailed(s, j, eps).map(|m| m.measure)
}

pub fn measure_positive_module_detailed(s: &Scenario, j: DcInterval, eps: f64) -> Result<MeasureEstimate, DcError> {
    j.require_module_eps(eps)?;
    let horizon = s.numerics.birkhoff_t;
    let omega0 = s.base.origin();
    let positive = |t: f64| -> Result<bool, DcError> {
        let p = advance(&s.base, &omega0, t);
        Ok(standardized_module(&s.rhs, &p, j, eps)? > POS_TOL)
    };
    let rate = s.rhs.max_rate(&s.base);
    if rate == 0.0 {
        let m = if positive(0.0)? { 1.0 } else { 0.0 };
        return Ok(MeasureEstimate {
            measure: m,
            horizon,
            spacing: horizon,
        });
    }
    let n = (horizon * rate * SAMPLES_PER_CYCLE).ceil() as usize;
    let h = horizon / n as f64;
    let crossing = |mut a: f64, mut b: f64, sa: bool| -> Result<f64, DcError> {
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if positive(mid)? == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    };
    const CHUNK: usize = 4096;
    let chunks: Vec<usize> = (0..n.div_ceil(CHUNK)).collect();
    let parts: Result<Vec<f64>, DcError> = chunks
        .par_iter()
        .map(|&c| {
            let start = c * CHUNK;
            let end = ((c + 1) * CHUNK).min(n);
            let mut acc = 0.0;
            let mut ta = start as f64 * h;
            let mut sa = positive(ta)?;
            for i in start..end {
                let tb = if i + 1 == n { horizon } else { (i + 1) as f64 * h };
                let sb = positive(tb)?;
                acc += match (sa, sb) {
                    (true, true) => tb - ta,
                    (false, false) => 0.0,
                    (true, false) => crossing(ta, tb, true)? - ta,
                    (false, true) => tb - crossing(ta, tb, false)?,
                };
                ta = tb;
                sa = sb;
            }
            Ok(acc)
        })
        .collect();
    let total: f64 = parts?.iter().sum();
    Ok(MeasureEstimate {
        measure: (total / horizon).clamp(0.0, 1.0),
        horizon,
        spacing: h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SdcClass {
    #[serde(rename = "NotDC")]
    NotDc,
    #[serde(rename = "DC_only")]
    DcOnly,
    #[serde(rename = "SDC")]
    Sdc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureTrend {
    /// Measures do not depend on ε within resolution.
    Flat,
    /// Measures decrease as ε decreases; a uniform lower bound over all ε
    /// cannot be read off finitely many values.
    Shrinking,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdcReport {
    pub interval: DcInterval,
    pub eps_grid: Vec<f64>,
    pub measures: Vec<f64>,
    pub classification: SdcClass,
    pub trend: MeasureTrend,
    pub horizon: f64,
    pub pos_tol: f64,
    pub spacing: f64,
    pub evidence: &'static str,
    pub notes: Vec<String>,
}

/// Estimates the measure of `{b_{J,ε} > 0}` on an ε grid and classifies.
pub fn classify_sdc(s: &Scenario, j: DcInterval, eps_grid: &[f64]) -> Result<SdcReport, DcError> {
    if eps_grid.is_empty() {
        return Err(DcError::EmptyGrid);
    }
    for (i, &e) in eps_grid.iter().enumerate() {
        j.require_module_eps(e)?;
        if i > 0 && e <= eps_grid[i - 1] {
            return Err(DcError::Domain("ε grid must be strictly ascending".into()));
        }
    }
    let mut notes = vec!["on a uniquely ergodic base, strictness with respect to the invariant measure and in general coincide".to_string()];
    let dc = validate_model(s).d_concave();
    let mut measures = Vec::with_capacity(eps_grid.len());
    let mut spacing: f64 = 0.0;
    for &e in eps_grid {
        let est = measure_positive_module_detailed(s, j, e)?;
        spacing = spacing.max(est.spacing);
        measures.push(est.measure);
    }
    let resolution = spacing / s.numerics.birkhoff_t;
    let classification = if !dc {
        SdcClass::NotDc
    } else if measures.iter().all(|&m| m > resolution) {
        SdcClass::Sdc
    } else {
        SdcClass::DcOnly
    };
    let spread = measures.last().unwrap() - measures[0];
    let trend = if spread > resolution.max(1e-9) {
        notes.push("measure of the positivity set shrinks as ε decreases; no uniform lower bound is certified".into());
        MeasureTrend::Shrinking
    } else {
        MeasureTrend::Flat
    };
    Ok(SdcReport {
        interval: j,
        eps_grid: eps_grid.to_vec(),
        measures,
        classification,
        trend,
        horizon: s.numerics.birkhoff_t,
        pos_tol: POS_TOL,
        spacing,
        evidence: "numerical evidence",
        notes,
    })
}
