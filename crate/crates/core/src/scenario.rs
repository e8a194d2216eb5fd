//! Scenario files: base flow, right-hand side, parameter family, sweep range
//! and numerical settings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base_flow::BaseFlowSpec;
use crate::integrator::Tolerances;
use crate::model::{RhsModel, SignCheck, SignPath};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax { line: usize, column: usize, msg: String },
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("type mismatch at line {line}, column {column}: {msg}")]
    TypeMismatch { line: usize, column: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(String),
}

/// How the parameter enters: `f + λ` or `f + λx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Additive,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.lambda_max
                } else {
                    self.lambda_min + (self.lambda_max - self.lambda_min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub atol: f64,
    #[serde(rename = "pullback_T")]
    pub pullback_t: f64,
    pub pullback_tol: f64,
    pub grid_n: usize,
    #[serde(rename = "birkhoff_T")]
    pub birkhoff_t: f64,
    pub sep_tol: f64,
    pub pinch_tol: f64,
    pub exp_margin: f64,
    pub bisect_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            pullback_t: 64.0,
            pullback_tol: 1e-9,
            grid_n: 256,
            birkhoff_t: 1e4,
            sep_tol: 1e-3,
            pinch_tol: 1e-6,
            exp_margin: 1e-3,
            bisect_tol: 1e-6,
        }
    }
}

impl NumericsConfig {
    /// Sets one field by its file key, e.g. `("grid_n", "64")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| ScenarioError::Invalid(format!("`{key}` expects a real, got `{value}`")))
        };
        match key {
            "rtol" => self.rtol = real()?,
            "atol" => self.atol = real()?,
            "pullback_T" => self.pullback_t = real()?,
            "pullback_tol" => self.pullback_tol = real()?,
            "birkhoff_T" => self.birkhoff_t = real()?,
            "sep_tol" => self.sep_tol = real()?,
            "pinch_tol" => self.pinch_tol = real()?,
            "exp_margin" => self.exp_margin = real()?,
            "bisect_tol" => self.bisect_tol = real()?,
            "grid_n" => {
                self.grid_n = value
                    .parse()
                    .map_err(|_| ScenarioError::Invalid(format!("`grid_n` expects a positive integer, got `{value}`")))?
            }
            _ => return Err(ScenarioError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn check(&self) -> Result<(), String> {
        let reals = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("pullback_T", self.pullback_t),
            ("pullback_tol", self.pullback_tol),
            ("birkhoff_T", self.birkhoff_t),
            ("sep_tol", self.sep_tol),
            ("pinch_tol", self.pinch_tol),
            ("exp_margin", self.exp_margin),
            ("bisect_tol", self.bisect_tol),
        ];
        for (name, v) in reals {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be strictly positive"));
            }
        }
        if self.grid_n == 0 {
            return Err("grid_n must be positive".into());
        }
        if self.pinch_tol >= self.sep_tol {
            return Err("pinch_tol < sep_tol required".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub base: BaseFlowSpec,
    pub rhs: RhsModel,
    pub family: Family,
    pub sweep: Sweep,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

fn classify(e: serde_json::Error) -> ScenarioError {
    use serde_json::error::Category;
    let (line, column) = (e.line(), e.column());
    let msg = e.to_string();
    let core = msg.split(" at line ").next().unwrap_or(&msg).to_string();
    let quoted = |prefix: &str| {
        core.strip_prefix(prefix)
            .and_then(|rest| rest.split('`').next())
            .map(str::to_string)
    };
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => ScenarioError::Syntax { line, column, msg: core },
        Category::Data => {
            if let Some(f) = quoted("missing field `") {
                ScenarioError::MissingField(f)
            } else if let Some(f) = quoted("unknown field `") {
                ScenarioError::UnknownKey(f)
            } else {
                ScenarioError::TypeMismatch { line, column, msg: core }
            }
        }
    }
}

/// Parses and checks a scenario, filling omitted numerics with defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text).map_err(classify)?;
    s.check()?;
    Ok(s)
}

impl Scenario {
    /// An autonomous scenario with default numerics and sweep `[-1, 1] × 21`.
    pub fn autonomous(rhs: RhsModel, family: Family) -> Self {
        Self::new(BaseFlowSpec::autonomous(), rhs, family)
    }

    pub fn new(base: BaseFlowSpec, rhs: RhsModel, family: Family) -> Self {
        Self {
            base,
            rhs,
            family,
            sweep: Sweep {
                lambda_min: -1.0,
                lambda_max: 1.0,
                steps: 21,
            },
            numerics: NumericsConfig::default(),
        }
    }

    pub fn with_sweep(mut self, lambda_min: f64, lambda_max: f64, steps: usize) -> Self {
        self.sweep = Sweep {
            lambda_min,
            lambda_max,
            steps,
        };
        self
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.numerics.rtol,
            atol: self.numerics.atol,
        }
    }

    /// Checks the structural invariants enforced at parse time.
    pub fn check(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if let Err(m) = self.base.check() {
            return bad(m);
        }
        if self.sweep.steps < 2 {
            return bad("steps ≥ 2 required".into());
        }
        if !(self.sweep.lambda_min < self.sweep.lambda_max) {
            return bad("lambda_min < lambda_max required".into());
        }
        let d = self.base.dim();
        for c in self.rhs.coefficients() {
            for h in &c.harmonics {
                if h.wave.len() != d {
                    return bad(format!("wave vector {:?} has length {}, base dimension is {d}", h.wave, h.wave.len()));
                }
                if h.wave.iter().all(|k| *k == 0) {
                    return bad("wave vectors must be nonzero".into());
                }
            }
        }
        if self.family == Family::Linear {
            if let RhsModel::Cubic { c0, .. } = &self.rhs {
                if !c0.is_zero() {
                    return bad("f(·,0)=0 required for Linear family".into());
                }
            }
        }
        if let Err(m) = self.numerics.check() {
            return bad(m);
        }
        Ok(())
    }

    /// Canonical serialization; `parse_scenario(&s.emit()) == Ok(s)`.
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// The same scenario with `ξ` added to the quadratic coefficient.
    pub fn shift_c2(&self, xi: f64) -> Scenario {
        let mut out = self.clone();
        if let RhsModel::Cubic { c2, .. } = &mut out.rhs {
            c2.mean += xi;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// How the verdict was reached: a coefficient bound, a grid scan, or the
    /// structure of the rhs shape.
    pub decided_by: &'static str,
    pub witness_omega: Option<Vec<f64>>,
    pub witness_x: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn coercive(&self) -> bool {
        self.get("coercive").is_some_and(|c| c.passed)
    }

    pub fn d_concave(&self) -> bool {
        self.get("d_concave").is_some_and(|c| c.passed)
    }
}

fn path_name(p: SignPath) -> &'static str {
    match p {
        SignPath::L1Bound => "l1_bound",
        SignPath::GridScan => "grid_scan",
    }
}

fn from_sign(name: &'static str, sc: SignCheck, what: &str, witness_x: Option<f64>) -> Check {
    Check {
        name,
        passed: sc.holds,
        decided_by: path_name(sc.path),
        witness_omega: if sc.holds { None } else { sc.witness },
        witness_x: if sc.holds { None } else { witness_x },
        detail: format!("{what}; extreme value {:.6e}", sc.extreme),
    }
}

fn structural(name: &'static str, detail: &str) -> Check {
    Check {
        name,
        passed: true,
        decided_by: "structure",
        witness_omega: None,
        witness_x: None,
        detail: detail.to_string(),
    }
}

/// Coercivity, d-concavity and family-compatibility checks.
pub fn validate_model(s: &Scenario) -> ValidationReport {
    let d = s.base.dim();
    let mut checks = Vec::new();
    match &s.rhs {
        RhsModel::Cubic { c0, c3, .. } => {
            checks.push(from_sign("coercive", c3.check_nonpositive(d, true), "sup c3 < 0", None));
            // f_xxx = 6 c3 does not depend on x, so any x witnesses a failure
            checks.push(from_sign("d_concave", c3.check_nonpositive(d, false), "sup c3 ≤ 0", Some(0.0)));
            if s.family == Family::Linear {
                checks.push(Check {
                    name: "zero_at_zero",
                    passed: c0.is_zero(),
                    decided_by: "structure",
                    witness_omega: None,
                    witness_x: (!c0.is_zero()).then_some(0.0),
                    detail: "c0 ≡ 0".into(),
                });
            }
        }
        RhsModel::Deadzone { w } => {
            checks.push(structural("coercive", "deadzone cubic is coercive"));
            checks.push(structural("d_concave", "f_x is concave in x for w ≥ 0"));
            let sc = w.check_nonnegative(d);
            let wx = sc.witness.as_ref().map(|_| 0.0);
            checks.push(from_sign("halfwidth_nonnegative", sc, "inf w ≥ 0", wx));
            if s.family == Family::Linear {
                checks.push(structural("zero_at_zero", "f(ω, 0) = 0 when w ≥ 0"));
            }
        }
    }
    ValidationReport { checks }
}
