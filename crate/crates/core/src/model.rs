//! Right-hand sides `f(ω, x)` and their `x`-derivatives.
//!
//! Two shapes are supported: a cubic polynomial in `x` whose coefficients are
//! trigonometric polynomials on the torus, and a cubic with a dead zone of
//! variable half-width around `x = 0`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base_flow::{BaseFlowSpec, BasePoint};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("distinct abscissae required")]
    CoincidentAbscissae,
    #[error("divided differences take 2 or 3 abscissae, got {0}")]
    Arity(usize),
}

/// One cosine mode `amplitude · cos(2π⟨wave, θ⟩ + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub wave: Vec<i64>,
    pub amplitude: f64,
    pub phase: f64,
}

/// A real trigonometric polynomial on the torus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPoly {
    pub mean: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

/// Which of the two one-sided bounds a sign check certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPath {
    /// Decided by `|mean| + Σ|amplitude|`-type coefficient bounds.
    L1Bound,
    /// Decided by a 4096-point scan, corrected by a Lipschitz bound.
    GridScan,
}

/// Outcome of checking a strict or weak one-sided bound on a trig polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub holds: bool,
    pub path: SignPath,
    /// Extreme value found (the bound for `L1Bound`, the scanned extremum
    /// for `GridScan`).
    pub extreme: f64,
    /// Point attaining the scanned extremum; always present on failure.
    pub witness: Option<Vec<f64>>,
}

const SCAN_POINTS: usize = 4096;

impl TrigPoly {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            harmonics: Vec::new(),
        }
    }

    /// `mean + Σ amplitude cos(2π wave·θ + phase)`.
    pub fn cosine(mean: f64, modes: &[(Vec<i64>, f64, f64)]) -> Self {
        Self {
            mean,
            harmonics: modes
                .iter()
                .map(|(wave, amplitude, phase)| Harmonic {
                    wave: wave.clone(),
                    amplitude: *amplitude,
                    phase: *phase,
                })
                .collect(),
        }
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.harmonics.iter().fold(self.mean, |acc, h| {
            let dot: f64 = h.wave.iter().zip(theta).map(|(k, t)| *k as f64 * t).sum();
            acc + h.amplitude * (TAU * dot + h.phase).cos()
        })
    }

    /// Whether every amplitude vanishes.
    pub fn is_constant(&self) -> bool {
        self.harmonics.iter().all(|h| h.amplitude == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mean == 0.0 && self.is_constant()
    }

    /// Upper bound of `|c(θ)|` from the coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.mean.abs() + self.amplitude_sum()
    }

    fn amplitude_sum(&self) -> f64 {
        self.harmonics.iter().map(|h| h.amplitude.abs()).sum()
    }

    fn lipschitz_l1(&self) -> f64 {
        // |∂c/∂θ_i| summed over i, bounded uniformly
        self.harmonics
            .iter()
            .map(|h| TAU * h.amplitude.abs() * h.wave.iter().map(|k| k.abs() as f64).sum::<f64>())
            .sum()
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out.mean += other.mean;
        out.harmonics.extend(other.harmonics.iter().cloned());
        out
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly {
            mean: self.mean * s,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    amplitude: h.amplitude * s,
                    ..h.clone()
                })
                .collect(),
        }
    }

    /// Restriction to the base orbit through `theta0`.
    pub fn along(&self, base: &BaseFlowSpec, theta0: &BasePoint) -> OrbitTrig {
        OrbitTrig {
            mean: self.mean,
            terms: self
                .harmonics
                .iter()
                .filter(|h| h.amplitude != 0.0)
                .map(|h| {
                    let dot0: f64 = h.wave.iter().zip(&theta0.theta).map(|(k, t)| *k as f64 * t).sum();
                    let rate: f64 = h
                        .wave
                        .iter()
                        .zip(&base.frequencies)
                        .map(|(k, nu)| *k as f64 * nu)
                        .sum();
                    (h.amplitude, TAU * rate, TAU * dot0 + h.phase)
                })
                .collect(),
        }
    }

    /// Exact time average `(1/T) ∫₀ᵀ c(θ₀ + ν s) ds` along a line flow.
    pub fn orbit_average(&self, base: &BaseFlowSpec, theta0: &BasePoint, horizon: f64) -> f64 {
        self.along(base, theta0).average(horizon)
    }

    fn scan<F: FnMut(&[f64], f64)>(&self, dim: usize, mut visit: F) -> f64 {
        if dim == 0 {
            visit(&[], self.eval(&[]));
            return 0.0;
        }
        let per_axis = ((SCAN_POINTS as f64).powf(1.0 / dim as f64).floor() as usize).max(2);
        let step = 1.0 / per_axis as f64;
        let total = per_axis.pow(dim as u32);
        let mut theta = vec![0.0; dim];
        for idx in 0..total {
            let mut rem = idx;
            for t in theta.iter_mut() {
                *t = (rem % per_axis) as f64 * step;
                rem /= per_axis;
            }
            visit(&theta, self.eval(&theta));
        }
        // covering radius of the scan in the ℓ∞ sense
        step / 2.0
    }

    /// Checks `c(θ) < 0` (strict) or `c(θ) ≤ 0` for every `θ` in the torus of
    /// dimension `dim`.
    pub fn check_nonpositive(&self, dim: usize, strict: bool) -> SignCheck {
        let bound = self.mean + self.amplitude_sum();
        let ok = |v: f64| if strict { v < 0.0 } else { v <= 0.0 };
        if ok(bound) {
            return SignCheck {
                holds: true,
                path: SignPath::L1Bound,
                extreme: bound,
                witness: None,
            };
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = Vec::new();
        let radius = self.scan(dim, |th, v| {
            if v > best {
                best = v;
                arg = th.to_vec();
            }
        });
        let certified = best + self.lipschitz_l1() * radius;
        SignCheck {
            holds: ok(certified) || (self.is_constant() && ok(best)),
            path: SignPath::GridScan,
            extreme: best,
            witness: Some(arg),
        }
    }

    /// Checks `c(θ) ≥ 0` for every `θ`.
    pub fn check_nonnegative(&self, dim: usize) -> SignCheck {
        let mut c = self.scale(-1.0).check_nonpositive(dim, false);
        c.extreme = -c.extreme;
        c
    }

    /// Uniform upper bound on `c`, the tighter of the coefficient bound and
    /// the Lipschitz-corrected scan.
    pub fn sup_bound(&self, dim: usize) -> f64 {
        let l1 = self.mean + self.amplitude_sum();
        if self.is_constant() {
            return self.mean;
        }
        let mut best = f64::NEG_INFINITY;
        let radius = self.scan(dim, |_, v| best = best.max(v));
        l1.min(best + self.lipschitz_l1() * radius)
    }

    /// Uniform lower bound on `c`.
    pub fn inf_bound(&self, dim: usize) -> f64 {
        -self.scale(-1.0).sup_bound(dim)
    }
}

/// A trig polynomial restricted to one base orbit: `mean + Σ a cos(r t + φ)`.
#[derive(Debug, Clone)]
pub struct OrbitTrig {
    mean: f64,
    terms: Vec<(f64, f64, f64)>,
}

impl OrbitTrig {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .fold(self.mean, |acc, (a, r, p)| acc + a * (r * t + p).cos())
    }

    pub fn average(&self, horizon: f64) -> f64 {
        self.terms.iter().fold(self.mean, |acc, (a, r, p)| {
            if *r == 0.0 {
                acc + a * p.cos()
            } else {
                acc + a * ((r * horizon + p).sin() - p.sin()) / (r * horizon)
            }
        })
    }
}

/// The field `f(ω, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum RhsModel {
    /// `f(ω, x) = c0(ω) + c1(ω) x + c2(ω) x² + c3(ω) x³`.
    Cubic {
        c0: TrigPoly,
        c1: TrigPoly,
        c2: TrigPoly,
        c3: TrigPoly,
    },
    /// `−(x − w)³` above `w`, `0` on `[−w, w]`, `−(x + w)³` below `−w`.
    Deadzone { w: TrigPoly },
}

/// `f` and its first three `x`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub f: f64,
    pub fx: f64,
    pub fxx: f64,
    /// For the dead-zone shape this is the one-sided value (`−6` outside the
    /// dead zone, `0` inside).
    pub fxxx: f64,
    pub piecewise: bool,
}

#[inline]
fn cubic_derivs(c: [f64; 4], x: f64) -> Derivatives {
    let [c0, c1, c2, c3] = c;
    Derivatives {
        f: c0 + x * (c1 + x * (c2 + x * c3)),
        fx: c1 + x * (2.0 * c2 + 3.0 * c3 * x),
        fxx: 2.0 * c2 + 6.0 * c3 * x,
        fxxx: 6.0 * c3,
        piecewise: false,
    }
}

#[inline]
pub(crate) fn deadzone_derivs(w: f64, x: f64) -> Derivatives {
    let d = if x > w {
        x - w
    } else if x < -w {
        x + w
    } else {
        return Derivatives {
            f: 0.0,
            fx: 0.0,
            fxx: 0.0,
            fxxx: 0.0,
            piecewise: true,
        };
    };
    Derivatives {
        f: -d * d * d,
        fx: -3.0 * d * d,
        fxx: -6.0 * d,
        fxxx: -6.0,
        piecewise: true,
    }
}

impl RhsModel {
    pub fn cubic(c0: TrigPoly, c1: TrigPoly, c2: TrigPoly, c3: TrigPoly) -> Self {
        RhsModel::Cubic { c0, c1, c2, c3 }
    }

    /// Autonomous cubic with constant coefficients.
    pub fn cubic_const(c: [f64; 4]) -> Self {
        Self::cubic(
            TrigPoly::constant(c[0]),
            TrigPoly::constant(c[1]),
            TrigPoly::constant(c[2]),
            TrigPoly::constant(c[3]),
        )
    }

    pub fn deadzone(w: TrigPoly) -> Self {
        RhsModel::Deadzone { w }
    }

    pub fn coefficients(&self) -> Vec<&TrigPoly> {
        match self {
            RhsModel::Cubic { c0, c1, c2, c3 } => vec![c0, c1, c2, c3],
            RhsModel::Deadzone { w } => vec![w],
        }
    }

    pub fn is_autonomous(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_constant())
    }

    pub fn eval_derivatives(&self, omega: &BasePoint, x: f64) -> Derivatives {
        match self {
            RhsModel::Cubic { c0, c1, c2, c3 } => {
                let th = &omega.theta;
                cubic_derivs([c0.eval(th), c1.eval(th), c2.eval(th), c3.eval(th)], x)
            }
            RhsModel::Deadzone { w } => deadzone_derivs(w.eval(&omega.theta), x),
        }
    }

    pub fn eval(&self, omega: &BasePoint, x: f64) -> f64 {
        self.eval_derivatives(omega, x).f
    }

    /// First (two points) or second (three points) order divided difference.
    pub fn divided_difference(&self, omega: &BasePoint, xs: &[f64]) -> Result<f64, ModelError> {
        let f = |x: f64| self.eval(omega, x);
        match *xs {
            [a, b] => {
                if a == b {
                    return Err(ModelError::CoincidentAbscissae);
                }
                Ok((f(b) - f(a)) / (b - a))
            }
            [a, b, c] => {
                if a == b || b == c || a == c {
                    return Err(ModelError::CoincidentAbscissae);
                }
                let ab = (f(b) - f(a)) / (b - a);
                let bc = (f(c) - f(b)) / (c - b);
                Ok((bc - ab) / (c - a))
            }
            _ => Err(ModelError::Arity(xs.len())),
        }
    }

    /// The model restricted to the base orbit through `theta0`.
    pub fn along(&self, base: &BaseFlowSpec, theta0: &BasePoint) -> OrbitModel {
        match self {
            RhsModel::Cubic { c0, c1, c2, c3 } => OrbitModel::Cubic([
                c0.along(base, theta0),
                c1.along(base, theta0),
                c2.along(base, theta0),
                c3.along(base, theta0),
            ]),
            RhsModel::Deadzone { w } => OrbitModel::Deadzone(w.along(base, theta0)),
        }
    }

    /// Largest orbit angular rate among all coefficient modes, in cycles per
    /// unit time.
    pub fn max_rate(&self, base: &BaseFlowSpec) -> f64 {
        self.coefficients()
            .iter()
            .flat_map(|c| c.harmonics.iter())
            .filter(|h| h.amplitude != 0.0)
            .map(|h| {
                h.wave
                    .iter()
                    .zip(&base.frequencies)
                    .map(|(k, nu)| *k as f64 * nu)
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// [`RhsModel`] evaluated along a fixed base orbit, parametrised by time.
#[derive(Debug, Clone)]
pub enum OrbitModel {
    Cubic([OrbitTrig; 4]),
    Deadzone(OrbitTrig),
}

impl OrbitModel {
    #[inline]
    pub fn derivs(&self, t: f64, x: f64) -> Derivatives {
        match self {
            OrbitModel::Cubic(c) => cubic_derivs(
                [c[0].value(t), c[1].value(t), c[2].value(t), c[3].value(t)],
                x,
            ),
            OrbitModel::Deadzone(w) => deadzone_derivs(w.value(t), x),
        }
    }

    /// `(f, f_x)` only.
    #[inline]
    pub fn f_fx(&self, t: f64, x: f64) -> (f64, f64) {
        let d = self.derivs(t, x);
        (d.f, d.fx)
    }
}
