//! Torus rotations used as driving base flows.
//!
//! A base flow is a linear flow `θ ↦ θ + ν t (mod 1)` on a `d`-torus. With
//! rationally independent frequencies it is minimal and uniquely ergodic, and
//! Lebesgue measure is its only invariant probability.

use serde::{Deserialize, Serialize};

use crate::integrator::{Dopri5, StepFailure, Tolerances};

/// How the base moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Autonomous,
    Periodic,
    Quasiperiodic,
}

/// A rotation flow on the torus of dimension `frequencies.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseFlowSpec {
    pub kind: BaseKind,
    #[serde(default)]
    pub frequencies: Vec<f64>,
}

/// A point of the torus, every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub theta: Vec<f64>,
}

/// Reduces a real number to `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle `ℝ/ℤ`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

impl BaseFlowSpec {
    pub fn autonomous() -> Self {
        Self {
            kind: BaseKind::Autonomous,
            frequencies: Vec::new(),
        }
    }

    pub fn periodic(frequency: f64) -> Self {
        Self {
            kind: BaseKind::Periodic,
            frequencies: vec![frequency],
        }
    }

    pub fn quasiperiodic(frequencies: Vec<f64>) -> Self {
        Self {
            kind: BaseKind::Quasiperiodic,
            frequencies,
        }
    }

    /// Golden-mean forcing on the 2-torus, `ν = (1, (√5 − 1)/2)`.
    pub fn golden() -> Self {
        Self::quasiperiodic(vec![1.0, (5f64.sqrt() - 1.0) / 2.0])
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// Checks the shape constraints of the frequency vector.
    pub fn check(&self) -> Result<(), String> {
        match self.kind {
            BaseKind::Autonomous if !self.frequencies.is_empty() => {
                return Err("autonomous base takes no frequencies".into())
            }
            BaseKind::Periodic if self.frequencies.len() != 1 => {
                return Err("periodic base takes exactly one frequency".into())
            }
            BaseKind::Quasiperiodic if self.frequencies.len() < 2 => {
                return Err("quasiperiodic base needs at least two frequencies".into())
            }
            _ => {}
        }
        if let Some(bad) = self.frequencies.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(format!("frequencies must be finite and nonzero, got {bad}"));
        }
        Ok(())
    }

    pub fn origin(&self) -> BasePoint {
        BasePoint {
            theta: vec![0.0; self.dim()],
        }
    }

    /// Largest base frequency in absolute value (zero when autonomous).
    pub fn max_frequency(&self) -> f64 {
        self.frequencies.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Time separating consecutive points of [`grid_points`] along the orbit
    /// of the origin. Zero for the autonomous base, which has a single point.
    pub fn grid_spacing(&self, n: usize) -> f64 {
        match self.kind {
            BaseKind::Autonomous => 0.0,
            BaseKind::Periodic => 1.0 / (n.max(1) as f64 * self.frequencies[0].abs()),
            BaseKind::Quasiperiodic => 1.0 / self.frequencies[0].abs(),
        }
    }
}

impl BasePoint {
    pub fn new(theta: Vec<f64>) -> Self {
        Self {
            theta: theta.into_iter().map(wrap_unit).collect(),
        }
    }
}

/// The flow map `ω ↦ ω·t`.
pub fn advance(spec: &BaseFlowSpec, omega: &BasePoint, t: f64) -> BasePoint {
    BasePoint {
        theta: omega
            .theta
            .iter()
            .zip(&spec.frequencies)
            .map(|(th, nu)| wrap_unit(th + nu * t))
            .collect(),
    }
}

/// Deterministic low-discrepancy sample of the torus.
///
/// The points all lie on the orbit of the origin, `grid[k] = 0·(k h)` with
/// `h = spec.grid_spacing(n)`, so that a single trajectory of the skew
/// product visits every one of them. For the periodic base this is the
/// uniform grid (in orbit order), for `d ≥ 2` the Kronecker sequence
/// `k ν/|ν₁| mod 1`.
pub fn grid_points(spec: &BaseFlowSpec, n: usize) -> Vec<BasePoint> {
    match spec.kind {
        BaseKind::Autonomous => vec![spec.origin()],
        BaseKind::Periodic => {
            let sign = spec.frequencies[0].signum();
            (0..n)
                .map(|k| BasePoint::new(vec![sign * k as f64 / n as f64]))
                .collect()
        }
        BaseKind::Quasiperiodic => {
            let scale = spec.frequencies[0].abs();
            (0..n)
                .map(|k| {
                    BasePoint::new(
                        spec.frequencies
                            .iter()
                            .map(|nu| k as f64 * nu / scale)
                            .collect(),
                    )
                })
                .collect()
        }
    }
}

/// `n` points spread over the whole torus (the `R_d` additive recurrence
/// with the generalised golden ratio), unlike [`grid_points`], which stays on
/// one orbit.
pub fn spread_points(dim: usize, n: usize) -> Vec<BasePoint> {
    if dim == 0 {
        return vec![BasePoint::new(Vec::new())];
    }
    // φ_d is the positive root of x^(d+1) = x + 1
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|i| phi.powi(-(i as i32))).collect();
    (0..n)
        .map(|k| BasePoint::new(alpha.iter().map(|a| wrap_unit(0.5 + k as f64 * a)).collect()))
        .collect()
}

/// Time average `(1/T) ∫₀ᵀ g(ω₀·s) ds`, integrated as the running-integral
/// component of an ODE so that it shares the step control of the solver.
pub fn ergodic_average<G>(
    spec: &BaseFlowSpec,
    g: G,
    omega0: &BasePoint,
    horizon: f64,
    tol: Tolerances,
) -> Result<f64, StepFailure>
where
    G: Fn(&BasePoint) -> f64,
{
    assert!(horizon > 0.0, "averaging horizon must be positive");
    if spec.kind == BaseKind::Autonomous {
        return Ok(g(omega0));
    }
    let mut solver = Dopri5::new(tol);
    solver.max_step = 0.25 / spec.max_frequency();
    let rhs = |t: f64, _y: &[f64; 1]| [g(&advance(spec, omega0, t))];
    let (_, y) = solver.integrate(rhs, 0.0, [0.0], horizon, |_, _| true)?;
    Ok(y[0] / horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: f64 = 0.618_033_988_7;

    #[test]
    fn autonomous_advance_is_identity() {
        let spec = BaseFlowSpec::autonomous();
        let p = spec.origin();
        assert_eq!(advance(&spec, &p, 123.4), p);
    }

    #[test]
    fn periodic_advance() {
        let spec = BaseFlowSpec::periodic(1.0);
        let p = advance(&spec, &BasePoint::new(vec![0.25]), 0.5);
        assert!((p.theta[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn quasiperiodic_advance() {
        let spec = BaseFlowSpec::quasiperiodic(vec![1.0, G]);
        let p = advance(&spec, &BasePoint::new(vec![0.0, 0.0]), 2.0);
        // mod-1 arithmetic: (2 mod 1, 2g mod 1)
        let expect = (2.0 * G).rem_euclid(1.0);
        assert!(p.theta[0].abs() < 1e-15);
        assert!((p.theta[1] - expect).abs() < 1e-15);
        assert!((p.theta[1] - 0.236_067_977_5).abs() < 1e-10);
    }

    #[test]
    fn wrap_never_returns_one() {
        assert_eq!(wrap_unit(-1e-18), 0.0);
        assert_eq!(wrap_unit(3.0), 0.0);
        assert!((wrap_unit(-0.25) - 0.75).abs() < 1e-16);
    }

    #[test]
    fn grids() {
        assert_eq!(grid_points(&BaseFlowSpec::autonomous(), 5).len(), 1);
        let g = grid_points(&BaseFlowSpec::periodic(1.0), 4);
        let th: Vec<f64> = g.iter().map(|p| p.theta[0]).collect();
        assert_eq!(th, vec![0.0, 0.25, 0.5, 0.75]);
        let q = grid_points(&BaseFlowSpec::quasiperiodic(vec![1.0, G]), 3);
        assert_eq!(q[0].theta, vec![0.0, 0.0]);
        assert_eq!(q[1].theta, vec![0.0, G]);
        assert!(q[2].theta[0].abs() < 1e-15);
        assert!((q[2].theta[1] - (2.0 * G).rem_euclid(1.0)).abs() < 1e-15);
    }

    #[test]
    fn grid_lies_on_origin_orbit() {
        for spec in [BaseFlowSpec::periodic(-2.5), BaseFlowSpec::golden()] {
            let n = 16;
            let h = spec.grid_spacing(n);
            for (k, p) in grid_points(&spec, n).iter().enumerate() {
                let q = advance(&spec, &spec.origin(), k as f64 * h);
                for (a, b) in p.theta.iter().zip(&q.theta) {
                    assert!(circle_distance(*a, *b) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_checks() {
        assert!(BaseFlowSpec::periodic(0.0).check().is_err());
        assert!(BaseFlowSpec::quasiperiodic(vec![1.0]).check().is_err());
        assert!(BaseFlowSpec::golden().check().is_ok());
    }

    #[test]
    fn average_of_constant() {
        let spec = BaseFlowSpec::golden();
        let avg = ergodic_average(&spec, |_| 2.5, &spec.origin(), 10.0, Tolerances::default())
            .unwrap();
        assert!((avg - 2.5).abs() < 1e-12);
    }
}
