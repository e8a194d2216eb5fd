//! Delimiter equilibria by pullback, the middle repeller by basin bisection,
//! Lyapunov exponents and the minimal-set census at a fixed parameter.

use serde::Serialize;
use thiserror::Error;

use crate::base_flow::{advance, ergodic_average, grid_points, BasePoint};
use crate::integrator::{solver_for, Dopri5, Field, StepFailure};
use crate::model::RhsModel;
use crate::scenario::{Family, Scenario};

/// Escape bound used when the model is not known to be coercive.
const FALLBACK_BOUND: f64 = 1e8;
const MAX_DOUBLINGS: u32 = 10;
const FATE_HORIZON: f64 = 65536.0;
const BISECT_WIDTH: f64 = 1e-10;
const ANCHORS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("model is not validated as coercive")]
    NotCoercive,
    #[error("pullback did not converge by horizon {horizon}: last values {last:?}")]
    NonConvergence { horizon: f64, last: [f64; 2] },
    #[error("tracked object lost after {progress:.3} of the averaging horizon")]
    TrackingLost { progress: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Integration(#[from] StepFailure),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    Alpha,
    Beta,
    Kappa,
}

fn radius(s: &Scenario, lambda: f64) -> Option<f64> {
    let d = s.base.dim();
    match &s.rhs {
        RhsModel::Cubic { c0, c1, c2, c3 } => {
            if !c3.check_nonpositive(d, true).holds {
                return None;
            }
            let m = -c3.sup_bound(d);
            Some(1.0 + (c2.l1_norm() + c1.l1_norm() + c0.l1_norm() + lambda.abs()) / m)
        }
        RhsModel::Deadzone { w } => {
            let wn = w.l1_norm();
            Some(wn + 1.0 + lambda.abs() * (1.0 + wn))
        }
    }
}

/// `(ρ₁, ρ₂)` with `F > 0` for `x ≤ ρ₁` and `F < 0` for `x ≥ ρ₂`.
pub fn bracketing_bounds(s: &Scenario, lambda: f64) -> Result<(f64, f64), EquilibriumError> {
    radius(s, lambda)
        .map(|r| (-r, r))
        .ok_or(EquilibriumError::NotCoercive)
}

/// `|x|` beyond which a solution is treated as escaping: `10 (1 + ρ₂)`.
pub fn blowup_bound(s: &Scenario, lambda: f64) -> f64 {
    radius(s, lambda).map_or(FALLBACK_BOUND, |r| 10.0 * (1.0 + r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PullbackStatus {
    Converged,
    /// Successive horizons never agreed to `pullback_tol`, but the sequence
    /// contracted geometrically and its Aitken extrapolants agreed.
    Accelerated,
    NonConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPullback {
    pub values: Vec<f64>,
    pub previous: Vec<f64>,
    pub horizon: f64,
    pub status: PullbackStatus,
    /// Whether the iterates moved monotonically with the horizon.
    pub monotone: bool,
}

struct Ctx<'a> {
    s: &'a Scenario,
    lambda: f64,
    rho: (f64, f64),
}

impl<'a> Ctx<'a> {
    fn new(s: &'a Scenario, lambda: f64) -> Result<Self, EquilibriumError> {
        Ok(Self {
            s,
            lambda,
            rho: bracketing_bounds(s, lambda)?,
        })
    }

    fn field(&self, omega: &BasePoint) -> Field {
        Field::new(self.s, self.lambda, omega)
    }

    fn solver(&self) -> Dopri5 {
        solver_for(self.s, self.lambda)
    }

    fn slack(&self, v: f64) -> f64 {
        let n = &self.s.numerics;
        n.pullback_tol + 10.0 * (n.rtol * v.abs() + n.atol)
    }

    /// Values at `omega·t` for each `t` in `times` (ascending, ≥ 0) of the
    /// solution started at `ρ` at time `−T`, for `T = pullback_T · 2^k`.
    fn pullback_grid(&self, omega: &BasePoint, side: Side, times: &[f64]) -> Result<GridPullback, EquilibriumError> {
        let n = &self.s.numerics;
        let field = self.field(omega);
        let mut solver = self.solver();
        let start = match side {
            Side::Lower => self.rho.0,
            Side::Upper => self.rho.1,
        };
        let mut levels: Vec<Vec<f64>> = Vec::new();
        let mut monotone = true;
        for k in 0..=MAX_DOUBLINGS {
            let horizon = n.pullback_t * 2f64.powi(k as i32);
            let mut out = Vec::with_capacity(times.len());
            let mut t = times[0] - horizon;
            let mut x = start;
            for &tk in times {
                let (_, y) = solver.integrate(field.state(), t, [x], tk, |_, _| true)?;
                x = y[0];
                t = tk;
                out.push(x);
            }
            if let Some(prev) = levels.last() {
                for (a, b) in prev.iter().zip(&out) {
                    let step = match side {
                        Side::Lower => b - a,
                        Side::Upper => a - b,
                    };
                    if step < -self.slack(*b) {
                        monotone = false;
                    }
                }
                let diff = prev.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if diff < n.pullback_tol {
                    return Ok(GridPullback {
                        previous: prev.clone(),
                        values: out,
                        horizon,
                        status: PullbackStatus::Converged,
                        monotone,
                    });
                }
            }
            levels.push(out);
        }
        let horizon = n.pullback_t * 2f64.powi(MAX_DOUBLINGS as i32);
        let m = levels.len();
        let mut accelerated = Vec::with_capacity(times.len());
        let mut ok = true;
        for i in 0..times.len() {
            let seq: Vec<f64> = levels.iter().map(|l| l[i]).collect();
            match extrapolate(&seq, n.pullback_tol, 0.1 * n.sep_tol) {
                Some(v) => accelerated.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let (v2, v3) = (&levels[m - 2], &levels[m - 1]);
        Ok(GridPullback {
            previous: v2.clone(),
            values: if ok { accelerated } else { v3.clone() },
            horizon,
            status: if ok {
                PullbackStatus::Accelerated
            } else {
                PullbackStatus::NonConvergence
            },
            monotone,
        })
    }

    fn pullback_at(&self, omega: &BasePoint, side: Side) -> Result<(f64, f64, PullbackStatus), EquilibriumError> {
        let g = self.pullback_grid(omega, side, &[0.0])?;
        if g.status == PullbackStatus::NonConvergence {
            return Err(EquilibriumError::NonConvergence {
                horizon: g.horizon,
                last: [g.previous[0], g.values[0]],
            });
        }
        Ok((g.values[0], g.horizon, g.status))
    }

    /// Which of the orbits through `l0 < u0` the orbit through `x0` joins;
    /// `None` when the two reference orbits merge first.
    fn fate(&self, field: &Field, solver: &mut Dopri5, t0: f64, x0: f64, l0: f64, u0: f64) -> Result<Option<Side>, EquilibriumError> {
        let sep = self.s.numerics.sep_tol;
        let rhs = |t: f64, y: &[f64; 3]| [field.f_fx(t, y[0]).0, field.f_fx(t, y[1]).0, field.f_fx(t, y[2]).0];
        // joining a reference orbit means closing in on it much faster than
        // the references approach each other
        let r_lo = (x0 - l0).abs() / (u0 - l0);
        let r_hi = (u0 - x0).abs() / (u0 - l0);
        let mut decided = None;
        let mut merged = false;
        let (_, y) = solver.integrate(rhs, t0, [x0, l0, u0], t0 + FATE_HORIZON, |_, y| {
            let width = y[2] - y[1];
            if width < 0.1 * sep {
                merged = true;
                return false;
            }
            let (dl, du) = ((y[0] - y[1]).abs(), (y[0] - y[2]).abs());
            if dl < 0.1 * sep && dl < 1e-3 * r_lo * width {
                decided = Some(Side::Lower);
            } else if du < 0.1 * sep && du < 1e-3 * r_hi * width {
                decided = Some(Side::Upper);
            }
            decided.is_none()
        })?;
        if merged {
            return Ok(None);
        }
        Ok(Some(decided.unwrap_or(if (y[0] - y[1]).abs() <= (y[0] - y[2]).abs() {
            Side::Lower
        } else {
            Side::Upper
        })))
    }

    /// Basin boundary between the orbits through `l0` and `u0` at `omega·t0`.
    fn bisect_between(&self, field: &Field, t0: f64, l0: f64, u0: f64) -> Result<Option<f64>, EquilibriumError> {
        let sep = self.s.numerics.sep_tol;
        if !(l0 + sep < u0) {
            return Err(EquilibriumError::Precondition(format!("need lower + sep_tol < upper, got {l0} and {u0}")));
        }
        let mut solver = self.solver();
        let (mut lo, mut hi) = (l0 + sep, u0 - sep);
        if lo >= hi {
            return Ok(None);
        }
        let f_lo = self.fate(field, &mut solver, t0, lo, l0, u0)?;
        let f_hi = self.fate(field, &mut solver, t0, hi, l0, u0)?;
        if f_lo.is_none() || f_lo == f_hi {
            return Ok(None);
        }
        while hi - lo > BISECT_WIDTH {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.fate(field, &mut solver, t0, mid, l0, u0)? == f_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    /// Backward propagation of a repeller value known at `times[from]` to the
    /// earlier entries `times[to..from]`.
    fn propagate_back(&self, field: &Field, times: &[f64], values: &mut [f64], from: usize, to: usize) -> Result<(), EquilibriumError> {
        let mut solver = self.solver();
        let mut x = values[from];
        for i in (to..from).rev() {
            let (_, y) = solver.integrate(field.state(), times[i + 1], [x], times[i], |_, _| true)?;
            x = y[0];
            values[i] = x;
        }
        Ok(())
    }

    fn delimiter_exponent(&self, omega: &BasePoint, side: Side, x0: f64) -> Result<f64, EquilibriumError> {
        let horizon = self.s.numerics.birkhoff_t;
        let field = self.field(omega);
        let mut solver = self.solver();
        let seg = horizon / ANCHORS as f64;
        let mut x = x0;
        let mut integral = 0.0;
        for j in 0..ANCHORS {
            let (t0, t1) = (j as f64 * seg, if j + 1 == ANCHORS { horizon } else { (j + 1) as f64 * seg });
            let (_, y) = solver
                .integrate(field.with_log(), t0, [x, integral], t1, |_, _| true)
                .map_err(|_| EquilibriumError::TrackingLost { progress: t0 / horizon })?;
            integral = y[1];
            x = y[0];
            if j + 1 < ANCHORS {
                let g = self.pullback_grid(omega, side, &[t1])?;
                if g.status == PullbackStatus::NonConvergence {
                    return Err(EquilibriumError::TrackingLost { progress: t1 / horizon });
                }
                x = g.values[0];
            }
        }
        Ok(integral / horizon)
    }

    /// Exponent of a repelling equilibrium, averaged over the past where it is
    /// attracting.
    fn repeller_exponent(&self, omega: &BasePoint, x0: f64) -> Result<f64, EquilibriumError> {
        let horizon = self.s.numerics.birkhoff_t;
        let field = self.field(omega);
        let mut solver = self.solver();
        let mut reached = 0.0;
        let (_, y) = solver
            .integrate(field.with_log(), 0.0, [x0, 0.0], -horizon, |t, _| {
                reached = t;
                true
            })
            .map_err(|_| EquilibriumError::TrackingLost {
                progress: -reached / horizon,
            })?;
        Ok(-y[1] / horizon)
    }

    fn zero_section_exponent(&self) -> Result<f64, EquilibriumError> {
        let s = self.s;
        let lambda = self.lambda;
        let g = |p: &BasePoint| {
            let fx = s.rhs.eval_derivatives(p, 0.0).fx;
            match s.family {
                Family::Linear => fx + lambda,
                Family::Additive => fx,
            }
        };
        Ok(ergodic_average(&s.base, g, &s.base.origin(), s.numerics.birkhoff_t, s.tolerances())?)
    }
}

/// Whether the differences `a, b` of a sequence shrink geometrically.
fn geometric(a: f64, b: f64) -> bool {
    a != 0.0 && b / a > 0.0 && b / a < 1.0
}

fn aitken(w: &[f64]) -> f64 {
    let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
    w[2] - d2 * d2 / (d2 - d1)
}

/// Limit of a slowly converging monotone sequence by Aitken's Δ², applied
/// twice when the first pass still contracts geometrically. `None` unless
/// the last two extrapolants agree within `agree`.
fn extrapolate(seq: &[f64], tol: f64, agree: f64) -> Option<f64> {
    let m = seq.len();
    if (seq[m - 1] - seq[m - 2]).abs() < tol {
        return Some(seq[m - 1]);
    }
    let d: Vec<f64> = seq.windows(2).map(|w| w[1] - w[0]).collect();
    let k = d.len();
    if !(geometric(d[k - 3], d[k - 2]) && geometric(d[k - 2], d[k - 1])) {
        return None;
    }
    let first: Vec<f64> = seq[m - 7..].windows(3).map(aitken).collect();
    let f = first.len();
    let e: Vec<f64> = first.windows(2).map(|w| w[1] - w[0]).collect();
    let g = e.len();
    let (last, prev) = if g >= 3 && geometric(e[g - 3], e[g - 2]) && geometric(e[g - 2], e[g - 1]) {
        (aitken(&first[f - 3..]), aitken(&first[f - 4..f - 1]))
    } else {
        (first[f - 1], first[f - 2])
    };
    ((last - prev).abs() < agree && last.is_finite()).then_some(last)
}

/// One delimiter equilibrium at `omega` by pullback from `ρ₁` or `ρ₂`.
/// Returns the value and the horizon used.
pub fn pullback_equilibrium(s: &Scenario, lambda: f64, omega: &BasePoint, side: Side) -> Result<(f64, f64), EquilibriumError> {
    let ctx = Ctx::new(s, lambda)?;
    let (v, h, _) = ctx.pullback_at(omega, side)?;
    Ok((v, h))
}

/// Full pullback diagnostics at `omega`.
pub fn pullback_detailed(s: &Scenario, lambda: f64, omega: &BasePoint, side: Side) -> Result<GridPullback, EquilibriumError> {
    Ctx::new(s, lambda)?.pullback_grid(omega, side, &[0.0])
}

/// Point between `alpha` and `beta` on the boundary between the basins of
/// the orbits through them, or `None` when every interior point has the
/// same fate.
pub fn bisect_repeller(s: &Scenario, lambda: f64, omega: &BasePoint, alpha: f64, beta: f64) -> Result<Option<f64>, EquilibriumError> {
    let ctx = Ctx::new(s, lambda)?;
    let field = ctx.field(omega);
    ctx.bisect_between(&field, 0.0, alpha, beta)
}

/// Lyapunov exponent along `α`, `β` or the middle repeller at `omega`.
pub fn lyapunov_exponent(s: &Scenario, lambda: f64, omega: &BasePoint, track: Track) -> Result<f64, EquilibriumError> {
    let ctx = Ctx::new(s, lambda)?;
    match track {
        Track::Alpha => {
            let (a, _, _) = ctx.pullback_at(omega, Side::Lower)?;
            ctx.delimiter_exponent(omega, Side::Lower, a)
        }
        Track::Beta => {
            let (b, _, _) = ctx.pullback_at(omega, Side::Upper)?;
            ctx.delimiter_exponent(omega, Side::Upper, b)
        }
        Track::Kappa => {
            let (a, _, _) = ctx.pullback_at(omega, Side::Lower)?;
            let (b, _, _) = ctx.pullback_at(omega, Side::Upper)?;
            let field = ctx.field(omega);
            if !(a + s.numerics.sep_tol < b) {
                return Err(EquilibriumError::TrackingLost { progress: 0.0 });
            }
            let k = ctx
                .bisect_between(&field, 0.0, a, b)?
                .ok_or(EquilibriumError::TrackingLost { progress: 0.0 })?;
            ctx.repeller_exponent(omega, k)
        }
    }
}

/// Exponent of the zero section `Ω × {0}` (meaningful for the linear family).
pub fn zero_section_exponent(s: &Scenario, lambda: f64) -> Result<f64, EquilibriumError> {
    Ctx::new(s, lambda)?.zero_section_exponent()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSample {
    pub lambda: f64,
    pub grid: Vec<BasePoint>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Values of the middle set, when there is one.
    pub kappa: Option<Vec<f64>>,
    pub gamma_alpha: Option<f64>,
    pub gamma_beta: Option<f64>,
    pub gamma_kappa: Option<f64>,
    pub pullback_horizon_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hyperbolicity {
    Attractive,
    Repulsive,
    NonhyperbolicEvidence,
}

impl Hyperbolicity {
    pub fn from_exponent(gamma: f64, margin: f64) -> Self {
        if gamma < -margin {
            Hyperbolicity::Attractive
        } else if gamma > margin {
            Hyperbolicity::Repulsive
        } else {
            Hyperbolicity::NonhyperbolicEvidence
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    /// The lower or upper delimiter of the attractor.
    Delimiter,
    /// A repelling set found by basin bisection.
    Repeller,
    ZeroSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Single,
    Lower,
    Middle,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetInfo {
    pub role: Role,
    pub kind: SetKind,
    pub mean: f64,
    pub exponent: f64,
    pub hyperbolicity: Hyperbolicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalSetReport {
    pub lambda: f64,
    pub count: u8,
    /// Candidate sets from bottom to top.
    pub sets: Vec<SetInfo>,
    pub pinched: bool,
    pub gap_min: f64,
    pub gap_max: f64,
    /// Linear family: whether a set lies strictly below / above the zero
    /// section.
    pub branches: (bool, bool),
    pub degraded: Vec<String>,
    pub sample: EquilibriumSample,
}

impl MinimalSetReport {
    pub fn is_degraded(&self) -> bool {
        !self.degraded.is_empty()
    }

    /// What sweeps compare between neighbouring parameter values.
    pub fn signature(&self) -> (u8, bool, bool) {
        (self.count, self.branches.0, self.branches.1)
    }

    /// Exponents of the candidate sets, bottom to top.
    pub fn exponents(&self) -> Vec<f64> {
        self.sets.iter().map(|s| s.exponent).collect()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn assign_roles(mut sets: Vec<SetInfo>) -> Vec<SetInfo> {
    let roles: &[Role] = match sets.len() {
        1 => &[Role::Single],
        2 => &[Role::Lower, Role::Upper],
        _ => &[Role::Lower, Role::Middle, Role::Upper],
    };
    for (s, r) in sets.iter_mut().zip(roles) {
        s.role = *r;
    }
    sets
}

struct Census<'a> {
    ctx: Ctx<'a>,
    grid: Vec<BasePoint>,
    times: Vec<f64>,
    degraded: Vec<String>,
}

impl<'a> Census<'a> {
    fn note_pullback(&mut self, name: &str, g: &GridPullback) {
        match g.status {
            PullbackStatus::NonConvergence => self.degraded.push(format!("{name}: pullback NonConvergence at horizon {}", g.horizon)),
            PullbackStatus::Accelerated | PullbackStatus::Converged => {}
        }
        if !g.monotone {
            self.degraded.push(format!("{name}: pullback iterates not monotone in the horizon"));
        }
    }

    fn exponent_or_note(&mut self, name: &str, r: Result<f64, EquilibriumError>) -> f64 {
        match r {
            Ok(g) => g,
            Err(e) => {
                self.degraded.push(format!("{name}: {e}"));
                f64::NAN
            }
        }
    }

    /// Repeller values on the grid between the orbits `lower` and `upper`,
    /// seeded where they are furthest apart.
    fn repeller(&mut self, lower: &[f64], upper: &[f64]) -> Result<Option<Vec<f64>>, EquilibriumError> {
        let gaps: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
        let star = argmax(&gaps);
        let origin = self.grid[0].clone();
        let field = self.ctx.field(&origin);
        let seed = self.ctx.bisect_between(&field, self.times[star], lower[star], upper[star])?;
        let Some(k) = seed else { return Ok(None) };
        let n = self.times.len();
        let mut values = vec![f64::NAN; n];
        values[star] = k;
        self.ctx.propagate_back(&field, &self.times, &mut values, star, 0)?;
        if star + 1 < n {
            let last = n - 1;
            let sep = self.ctx.s.numerics.sep_tol;
            if lower[last] + sep < upper[last] {
                match self.ctx.bisect_between(&field, self.times[last], lower[last], upper[last])? {
                    Some(k2) => {
                        values[last] = k2;
                        self.ctx.propagate_back(&field, &self.times, &mut values, last, star + 1)?;
                    }
                    None => self.degraded.push("repeller lost at the last grid point".into()),
                }
            } else {
                self.degraded.push("repeller not separated at the last grid point".into());
            }
        }
        Ok(Some(values))
    }
}

/// Minimal-set census at one parameter value.
pub fn census(s: &Scenario, lambda: f64) -> Result<MinimalSetReport, EquilibriumError> {
    let ctx = Ctx::new(s, lambda)?;
    let grid = grid_points(&s.base, s.numerics.grid_n);
    let dt = s.base.grid_spacing(s.numerics.grid_n);
    let times: Vec<f64> = (0..grid.len()).map(|i| i as f64 * dt).collect();
    let mut c = Census {
        ctx,
        grid,
        times,
        degraded: Vec::new(),
    };
    let origin = c.grid[0].clone();
    let ga = c.ctx.pullback_grid(&origin, Side::Lower, &c.times)?;
    let gb = c.ctx.pullback_grid(&origin, Side::Upper, &c.times)?;
    c.note_pullback("alpha", &ga);
    c.note_pullback("beta", &gb);
    let (alpha, beta) = (ga.values.clone(), gb.values.clone());
    let horizon = ga.horizon.max(gb.horizon);
    let gaps: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| b - a).collect();
    let gap_min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap_max = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let num = &s.numerics;
    let pinched = gap_min < num.pinch_tol && gap_max >= num.sep_tol;
    let margin = num.exp_margin;
    let info = |kind, mean, exponent| SetInfo {
        role: Role::Single,
        kind,
        mean,
        exponent,
        hyperbolicity: Hyperbolicity::from_exponent(exponent, margin),
    };

    let mut kappa: Option<Vec<f64>> = None;
    let mut gamma_alpha = None;
    let mut gamma_beta = None;
    let mut gamma_kappa = None;
    let mut branches = (false, false);
    let sets: Vec<SetInfo>;

    match s.family {
        Family::Additive => {
            if gap_max < num.sep_tol || pinched {
                let gb_ = c.ctx.delimiter_exponent(&origin, Side::Upper, beta[0]);
                let g = c.exponent_or_note("gamma_beta", gb_);
                gamma_beta = Some(g);
                if gap_max < num.sep_tol {
                    gamma_alpha = Some(g);
                } else {
                    let ga_ = c.ctx.delimiter_exponent(&origin, Side::Lower, alpha[0]);
                    gamma_alpha = Some(c.exponent_or_note("gamma_alpha", ga_));
                }
                sets = vec![info(SetKind::Delimiter, 0.5 * (mean(&alpha) + mean(&beta)), g)];
            } else {
                let ga_ = c.ctx.delimiter_exponent(&origin, Side::Lower, alpha[0]);
                let gal = c.exponent_or_note("gamma_alpha", ga_);
                let gb_ = c.ctx.delimiter_exponent(&origin, Side::Upper, beta[0]);
                let gbe = c.exponent_or_note("gamma_beta", gb_);
                gamma_alpha = Some(gal);
                gamma_beta = Some(gbe);
                let mut found = vec![info(SetKind::Delimiter, mean(&alpha), gal)];
                if let Some(k) = c.repeller(&alpha, &beta)? {
                    let gk_ = c.ctx.repeller_exponent(&origin, k[0]);
                    let gk = c.exponent_or_note("gamma_kappa", gk_);
                    gamma_kappa = Some(gk);
                    found.push(info(SetKind::Repeller, mean(&k), gk));
                    kappa = Some(k);
                }
                found.push(info(SetKind::Delimiter, mean(&beta), gbe));
                sets = found;
            }
        }
        Family::Linear => {
            let neg: Vec<f64> = alpha.iter().map(|a| -a).collect();
            let sep_pinch = |v: &[f64]| {
                let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
                mx >= num.sep_tol && mn >= num.pinch_tol
            };
            let lower = sep_pinch(&neg);
            let upper = sep_pinch(&beta);
            let gz_ = c.ctx.zero_section_exponent();
            let gz = c.exponent_or_note("gamma_zero_section", gz_);
            let zeros = vec![0.0; alpha.len()];
            let mut found = Vec::new();
            if lower {
                let ga_ = c.ctx.delimiter_exponent(&origin, Side::Lower, alpha[0]);
                let g = c.exponent_or_note("gamma_alpha", ga_);
                gamma_alpha = Some(g);
                found.push(info(SetKind::Delimiter, mean(&alpha), g));
                if !upper {
                    if let Some(k) = c.repeller(&alpha, &zeros)? {
                        let gk_ = c.ctx.repeller_exponent(&origin, k[0]);
                        let gk = c.exponent_or_note("gamma_kappa", gk_);
                        found.push(info(SetKind::Repeller, mean(&k), gk));
                        gamma_kappa = Some(gk);
                        kappa = Some(k);
                    }
                }
            }
            found.push(info(SetKind::ZeroSection, 0.0, gz));
            if upper {
                if !lower {
                    if let Some(k) = c.repeller(&zeros, &beta)? {
                        let gk_ = c.ctx.repeller_exponent(&origin, k[0]);
                        let gk = c.exponent_or_note("gamma_kappa", gk_);
                        found.push(info(SetKind::Repeller, mean(&k), gk));
                        gamma_kappa = Some(gk);
                        kappa = Some(k);
                    }
                }
                let gb_ = c.ctx.delimiter_exponent(&origin, Side::Upper, beta[0]);
                let g = c.exponent_or_note("gamma_beta", gb_);
                gamma_beta = Some(g);
                found.push(info(SetKind::Delimiter, mean(&beta), g));
            }
            if lower && upper {
                kappa = Some(zeros);
                gamma_kappa = Some(gz);
            }
            // a delimiter glued to the zero section shares its exponent; a
            // pinched one needs its own average
            if !lower {
                gamma_alpha = Some(if neg.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < num.sep_tol {
                    gz
                } else {
                    let r = c.ctx.delimiter_exponent(&origin, Side::Lower, alpha[0]);
                    c.exponent_or_note("gamma_alpha", r)
                });
            }
            if !upper {
                gamma_beta = Some(if beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max) < num.sep_tol {
                    gz
                } else {
                    let r = c.ctx.delimiter_exponent(&origin, Side::Upper, beta[0]);
                    c.exponent_or_note("gamma_beta", r)
                });
            }
            branches = (lower, upper);
            sets = found;
        }
    }

    let sets = assign_roles(sets);
    let count = match sets.len() {
        3 => {
            let pattern = [Hyperbolicity::Attractive, Hyperbolicity::Repulsive, Hyperbolicity::Attractive];
            if sets.iter().zip(pattern).all(|(s, p)| s.hyperbolicity == p) {
                3
            } else {
                2
            }
        }
        n => n as u8,
    };
    Ok(MinimalSetReport {
        lambda,
        count,
        sets,
        pinched,
        gap_min,
        gap_max,
        branches,
        degraded: c.degraded,
        sample: EquilibriumSample {
            lambda,
            grid: c.grid,
            alpha,
            beta,
            kappa,
            gamma_alpha,
            gamma_beta,
            gamma_kappa,
            pullback_horizon_used: horizon,
        },
    })
}

/// Convenience for tests and examples: the equilibrium sample at `lambda`
/// without exponents or a census verdict.
pub fn delimiters(s: &Scenario, lambda: f64) -> Result<(Vec<f64>, Vec<f64>), EquilibriumError> {
    let ctx = Ctx::new(s, lambda)?;
    let grid = grid_points(&s.base, s.numerics.grid_n);
    let dt = s.base.grid_spacing(s.numerics.grid_n);
    let times: Vec<f64> = (0..grid.len()).map(|i| i as f64 * dt).collect();
    let a = ctx.pullback_grid(&grid[0], Side::Lower, &times)?;
    let b = ctx.pullback_grid(&grid[0], Side::Upper, &times)?;
    Ok((a.values, b.values))
}

/// The base point reached from the first grid point after `t`.
pub fn orbit_point(s: &Scenario, t: f64) -> BasePoint {
    advance(&s.base, &s.base.origin(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Family;

    fn cubic(c: [f64; 4], family: Family) -> Scenario {
        Scenario::autonomous(RhsModel::cubic_const(c), family)
    }

    #[test]
    fn bounds() {
        let s = cubic([0.0, 1.0, 0.0, -1.0], Family::Additive);
        let (r1, r2) = bracketing_bounds(&s, 0.0).unwrap();
        assert_eq!((r1, r2), (-2.0, 2.0));
        assert_eq!(bracketing_bounds(&s, 10.0).unwrap().1, 12.0);
        let p = cubic([0.0, 0.0, 0.0, -1.0], Family::Additive);
        assert_eq!(bracketing_bounds(&p, 0.0).unwrap().1, 1.0);
        let bad = cubic([0.0, 0.0, 0.0, 1.0], Family::Additive);
        assert_eq!(bracketing_bounds(&bad, 0.0), Err(EquilibriumError::NotCoercive));
    }

    #[test]
    fn pullback_values() {
        let s = cubic([0.0, 1.0, 0.0, -1.0], Family::Additive);
        let o = s.base.origin();
        let (b, _) = pullback_equilibrium(&s, 0.0, &o, Side::Upper).unwrap();
        assert!((b - 1.0).abs() < 1e-8);
        let (b, _) = pullback_equilibrium(&s, 0.5, &o, Side::Upper).unwrap();
        assert!((b - 1.191_487_883_953_1).abs() < 1e-8, "{b}");
    }

    #[test]
    fn slow_pullback_is_accelerated() {
        let s = cubic([0.0, 0.0, 0.0, -1.0], Family::Additive);
        let g = pullback_detailed(&s, 0.0, &s.base.origin(), Side::Upper).unwrap();
        assert_eq!(g.status, PullbackStatus::Accelerated);
        assert!(g.values[0].abs() < 1e-6, "{}", g.values[0]);
    }

    #[test]
    fn repeller_by_bisection() {
        let s = cubic([0.0, 1.0, 0.0, -1.0], Family::Additive);
        let o = s.base.origin();
        let k = bisect_repeller(&s, 0.0, &o, -1.0, 1.0).unwrap().unwrap();
        assert!(k.abs() < 1e-9);
        assert_eq!(bisect_repeller(&s, 0.5, &o, -1.0, 1.0).unwrap(), None);
    }

    #[test]
    fn exponents() {
        let s = cubic([0.0, 1.0, 0.0, -1.0], Family::Additive);
        let o = s.base.origin();
        assert!((lyapunov_exponent(&s, 0.0, &o, Track::Beta).unwrap() + 2.0).abs() < 1e-3);
        assert!((lyapunov_exponent(&s, 0.0, &o, Track::Kappa).unwrap() - 1.0).abs() < 1e-3);
        let l = cubic([0.0, 0.0, 0.0, -1.0], Family::Linear);
        assert!((lyapunov_exponent(&l, 0.4, &o, Track::Beta).unwrap() + 0.8).abs() < 1e-3);
    }

    #[test]
    fn census_examples() {
        let s = cubic([0.0, 1.0, 0.0, -1.0], Family::Additive);
        let r = census(&s, 0.0).unwrap();
        assert_eq!(r.count, 3);
        let g = r.exponents();
        assert!((g[0] + 2.0).abs() < 1e-3 && (g[1] - 1.0).abs() < 1e-3 && (g[2] + 2.0).abs() < 1e-3);
        assert_eq!(census(&s, 0.5).unwrap().count, 1);
        let p = cubic([0.0, 0.0, 0.0, -1.0], Family::Additive);
        let r = census(&p, 0.0).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.sets[0].hyperbolicity, Hyperbolicity::NonhyperbolicEvidence);
    }

    #[test]
    fn linear_family_census() {
        let s = cubic([0.0, 0.0, 1.0, -1.0], Family::Linear);
        // roots 0 and (1 ± √(1 + 4λ))/2
        let r = census(&s, -0.1).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.branches, (false, true));
        assert_eq!(r.sets[0].kind, SetKind::ZeroSection);
        let r = census(&s, 0.1).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.branches, (true, true));
        assert_eq!(census(&s, -0.4).unwrap().count, 1);
    }
}
