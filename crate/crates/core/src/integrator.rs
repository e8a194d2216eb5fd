//! Dormand–Prince 5(4) with PI step control, plus the scalar fiber equation
//! and its variational system.

use serde::Serialize;
use thiserror::Error;

use crate::base_flow::BasePoint;
use crate::equilibria::blowup_bound;
use crate::model::{Derivatives, OrbitModel};
use crate::scenario::{Family, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, s: f64) -> Self {
        Self {
            rtol: self.rtol * s,
            atol: self.atol * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StepFailure {
    #[error("step size {h:e} fell below the floor at t = {t}")]
    StepFloor { t: f64, h: f64 },
    #[error("|x| = {x:e} exceeded the escape bound at t = {t}")]
    Blowup { t: f64, x: f64 },
    #[error("step budget exhausted at t = {t}")]
    Budget { t: f64 },
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

#[inline]
fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        *o += h * s;
    }
    out
}

struct Stage<const N: usize> {
    y5: [f64; N],
    k7: [f64; N],
    err: [f64; N],
}

#[inline]
fn dp_step<F, const N: usize>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Stage<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let k2 = rhs(t + C2 * h, &lin(y, h, &[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &lin(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &lin(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(
        t + C5 * h,
        &lin(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &lin(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = lin(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Stage { y5, k7, err }
}

/// Adaptive explicit Runge–Kutta solver for small fixed-size systems.
///
/// The last accepted step size is kept between calls, so integrating a long
/// interval piecewise costs about the same as integrating it in one go.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub max_step: f64,
    /// Escape threshold on `|y[0]|`.
    pub bound: f64,
    pub max_steps: usize,
    pub accepted: usize,
    pub rejected: usize,
    h: f64,
    err_old: f64,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_step: f64::INFINITY,
            bound: f64::INFINITY,
            max_steps: 50_000_000,
            accepted: 0,
            rejected: 0,
            h: 0.0,
            err_old: 1e-4,
        }
    }

    /// Forget the carried step size (e.g. after a jump in the state).
    pub fn reset_step(&mut self) {
        self.h = 0.0;
        self.err_old = 1e-4;
    }

    fn norm<const N: usize>(&self, e: &[f64; N], y0: &[f64; N], y1: &[f64; N]) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            let sk = self.tol.atol + self.tol.rtol * y0[i].abs().max(y1[i].abs());
            s += (e[i] / sk).powi(2);
        }
        (s / N as f64).sqrt()
    }

    fn initial_step<F, const N: usize>(&self, rhs: &mut F, t: f64, y: &[f64; N], f0: &[f64; N], dir: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let zero = [0.0; N];
        let dnf = self.norm(f0, y, y);
        let dny = self.norm(y, &zero, &zero).min(self.norm(y, y, y));
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            0.01 * dny / dnf
        };
        h = h.min(self.max_step);
        let y1 = lin(y, dir * h, &[(1.0, f0)]);
        let f1 = rhs(t + dir * h, &y1);
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = f1[i] - f0[i];
        }
        let der2 = self.norm(&d, y, y) / h;
        let der12 = der2.max(dnf);
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.max_step)
    }

    /// Integrates from `t0` to `t1` (either direction), landing exactly on
    /// `t1`. `guard` sees every accepted step; returning `false` stops early
    /// and the current `(t, y)` is returned.
    pub fn integrate<F, G, const N: usize>(
        &mut self,
        mut rhs: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        mut guard: G,
    ) -> Result<(f64, [f64; N]), StepFailure>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: FnMut(f64, &[f64; N]) -> bool,
    {
        if t1 == t0 {
            return Ok((t0, y0));
        }
        let dir = (t1 - t0).signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        if self.h <= 0.0 {
            self.h = self.initial_step(&mut rhs, t, &y, &k1, dir);
        }
        let mut h = self.h.min(self.max_step);
        let mut just_rejected = false;
        let mut taken = 0usize;
        loop {
            let remaining = (t1 - t) * dir;
            if remaining <= 0.0 {
                break;
            }
            let mut hs = h.min(self.max_step);
            let last = hs >= remaining * (1.0 - 1e-13);
            if last {
                hs = remaining;
            } else if hs < 1e-14 * t.abs().max(1.0) {
                return Err(StepFailure::StepFloor { t, h: hs });
            }
            taken += 1;
            if taken > self.max_steps {
                return Err(StepFailure::Budget { t });
            }
            let st = dp_step(&mut rhs, t, &y, &k1, dir * hs);
            let err = self.norm(&st.err, &y, &st.y5);
            if !err.is_finite() || st.y5.iter().any(|v| !v.is_finite()) {
                self.rejected += 1;
                h = hs * 0.25;
                just_rejected = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(StepFailure::StepFloor { t, h });
                }
                continue;
            }
            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = hs / fac;
                if just_rejected {
                    h_new = h_new.min(hs);
                }
                self.err_old = err.max(1e-4);
                self.accepted += 1;
                just_rejected = false;
                t = if last { t1 } else { t + dir * hs };
                y = st.y5;
                k1 = st.k7;
                if y[0].abs() > self.bound {
                    self.h = h_new;
                    return Err(StepFailure::Blowup { t, x: y[0] });
                }
                // a step truncated to hit t1 says little about the natural size
                h = if last { h_new.max(h) } else { h_new };
                self.h = h;
                if !guard(t, &y) || last {
                    return Ok((t, y));
                }
            } else {
                self.rejected += 1;
                h = hs / (1.0 / FAC_MIN).min(fac11 / SAFE);
                just_rejected = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(StepFailure::StepFloor { t, h });
                }
            }
        }
        Ok((t, y))
    }
}

/// Fixed-step integration with the fifth-order Dormand–Prince solution.
pub fn fixed_steps<F, const N: usize>(mut rhs: F, t0: f64, y0: [f64; N], t1: f64, n: usize) -> [f64; N]
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    let mut k1 = rhs(t0, &y);
    for i in 0..n {
        let st = dp_step(&mut rhs, t0 + i as f64 * h, &y, &k1, h);
        y = st.y5;
        k1 = st.k7;
    }
    y
}

/// The effective field `F = f + λ` or `F = f + λx` along one base orbit.
#[derive(Debug, Clone)]
pub struct Field {
    orbit: OrbitModel,
    family: Family,
    lambda: f64,
}

impl Field {
    pub fn new(s: &Scenario, lambda: f64, omega: &BasePoint) -> Self {
        Self {
            orbit: s.rhs.along(&s.base, omega),
            family: s.family,
            lambda,
        }
    }

    #[inline]
    pub fn f_fx(&self, t: f64, x: f64) -> (f64, f64) {
        let (f, fx) = self.orbit.f_fx(t, x);
        match self.family {
            Family::Additive => (f + self.lambda, fx),
            Family::Linear => (f + self.lambda * x, fx + self.lambda),
        }
    }

    #[inline]
    pub fn derivs(&self, t: f64, x: f64) -> Derivatives {
        let mut d = self.orbit.derivs(t, x);
        match self.family {
            Family::Additive => d.f += self.lambda,
            Family::Linear => {
                d.f += self.lambda * x;
                d.fx += self.lambda;
            }
        }
        d
    }

    /// `x' = F`.
    pub fn state(&self) -> impl Fn(f64, &[f64; 1]) -> [f64; 1] + '_ {
        move |t, y| [self.f_fx(t, y[0]).0]
    }

    /// `x' = F`, `I' = F_x`.
    pub fn with_log(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |t, y| {
            let (f, fx) = self.f_fx(t, y[0]);
            [f, fx]
        }
    }

    /// `x`, the three variationals and `∫F_x`.
    pub fn variational(&self) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] + '_ {
        move |t, y| {
            let d = self.derivs(t, y[0]);
            let (v1, v2, v3) = (y[1], y[2], y[3]);
            [
                d.f,
                d.fx * v1,
                d.fxx * v1 * v1 + d.fx * v2,
                d.fxxx * v1 * v1 * v1 + 3.0 * d.fxx * v1 * v2 + d.fx * v3,
                d.fx,
            ]
        }
    }
}

/// A solver configured for the scenario: tolerances, escape bound and a step
/// cap that resolves the fastest forcing mode.
pub fn solver_for(s: &Scenario, lambda: f64) -> Dopri5 {
    let mut solver = Dopri5::new(s.tolerances());
    let rate = s.rhs.max_rate(&s.base);
    if rate > 0.0 {
        solver.max_step = 0.125 / rate;
    }
    solver.bound = blowup_bound(s, lambda);
    solver
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Ok,
    BlowupDetected,
    StepFloorHit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSolution {
    pub t_end: f64,
    pub x_end: f64,
    pub ux: Option<f64>,
    pub uxx: Option<f64>,
    pub uxxx: Option<f64>,
    pub fx_integral: f64,
    pub status: SolveStatus,
}

/// Solves the fiber equation from `(omega, x0)` over `[0, t]`.
pub fn solve(s: &Scenario, lambda: f64, omega: &BasePoint, x0: f64, t: f64, with_variationals: bool) -> OdeSolution {
    let field = Field::new(s, lambda, omega);
    let mut solver = solver_for(s, lambda);
    let mut last = (0.0, [x0, 1.0, 0.0, 0.0, 0.0]);
    let outcome = if with_variationals {
        solver.integrate(field.variational(), 0.0, last.1, t, |tt, y| {
            last = (tt, *y);
            true
        })
    } else {
        let mut last2 = (0.0, [x0, 0.0]);
        let r = solver.integrate(field.with_log(), 0.0, last2.1, t, |tt, y| {
            last2 = (tt, *y);
            true
        });
        last = (last2.0, [last2.1[0], f64::NAN, f64::NAN, f64::NAN, last2.1[1]]);
        r.map(|(tt, y)| (tt, [y[0], f64::NAN, f64::NAN, f64::NAN, y[1]]))
    };
    let (status, (t_end, y)) = match outcome {
        Ok(end) => (SolveStatus::Ok, end),
        Err(StepFailure::Blowup { t, x }) => {
            let mut y = last.1;
            y[0] = x;
            (SolveStatus::BlowupDetected, (t, y))
        }
        Err(_) => (SolveStatus::StepFloorHit, last),
    };
    let var = |v: f64| with_variationals.then_some(v);
    OdeSolution {
        t_end,
        x_end: y[0],
        ux: var(y[1]),
        uxx: var(y[2]),
        uxxx: var(y[3]),
        fx_integral: y[4],
        status,
    }
}

/// `S = u_xxx/u_x − (3/2)(u_xx/u_x)²` at time `t`.
pub fn schwarzian(s: &Scenario, lambda: f64, omega: &BasePoint, x0: f64, t: f64) -> Result<f64, SolveStatus> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let sol = solve(s, lambda, omega, x0, t, true);
    if sol.status != SolveStatus::Ok {
        return Err(sol.status);
    }
    let (v1, v2, v3) = (sol.ux.unwrap(), sol.uxx.unwrap(), sol.uxxx.unwrap());
    Ok(v3 / v1 - 1.5 * (v2 / v1).powi(2))
}
