//! Parameter sweeps, bifurcation location, spectrum estimates and diagram
//! classification.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::base_flow::spread_points;
use crate::equilibria::{census, zero_section_exponent, EquilibriumError, MinimalSetReport, SetKind};
use crate::model::{RhsModel, TrigPoly};
use crate::scenario::{validate_model, Family, Scenario};

const SPECTRUM_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error("predicate takes the same value at both ends of [{lo}, {hi}]")]
    SamePredicate { lo: f64, hi: f64 },
    #[error("model failed validation: {0}")]
    Invalid(String),
    #[error("observable unavailable: {0}")]
    Observable(String),
    #[error(transparent)]
    Census(#[from] EquilibriumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    SaddleNodeUpper,
    SaddleNodeLower,
    Transcritical,
    Pitchfork,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub location: f64,
    pub kind: PointKind,
    pub width: f64,
    pub degraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    DoubleSaddleNode,
    SingleMinimalSet,
    GlobalPitchfork,
    TranscriticalPlusSaddleNode,
    Undetermined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::DoubleSaddleNode => "DoubleSaddleNode",
            Classification::SingleMinimalSet => "SingleMinimalSet",
            Classification::GlobalPitchfork => "GlobalPitchfork",
            Classification::TranscriticalPlusSaddleNode => "TranscriticalPlusSaddleNode",
            Classification::Undetermined => "Undetermined",
        }
    }
}

/// One census, summarised for the diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    pub lambda: f64,
    pub count: u8,
    pub pinched: bool,
    pub alpha_mean: Option<f64>,
    pub kappa_mean: Option<f64>,
    pub beta_mean: Option<f64>,
    pub gamma_alpha: Option<f64>,
    pub gamma_kappa: Option<f64>,
    pub gamma_beta: Option<f64>,
    pub gap_min: Option<f64>,
    pub gap_max: Option<f64>,
    pub horizon: Option<f64>,
    pub branches: (bool, bool),
    pub degraded: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl DiagramRow {
    pub fn from_report(r: &MinimalSetReport) -> Self {
        let smp = &r.sample;
        Self {
            lambda: r.lambda,
            count: r.count,
            pinched: r.pinched,
            alpha_mean: Some(mean(&smp.alpha)),
            kappa_mean: smp.kappa.as_deref().map(mean),
            beta_mean: Some(mean(&smp.beta)),
            gamma_alpha: smp.gamma_alpha,
            gamma_kappa: smp.gamma_kappa,
            gamma_beta: smp.gamma_beta,
            gap_min: Some(r.gap_min),
            gap_max: Some(r.gap_max),
            horizon: Some(smp.pullback_horizon_used),
            branches: r.branches,
            degraded: r.degraded.clone(),
        }
    }

    fn failed(lambda: f64, e: &EquilibriumError) -> Self {
        Self {
            lambda,
            count: 0,
            pinched: false,
            alpha_mean: None,
            kappa_mean: None,
            beta_mean: None,
            gamma_alpha: None,
            gamma_kappa: None,
            gamma_beta: None,
            gap_min: None,
            gap_max: None,
            horizon: None,
            branches: (false, false),
            degraded: vec![format!("census failed: {e}")],
        }
    }

    pub fn signature(&self) -> (u8, bool, bool) {
        (self.count, self.branches.0, self.branches.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationDiagram {
    pub family: Family,
    pub rows: Vec<DiagramRow>,
    pub points: Vec<BifurcationPoint>,
    pub classification: Classification,
    /// Verdict from the census rows alone.
    pub sweep_verdict: Classification,
    /// Verdict of the spectrum rule on the quadratic coefficient, for cubic
    /// models of the showcase form.
    pub spectrum_verdict: Option<Classification>,
    /// Where the zero-section exponent changes sign (linear family).
    pub zero_crossing: Option<f64>,
    pub degraded: Vec<String>,
    #[serde(skip)]
    pub reports: Vec<Option<MinimalSetReport>>,
}

/// Conditions on a census that bifurcations are located against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountPredicate {
    Equals(u8),
    AtLeast(u8),
}

impl CountPredicate {
    pub fn holds(&self, r: &MinimalSetReport) -> bool {
        match *self {
            CountPredicate::Equals(n) => r.count == n,
            CountPredicate::AtLeast(n) => r.count >= n,
        }
    }

    /// Parses `count=3` or `count>=2`.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if let Some(n) = t.strip_prefix("count>=") {
            return n.trim().parse().ok().map(CountPredicate::AtLeast);
        }
        t.strip_prefix("count=").and_then(|n| n.trim().parse().ok()).map(CountPredicate::Equals)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Location {
    pub location: f64,
    pub width: f64,
    pub degraded: bool,
}

fn bisect_census<P>(s: &Scenario, mut lo: f64, mut hi: f64, p_lo: bool, pred: &P) -> Location
where
    P: Fn(&MinimalSetReport) -> bool + ?Sized,
{
    let tol = s.numerics.bisect_tol;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match census(s, mid) {
            Ok(r) if !r.is_degraded() => {
                if pred(&r) == p_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            _ => {
                return Location {
                    location: 0.5 * (lo + hi),
                    width: hi - lo,
                    degraded: true,
                }
            }
        }
    }
    Location {
        location: 0.5 * (lo + hi),
        width: hi - lo,
        degraded: false,
    }
}

/// Bisects `[lo, hi]` on a census predicate down to `bisect_tol`.
pub fn locate_bifurcation<P>(s: &Scenario, lo: f64, hi: f64, pred: P) -> Result<Location, BifurcationError>
where
    P: Fn(&MinimalSetReport) -> bool,
{
    let (a, b) = (census(s, lo)?, census(s, hi)?);
    let (pa, pb) = (pred(&a), pred(&b));
    if pa == pb {
        return Err(BifurcationError::SamePredicate { lo, hi });
    }
    let mut loc = bisect_census(s, lo, hi, pa, &pred);
    loc.degraded |= a.is_degraded() || b.is_degraded();
    Ok(loc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// The quadratic coefficient `c2`.
    A2Coefficient,
    /// `f_x(·, 0)`, the linearisation along the zero section.
    FxAtZeroSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub low: f64,
    pub high: f64,
    pub horizon: f64,
    /// `(T, low_T, high_T)` for every requested horizon.
    pub spread_history: Vec<(f64, f64, f64)>,
}

fn observable_poly(s: &Scenario, obs: Observable) -> Result<TrigPoly, BifurcationError> {
    match (obs, &s.rhs) {
        (Observable::A2Coefficient, RhsModel::Cubic { c2, .. }) => Ok(c2.clone()),
        (Observable::A2Coefficient, _) => Err(BifurcationError::Observable("quadratic coefficient needs the cubic shape".into())),
        (Observable::FxAtZeroSection, _) if s.family != Family::Linear => {
            Err(BifurcationError::Observable("zero section is invariant only in the linear family".into()))
        }
        (Observable::FxAtZeroSection, RhsModel::Cubic { c1, .. }) => Ok(c1.clone()),
        (Observable::FxAtZeroSection, RhsModel::Deadzone { .. }) => Ok(TrigPoly::constant(0.0)),
    }
}

/// Finite-time averages of the observable from spread base points; the
/// extreme values at the last horizon bracket the spectrum.
pub fn estimate_spectrum(s: &Scenario, obs: Observable, horizons: &[f64]) -> Result<SpectrumEstimate, BifurcationError> {
    if horizons.is_empty() || horizons.iter().any(|h| !(*h > 0.0)) {
        return Err(BifurcationError::Observable("horizons must be positive and nonempty".into()));
    }
    let poly = observable_poly(s, obs)?;
    let points = spread_points(s.base.dim(), SPECTRUM_POINTS);
    let spread_history: Vec<(f64, f64, f64)> = horizons
        .iter()
        .map(|&t| {
            let avgs = points.iter().map(|p| poly.orbit_average(&s.base, p, t));
            let (lo, hi) = avgs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            (t, lo, hi)
        })
        .collect();
    let &(horizon, low, high) = spread_history.last().unwrap();
    Ok(SpectrumEstimate {
        low,
        high,
        horizon,
        spread_history,
    })
}

/// Whether the scenario is the cubic showcase `−c x³ + a₂(ω) x² + λx` with
/// constant `c` and constant linear coefficient.
fn is_showcase(s: &Scenario) -> bool {
    match &s.rhs {
        RhsModel::Cubic { c0, c1, c3, .. } => {
            s.family == Family::Linear && c0.is_zero() && c1.is_constant() && c3.is_constant() && c3.mean < 0.0
        }
        RhsModel::Deadzone { .. } => false,
    }
}

/// The spectrum rule: `GlobalPitchfork` when the spectrum of `a₂` contains
/// zero, otherwise `TranscriticalPlusSaddleNode`.
pub fn spectrum_rule(s: &Scenario) -> Option<Classification> {
    if !is_showcase(s) {
        return None;
    }
    let est = estimate_spectrum(s, Observable::A2Coefficient, &[s.numerics.birkhoff_t]).ok()?;
    Some(if est.low <= 0.0 && 0.0 <= est.high {
        Classification::GlobalPitchfork
    } else {
        Classification::TranscriticalPlusSaddleNode
    })
}

fn nearest_row(rows: &[DiagramRow], below: bool, at: f64, gap: f64) -> Option<&DiagramRow> {
    if below {
        rows.iter().rfind(|r| r.lambda < at - gap)
    } else {
        rows.iter().find(|r| r.lambda > at + gap)
    }
}

/// Classification from rows, located points and the zero-section crossing.
pub fn classify(s: &Scenario, rows: &[DiagramRow], points: &[BifurcationPoint], crossing: Option<f64>) -> Classification {
    let degraded_point = points.iter().any(|p| p.degraded);
    match s.family {
        Family::Additive => {
            if rows.iter().all(|r| r.count == 1) && !rows.iter().any(|r| r.count == 0) {
                Classification::SingleMinimalSet
            } else if rows.iter().any(|r| r.count == 3) {
                let sn = points
                    .iter()
                    .filter(|p| matches!(p.kind, PointKind::SaddleNodeUpper | PointKind::SaddleNodeLower))
                    .count();
                if degraded_point || sn == 0 {
                    Classification::Undetermined
                } else {
                    Classification::DoubleSaddleNode
                }
            } else {
                Classification::Undetermined
            }
        }
        Family::Linear => {
            let Some(lc) = crossing else {
                return if rows.iter().all(|r| r.count == 1) {
                    Classification::SingleMinimalSet
                } else {
                    Classification::Undetermined
                };
            };
            if degraded_point {
                return Classification::Undetermined;
            }
            let gap = 2.0 * s.numerics.exp_margin;
            let (Some(b), Some(a)) = (nearest_row(rows, true, lc, gap), nearest_row(rows, false, lc, gap)) else {
                return Classification::Undetermined;
            };
            if !b.degraded.is_empty() || !a.degraded.is_empty() {
                return Classification::Undetermined;
            }
            let saddle_nodes: Vec<&BifurcationPoint> = points
                .iter()
                .filter(|p| matches!(p.kind, PointKind::SaddleNodeUpper | PointKind::SaddleNodeLower))
                .collect();
            if b.branches == (false, false) && a.branches == (true, true) && saddle_nodes.is_empty() {
                return Classification::GlobalPitchfork;
            }
            let persists = |k: usize| {
                let get = |r: &DiagramRow| if k == 0 { r.branches.0 } else { r.branches.1 };
                get(b) && get(a)
            };
            for (k, kind) in [(0, PointKind::SaddleNodeLower), (1, PointKind::SaddleNodeUpper)] {
                let other = |r: &DiagramRow| if k == 0 { r.branches.1 } else { r.branches.0 };
                if persists(k) && other(b) != other(a) && saddle_nodes.iter().any(|p| p.kind == kind && p.location < lc) {
                    return Classification::TranscriticalPlusSaddleNode;
                }
            }
            Classification::Undetermined
        }
    }
}

fn saddle_node_kind(family: Family, x: &MinimalSetReport, y: &MinimalSetReport) -> PointKind {
    let (rich, poor) = if x.sets.len() >= y.sets.len() { (x, y) } else { (y, x) };
    match family {
        Family::Additive => {
            let survivor = poor.sets.iter().map(|s| s.mean).sum::<f64>() / poor.sets.len().max(1) as f64;
            let lo = rich.sets.first().map_or(0.0, |s| s.mean);
            let hi = rich.sets.last().map_or(0.0, |s| s.mean);
            // the pair that disappears is the one away from the survivor
            if (survivor - lo).abs() <= (survivor - hi).abs() {
                PointKind::SaddleNodeUpper
            } else {
                PointKind::SaddleNodeLower
            }
        }
        Family::Linear => {
            let above = rich
                .sets
                .iter()
                .filter(|s| s.kind != SetKind::ZeroSection)
                .filter(|s| s.mean > 0.0)
                .count();
            let poor_above = poor.sets.iter().filter(|s| s.kind != SetKind::ZeroSection && s.mean > 0.0).count();
            if above > poor_above {
                PointKind::SaddleNodeUpper
            } else {
                PointKind::SaddleNodeLower
            }
        }
    }
}

fn zero_crossing(s: &Scenario) -> Result<Option<(f64, f64)>, BifurcationError> {
    let g = |l: f64| zero_section_exponent(s, l);
    let (mut lo, mut hi) = (s.sweep.lambda_min, s.sweep.lambda_max);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() || glo == 0.0 || ghi == 0.0 {
        let hit = [(lo, glo), (hi, ghi)].into_iter().find(|(_, v)| *v == 0.0);
        return Ok(hit.map(|(l, _)| (l, 0.0)));
    }
    while hi - lo > s.numerics.bisect_tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(Some((mid, 0.0)));
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi), hi - lo)))
}

/// Runs the census over the sweep grid, locates and classifies transitions.
pub fn sweep(s: &Scenario) -> Result<BifurcationDiagram, BifurcationError> {
    let v = validate_model(s);
    if !v.coercive() {
        return Err(BifurcationError::Invalid("coercivity check failed".into()));
    }
    let lambdas = s.sweep.values();
    let results: Vec<Result<MinimalSetReport, EquilibriumError>> = lambdas.par_iter().map(|&l| census(s, l)).collect();
    let mut degraded = Vec::new();
    let mut rows = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    for (l, r) in lambdas.iter().zip(&results) {
        match r {
            Ok(rep) => {
                for d in &rep.degraded {
                    degraded.push(format!("lambda={l}: {d}"));
                }
                rows.push(DiagramRow::from_report(rep));
                reports.push(Some(rep.clone()));
            }
            Err(e) => {
                degraded.push(format!("lambda={l}: census failed: {e}"));
                rows.push(DiagramRow::failed(*l, e));
                reports.push(None);
            }
        }
    }

    let crossing = if s.family == Family::Linear { zero_crossing(s)? } else { None };
    let mut points: Vec<BifurcationPoint> = Vec::new();
    for i in 0..rows.len().saturating_sub(1) {
        let (a, b) = (&rows[i], &rows[i + 1]);
        if a.signature() == b.signature() {
            continue;
        }
        if let Some((lc, _)) = crossing {
            if a.lambda <= lc && lc <= b.lambda {
                continue;
            }
        }
        let (Some(ra), Some(rb)) = (&reports[i], &reports[i + 1]) else {
            degraded.push(format!("transition in [{}, {}] next to a failed census", a.lambda, b.lambda));
            points.push(BifurcationPoint {
                location: 0.5 * (a.lambda + b.lambda),
                kind: PointKind::SaddleNodeUpper,
                width: b.lambda - a.lambda,
                degraded: true,
            });
            continue;
        };
        let sig = ra.signature();
        let mut loc = bisect_census(s, a.lambda, b.lambda, true, &|r: &MinimalSetReport| r.signature() == sig);
        loc.degraded |= ra.is_degraded() || rb.is_degraded();
        if loc.degraded {
            degraded.push(format!("transition in [{}, {}] is degraded", a.lambda, b.lambda));
        }
        points.push(BifurcationPoint {
            location: loc.location,
            kind: saddle_node_kind(s.family, ra, rb),
            width: loc.width,
            degraded: loc.degraded,
        });
    }
    // a nonhyperbolic sliver between two grid rows shows up as two adjacent
    // transitions of the same kind
    let merge = 100.0 * s.numerics.bisect_tol;
    points.sort_by(|x, y| x.location.total_cmp(&y.location));
    points.dedup_by(|later, earlier| {
        if later.kind == earlier.kind && (later.location - earlier.location).abs() < merge {
            earlier.degraded |= later.degraded;
            true
        } else {
            false
        }
    });

    let sweep_verdict = classify(s, &rows, &points, crossing.map(|c| c.0));
    if let Some((lc, width)) = crossing {
        points.push(BifurcationPoint {
            location: lc,
            kind: if sweep_verdict == Classification::GlobalPitchfork {
                PointKind::Pitchfork
            } else {
                PointKind::Transcritical
            },
            width,
            degraded: false,
        });
        points.sort_by(|x, y| x.location.total_cmp(&y.location));
    }
    let spectrum_verdict = spectrum_rule(s);
    let classification = match spectrum_verdict {
        Some(sv) if sweep_verdict != Classification::Undetermined && sv != sweep_verdict => {
            degraded.push(format!("sweep verdict {} disagrees with spectrum rule {}", sweep_verdict.as_str(), sv.as_str()));
            Classification::Undetermined
        }
        _ => sweep_verdict,
    };
    Ok(BifurcationDiagram {
        family: s.family,
        rows,
        points,
        classification,
        sweep_verdict,
        spectrum_verdict,
        zero_crossing: crossing.map(|c| c.0),
        degraded,
        reports,
    })
}

/// Census rows of the family `x' = f + ξx² + λx` at fixed `λ` as `ξ` varies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiDiagram {
    pub lambda: f64,
    pub rows: Vec<(f64, u8)>,
    /// `(ξ₋, ξ₊)`: first and last swept `ξ` with a single minimal set.
    pub window: Option<(f64, f64)>,
    /// Two sets on both sides of a window of one, the zero section never
    /// hyperbolic.
    pub weak_transcritical: bool,
}

pub fn xi_sweep(s: &Scenario, lambda: f64, xis: &[f64]) -> Result<XiDiagram, BifurcationError> {
    let reports: Vec<Result<MinimalSetReport, EquilibriumError>> =
        xis.par_iter().map(|&xi| census(&s.shift_c2(xi), lambda)).collect();
    let mut rows = Vec::new();
    let mut zero_hyperbolic = false;
    for (xi, r) in xis.iter().zip(reports) {
        let r = r?;
        zero_hyperbolic |= r
            .sets
            .iter()
            .any(|st| st.kind == SetKind::ZeroSection && st.exponent.abs() > s.numerics.exp_margin);
        rows.push((*xi, r.count));
    }
    let singles: Vec<f64> = rows.iter().filter(|r| r.1 == 1).map(|r| r.0).collect();
    let window = (!singles.is_empty()).then(|| (singles[0], *singles.last().unwrap()));
    let weak_transcritical = match window {
        Some((lo, hi)) => {
            rows.iter().all(|(xi, c)| if *xi < lo || *xi > hi { *c == 2 } else { *c == 1 })
                && rows.first().is_some_and(|r| r.1 == 2)
                && rows.last().is_some_and(|r| r.1 == 2)
                && !zero_hyperbolic
        }
        None => false,
    };
    Ok(XiDiagram {
        lambda,
        rows,
        window,
        weak_transcritical,
    })
}
