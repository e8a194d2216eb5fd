//! Attractors, minimal sets, Lyapunov exponents and bifurcations of scalar
//! equations `x' = f(ω·t, x) + λ` and `x' = f(ω·t, x) + λx` driven by a
//! rotation on a torus.
//!
//! The pieces build on each other:
//!
//! - [`base_flow`] moves points on the torus;
//! - [`model`] evaluates `f` and its `x`-derivatives;
//! - [`integrator`] solves the fiber equation and its variational system;
//! - [`equilibria`] computes the attractor's delimiters, middle repellers,
//!   exponents and the minimal-set census at fixed `λ`;
//! - [`bifurcation`] sweeps `λ`, locates and classifies transitions;
//! - [`dconcavity`] measures the standardized module of d-concavity;
//! - [`scenario`] reads and checks scenario files; [`cli`] and [`report`]
//!   turn results into files.

// `!(a <= b)` is used on purpose: NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base_flow;
pub mod bifurcation;
pub mod cli;
pub mod dconcavity;
pub mod equilibria;
pub mod integrator;
pub mod model;
pub mod report;
pub mod scenario;

pub use base_flow::{BaseFlowSpec, BaseKind, BasePoint};
pub use bifurcation::{
    estimate_spectrum, locate_bifurcation, sweep, BifurcationDiagram, BifurcationPoint, Classification, Observable, PointKind,
};
pub use dconcavity::{classify_sdc, measure_positive_module, standardized_module, DcInterval};
pub use equilibria::{census, pullback_equilibrium, Hyperbolicity, MinimalSetReport, Side};
pub use integrator::{schwarzian, solve};
pub use model::{RhsModel, TrigPoly};
pub use scenario::{parse_scenario, validate_model, Family, NumericsConfig, Scenario};
