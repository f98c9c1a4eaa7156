//! Simulation and verification toolkit for the inertial gradient flow
//!
//! ```text
//! x''(t) + (alpha / t^q) x'(t) + grad g(x(t)) + (a / t^p) x(t) = 0,   x(t0) = u0, x'(t0) = v0
//! ```
//!
//! on convex objectives with known minimizers. The crate is split by role:
//!
//! * [`problem`]: closed catalog of convex objectives with exact gradients,
//!   optimal values and minimal-norm minimizers.
//! * [`dynamics`]: the first-order right-hand side and parameter validation.
//! * [`integrator`]: adaptive Dormand–Prince 5(4) with dense output sampled on
//!   a logarithmic time grid.
//! * [`tikhonov`]: the regularization path `x_t = argmin g + (a / 2t^p)|x|^2`.
//! * [`diagnostics`]: energy functionals, Grönwall checks, integral estimates,
//!   rate fits and the regime classifier.
//! * [`experiments`]: configuration, sweeps, figure presets, CSV and SVG output.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod linalg;
pub mod newton;
pub mod problem;
pub mod tikhonov;

pub use diagnostics::{
    classify_regime, ConvergenceMode, EnergyConfig, RateFit, Regime, RegimeReport,
};
pub use dynamics::{rhs, validate, FlowState, Params, ValidatedParams};
pub use error::{Error, Result};
pub use integrator::{integrate, IntegratorConfig, Sample, Trajectory};
pub use problem::{ArgminSet, Problem};
pub use tikhonov::{tikhonov_point, TikhonovPoint};
