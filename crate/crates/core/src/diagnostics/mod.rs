//! Energy functionals, Grönwall checks, integral estimates, rate fits and the
//! regime classifier.

pub mod energy;
pub mod gronwall;
pub mod integral;
pub mod limit;
pub mod rates;
pub mod regime;

pub use energy::{energy_e, energy_e_strong, energy_e_with_b, energy_w, EnergyConfig};
pub use gronwall::{check_gronwall, GronwallReport};
pub use integral::{integral_estimate, integral_estimate_series, IntegralEstimate, Quantity};
pub use limit::{limit_stabilization, LimitReport};
pub use rates::{fit_rate, RateFit};
pub use regime::{classify_regime, ConvergenceMode, Regime, RegimeReport};
