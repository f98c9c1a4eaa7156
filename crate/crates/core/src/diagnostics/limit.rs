//! Stabilization of the distance to a reference point.

use crate::integrator::Trajectory;
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    /// `max - min` of `|x(t) - reference|` over `[t_end / 10, t_end]`.
    pub osc: f64,
    pub final_value: f64,
    /// `osc < 0.05 (1 + final_value)`
    pub stabilized: bool,
}

pub fn limit_stabilization(traj: &Trajectory, reference: &[f64]) -> LimitReport {
    let t_end = traj.last().t();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in traj.samples.iter().filter(|s| s.t() >= t_end / 10.0) {
        let d = linalg::dist(&s.state.x, reference);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let osc = hi - lo;
    let final_value = linalg::dist(&traj.last().state.x, reference);
    LimitReport {
        osc,
        final_value,
        stabilized: osc < 0.05 * (1.0 + final_value),
    }
}
