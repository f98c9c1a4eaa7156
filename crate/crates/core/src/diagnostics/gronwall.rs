//! Discrete check of `E' + (K / t^r) E <= (a b / 2) t^(q-p) |x*|^2`.

use super::energy::{energy_e, EnergyConfig};
use crate::dynamics::Params;
use crate::integrator::Trajectory;
use crate::linalg;
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallPoint {
    pub t: f64,
    pub energy: f64,
    pub derivative: f64,
    /// `E' + (K / t^r) E`
    pub lhs: f64,
    /// `(a b / 2) t^(q-p) |x*|^2`
    pub rhs: f64,
    pub slack: f64,
}

impl GronwallPoint {
    /// Positive when violated.
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs - self.slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub points: Vec<GronwallPoint>,
    /// Earliest time from which every checked point satisfies the inequality.
    pub onset_t1: Option<f64>,
    /// The onset exists and leaves at least the final decade certified.
    pub holds: bool,
    /// Largest margin over all checked points and where it occurs.
    pub worst_margin: f64,
    pub worst_time: f64,
    /// Latest violating point, if any.
    pub last_violation: Option<(f64, f64)>,
}

impl GronwallReport {
    pub fn to_key_value(&self) -> String {
        let mut s = format!(
            "gronwall.holds={}\ngronwall.onset_t1={}\ngronwall.worst_margin={:e}\ngronwall.worst_time={}\n",
            self.holds,
            self.onset_t1.map_or("none".into(), |t| t.to_string()),
            self.worst_margin,
            self.worst_time
        );
        if let Some((t, m)) = self.last_violation {
            s.push_str(&format!("gronwall.last_violation_t={t}\ngronwall.last_violation_margin={m:e}\n"));
        }
        s
    }
}

/// Central differences of `E` over the samples. Slack per point is
/// `10 h^2 |E'''| + 1e-8 (1 + |E|)` with `E'''` from the third divided
/// difference.
pub fn check_gronwall(
    traj: &Trajectory,
    params: &Params,
    problem: &Problem,
    cfg: &EnergyConfig,
) -> GronwallReport {
    let t = traj.times();
    let e: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| energy_e(&s.state, params, problem, cfg))
        .collect();
    let n = t.len();
    let xs2 = linalg::norm_sq(problem.x_star());
    let mut points = Vec::with_capacity(n.saturating_sub(2));

    if n >= 4 {
        for i in 1..n - 1 {
            let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            let derivative = -hp / (hm * (hm + hp)) * e[i - 1]
                + (hp - hm) / (hm * hp) * e[i]
                + hm / (hp * (hm + hp)) * e[i + 1];
            let j = if i + 2 < n { i - 1 } else { i - 2 };
            let third = 6.0 * divided_difference(&t[j..j + 4], &e[j..j + 4]);
            let h = hm.max(hp);
            let slack = 10.0 * h * h * third.abs() + 1e-8 * (1.0 + e[i].abs());
            let lhs = derivative + cfg.k / t[i].powf(cfg.r()) * e[i];
            let rhs = 0.5 * params.a * cfg.b * t[i].powf(params.q - params.p) * xs2;
            points.push(GronwallPoint {
                t: t[i],
                energy: e[i],
                derivative,
                lhs,
                rhs,
                slack,
            });
        }
    }

    let last_bad = points.iter().rposition(|pt| pt.margin() > 0.0);
    let onset_t1 = match last_bad {
        None => points.first().map(|pt| pt.t),
        Some(k) => points.get(k + 1).map(|pt| pt.t),
    };
    let t_end = t.last().copied().unwrap_or(0.0);
    let holds = onset_t1.is_some_and(|t1| t1 <= t_end / 10.0);
    let (worst_time, worst_margin) = points
        .iter()
        .map(|pt| (pt.t, pt.margin()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, f64::NEG_INFINITY));
    let last_violation = last_bad.map(|k| (points[k].t, points[k].margin()));

    GronwallReport {
        points,
        onset_t1,
        holds,
        worst_margin,
        worst_time,
        last_violation,
    }
}

/// Newton divided difference `f[t_0, ..., t_k]`.
fn divided_difference(t: &[f64], f: &[f64]) -> f64 {
    let mut c = f.to_vec();
    for level in 1..t.len() {
        for i in (level..t.len()).rev() {
            c[i] = (c[i] - c[i - 1]) / (t[i] - t[i - level]);
        }
    }
    c[t.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegratorConfig};

    #[test]
    fn divided_difference_of_cubic() {
        let t = [1.0, 1.3, 2.0, 3.5];
        let f: Vec<f64> = t.iter().map(|x: &f64| 2.0 * x.powi(3) - x + 4.0).collect();
        assert!((divided_difference(&t, &f) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_quadratic_has_zero_forcing() {
        let p = Problem::degenerate_quadratic(5.0, 1.0).unwrap();
        let params = Params::new(3.5, 0.5, 1.0, 1.0, 2);
        let cfg = EnergyConfig::default_for(&params).unwrap();
        let traj = integrate(&p, &params, 1e3, &IntegratorConfig::default().with_max_step(0.05)).unwrap();
        let r = check_gronwall(&traj, &params, &p, &cfg);
        assert!(r.points.iter().all(|pt| pt.rhs == 0.0));
        assert!(r.holds, "{}", r.to_key_value());
    }

    #[test]
    fn shifted_quadratic_holds_and_oversized_k_is_flagged() {
        let p = Problem::shifted_quadratic(vec![2.0, 0.0]).unwrap();
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let cfg = EnergyConfig::default_for(&params).unwrap();
        let traj = integrate(&p, &params, 1e3, &IntegratorConfig::default().with_max_step(0.05)).unwrap();
        let ok = check_gronwall(&traj, &params, &p, &cfg);
        assert!(ok.holds, "{}", ok.to_key_value());

        let cap = EnergyConfig::k_cap(&params, cfg.b).unwrap();
        let big = EnergyConfig::new(cfg.b, 10.0 * cap, &params).unwrap();
        let bad = check_gronwall(&traj, &params, &p, &big);
        assert!(!bad.holds);
        assert!(bad.worst_margin > 0.0);
    }
}
