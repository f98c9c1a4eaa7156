//! Adaptive integration of the flow, sampled on a logarithmic time grid.

pub mod dopri;
pub mod validation;

pub use dopri::{fixed_step, OdeSystem, Stats};
pub use validation::{order_study, self_test, DampedLinear, OrderStudy, SelfTestCase, SelfTestReport};

use crate::dynamics::{self, FlowState, Params};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::Problem;
use dopri::{Halt, StepControl};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` means `1e-4 * t0`.
    pub initial_step: Option<f64>,
    /// `None` means `(t_end - t0) / 10`.
    pub max_step: Option<f64>,
    pub max_rhs_evals: u64,
    pub sample_points_per_decade: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            initial_step: None,
            max_step: None,
            max_rhs_evals: 50_000_000,
            sample_points_per_decade: 200,
        }
    }
}

impl IntegratorConfig {
    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.rel_tol >= 1e-14 && self.rel_tol.is_finite()) {
            return bad(format!("rel_tol must be >= 1e-14 (got {})", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad(format!("abs_tol must be > 0 (got {})", self.abs_tol));
        }
        for (name, v) in [("initial_step", self.initial_step), ("max_step", self.max_step)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be > 0 (got {v})"));
                }
            }
        }
        if self.max_rhs_evals == 0 {
            return bad("max_rhs_evals must be > 0".into());
        }
        if self.sample_points_per_decade == 0 {
            return bad("sample_points_per_decade must be > 0".into());
        }
        Ok(())
    }

    /// Configuration with the step defaults filled in for `[t0, t_end]`.
    pub fn resolved(&self, t0: f64, t_end: f64) -> Self {
        let mut c = self.clone();
        c.initial_step.get_or_insert(1e-4 * t0);
        c.max_step.get_or_insert((t_end - t0) / 10.0);
        c
    }
}

/// Log-spaced grid: `round(ppd * log10(t_end / t0))` intervals, both
/// endpoints exact.
pub fn log_grid(t0: f64, t_end: f64, points_per_decade: u32) -> Vec<f64> {
    let decades = (t_end / t0).log10();
    let k = ((points_per_decade as f64 * decades).round() as usize).max(1);
    let ratio = t_end / t0;
    let mut grid: Vec<f64> = (0..=k)
        .map(|i| t0 * ratio.powf(i as f64 / k as f64))
        .collect();
    grid[0] = t0;
    grid[k] = t_end;
    grid
}

/// One grid sample with its error measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: FlowState,
    /// `g(x) - g*`
    pub value_gap: f64,
    /// `|x'|`
    pub speed: f64,
    /// `|x - x*|`
    pub dist_to_xstar: f64,
}

impl Sample {
    pub fn new(state: FlowState, problem: &Problem) -> Self {
        Self {
            value_gap: problem.value_gap(&state.x),
            speed: linalg::norm(&state.v),
            dist_to_xstar: linalg::dist(&state.x, problem.x_star()),
            state,
        }
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub stats: Stats,
    /// Resolved configuration.
    pub config: IntegratorConfig,
    pub params: Params,
    pub problem_id: String,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: Metadata,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::t).collect()
    }

    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// Sample closest to `t` in log distance.
    pub fn at(&self, t: f64) -> &Sample {
        self.samples
            .iter()
            .min_by(|a, b| {
                let da = (a.t() / t).ln().abs();
                let db = (b.t() / t).ln().abs();
                da.total_cmp(&db)
            })
            .expect("trajectory has at least one sample")
    }
}

/// The flow as a first-order system on `y = (x, v)`.
pub struct FlowSystem<'a> {
    pub params: &'a Params,
    pub problem: &'a Problem,
}

impl OdeSystem for FlowSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.problem.dim()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let d = self.problem.dim();
        let (x, v) = y.split_at(d);
        let (dx, dv) = dy.split_at_mut(d);
        dynamics::rhs_into(t, x, v, self.params, self.problem, dx, dv)
    }
}

/// Integrates the flow from `params.t0` to `t_end`.
pub fn integrate(
    problem: &Problem,
    params: &Params,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    dynamics::validate(params, problem)?;
    config.check()?;
    if !(t_end > params.t0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "t_end must exceed t0 = {} (got {t_end})",
            params.t0
        )));
    }
    let config = config.resolved(params.t0, t_end);
    let ctl = StepControl {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        initial_step: config.initial_step.unwrap(),
        max_step: config.max_step.unwrap(),
        max_rhs_evals: config.max_rhs_evals,
    };

    let grid = log_grid(params.t0, t_end, config.sample_points_per_decade);
    let y0: Vec<f64> = params.u0.iter().chain(&params.v0).copied().collect();
    let sys = FlowSystem { params, problem };
    let dense = dopri::solve(&sys, params.t0, &y0, &grid, ctl);

    let d = problem.dim();
    let samples = dense
        .times
        .iter()
        .zip(&dense.values)
        .map(|(&t, y)| {
            Sample::new(
                FlowState {
                    t,
                    x: y[..d].to_vec(),
                    v: y[d..].to_vec(),
                },
                problem,
            )
        })
        .collect();
    let traj = Trajectory {
        samples,
        meta: Metadata {
            stats: dense.stats,
            config: config.clone(),
            params: params.clone(),
            problem_id: problem.id().to_string(),
            t_end,
        },
    };

    match dense.halt {
        None => Ok(traj),
        Some(Halt::Rhs(e)) => Err(e),
        Some(Halt::Budget { reached }) => Err(Error::BudgetExhausted {
            budget: config.max_rhs_evals,
            reached,
            partial: Box::new(traj),
        }),
        Some(Halt::NonFinite { t, y }) => Err(Error::NonFiniteState {
            last_good: Box::new(FlowState {
                t,
                x: y[..d].to_vec(),
                v: y[d..].to_vec(),
            }),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::energy_w;

    fn quad() -> Problem {
        Problem::degenerate_quadratic(5.0, 1.0).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(1.0, 100.0, 200);
        assert_eq!(g.len(), 401);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[400], 100.0);
        assert!((g[200] - 10.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_grid(1.0, 1.5, 10).len(), 3);
    }

    #[test]
    fn equilibrium_stays_put() {
        let p = quad();
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2).with_initial(1.0, vec![0.0; 2], vec![0.0; 2]);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&p, &params, 100.0, &cfg).unwrap();
        for s in &traj.samples {
            assert!(linalg::norm(&s.state.x) <= cfg.abs_tol);
            assert!(linalg::norm(&s.state.v) <= cfg.abs_tol);
        }
    }

    #[test]
    fn reference_run_decays() {
        let p = quad();
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let traj = integrate(&p, &params, 100.0, &IntegratorConfig::default()).unwrap();
        let first = &traj.samples[0];
        let last = traj.last();
        assert_eq!(first.t(), 1.0);
        assert_eq!(last.t(), 100.0);
        assert!(last.dist_to_xstar < 1e-2 * first.dist_to_xstar);
        assert!(last.value_gap < 1e-6 * first.value_gap);
        assert!(traj.samples.iter().all(|s| s.value_gap >= -1e-10 && s.state.is_finite()));
        assert!(traj.times().windows(2).all(|w| w[0] < w[1]));
        let m = &traj.meta;
        assert!(m.stats.accepted_steps > 0);
        assert_eq!(m.problem_id, "quad:5,1");
        assert_eq!(m.config.max_step, Some(9.9));
    }

    #[test]
    fn w_is_non_increasing() {
        let p = quad();
        for q in [0.3, 0.7, 1.0] {
            let params = Params::new(3.5, q, 1.0, 1.2, 2);
            let traj = integrate(&p, &params, 100.0, &IntegratorConfig::default()).unwrap();
            let w = traj.series(|s| energy_w(&s.state, &params, &p));
            for pair in w.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-8 * (1.0 + pair[0].abs()), "q={q}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let p = Problem::logsumexp_preset(2).unwrap();
        let params = Params::new(3.5, 0.5, 1.0, 1.0, 2);
        let cfg = IntegratorConfig::default();
        let a = integrate(&p, &params, 50.0, &cfg).unwrap();
        let b = integrate(&p, &params, 50.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_error_carries_partial_trajectory() {
        let p = quad();
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let cfg = IntegratorConfig {
            max_rhs_evals: 200,
            ..IntegratorConfig::default()
        };
        match integrate(&p, &params, 100.0, &cfg) {
            Err(Error::BudgetExhausted { reached, partial, .. }) => {
                assert!(reached > 1.0 && reached < 100.0);
                assert!(partial.samples.iter().all(|s| s.t() <= reached));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = quad();
        let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
        let cfg = IntegratorConfig::default();
        assert!(matches!(integrate(&p, &params, 1.0, &cfg), Err(Error::InvalidConfig(_))));
        let bad = IntegratorConfig {
            rel_tol: 1e-15,
            ..cfg.clone()
        };
        assert!(matches!(integrate(&p, &params, 10.0, &bad), Err(Error::InvalidConfig(_))));
        let wrong_dim = Params::new(3.5, 0.7, 1.0, 1.2, 3);
        assert!(matches!(integrate(&p, &wrong_dim, 10.0, &cfg), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn blow_up_reports_last_good_state() {
        // push the state out of the finite range within one step
        let p = Problem::shifted_quadratic(vec![0.0]).unwrap();
        let params = Params::new(1.0, 1.0, 0.0, 1.0, 1).with_initial(1.0, vec![1e300], vec![1e308]);
        let cfg = IntegratorConfig::default();
        match integrate(&p, &params, 10.0, &cfg) {
            Err(Error::NonFiniteState { last_good }) => assert!(last_good.is_finite()),
            Err(Error::NonFiniteGradient { t }) => assert!(t >= 1.0),
            other => panic!("{other:?}"),
        }
    }
}
