//! Closed-form validation problems for the integrator.

use super::dopri::{self, OdeSystem, StepControl};
use super::{integrate, log_grid, IntegratorConfig};
use crate::dynamics::Params;
use crate::error::Result;
use crate::linalg;
use crate::problem::Problem;

/// `x'' = -(alpha / t) x'` on `y = (x, v)`. With `x(1) = 0`, `x'(1) = 1`:
/// `x'(t) = t^-alpha`, `x(t) = (1 - t^(1-alpha)) / (alpha - 1)`.
#[derive(Debug, Clone, Copy)]
pub struct DampedLinear {
    pub alpha: f64,
}

impl DampedLinear {
    pub fn exact(&self, t: f64) -> [f64; 2] {
        [
            (1.0 - t.powf(1.0 - self.alpha)) / (self.alpha - 1.0),
            t.powf(-self.alpha),
        ]
    }
}

impl OdeSystem for DampedLinear {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[1];
        dy[1] = -(self.alpha / t) * y[1];
        Ok(())
    }
}

/// Error of [`DampedLinear`] (`alpha = 3`) at `t_end` under an adaptive
/// configuration.
pub fn damped_linear_error(config: &IntegratorConfig, t_end: f64) -> f64 {
    let sys = DampedLinear { alpha: 3.0 };
    let c = config.resolved(1.0, t_end);
    let ctl = StepControl {
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        initial_step: c.initial_step.unwrap(),
        max_step: c.max_step.unwrap(),
        max_rhs_evals: c.max_rhs_evals,
    };
    let out = dopri::solve(&sys, 1.0, &[0.0, 1.0], &[t_end], ctl);
    match out.values.last() {
        Some(y) if out.halt.is_none() => (y[0] - sys.exact(t_end)[0]).abs(),
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone)]
pub struct OrderStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln h`.
    pub slope: f64,
}

/// Fixed-step global error of [`DampedLinear`] (`alpha = 3`) on `[1, t_end]`.
pub fn order_study(steps: &[f64], t_end: f64) -> Result<OrderStudy> {
    let sys = DampedLinear { alpha: 3.0 };
    let exact = sys.exact(t_end);
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let n = ((t_end - 1.0) / h).round() as usize;
        let y = dopri::fixed_step(&sys, 1.0, &[0.0, 1.0], h, n)?;
        errors.push(linalg::dist(&y, &exact));
    }
    let lx: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let slope = ls_slope(&lx, &ly);
    Ok(OrderStudy {
        steps: steps.to_vec(),
        errors,
        slope,
    })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone)]
pub struct SelfTestCase {
    pub name: &'static str,
    pub max_error: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct SelfTestReport {
    pub cases: Vec<SelfTestCase>,
    /// `(rel_tol, error)` for successively halved tolerances.
    pub tolerance_trend: Vec<(f64, f64)>,
    pub trend_monotone: bool,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.trend_monotone && self.cases.iter().all(|c| c.passed)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            s.push_str(&format!(
                "{}.max_error={:e}\n{}.threshold={:e}\n{}.passed={}\n",
                c.name, c.max_error, c.name, c.threshold, c.name, c.passed
            ));
        }
        for (tol, err) in &self.tolerance_trend {
            s.push_str(&format!("trend[rel_tol={tol:e}]={err:e}\n"));
        }
        s.push_str(&format!("trend_monotone={}\npassed={}\n", self.trend_monotone, self.passed()));
        s
    }
}

/// Runs the closed-form checks under default tolerances.
pub fn self_test() -> SelfTestReport {
    let cfg = IntegratorConfig::default();
    let mut cases = Vec::new();

    let quad = Problem::degenerate_quadratic(5.0, 1.0).expect("catalog member");
    let rest = Params::new(3.5, 0.7, 1.0, 1.2, 2).with_initial(1.0, vec![0.0; 2], vec![0.0; 2]);
    let eq_err = match integrate(&quad, &rest, 100.0, &cfg) {
        Ok(tr) => tr
            .samples
            .iter()
            .map(|s| linalg::norm(&s.state.x).max(linalg::norm(&s.state.v)))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    cases.push(case("equilibrium", eq_err, cfg.abs_tol));

    cases.push(case("damped_linear", damped_linear_error(&cfg, 100.0), 1e-8));

    cases.push(case(
        "shifted_quadratic_1d",
        shifted_reference_error(&cfg),
        100.0 * cfg.rel_tol,
    ));

    let tolerance_trend: Vec<(f64, f64)> = [1e-6, 5e-7, 2.5e-7]
        .iter()
        .map(|&tol| {
            let c = IntegratorConfig {
                rel_tol: tol,
                ..cfg.clone()
            };
            (tol, damped_linear_error(&c, 100.0))
        })
        .collect();
    let trend_monotone = tolerance_trend.windows(2).all(|w| w[1].1 < w[0].1);

    SelfTestReport {
        cases,
        tolerance_trend,
        trend_monotone,
    }
}

fn case(name: &'static str, max_error: f64, threshold: f64) -> SelfTestCase {
    SelfTestCase {
        name,
        max_error,
        threshold,
        passed: max_error <= threshold,
    }
}

/// `x'' + (3/t) x' + 2(x - 1) = 0` against a `rel_tol = 1e-12` reference,
/// maximum position error over the sample grid.
fn shifted_reference_error(cfg: &IntegratorConfig) -> f64 {
    let problem = Problem::shifted_quadratic(vec![1.0]).expect("catalog member");
    let params = Params::new(3.0, 1.0, 0.0, 1.0, 1).with_initial(1.0, vec![0.0], vec![0.0]);
    let reference_cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        ..cfg.clone()
    };
    let (Ok(run), Ok(reference)) = (
        integrate(&problem, &params, 100.0, cfg),
        integrate(&problem, &params, 100.0, &reference_cfg),
    ) else {
        return f64::INFINITY;
    };
    debug_assert_eq!(run.samples.len(), log_grid(1.0, 100.0, cfg.sample_points_per_decade).len());
    run.samples
        .iter()
        .zip(&reference.samples)
        .map(|(a, b)| (a.state.x[0] - b.state.x[0]).abs())
        .fold(0.0, f64::max)
}

/// Interval end for [`order_study`] used by the test suites.
pub const ORDER_STUDY_T_END: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_satisfies_the_ode() {
        let sys = DampedLinear { alpha: 3.0 };
        for t in [1.0, 2.5, 40.0] {
            let h = 1e-5 * t;
            let [x, v] = sys.exact(t);
            let [xp, vp] = sys.exact(t + h);
            let [xm, vm] = sys.exact(t - h);
            assert!(((xp - xm) / (2.0 * h) - v).abs() < 1e-8);
            assert!(((vp - vm) / (2.0 * h) + 3.0 / t * v).abs() < 1e-7);
            let _ = x;
        }
        assert_eq!(sys.exact(1.0), [0.0, 1.0]);
        assert!((sys.exact(100.0)[0] - 0.49995).abs() < 1e-15);
    }

    #[test]
    fn default_accuracy_on_damped_linear() {
        let err = damped_linear_error(&IntegratorConfig::default(), 100.0);
        assert!(err <= 1e-8, "{err:e}");
    }

    #[test]
    fn self_test_passes() {
        let r = self_test();
        assert!(r.passed(), "{}", r.to_key_value());
    }

    #[test]
    fn fifth_order_in_fixed_step_mode() {
        let s = order_study(&[0.1, 0.05, 0.025, 0.0125], ORDER_STUDY_T_END).unwrap();
        assert!((s.slope - 5.0).abs() <= 0.4, "{s:?}");
    }
}
