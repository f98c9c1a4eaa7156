//! Fixed workloads shared by the criterion benches.

use tikflow::experiments::FigurePreset;
use tikflow::{integrate, IntegratorConfig, Problem, Trajectory};

/// One `fig1` member: `q = 0.7`, `p = 1.2` on `quad:5,1` over `[1, t_end]`.
pub fn fig1_run(t_end: f64) -> Trajectory {
    let cfg = FigurePreset::Fig1.config(std::path::Path::new("unused"));
    let problem: Problem = cfg.problem.parse().expect("preset problem");
    let params = cfg.base_params(problem.dim());
    integrate(&problem, &params, t_end, &cfg.integrator).expect("preset integrates")
}

pub fn logsumexp() -> Problem {
    "logsumexp:preset-1".parse().expect("catalog problem")
}

pub fn loose_config() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-6,
        abs_tol: 1e-9,
        ..IntegratorConfig::default()
    }
}
