//! Configured runs, sweeps, figure presets and their file artifacts.

pub mod config;
pub mod figures;
pub mod output;

pub use config::{ExperimentConfig, Formats, Sweep, SweepAxis};
pub use figures::{figures, Finding, FigurePreset, FigureReport};

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::diagnostics::{
    check_gronwall, fit_rate, limit_stabilization, EnergyConfig, RateFit, RegimeReport,
};
use crate::dynamics::{validate, Params};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Trajectory};
use crate::problem::Problem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INTEGRATION: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

/// Exit code for an error that aborted a run before any integration.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NonFiniteGradient { .. }
        | Error::NonFiniteState { .. }
        | Error::BudgetExhausted { .. }
        | Error::NewtonFailed { .. } => EXIT_INTEGRATION,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trajectory: Trajectory,
    pub regime: RegimeReport,
    pub annotation: String,
    pub value_fit: Option<RateFit>,
    pub speed_fit: Option<RateFit>,
    /// `key=value` diagnostics block.
    pub report: String,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    /// `q=0.3` for sweeps, `run` otherwise.
    pub label: String,
    pub value: Option<f64>,
    pub params: Params,
    pub result: std::result::Result<RunSummary, String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn any_failed(&self) -> bool {
        self.records.iter().any(|r| r.result.is_err())
    }

    pub fn exit_code(&self) -> i32 {
        if self.any_failed() {
            EXIT_INTEGRATION
        } else {
            EXIT_OK
        }
    }
}

/// Fit window: the final two decades when available, else the whole run.
pub fn tail_window(t0: f64, t_end: f64) -> (f64, f64) {
    if t_end / t0 >= 100.0 {
        (t_end / 100.0, t_end)
    } else {
        (t0, t_end)
    }
}

/// Integrates one parameter set and collects its diagnostics.
pub fn run_single(problem: &Problem, params: &Params, cfg: &ExperimentConfig) -> Result<RunSummary> {
    let validated = validate(params, problem)?;
    let traj = integrate(problem, params, cfg.t_end, &cfg.integrator)?;
    let regime = validated.regime().clone();
    let annotation = validated.annotation();

    let t = traj.times();
    let window = tail_window(params.t0, cfg.t_end);
    let value_fit = fit_rate(&t, &traj.series(|s| s.value_gap), window).ok();
    let speed_fit = fit_rate(&t, &traj.series(|s| s.speed), window).ok();

    let mut report = String::new();
    report.push_str(&format!("problem={}\n", problem.id()));
    report.push_str(&format!(
        "alpha={}\nq={}\na={}\np={}\nt0={}\nt_end={}\n",
        params.alpha, params.q, params.a, params.p, params.t0, cfg.t_end
    ));
    report.push_str(&format!("annotation={annotation}\n"));
    report.push_str(&regime.to_key_value());
    let stats = traj.meta.stats;
    report.push_str(&format!(
        "accepted_steps={}\nrejected_steps={}\nrhs_evals={}\n",
        stats.accepted_steps, stats.rejected_steps, stats.rhs_evals
    ));
    let last = traj.last();
    report.push_str(&format!(
        "final.value_gap={:e}\nfinal.speed={:e}\nfinal.dist_to_xstar={:e}\n",
        last.value_gap, last.speed, last.dist_to_xstar
    ));
    report.push_str(&format!("fit.window={},{}\n", window.0, window.1));
    for (name, fit, guaranteed) in [
        ("value", &value_fit, regime.value_rate_exponent),
        ("speed", &speed_fit, regime.velocity_rate_exponent),
    ] {
        match fit {
            Some(f) => report.push_str(&format!(
                "fit.{name}.slope={}\nfit.{name}.residual_rms={:e}\nfit.{name}.n_points={}\nfit.{name}.guaranteed_exponent={}\n",
                f.slope, f.residual_rms, f.n_points, guaranteed
            )),
            None => report.push_str(&format!("fit.{name}.slope=unavailable\n")),
        }
    }
    if let Ok(ecfg) = EnergyConfig::default_for(params) {
        report.push_str(&format!("energy.b={}\nenergy.K={}\nenergy.r={}\n", ecfg.b, ecfg.k, ecfg.r()));
        report.push_str(&check_gronwall(&traj, params, problem, &ecfg).to_key_value());
    }
    let reference = problem.nearest_declared_minimizer(&last.state.x).to_vec();
    let lim = limit_stabilization(&traj, &reference);
    report.push_str(&format!(
        "limit.reference={:?}\nlimit.osc={:e}\nlimit.final={:e}\nlimit.stabilized={}\n",
        reference, lim.osc, lim.final_value, lim.stabilized
    ));

    Ok(RunSummary {
        trajectory: traj,
        regime,
        annotation,
        value_fit,
        speed_fit,
        report,
    })
}

fn value_label(v: f64) -> String {
    format!("{v}")
}

/// Runs the configuration (every sweep value in parallel) and writes the
/// artifacts from a single collector.
///
/// Configuration problems are returned as errors. Integration failures are
/// recorded per value.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let problem: Problem = cfg.problem.parse()?;
    let base = cfg.base_params(problem.dim());
    cfg.integrator.check()?;
    if !(cfg.t_end > cfg.t0) {
        return Err(Error::Config(format!("t_end must exceed t0 = {} (got {})", cfg.t0, cfg.t_end)));
    }

    let jobs: Vec<(String, Option<f64>, Params)> = match &cfg.sweep {
        None => vec![("run".into(), None, base)],
        Some(sweep) => {
            if sweep.values.is_empty() {
                return Err(Error::Config(format!("sweep over {} has no values", sweep.axis)));
            }
            sweep
                .values
                .iter()
                .map(|&v| {
                    let mut p = base.clone();
                    sweep.axis.apply(&mut p, v);
                    (format!("{}={}", sweep.axis, value_label(v)), Some(v), p)
                })
                .collect()
        }
    };
    for (label, _, p) in &jobs {
        validate(p, &problem).map_err(|e| Error::Config(format!("{label}: {e}")))?;
    }
    fs::create_dir_all(&cfg.out)?;

    let records: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(label, value, params)| {
            let result = run_single(&problem, &params, cfg).map_err(|e| e.to_string());
            RunRecord {
                label,
                value,
                params,
                result,
            }
        })
        .collect();

    let artifacts = write_artifacts(cfg, &problem, &records)?;
    Ok(RunOutcome { records, artifacts })
}

fn write(path: PathBuf, contents: &str, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents)?;
    artifacts.push(path);
    Ok(())
}

fn stem(cfg: &ExperimentConfig, record: &RunRecord) -> String {
    match (&cfg.sweep, record.value) {
        (Some(s), Some(v)) => format!("{}_{}", s.axis, value_label(v)),
        _ => "run".into(),
    }
}

fn write_artifacts(cfg: &ExperimentConfig, problem: &Problem, records: &[RunRecord]) -> Result<Vec<PathBuf>> {
    let dir: &Path = &cfg.out;
    let mut artifacts = Vec::new();
    for r in records {
        let stem = stem(cfg, r);
        match &r.result {
            Ok(sum) => {
                if cfg.formats.csv {
                    write(
                        dir.join(format!("trajectory_{stem}.csv")),
                        &output::trajectory_csv(&sum.trajectory, problem),
                        &mut artifacts,
                    )?;
                }
                write(dir.join(format!("report_{stem}.txt")), &sum.report, &mut artifacts)?;
            }
            Err(msg) => {
                write(
                    dir.join(format!("report_{stem}.txt")),
                    &format!("problem={}\nlabel={}\nstatus=failed\nerror={msg}\n", problem.id(), r.label),
                    &mut artifacts,
                )?;
            }
        }
    }

    let done: Vec<(String, &Trajectory)> = records
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|s| (r.label.clone(), &s.trajectory)))
        .collect();
    let prefix = match &cfg.sweep {
        Some(s) => format!("sweep_{}", s.axis),
        None => "run".into(),
    };
    if cfg.sweep.is_some() && cfg.formats.csv {
        write(dir.join(format!("{prefix}.csv")), &output::comparison_csv(&done), &mut artifacts)?;
    }
    if cfg.formats.svg {
        let log_x = cfg.t_end / cfg.t0 >= 1e3;
        for (name, title, pick) in [
            ("dist", "|x(t) - x*|", (|s: &crate::integrator::Sample| s.dist_to_xstar) as fn(&_) -> f64),
            ("gap", "g(x(t)) - min g", |s: &crate::integrator::Sample| s.value_gap),
        ] {
            let series: Vec<(String, Vec<(f64, f64)>)> = done
                .iter()
                .map(|(label, t)| (label.clone(), t.samples.iter().map(|s| (s.t(), pick(s))).collect()))
                .collect();
            let svg = output::line_chart_svg(&format!("{title} on {}", problem.id()), title, &series, log_x);
            write(dir.join(format!("{prefix}_{name}.svg")), &svg, &mut artifacts)?;
        }
    }
    Ok(artifacts)
}
