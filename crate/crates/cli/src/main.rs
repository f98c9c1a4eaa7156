use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tikflow::experiments::{
    self, exit_code_for, figures, ExperimentConfig, FigurePreset, RunOutcome, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK,
};
use tikflow::integrator::self_test;
use tikflow::{classify_regime, Error, Params};

/// Simulate and verify inertial gradient flows with vanishing damping and
/// Tikhonov regularization.
#[derive(Parser)]
#[command(name = "tikflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one parameter set and write its trajectory and report.
    Simulate(RunArgs),
    /// Integrate every value of a swept parameter.
    Sweep(RunArgs),
    /// Print the regime and guaranteed rates for a parameter set.
    Classify(ClassifyArgs),
    /// Reproduce a figure preset and check its qualitative findings.
    Figures(FigureArgs),
    /// Run the integrator's closed-form validation problems.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem id: quad:m,n | shifted:c1,c2,... | logsumexp:preset-k
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long = "t-end")]
    t_end: Option<String>,
    /// Initial position, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial velocity, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<String>,
    #[arg(long = "abs-tol")]
    abs_tol: Option<String>,
    #[arg(long = "max-step")]
    max_step: Option<String>,
    #[arg(long = "points-per-decade")]
    points_per_decade: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv, svg or csv,svg
    #[arg(long)]
    format: Option<String>,
    /// name=v1,v2,... with name one of q, p, a, alpha
    #[arg(long)]
    sweep: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("problem", &self.problem),
            ("alpha", &self.alpha),
            ("q", &self.q),
            ("a", &self.a),
            ("p", &self.p),
            ("t0", &self.t0),
            ("t_end", &self.t_end),
            ("x0", &self.x0),
            ("v0", &self.v0),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("max_step", &self.max_step),
            ("points_per_decade", &self.points_per_decade),
            ("out", &self.out),
            ("format", &self.format),
            ("sweep", &self.sweep),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn resolve(&self) -> tikflow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::from_text(&text)?
            }
            None => ExperimentConfig::default(),
        };
        cfg.apply_pairs(&self.pairs())?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, default_value_t = 3.5)]
    alpha: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    p: f64,
}

#[derive(Args)]
struct FigureArgs {
    /// fig1 (damping sweep) or fig2 (Tikhonov exponent sweep)
    #[arg(long)]
    preset: String,
    #[arg(long, default_value = "figures")]
    out: PathBuf,
}

fn summarize(outcome: &RunOutcome) {
    for r in &outcome.records {
        match &r.result {
            Ok(s) => {
                let last = s.trajectory.last();
                println!(
                    "{}: {} | final t={} value_gap={:e} speed={:e} dist_to_xstar={:e}",
                    r.label,
                    s.annotation,
                    last.t(),
                    last.value_gap,
                    last.speed,
                    last.dist_to_xstar
                );
            }
            Err(e) => println!("{}: FAILED {e}", r.label),
        }
    }
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
}

fn execute(cli: Cli) -> tikflow::Result<i32> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            if cfg.sweep.is_some() {
                return Err(Error::Config("simulate takes no sweep; use the sweep subcommand".into()));
            }
            let outcome = experiments::run(&cfg)?;
            if let Some(Ok(s)) = outcome.records.first().map(|r| &r.result) {
                print!("{}", s.report);
            }
            summarize(&outcome);
            Ok(outcome.exit_code())
        }
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            if cfg.sweep.is_none() {
                return Err(Error::Config("sweep needs --sweep name=v1,v2,... or a sweep key".into()));
            }
            let outcome = experiments::run(&cfg)?;
            summarize(&outcome);
            Ok(outcome.exit_code())
        }
        Command::Classify(args) => {
            let params = Params::new(args.alpha, args.q, args.a, args.p, 1);
            params.check_structure()?;
            print!("{}", classify_regime(&params).to_key_value());
            Ok(EXIT_OK)
        }
        Command::Figures(args) => {
            let preset: FigurePreset = args.preset.parse()?;
            let report = figures(preset, &args.out)?;
            print!("{}", report.to_key_value());
            for a in &report.outcome.artifacts {
                println!("wrote {}", a.display());
            }
            Ok(report.exit_code())
        }
        Command::Selftest => {
            let report = self_test();
            print!("{}", report.to_key_value());
            Ok(if report.passed() { EXIT_OK } else { EXIT_ASSERTION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
