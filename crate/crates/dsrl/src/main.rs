use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dsrl::geometry::{generate_network, reference_params, sample_in_cube};
use dsrl::harness::{
    run_sweep, ExperimentConfig, HarnessError, RunConfig, ScenarioConfig, ScenarioKind,
    ScheduleConfig, SolverKind, SweepRange, DEFAULT_L2_STEP0,
};
use dsrl::measurement::true_ranges;
use dsrl::point::Point;
use dsrl::report::{self, SolverTrace};
use dsrl::rng::{self, purpose};
use dsrl::solver::dsrl_run;
use dsrl::{baselines, diagnostics};

#[derive(Parser)]
#[command(
    name = "dsrl",
    version,
    about = "Distributed robust source localization simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single instance and write its full solver traces.
    Simulate(RunArgs),
    /// Run a parameter sweep with multi-trial averaging.
    Sweep(RunArgs),
    /// Run the built-in invariant suites and report pass/fail.
    Validate {
        /// Seed for the random checks.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Write the three reference scenario configs (outlier, Laplace mixture,
    /// Cauchy) into a directory.
    Presets {
        /// Output directory for the config files.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the config's iteration count.
    #[arg(long)]
    iters: Option<usize>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's solver list (comma separated).
    #[arg(long, value_delimiter = ',')]
    solvers: Option<Vec<SolverKind>>,
    /// Share one network across all trials.
    #[arg(long)]
    fixed_network: bool,
    /// Reject schedules violating the decay conditions.
    #[arg(long)]
    strict_schedule: bool,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.run.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.run.trials = trials;
        }
        if let Some(iters) = self.iters {
            cfg.run.iterations = iters;
        }
        if let Some(out) = &self.out {
            cfg.run.output_dir = out.clone();
        }
        if let Some(solvers) = &self.solvers {
            cfg.run.solvers = solvers.clone();
        }
        if self.fixed_network {
            cfg.run.fixed_network = true;
        }
        if self.strict_schedule {
            cfg.schedule.strict = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Validate { seed } => return validate(seed),
        Command::Presets { out } => presets(&out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn worker_threads() -> Result<usize, HarnessError> {
    match std::env::var("DSRL_THREADS") {
        Ok(v) => v.parse().map_err(|_| {
            HarnessError::ConfigInvalid(format!(
                "DSRL_THREADS: expected a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn sweep(args: &RunArgs) -> Result<(), HarnessError> {
    let cfg = args.load()?;
    let threads = worker_threads()?;
    let result = run_sweep(&cfg, threads)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for (msg, n) in &result.failures {
        eprintln!("warning: {n} trial(s) failed: {msg}");
    }
    let out_dir = cfg.run.output_dir.clone();
    let files = report::write_sweep_outputs(&result, &out_dir)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

/// One instance at the sweep start value, traced per iteration for every
/// selected solver. Uses the same streams as sweep trial (0, 0), so a
/// simulate run reproduces the first trial of the corresponding sweep.
fn simulate(args: &RunArgs) -> Result<(), HarnessError> {
    let cfg = args.load()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let master = cfg.run.master_seed;
    let iters = cfg.run.iterations;
    let schedule = cfg.schedule.build()?;

    let net_seed = if cfg.run.fixed_network {
        rng::derive_seed(master, &[purpose::FIXED_NETWORK])
    } else {
        rng::derive_seed(master, &[0, 0, purpose::NETWORK])
    };
    let net = generate_network(net_seed, &cfg.network)
        .map_err(|e| HarnessError::ConfigInvalid(format!("network: {e}")))?;

    let dim = cfg.network.dimension;
    let hw = cfg.network.half_width;
    let target = sample_in_cube(&mut rng::stream(master, &[0, 0, purpose::TARGET]), dim, hw);
    let exact = true_ranges(&net, &target)
        .map_err(|e| HarnessError::ConfigInvalid(format!("scenario: {e}")))?;
    let sweep_value = cfg.scenario.sweep.start;
    let measurements = cfg
        .scenario
        .at(sweep_value)
        .apply(&exact, &mut rng::stream(master, &[0, 0, purpose::NOISE]));

    let mut traces = Vec::new();
    for &kind in &cfg.run.solvers {
        let rows = match kind {
            SolverKind::Dsrl => {
                let mut init_rng = rng::stream(master, &[0, 0, purpose::INIT]);
                let init: Vec<Point> = (0..net.len())
                    .map(|_| sample_in_cube(&mut init_rng, dim, hw))
                    .collect();
                let trace = dsrl_run(
                    &net,
                    &measurements,
                    &schedule,
                    iters,
                    init,
                    Some(&target),
                    iters.max(1),
                )
                .map_err(|e| HarnessError::ConfigInvalid(format!("dsrl: {e}")))?;
                trace
                    .records
                    .iter()
                    .map(|r| (r.iteration, r.objective, r.rmse, Some(r.disagreement)))
                    .collect()
            }
            SolverKind::CentralizedL1 | SolverKind::CentralizedL2 => {
                let init = sample_in_cube(
                    &mut rng::stream(master, &[0, 0, purpose::BASELINE_INIT]),
                    dim,
                    hw,
                );
                let res = match kind {
                    SolverKind::CentralizedL1 => baselines::centralized_l1_subgradient(
                        &net,
                        &measurements,
                        &schedule,
                        iters,
                        init,
                    ),
                    _ => baselines::centralized_l2_descent(
                        &net,
                        &measurements,
                        DEFAULT_L2_STEP0,
                        iters,
                        init,
                    ),
                }
                .map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", kind.label())))?;
                res.objective_trace
                    .iter()
                    .enumerate()
                    .map(|(i, &obj)| (i + 1, obj, None, None))
                    .collect()
            }
        };
        traces.push(SolverTrace { solver: kind, rows });
    }

    let out_dir = cfg.run.output_dir.clone();
    let files = report::write_simulate_outputs(
        &cfg,
        &cfg.warnings(),
        &net.to_json_string(),
        &measurements,
        &traces,
        &out_dir,
    )?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn validate(seed: u64) -> ExitCode {
    let reports = diagnostics::run_all(seed);
    let mut all_ok = true;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {} - {}", r.name, r.detail);
        all_ok &= r.passed;
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn reference_schedule_config() -> ScheduleConfig {
    ScheduleConfig {
        a: 0.3,
        tau_alpha: 0.55,
        b: 3.5,
        tau_beta: 0.5,
        strict: false,
    }
}

fn reference_run_config(out: &str) -> RunConfig {
    RunConfig {
        // The step size has decayed below 1% of its initial value by 1e4
        // iterations (3.5 / sqrt(k)).
        iterations: 10_000,
        trials: 1000,
        master_seed: 42,
        solvers: vec![
            SolverKind::Dsrl,
            SolverKind::CentralizedL1,
            SolverKind::CentralizedL2,
        ],
        output_dir: PathBuf::from(out),
        fixed_network: false,
    }
}

/// The three reference experiment configs: uniform outliers swept over p,
/// the Laplace mixture swept over sigma, and Cauchy noise swept over gamma.
fn preset_configs() -> Vec<(&'static str, ExperimentConfig)> {
    let blank = ScenarioConfig {
        kind: ScenarioKind::Noiseless,
        sweep: SweepRange::single(0.0),
        upper: None,
        c1: None,
        c2: None,
        rate_ratio: None,
        variance_consistent: None,
    };
    vec![
        (
            "outlier.toml",
            ExperimentConfig {
                network: reference_params(),
                scenario: ScenarioConfig {
                    kind: ScenarioKind::UniformOutlier,
                    sweep: SweepRange {
                        start: 0.05,
                        stop: 0.95,
                        step: 0.05,
                    },
                    upper: Some(6.0 * 3.0f64.sqrt()),
                    ..blank.clone()
                },
                schedule: reference_schedule_config(),
                run: reference_run_config("out/outlier"),
            },
        ),
        (
            "laplace-mixture.toml",
            ExperimentConfig {
                network: reference_params(),
                scenario: ScenarioConfig {
                    kind: ScenarioKind::LaplaceMixture,
                    sweep: SweepRange {
                        start: 0.25,
                        stop: 25.0,
                        step: 0.25,
                    },
                    ..blank.clone()
                },
                schedule: reference_schedule_config(),
                run: reference_run_config("out/laplace-mixture"),
            },
        ),
        (
            "cauchy.toml",
            ExperimentConfig {
                network: reference_params(),
                scenario: ScenarioConfig {
                    kind: ScenarioKind::Cauchy,
                    sweep: SweepRange {
                        start: 0.05,
                        stop: 2.5,
                        step: 0.05,
                    },
                    ..blank
                },
                schedule: reference_schedule_config(),
                run: reference_run_config("out/cauchy"),
            },
        ),
    ]
}

fn presets(out: &std::path::Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out)?;
    for (name, cfg) in preset_configs() {
        cfg.validate()?;
        let path = out.join(name);
        report::write_text(&path, &cfg.to_toml_string())?;
        println!(
            "{} nodes={} radius={} alpha={}/k^{} beta={}/k^{} trials={} sweep={}..{} step {}",
            path.display(),
            cfg.network.nodes,
            cfg.network.connect_radius,
            cfg.schedule.a,
            cfg.schedule.tau_alpha,
            cfg.schedule.b,
            cfg.schedule.tau_beta,
            cfg.run.trials,
            cfg.scenario.sweep.start,
            cfg.scenario.sweep.stop,
            cfg.scenario.sweep.step,
        );
    }
    Ok(())
}
