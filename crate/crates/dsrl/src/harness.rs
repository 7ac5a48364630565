//! Experiment orchestration: parameter sweeps over noise scenarios,
//! multi-trial Monte Carlo averaging, and deterministic parallel execution.
//!
//! A sweep walks the scenario's parameter over `start..=stop` in `step`
//! increments; every sweep point runs `trials` independent trials. Each trial
//! draws its network, target, noise, and initializations from RNG streams
//! keyed on `(master seed, sweep index, trial index, purpose)`, so the
//! outcome is a pure function of the config and results do not depend on the
//! degree of parallelism.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{centralized_l1_subgradient, centralized_l2_descent, l2_objective};
use crate::geometry::{generate_network, sample_in_cube, NetworkParams, SensorNetwork};
use crate::measurement::{true_ranges, NoiseScenario};
use crate::point::Point;
use crate::rng::{self, purpose};
use crate::schedule::Schedule;
use crate::solver::{dsrl_run, global_objective};

/// Step scale of the centralized squared-residual baseline
/// (`step0 / sqrt(k)`); the solvers under comparison take their steps from
/// the schedule, the baseline uses this fixed scale.
pub const DEFAULT_L2_STEP0: f64 = 1.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config not found: {0}")]
    ConfigNotFound(PathBuf),
    #[error("failed to read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
    #[error("failed to write output: {0}")]
    Output(#[from] std::io::Error),
}

/// Which solvers a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Dsrl,
    CentralizedL1,
    CentralizedL2,
}

impl SolverKind {
    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Dsrl => "dsrl",
            SolverKind::CentralizedL1 => "centralized-l1",
            SolverKind::CentralizedL2 => "centralized-l2",
        }
    }
}

/// Noise scenario family selected in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Noiseless,
    UniformOutlier,
    LaplaceMixture,
    Cauchy,
}

/// Inclusive arithmetic sweep grid for the scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// A degenerate single-point sweep.
    pub fn single(value: f64) -> Self {
        SweepRange {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Scenario section of a config: the family, its fixed knobs, and the sweep
/// grid for its varying parameter (`p`, `sigma`, or `gamma`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub sweep: SweepRange,
    /// Upper bound of the replacement distribution (uniform-outlier only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_consistent: Option<bool>,
}

impl ScenarioConfig {
    /// Name of the swept parameter, as printed in CSV output.
    pub fn sweep_param(&self) -> &'static str {
        match self.kind {
            ScenarioKind::Noiseless => "none",
            ScenarioKind::UniformOutlier => "p",
            ScenarioKind::LaplaceMixture => "sigma",
            ScenarioKind::Cauchy => "gamma",
        }
    }

    /// The concrete scenario at one sweep value.
    pub fn at(&self, value: f64) -> NoiseScenario {
        match self.kind {
            ScenarioKind::Noiseless => NoiseScenario::Noiseless,
            ScenarioKind::UniformOutlier => NoiseScenario::UniformOutlier {
                p: value,
                upper: self.upper.unwrap_or(1.0),
            },
            ScenarioKind::LaplaceMixture => NoiseScenario::LaplaceMixture {
                sigma: value,
                c1: self.c1.unwrap_or(0.9),
                c2: self.c2.unwrap_or(0.1),
                rate_ratio: self.rate_ratio.unwrap_or(10.0),
                variance_consistent: self.variance_consistent.unwrap_or(false),
            },
            ScenarioKind::Cauchy => NoiseScenario::Cauchy { gamma: value },
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::ConfigInvalid(msg));
        let sweep = &self.sweep;
        if !sweep.start.is_finite() || !sweep.stop.is_finite() || !sweep.step.is_finite() {
            return bad("scenario.sweep: all fields must be finite".into());
        }
        if sweep.start > sweep.stop {
            return bad(format!(
                "scenario.sweep.start: {} must not exceed stop {}",
                sweep.start, sweep.stop
            ));
        }
        if sweep.step <= 0.0 {
            return bad(format!("scenario.sweep.step: must be > 0, got {}", sweep.step));
        }

        let allowed: &[&str] = match self.kind {
            ScenarioKind::UniformOutlier => &["upper"],
            ScenarioKind::LaplaceMixture => &["c1", "c2", "rate_ratio", "variance_consistent"],
            _ => &[],
        };
        for (name, set) in [
            ("upper", self.upper.is_some()),
            ("c1", self.c1.is_some()),
            ("c2", self.c2.is_some()),
            ("rate_ratio", self.rate_ratio.is_some()),
            ("variance_consistent", self.variance_consistent.is_some()),
        ] {
            if set && !allowed.contains(&name) {
                return bad(format!(
                    "scenario.{name}: not a parameter of this scenario kind"
                ));
            }
        }

        match self.kind {
            ScenarioKind::Noiseless => {
                if sweep.start != sweep.stop {
                    return bad(
                        "scenario.sweep: the noiseless scenario takes a single point (start == stop)"
                            .into(),
                    );
                }
            }
            ScenarioKind::UniformOutlier => {
                if self.upper.is_none() {
                    return bad("scenario.upper: required for uniform-outlier".into());
                }
                if sweep.start < 0.0 || sweep.stop > 1.0 {
                    return bad("scenario.sweep: outlier probabilities must lie in [0, 1]".into());
                }
            }
            ScenarioKind::LaplaceMixture | ScenarioKind::Cauchy => {
                if sweep.start <= 0.0 {
                    return bad(format!(
                        "scenario.sweep.start: {} must be > 0 for this scenario",
                        sweep.start
                    ));
                }
            }
        }
        // The remaining parameter checks are shared with the scenario type.
        self.at(sweep.start)
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(format!("scenario: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub a: f64,
    pub tau_alpha: f64,
    pub b: f64,
    pub tau_beta: f64,
    /// Reject schedules that violate the decay conditions instead of only
    /// warning.
    #[serde(default)]
    pub strict: bool,
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<Schedule, HarnessError> {
        Schedule::new(self.a, self.tau_alpha, self.b, self.tau_beta, self.strict)
            .map_err(|e| HarnessError::ConfigInvalid(format!("schedule: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Iterations K per solver run.
    pub iterations: usize,
    /// Independent trials per sweep point.
    pub trials: usize,
    pub master_seed: u64,
    pub solvers: Vec<SolverKind>,
    pub output_dir: PathBuf,
    /// Share one network across all trials instead of redrawing per trial.
    #[serde(default)]
    pub fixed_network: bool,
}

/// A full experiment description, as read from a TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkParams,
    pub scenario: ScenarioConfig,
    pub schedule: ScheduleConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        if !path.exists() {
            return Err(HarnessError::ConfigNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.network
            .validate()
            .map_err(|e| HarnessError::ConfigInvalid(format!("network: {e}")))?;
        self.scenario.validate()?;
        self.schedule.build()?;
        if self.run.trials < 1 {
            return Err(HarnessError::ConfigInvalid(
                "run.trials: must be >= 1".into(),
            ));
        }
        if self.run.solvers.is_empty() {
            return Err(HarnessError::ConfigInvalid(
                "run.solvers: select at least one solver".into(),
            ));
        }
        let mut seen = Vec::new();
        for s in &self.run.solvers {
            if seen.contains(s) {
                return Err(HarnessError::ConfigInvalid(format!(
                    "run.solvers: duplicate solver {}",
                    s.label()
                )));
            }
            seen.push(*s);
        }
        Ok(())
    }

    /// Warnings the run should carry: schedule decay violations plus the
    /// diffusion stability guard `alpha_1 * max_degree >= 1` (the first
    /// iterations then over-shoot neighbor averaging; the run still executes).
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(schedule) = self.schedule.build() {
            out.extend(
                schedule
                    .decay_warnings()
                    .into_iter()
                    .map(|w| format!("schedule: {w}")),
            );
            let alpha1 = schedule.weight_at(1);
            let reach = alpha1 * self.network.max_degree as f64;
            if reach >= 1.0 {
                out.push(format!(
                    "stability: alpha_1 * max_degree = {reach} >= 1; early diffusion steps may over-shoot"
                ));
            }
        }
        out
    }
}

/// Result of one solver within one trial.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    /// Steady-state error: node RMSE for the distributed solver, distance to
    /// the target for centralized ones.
    pub rmse: f64,
    /// Final disagreement (distributed solver only).
    pub disagreement: Option<f64>,
    /// Objective of the reported estimate(s).
    pub objective: f64,
    /// Per-iteration RMSE samples `(k, rmse)` at the curve stride
    /// (distributed solver only).
    pub rmse_curve: Option<Vec<(usize, f64)>>,
}

/// All solver results of one trial; failures carry the error text.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    pub solvers: Vec<(SolverKind, Result<SolverOutcome, String>)>,
}

/// Run every selected solver on one freshly drawn instance.
///
/// The instance (network unless `fixed_net` is given, target, noise,
/// initializations) is drawn from streams keyed on
/// `(master seed, sweep_index, trial, purpose)`.
pub fn run_trial(
    cfg: &ExperimentConfig,
    sweep_index: usize,
    sweep_value: f64,
    trial: usize,
    fixed_net: Option<&SensorNetwork>,
    curve_stride: usize,
) -> TrialOutcome {
    let master = cfg.run.master_seed;
    let tags = |p: u64| [sweep_index as u64, trial as u64, p];
    let fail_all = |msg: String| TrialOutcome {
        sweep_index,
        sweep_value,
        trial,
        solvers: cfg
            .run
            .solvers
            .iter()
            .map(|&s| (s, Err(msg.clone())))
            .collect(),
    };

    let schedule = match cfg.schedule.build() {
        Ok(s) => s,
        Err(e) => return fail_all(e.to_string()),
    };
    let drawn;
    let net = match fixed_net {
        Some(n) => n,
        None => {
            let seed = rng::derive_seed(master, &tags(purpose::NETWORK));
            match generate_network(seed, &cfg.network) {
                Ok(n) => {
                    drawn = n;
                    &drawn
                }
                Err(e) => return fail_all(e.to_string()),
            }
        }
    };

    let dim = cfg.network.dimension;
    let hw = cfg.network.half_width;
    let target = sample_in_cube(&mut rng::stream(master, &tags(purpose::TARGET)), dim, hw);
    let exact = match true_ranges(net, &target) {
        Ok(m) => m,
        Err(e) => return fail_all(e.to_string()),
    };
    let scenario = cfg.scenario.at(sweep_value);
    let measurements = scenario.apply(&exact, &mut rng::stream(master, &tags(purpose::NOISE)));

    let iters = cfg.run.iterations;
    let solvers = cfg
        .run
        .solvers
        .iter()
        .map(|&kind| {
            let outcome = match kind {
                SolverKind::Dsrl => {
                    let mut init_rng = rng::stream(master, &tags(purpose::INIT));
                    let init: Vec<Point> = (0..net.len())
                        .map(|_| sample_in_cube(&mut init_rng, dim, hw))
                        .collect();
                    dsrl_run(
                        net,
                        &measurements,
                        &schedule,
                        iters,
                        init,
                        Some(&target),
                        iters.max(1),
                    )
                    .map(|trace| {
                        let last = trace.final_record();
                        let curve = trace
                            .records
                            .iter()
                            .filter(|r| (r.iteration - 1) % curve_stride == 0)
                            .map(|r| (r.iteration, r.rmse.expect("target known")))
                            .collect();
                        SolverOutcome {
                            rmse: last.rmse.expect("target known"),
                            disagreement: Some(last.disagreement),
                            objective: last.objective,
                            rmse_curve: Some(curve),
                        }
                    })
                    .map_err(|e| e.to_string())
                }
                SolverKind::CentralizedL1 => {
                    let init = sample_in_cube(
                        &mut rng::stream(master, &tags(purpose::BASELINE_INIT)),
                        dim,
                        hw,
                    );
                    centralized_l1_subgradient(net, &measurements, &schedule, iters, init)
                        .map(|res| SolverOutcome {
                            rmse: res.estimate.distance_to(&target),
                            disagreement: None,
                            objective: global_objective(net, &measurements, &res.estimate)
                                .expect("sizes checked"),
                            rmse_curve: None,
                        })
                        .map_err(|e| e.to_string())
                }
                SolverKind::CentralizedL2 => {
                    let init = sample_in_cube(
                        &mut rng::stream(master, &tags(purpose::BASELINE_INIT)),
                        dim,
                        hw,
                    );
                    centralized_l2_descent(net, &measurements, DEFAULT_L2_STEP0, iters, init)
                        .map(|res| SolverOutcome {
                            rmse: res.estimate.distance_to(&target),
                            disagreement: None,
                            objective: l2_objective(net, &measurements, &res.estimate),
                            rmse_curve: None,
                        })
                        .map_err(|e| e.to_string())
                }
            };
            (kind, outcome)
        })
        .collect();

    TrialOutcome {
        sweep_index,
        sweep_value,
        trial,
        solvers,
    }
}

/// One aggregated row of `sweep.csv`.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sweep_param: &'static str,
    pub sweep_value: f64,
    pub solver: SolverKind,
    /// Mean steady-state RMSE over successful trials (NaN if none).
    pub mean_rmse: f64,
    /// Standard error of the mean (0 for a single trial).
    pub stderr_rmse: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

/// One point of a mean convergence curve.
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub sweep_value: f64,
    pub solver: SolverKind,
    pub k: usize,
    pub mean_rmse: f64,
}

/// Everything a sweep produced, ready for reporting.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub curves: Vec<CurveRow>,
    pub trials: Vec<TrialOutcome>,
    pub warnings: Vec<String>,
    /// Distinct failure messages with occurrence counts.
    pub failures: Vec<(String, usize)>,
}

/// Subsampling stride for convergence curves: the largest divisor of the
/// iteration count giving at most ~500 curve points.
pub fn curve_stride(iters: usize) -> usize {
    if iters == 0 {
        return 1;
    }
    let target = (iters / 500).max(1);
    (1..=target).rev().find(|s| iters % s == 0).unwrap_or(1)
}

/// Run the full sweep. `threads` caps worker parallelism (0 = automatic).
/// Output is a pure function of the config regardless of `threads`.
pub fn run_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let warnings = cfg.warnings();
    let master = cfg.run.master_seed;

    let fixed = if cfg.run.fixed_network {
        let seed = rng::derive_seed(master, &[purpose::FIXED_NETWORK]);
        Some(
            generate_network(seed, &cfg.network)
                .map_err(|e| HarnessError::ConfigInvalid(format!("network: {e}")))?,
        )
    } else {
        None
    };

    let values = cfg.scenario.sweep.values();
    let stride = curve_stride(cfg.run.iterations);
    let jobs: Vec<(usize, f64, usize)> = values
        .iter()
        .enumerate()
        .flat_map(|(si, &v)| (0..cfg.run.trials).map(move |t| (si, v, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    // Indexed collect keeps trial order; aggregation below is sequential, so
    // the result is byte-identical for any thread count.
    let trials: Vec<TrialOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(si, v, t)| run_trial(cfg, si, v, t, fixed.as_ref(), stride))
            .collect()
    });

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut failures: Vec<(String, usize)> = Vec::new();
    for (si, &value) in values.iter().enumerate() {
        let point_trials: Vec<&TrialOutcome> =
            trials.iter().filter(|t| t.sweep_index == si).collect();
        for (slot, &solver) in cfg.run.solvers.iter().enumerate() {
            let mut oks: Vec<&SolverOutcome> = Vec::new();
            let mut failed = 0usize;
            for t in &point_trials {
                match &t.solvers[slot].1 {
                    Ok(o) => oks.push(o),
                    Err(msg) => {
                        failed += 1;
                        match failures.iter_mut().find(|(m, _)| m == msg) {
                            Some((_, n)) => *n += 1,
                            None => failures.push((msg.clone(), 1)),
                        }
                    }
                }
            }
            let (mean, stderr) = mean_and_stderr(oks.iter().map(|o| o.rmse));
            rows.push(SweepRow {
                sweep_param: cfg.scenario.sweep_param(),
                sweep_value: value,
                solver,
                mean_rmse: mean,
                stderr_rmse: stderr,
                trials_ok: oks.len(),
                trials_failed: failed,
            });
            // Mean convergence curve where per-iteration RMSE is available.
            if let Some(first) = oks.iter().find_map(|o| o.rmse_curve.as_ref()) {
                let grid: Vec<usize> = first.iter().map(|&(k, _)| k).collect();
                let mut sums = vec![0.0f64; grid.len()];
                let mut n = 0usize;
                for o in &oks {
                    if let Some(curve) = &o.rmse_curve {
                        n += 1;
                        for (acc, &(_, r)) in sums.iter_mut().zip(curve) {
                            *acc += r;
                        }
                    }
                }
                for (i, &k) in grid.iter().enumerate() {
                    curves.push(CurveRow {
                        sweep_value: value,
                        solver,
                        k,
                        mean_rmse: sums[i] / n as f64,
                    });
                }
            }
        }
    }

    Ok(ExperimentResult {
        config: cfg.clone(),
        rows,
        curves,
        trials,
        warnings,
        failures,
    })
}

/// Mean and standard error of the mean (sample standard deviation over
/// `sqrt(n)`; zero when fewer than two values).
pub fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            network: NetworkParams {
                nodes: 10,
                dimension: 3,
                half_width: 3.0,
                connect_radius: 2.5,
                min_degree: 2,
                max_degree: 9,
                max_attempts: 1000,
            },
            scenario: ScenarioConfig {
                kind: ScenarioKind::UniformOutlier,
                sweep: SweepRange::single(0.2),
                upper: Some(6.0),
                c1: None,
                c2: None,
                rate_ratio: None,
                variance_consistent: None,
            },
            schedule: ScheduleConfig {
                a: 0.1,
                tau_alpha: 0.55,
                b: 1.0,
                tau_beta: 0.5,
                strict: false,
            },
            run: RunConfig {
                iterations: 50,
                trials: 3,
                master_seed: 4242,
                solvers: vec![SolverKind::Dsrl, SolverKind::CentralizedL1],
                output_dir: PathBuf::from("out"),
                fixed_network: false,
            },
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = small_config();
        let a = run_trial(&cfg, 0, 0.2, 1, None, 1);
        let b = run_trial(&cfg, 0, 0.2, 1, None, 1);
        for ((ka, ra), (kb, rb)) in a.solvers.iter().zip(&b.solvers) {
            assert_eq!(ka, kb);
            let (ra, rb) = (ra.as_ref().unwrap(), rb.as_ref().unwrap());
            assert_eq!(ra.rmse, rb.rmse);
            assert_eq!(ra.disagreement, rb.disagreement);
            assert_eq!(ra.rmse_curve, rb.rmse_curve);
        }
    }

    #[test]
    fn zero_iteration_trial_reports_initial_rmse() {
        let mut cfg = small_config();
        cfg.run.iterations = 0;
        cfg.run.solvers = vec![SolverKind::Dsrl];
        let out = run_trial(&cfg, 0, 0.2, 0, None, 1);
        let got = out.solvers[0].1.as_ref().unwrap().rmse;

        // Recompute by hand from the same streams.
        let master = cfg.run.master_seed;
        let net = generate_network(
            rng::derive_seed(master, &[0, 0, purpose::NETWORK]),
            &cfg.network,
        )
        .unwrap();
        let target = sample_in_cube(&mut rng::stream(master, &[0, 0, purpose::TARGET]), 3, 3.0);
        let mut init_rng = rng::stream(master, &[0, 0, purpose::INIT]);
        let init: Vec<Point> = (0..net.len())
            .map(|_| sample_in_cube(&mut init_rng, 3, 3.0))
            .collect();
        let expect = metrics::rmse(&init, &target).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn sweep_single_point_shape() {
        let mut cfg = small_config();
        cfg.run.trials = 2;
        let result = run_sweep(&cfg, 1).unwrap();
        // One sweep point, two solvers.
        assert_eq!(result.rows.len(), 2);
        for row in &result.rows {
            assert_eq!(row.trials_ok, 2);
            assert_eq!(row.trials_failed, 0);
            assert_eq!(row.sweep_param, "p");
            assert!(row.mean_rmse.is_finite());
        }
        assert_eq!(result.trials.len(), 2);
    }

    #[test]
    fn sweep_is_parallelism_invariant() {
        let mut cfg = small_config();
        cfg.scenario.sweep = SweepRange {
            start: 0.1,
            stop: 0.5,
            step: 0.2,
        };
        cfg.run.trials = 4;
        let seq = run_sweep(&cfg, 1).unwrap();
        let par = run_sweep(&cfg, 4).unwrap();
        assert_eq!(seq.rows.len(), par.rows.len());
        for (a, b) in seq.rows.iter().zip(&par.rows) {
            assert_eq!(a.sweep_value, b.sweep_value);
            assert_eq!(a.mean_rmse.to_bits(), b.mean_rmse.to_bits());
            assert_eq!(a.stderr_rmse.to_bits(), b.stderr_rmse.to_bits());
        }
        for (a, b) in seq.curves.iter().zip(&par.curves) {
            assert_eq!(a.mean_rmse.to_bits(), b.mean_rmse.to_bits());
        }
    }

    #[test]
    fn fixed_network_is_shared_across_trials() {
        let mut cfg = small_config();
        cfg.run.fixed_network = true;
        cfg.run.solvers = vec![SolverKind::Dsrl];
        let result = run_sweep(&cfg, 1).unwrap();
        assert_eq!(result.rows[0].trials_ok, 3);
        // The shared network comes from its own stream, so the same config
        // with per-trial networks must differ.
        let other = {
            let mut c = cfg.clone();
            c.run.fixed_network = false;
            run_sweep(&c, 1).unwrap()
        };
        assert_ne!(result.rows[0].mean_rmse, other.rows[0].mean_rmse);
    }

    #[test]
    fn sweep_values_match_grid() {
        let sweep = SweepRange {
            start: 0.05,
            stop: 0.95,
            step: 0.05,
        };
        let values = sweep.values();
        assert_eq!(values.len(), 19);
        assert_eq!(values[0], 0.05);
        assert!((values[18] - 0.95).abs() < 1e-12);

        let sigma = SweepRange {
            start: 0.25,
            stop: 25.0,
            step: 0.25,
        };
        assert_eq!(sigma.values().len(), 100);

        assert_eq!(SweepRange::single(1.5).values(), vec![1.5]);
    }

    #[test]
    fn curve_stride_divides_iterations() {
        for iters in [0, 1, 7, 499, 500, 501, 2000, 9973, 10_000] {
            let s = curve_stride(iters);
            assert!(s >= 1);
            if iters > 0 {
                assert_eq!(iters % s, 0, "stride {s} for {iters}");
            }
        }
        assert_eq!(curve_stride(10_000), 20);
    }

    #[test]
    fn config_toml_round_trip_and_unknown_field() {
        let cfg = small_config();
        let text = cfg.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);

        let with_unknown = format!("{text}\n[extra]\nfoo = 1\n");
        let err = ExperimentConfig::from_toml_str(&with_unknown).unwrap_err();
        assert!(matches!(err, HarnessError::Parse(_)), "{err}");

        let unknown_field = text.replace("master_seed", "mseed");
        assert!(ExperimentConfig::from_toml_str(&unknown_field).is_err());
    }

    #[test]
    fn config_validation_reports_field_paths() {
        let mut cfg = small_config();
        cfg.run.trials = 0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("run.trials"), "{err}");

        let mut cfg = small_config();
        cfg.scenario.sweep = SweepRange {
            start: 0.9,
            stop: 0.1,
            step: 0.05,
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("scenario.sweep.start"), "{err}");

        let mut cfg = small_config();
        cfg.scenario.upper = None;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("scenario.upper"), "{err}");

        let mut cfg = small_config();
        cfg.scenario.kind = ScenarioKind::Cauchy;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("scenario.upper"), "{err}");
    }

    #[test]
    fn reference_schedule_triggers_stability_warning() {
        let mut cfg = small_config();
        cfg.schedule = ScheduleConfig {
            a: 0.3,
            tau_alpha: 0.55,
            b: 3.5,
            tau_beta: 0.5,
            strict: false,
        };
        cfg.network.max_degree = 10;
        let warnings = cfg.warnings();
        assert!(
            warnings.iter().any(|w| w.starts_with("stability:")),
            "{warnings:?}"
        );
        assert!(
            warnings.iter().any(|w| w.starts_with("schedule:")),
            "{warnings:?}"
        );
    }

    #[test]
    fn failed_trials_are_counted_not_dropped() {
        let mut cfg = small_config();
        // Impossible generation: the distance rule can never reach the degree
        // floor with an astronomically small radius.
        cfg.network.connect_radius = 1e-15;
        cfg.network.max_attempts = 2;
        cfg.run.trials = 2;
        let result = run_sweep(&cfg, 1).unwrap();
        for row in &result.rows {
            assert_eq!(row.trials_ok, 0);
            assert_eq!(row.trials_failed, 2);
            assert!(row.mean_rmse.is_nan());
        }
        assert!(!result.failures.is_empty());
    }
}
