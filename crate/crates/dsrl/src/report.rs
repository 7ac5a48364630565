//! Output files and their independent re-reader.
//!
//! All outputs are plain text: CSVs for data, a JSON sidecar for metadata.
//! Every file starts with a `# provenance:` comment embedding the full config
//! and master seed, so any single file suffices to reproduce its run. Floats
//! are printed with Rust's shortest round-trip formatting, which keeps files
//! byte-identical across runs and exact under re-parsing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::harness::{ExperimentConfig, ExperimentResult, HarnessError, SolverKind};

/// Version label embedded in provenance output.
pub fn version_label() -> String {
    format!("dsrl {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: String,
    master_seed: u64,
    config: &'a ExperimentConfig,
}

fn provenance_line(cfg: &ExperimentConfig) -> String {
    let p = Provenance {
        tool: version_label(),
        master_seed: cfg.run.master_seed,
        config: cfg,
    };
    format!(
        "# provenance: {}",
        serde_json::to_string(&p).expect("provenance serializes")
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

fn fmt_or_empty(v: f64) -> String {
    fmt_opt(Some(v))
}

/// Sidecar metadata document for a sweep or simulate run.
#[derive(Serialize)]
pub struct Meta<'a> {
    pub tool: String,
    pub master_seed: u64,
    pub sweep_param: &'static str,
    pub warnings: &'a [String],
    /// Distinct trial failure messages with counts.
    pub failures: &'a [(String, usize)],
    pub config: &'a ExperimentConfig,
}

/// Write `sweep.csv`, `trials.csv`, `curves.csv`, and `meta.json` into
/// `out_dir`; returns the written paths.
pub fn write_sweep_outputs(
    result: &ExperimentResult,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let cfg = &result.config;
    let prov = provenance_line(cfg);
    let mut written = Vec::new();

    let sweep_path = out_dir.join("sweep.csv");
    let mut out = String::new();
    out.push_str(&prov);
    out.push('\n');
    out.push_str("sweep_param,sweep_value,solver,mean_rmse,stderr_rmse,trials_ok,trials_failed\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.sweep_param,
            r.sweep_value,
            r.solver.label(),
            fmt_or_empty(r.mean_rmse),
            fmt_or_empty(r.stderr_rmse),
            r.trials_ok,
            r.trials_failed
        ));
    }
    fs::write(&sweep_path, out)?;
    written.push(sweep_path);

    let trials_path = out_dir.join("trials.csv");
    let mut out = String::new();
    out.push_str(&prov);
    out.push('\n');
    out.push_str("sweep_param,sweep_value,trial,solver,rmse,disagreement,ok\n");
    for t in &result.trials {
        for (kind, res) in &t.solvers {
            let (rmse, disagreement, ok) = match res {
                Ok(o) => (fmt_or_empty(o.rmse), fmt_opt(o.disagreement), true),
                Err(_) => (String::new(), String::new(), false),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                cfg.scenario.sweep_param(),
                t.sweep_value,
                t.trial,
                kind.label(),
                rmse,
                disagreement,
                ok
            ));
        }
    }
    fs::write(&trials_path, out)?;
    written.push(trials_path);

    let curves_path = out_dir.join("curves.csv");
    let mut out = String::new();
    out.push_str(&prov);
    out.push('\n');
    out.push_str("sweep_value,solver,k,mean_rmse\n");
    for c in &result.curves {
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.sweep_value,
            c.solver.label(),
            c.k,
            fmt_or_empty(c.mean_rmse)
        ));
    }
    fs::write(&curves_path, out)?;
    written.push(curves_path);

    written.push(write_meta(result, out_dir)?);
    Ok(written)
}

fn write_meta(result: &ExperimentResult, out_dir: &Path) -> Result<PathBuf, HarnessError> {
    let meta = Meta {
        tool: version_label(),
        master_seed: result.config.run.master_seed,
        sweep_param: result.config.scenario.sweep_param(),
        warnings: &result.warnings,
        failures: &result.failures,
        config: &result.config,
    };
    let path = out_dir.join("meta.json");
    let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// A solver's full trace for `trace.csv` in simulate output.
pub struct SolverTrace {
    pub solver: SolverKind,
    /// Rows `(k, objective, rmse, disagreement)`; unavailable metrics empty.
    pub rows: Vec<(usize, f64, Option<f64>, Option<f64>)>,
}

/// Write the simulate outputs: `trace.csv`, `network.json`,
/// `measurements.json`, and `meta.json`.
pub fn write_simulate_outputs(
    cfg: &ExperimentConfig,
    warnings: &[String],
    network_json: &str,
    measurements: &crate::measurement::MeasurementSet,
    traces: &[SolverTrace],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let prov = provenance_line(cfg);
    let mut written = Vec::new();

    let trace_path = out_dir.join("trace.csv");
    let mut out = String::new();
    out.push_str(&prov);
    out.push('\n');
    out.push_str("k,solver,objective,rmse,disagreement\n");
    for t in traces {
        for &(k, obj, rmse, dis) in &t.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                k,
                t.solver.label(),
                fmt_or_empty(obj),
                fmt_opt(rmse),
                fmt_opt(dis)
            ));
        }
    }
    fs::write(&trace_path, out)?;
    written.push(trace_path);

    let net_path = out_dir.join("network.json");
    let mut net_text = network_json.to_string();
    if !net_text.ends_with('\n') {
        net_text.push('\n');
    }
    fs::write(&net_path, net_text)?;
    written.push(net_path);

    let meas_path = out_dir.join("measurements.json");
    let mut meas_text =
        serde_json::to_string_pretty(measurements).expect("measurements serialize");
    meas_text.push('\n');
    fs::write(&meas_path, meas_text)?;
    written.push(meas_path);

    let result = ExperimentResult {
        config: cfg.clone(),
        rows: Vec::new(),
        curves: Vec::new(),
        trials: Vec::new(),
        warnings: warnings.to_vec(),
        failures: Vec::new(),
    };
    written.push(write_meta(&result, out_dir)?);
    Ok(written)
}

/// Re-aggregated statistics for one `(sweep_value, solver)` group of
/// `trials.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReaggRow {
    pub sweep_value: String,
    pub solver: String,
    pub mean_rmse: f64,
    pub stderr_rmse: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

/// Independent streaming pass over `trials.csv` text: recompute per-group
/// mean and standard error with Welford's algorithm, without touching the
/// harness aggregation path. Groups appear in first-occurrence order.
pub fn reaggregate_trials_csv(text: &str) -> Result<Vec<ReaggRow>, String> {
    struct Acc {
        n: usize,
        mean: f64,
        m2: f64,
        failed: usize,
    }
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut accs: Vec<Acc> = Vec::new();

    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("empty file")?;
    if header != "sweep_param,sweep_value,trial,solver,rmse,disagreement,ok" {
        return Err(format!("unexpected header: {header}"));
    }
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(format!("line {}: expected 7 fields", lineno + 2));
        }
        let key = (fields[1].to_string(), fields[3].to_string());
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                accs.push(Acc {
                    n: 0,
                    mean: 0.0,
                    m2: 0.0,
                    failed: 0,
                });
                keys.len() - 1
            }
        };
        let ok: bool = fields[6]
            .parse()
            .map_err(|_| format!("line {}: bad ok flag", lineno + 2))?;
        if !ok {
            accs[idx].failed += 1;
            continue;
        }
        let rmse: f64 = fields[4]
            .parse()
            .map_err(|_| format!("line {}: bad rmse", lineno + 2))?;
        if !rmse.is_finite() {
            return Err(format!("line {}: non-finite rmse", lineno + 2));
        }
        let acc = &mut accs[idx];
        acc.n += 1;
        let delta = rmse - acc.mean;
        acc.mean += delta / acc.n as f64;
        acc.m2 += delta * (rmse - acc.mean);
    }

    Ok(keys
        .into_iter()
        .zip(accs)
        .map(|((sweep_value, solver), acc)| {
            let stderr = if acc.n >= 2 {
                (acc.m2 / (acc.n - 1) as f64 / acc.n as f64).sqrt()
            } else if acc.n == 1 {
                0.0
            } else {
                f64::NAN
            };
            ReaggRow {
                sweep_value,
                solver,
                mean_rmse: if acc.n > 0 { acc.mean } else { f64::NAN },
                stderr_rmse: stderr,
                trials_ok: acc.n,
                trials_failed: acc.failed,
            }
        })
        .collect())
}

/// Write a string to a file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NetworkParams;
    use crate::harness::{
        run_sweep, RunConfig, ScenarioConfig, ScenarioKind, ScheduleConfig, SweepRange,
    };

    fn tiny_config(out: &Path) -> ExperimentConfig {
        ExperimentConfig {
            network: NetworkParams {
                nodes: 8,
                dimension: 2,
                half_width: 2.0,
                connect_radius: 2.0,
                min_degree: 1,
                max_degree: 7,
                max_attempts: 500,
            },
            scenario: ScenarioConfig {
                kind: ScenarioKind::Cauchy,
                sweep: SweepRange {
                    start: 0.5,
                    stop: 1.0,
                    step: 0.5,
                },
                upper: None,
                c1: None,
                c2: None,
                rate_ratio: None,
                variance_consistent: None,
            },
            schedule: ScheduleConfig {
                a: 0.1,
                tau_alpha: 0.55,
                b: 1.0,
                tau_beta: 0.75,
                strict: false,
            },
            run: RunConfig {
                iterations: 20,
                trials: 5,
                master_seed: 99,
                solvers: vec![SolverKind::Dsrl, SolverKind::CentralizedL2],
                output_dir: out.to_path_buf(),
                fixed_network: false,
            },
        }
    }

    #[test]
    fn outputs_written_and_reaggregation_agrees() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let result = run_sweep(&cfg, 0).unwrap();
        let files = write_sweep_outputs(&result, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        for f in &files {
            assert!(f.exists(), "{f:?} missing");
        }

        // Every file embeds provenance (meta.json embeds the config itself).
        for f in &files {
            let text = fs::read_to_string(f).unwrap();
            assert!(text.contains("master_seed"), "{f:?} lacks provenance");
        }

        let trials_text = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        let reagg = reaggregate_trials_csv(&trials_text).unwrap();
        assert_eq!(reagg.len(), result.rows.len());
        for (row, re) in result.rows.iter().zip(&reagg) {
            assert_eq!(re.solver, row.solver.label());
            assert_eq!(re.trials_ok, row.trials_ok);
            assert_eq!(re.trials_failed, row.trials_failed);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-30);
            assert!(
                rel(re.mean_rmse, row.mean_rmse) < 1e-12,
                "mean {} vs {}",
                re.mean_rmse,
                row.mean_rmse
            );
            if row.stderr_rmse > 0.0 {
                assert!(
                    rel(re.stderr_rmse, row.stderr_rmse) < 1e-12,
                    "stderr {} vs {}",
                    re.stderr_rmse,
                    row.stderr_rmse
                );
            }
        }
    }

    #[test]
    fn sweep_outputs_are_byte_identical_across_thread_counts() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir_a.path());
        let res_seq = run_sweep(&cfg, 1).unwrap();
        let res_par = run_sweep(&cfg, 0).unwrap();
        write_sweep_outputs(&res_seq, dir_a.path()).unwrap();
        write_sweep_outputs(&res_par, dir_b.path()).unwrap();
        for name in ["sweep.csv", "trials.csv", "curves.csv", "meta.json"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs across thread counts");
        }
    }

    #[test]
    fn reaggregation_rejects_malformed_input() {
        assert!(reaggregate_trials_csv("").is_err());
        assert!(reaggregate_trials_csv("a,b,c\n1,2,3\n").is_err());
        let header = "sweep_param,sweep_value,trial,solver,rmse,disagreement,ok\n";
        assert!(reaggregate_trials_csv(&format!("{header}p,0.1,0,dsrl,xyz,,true\n")).is_err());
        assert!(reaggregate_trials_csv(&format!("{header}p,0.1,0,dsrl,1.0,,maybe\n")).is_err());
        assert!(reaggregate_trials_csv(&format!("{header}p,0.1,0,dsrl,1.0,0.5,true\n")).is_ok());
        // Failed rows have empty rmse and must still be counted.
        let ok = reaggregate_trials_csv(&format!("{header}p,0.1,0,dsrl,,,false\n")).unwrap();
        assert_eq!(ok[0].trials_failed, 1);
        assert_eq!(ok[0].trials_ok, 0);
    }
}
