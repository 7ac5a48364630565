//! The distributed diffusion + sub-gradient solver.
//!
//! Each iteration is synchronous: every node first forms a diffusion
//! variable from its neighbors' current estimates,
//!
//! ```text
//! v_i = x_i + alpha_k * sum_{j in N_i} (x_j - x_i)
//! ```
//!
//! then steps against a sub-gradient of its local absolute range residual,
//! evaluated at the pre-diffusion estimate `x_i`:
//!
//! ```text
//! x_i <- v_i - beta_k * g_i,   g_i in d f_i(x_i)
//! ```
//!
//! No node ever reads another node's post-step value within an iteration, so
//! the update is invariant to node processing order.

use std::io::Write;

use thiserror::Error;

use crate::geometry::SensorNetwork;
use crate::measurement::MeasurementSet;
use crate::metrics;
use crate::point::Point;
use crate::schedule::Schedule;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("estimate became non-finite at iteration {iteration}")]
    NonFiniteState { iteration: usize },
}

/// All node estimates at one iteration counter (one-based: the initial
/// states are iteration 1).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStates {
    pub estimates: Vec<Point>,
    pub iteration: usize,
}

/// Scalar diagnostics of one recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Mean over nodes of the global objective evaluated at each node's
    /// estimate.
    pub objective: f64,
    /// Root-mean-square error over nodes, when the true source is known.
    pub rmse: Option<f64>,
    /// Root-mean-square deviation of node estimates from their mean.
    pub disagreement: f64,
}

/// Full-state snapshot kept at the trace cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub iteration: usize,
    pub estimates: Vec<Point>,
}

/// Everything a run produced: per-iteration scalars, state snapshots at the
/// configured cadence, the final states, and any schedule warnings.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<StateSnapshot>,
    pub final_states: NodeStates,
    pub schedule_warnings: Vec<String>,
}

impl RunTrace {
    pub fn final_record(&self) -> &TraceRecord {
        self.records.last().expect("trace is never empty")
    }

    /// Write the trace as CSV with columns `k,objective,rmse,disagreement`.
    /// With `include_states`, snapshot rows gain one column per node
    /// coordinate (`x<i>_<d>`); other rows leave them empty.
    pub fn write_csv<W: Write>(&self, w: &mut W, include_states: bool) -> std::io::Result<()> {
        write!(w, "k,objective,rmse,disagreement")?;
        if include_states {
            if let Some(snap) = self.snapshots.first() {
                for (i, p) in snap.estimates.iter().enumerate() {
                    for d in 0..p.dim() {
                        write!(w, ",x{i}_{d}")?;
                    }
                }
            }
        }
        writeln!(w)?;
        let mut snaps = self.snapshots.iter().peekable();
        for rec in &self.records {
            write!(w, "{},{}", rec.iteration, rec.objective)?;
            match rec.rmse {
                Some(r) => write!(w, ",{r}")?,
                None => write!(w, ",")?,
            }
            write!(w, ",{}", rec.disagreement)?;
            if include_states {
                if snaps.peek().is_some_and(|s| s.iteration == rec.iteration) {
                    let snap = snaps.next().unwrap();
                    for p in &snap.estimates {
                        for d in 0..p.dim() {
                            write!(w, ",{}", p[d])?;
                        }
                    }
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// A sub-gradient of the local objective `|dist(x, anchor) - range| / total`
/// at `x`: the unit radial direction scaled by `sign(residual) / total`, with
/// the zero vector both at `x = anchor` and on the zero-residual shell
/// (`sign(0) = 0`, a valid sub-differential element at the kink).
pub fn local_subgradient(x: &Point, anchor: &Point, range: f64, total: usize) -> Point {
    let mut g = Point::zeros(x.dim());
    subgradient_into(x, anchor, range, total, &mut g);
    g
}

fn subgradient_into(x: &Point, anchor: &Point, range: f64, total: usize, out: &mut Point) {
    debug_assert!(total >= 1);
    let dist = x.distance_to(anchor);
    if dist == 0.0 {
        out.fill(0.0);
        return;
    }
    let residual = dist - range;
    let sign = if residual > 0.0 {
        1.0
    } else if residual < 0.0 {
        -1.0
    } else {
        0.0
    };
    let scale = sign / (total as f64 * dist);
    for d in 0..x.dim() {
        out[d] = scale * (x[d] - anchor[d]);
    }
}

/// The local objective `|dist(x, anchor) - range| / total`.
pub fn local_objective(x: &Point, anchor: &Point, range: f64, total: usize) -> f64 {
    debug_assert!(total >= 1);
    (x.distance_to(anchor) - range).abs() / total as f64
}

/// Sum of the local objectives over all sensors: the robust localization
/// objective at `x`.
pub fn global_objective(
    net: &SensorNetwork,
    m: &MeasurementSet,
    x: &Point,
) -> Result<f64, SolverError> {
    check_sizes(net, m)?;
    if x.dim() != net.dimension() {
        return Err(SolverError::SizeMismatch(format!(
            "point dimension {} vs network dimension {}",
            x.dim(),
            net.dimension()
        )));
    }
    let l = net.len();
    Ok(net
        .positions()
        .iter()
        .zip(&m.ranges)
        .map(|(a, &d)| local_objective(x, a, d, l))
        .sum())
}

/// One synchronous diffusion step over all nodes, from the pre-step states.
pub fn diffuse(
    estimates: &[Point],
    net: &SensorNetwork,
    alpha: f64,
) -> Result<Vec<Point>, SolverError> {
    if estimates.len() != net.len() {
        return Err(SolverError::SizeMismatch(format!(
            "{} estimates vs {} nodes",
            estimates.len(),
            net.len()
        )));
    }
    let mut out: Vec<Point> = estimates.to_vec();
    diffuse_into(estimates, net, alpha, &mut out);
    Ok(out)
}

fn diffuse_into(estimates: &[Point], net: &SensorNetwork, alpha: f64, out: &mut [Point]) {
    for (i, nbrs) in net.neighbor_lists().iter().enumerate() {
        out[i].copy_from(&estimates[i]);
        for &j in nbrs {
            out[i].add_scaled_diff(alpha, &estimates[j], &estimates[i]);
        }
    }
}

/// Execute `iters` diffusion + sub-gradient iterations from the given initial
/// estimates.
///
/// Scalar diagnostics are recorded for the initial states and after every
/// iteration; full state snapshots are kept every `trace_cadence` iterations
/// (which must divide `iters`) and for the final states. Deterministic in its
/// inputs.
pub fn dsrl_run(
    net: &SensorNetwork,
    m: &MeasurementSet,
    schedule: &Schedule,
    iters: usize,
    init: Vec<Point>,
    x_true: Option<&Point>,
    trace_cadence: usize,
) -> Result<RunTrace, SolverError> {
    check_sizes(net, m)?;
    assert!(trace_cadence >= 1, "trace cadence must be >= 1");
    assert!(
        iters % trace_cadence == 0,
        "trace cadence {trace_cadence} must divide the iteration count {iters}"
    );
    if init.len() != net.len() {
        return Err(SolverError::SizeMismatch(format!(
            "{} initial estimates vs {} nodes",
            init.len(),
            net.len()
        )));
    }
    for p in &init {
        if p.dim() != net.dimension() {
            return Err(SolverError::SizeMismatch(format!(
                "initial estimate dimension {} vs network dimension {}",
                p.dim(),
                net.dimension()
            )));
        }
    }

    let l = net.len();
    let dim = net.dimension();
    let mut cur = init;
    let mut diffused = vec![Point::zeros(dim); l];
    let mut grad = Point::zeros(dim);

    let mut records = Vec::with_capacity(iters + 1);
    let mut snapshots = Vec::new();
    let record =
        |estimates: &[Point], iteration: usize, records: &mut Vec<TraceRecord>| {
            let objective = estimates
                .iter()
                .map(|x| global_objective(net, m, x).expect("sizes checked"))
                .sum::<f64>()
                / l as f64;
            records.push(TraceRecord {
                iteration,
                objective,
                rmse: x_true.map(|t| metrics::rmse(estimates, t).expect("sizes checked")),
                disagreement: metrics::disagreement(estimates),
            });
        };

    record(&cur, 1, &mut records);
    snapshots.push(StateSnapshot {
        iteration: 1,
        estimates: cur.clone(),
    });

    for k in 1..=iters {
        let alpha = schedule.weight_at(k);
        let beta = schedule.step_at(k);
        diffuse_into(&cur, net, alpha, &mut diffused);
        for i in 0..l {
            // g_i is evaluated at the pre-diffusion estimate x_i; cur[i] is
            // only overwritten afterwards and no other node reads it.
            subgradient_into(&cur[i], net.position(i), m.ranges[i], l, &mut grad);
            cur[i].copy_from(&diffused[i]);
            cur[i].add_scaled(-beta, &grad);
        }
        if cur.iter().any(|p| !p.is_finite()) {
            return Err(SolverError::NonFiniteState { iteration: k + 1 });
        }
        record(&cur, k + 1, &mut records);
        if k % trace_cadence == 0 {
            snapshots.push(StateSnapshot {
                iteration: k + 1,
                estimates: cur.clone(),
            });
        }
    }

    Ok(RunTrace {
        records,
        snapshots,
        final_states: NodeStates {
            estimates: cur,
            iteration: iters + 1,
        },
        schedule_warnings: schedule.decay_warnings(),
    })
}

/// The escape radius outside which every sub-gradient direction points
/// outward: `3 * max_i max_d |a_id| + max_i d_i + 1`.
pub fn escape_radius(net: &SensorNetwork, m: &MeasurementSet) -> f64 {
    assert!(!net.is_empty(), "radius of an empty network");
    let max_coord = net
        .positions()
        .iter()
        .flat_map(|p| p.coords().iter().map(|c| c.abs()))
        .fold(0.0, f64::max);
    let max_range = m.ranges.iter().copied().fold(0.0, f64::max);
    3.0 * max_coord + max_range + 1.0
}

fn check_sizes(net: &SensorNetwork, m: &MeasurementSet) -> Result<(), SolverError> {
    if m.len() != net.len() {
        return Err(SolverError::SizeMismatch(format!(
            "{} measurements vs {} nodes",
            m.len(),
            net.len()
        )));
    }
    Ok(())
}
