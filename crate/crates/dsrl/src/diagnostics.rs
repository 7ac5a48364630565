//! Built-in invariant suites, runnable from the CLI.
//!
//! Four checks cover the numerically delicate parts of the crate: the
//! sub-gradient against central finite differences, the outward-pointing
//! condition outside the escape radius, diffusion-only consensus contraction,
//! and the noise sampler calibrations.

use rand::Rng;

use crate::geometry::{generate_network, reference_params, NetworkParams};
use crate::measurement::{sample_cauchy, sample_laplace, true_ranges};
use crate::metrics::disagreement;
use crate::point::Point;
use crate::rng;
use crate::solver::{diffuse, escape_radius, local_objective, local_subgradient};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckReport {
            name,
            passed,
            detail,
        }
    }
}

/// Run every suite with the given seed.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        finite_difference_check(seed, 100),
        escape_radius_check(seed, 20, 1000),
        consensus_check(seed),
        sampler_calibration_check(seed, 1_000_000),
    ]
}

/// Sub-gradient vs central finite differences of the local objective at
/// random points bounded away from the non-smooth shells; relative error
/// must stay below 1e-5.
pub fn finite_difference_check(seed: u64, points: usize) -> CheckReport {
    let mut r = rng::stream(seed, &[101]);
    let h = 1e-6;
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < points {
        let x = Point::new((0..3).map(|_| r.gen_range(-6.0..6.0)).collect());
        let a = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
        let d = r.gen_range(0.1..8.0);
        let l = r.gen_range(1..40usize);
        let dist = x.distance_to(&a);
        // Stay clear of both shells so the objective is smooth at x.
        if dist < 1e-3 || (dist - d).abs() < 1e-3 {
            continue;
        }
        checked += 1;
        let g = local_subgradient(&x, &a, d, l);
        let mut fd = Point::zeros(3);
        for c in 0..3 {
            let mut plus = x.clone();
            plus[c] += h;
            let mut minus = x.clone();
            minus[c] -= h;
            fd[c] = (local_objective(&plus, &a, d, l) - local_objective(&minus, &a, d, l))
                / (2.0 * h);
        }
        let rel = fd.minus(&g).norm() / g.norm();
        worst = worst.max(rel);
    }
    CheckReport::new(
        "finite-difference",
        worst < 1e-5,
        format!("{checked} points, worst relative error {worst:.3e} (limit 1e-5)"),
    )
}

/// Outside the escape radius every per-sensor sub-gradient direction must
/// satisfy `<g/|g|, x/|x|> >= 1/2` and `|g| <= |x|` (with `g` the per-term
/// direction, i.e. the sub-gradient scaled by the node count).
pub fn escape_radius_check(seed: u64, instances: usize, samples: usize) -> CheckReport {
    let mut violations = 0usize;
    let mut total = 0usize;
    for inst in 0..instances {
        let params = reference_params();
        let net = match generate_network(rng::derive_seed(seed, &[102, inst as u64]), &params) {
            Ok(n) => n,
            Err(e) => {
                return CheckReport::new("escape-radius", false, format!("generation failed: {e}"))
            }
        };
        let mut r = rng::stream(seed, &[103, inst as u64]);
        let target = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
        let m = true_ranges(&net, &target).expect("dimensions match");
        let radius = escape_radius(&net, &m);
        for _ in 0..samples {
            // Uniform direction by cube rejection, radius in [R, 4R].
            let dir = loop {
                let c = Point::new((0..3).map(|_| r.gen_range(-1.0..1.0)).collect());
                let n = c.norm();
                if n > 0.1 {
                    break c.scaled(1.0 / n);
                }
            };
            let x = dir.scaled(radius * r.gen_range(1.0..4.0));
            for (i, a) in net.positions().iter().enumerate() {
                total += 1;
                let g = local_subgradient(&x, a, m.ranges[i], net.len()).scaled(net.len() as f64);
                let gn = g.norm();
                let cos = g.dot(&x) / (gn * x.norm());
                if cos < 0.5 || gn > x.norm() {
                    violations += 1;
                }
            }
        }
    }
    CheckReport::new(
        "escape-radius",
        violations == 0,
        format!("{total} direction checks, {violations} violations"),
    )
}

/// Diffusion-only dynamics (no sub-gradient forcing) on a connected 10-node
/// graph with weights `0.05 / k^0.3`: disagreement must never increase and
/// must fall below 1e-3 of its initial value within 1e4 iterations.
pub fn consensus_check(seed: u64) -> CheckReport {
    let params = NetworkParams {
        nodes: 10,
        dimension: 3,
        half_width: 3.0,
        connect_radius: 2.5,
        min_degree: 2,
        max_degree: 9,
        max_attempts: 1000,
    };
    let net = match generate_network(rng::derive_seed(seed, &[104]), &params) {
        Ok(n) => n,
        Err(e) => return CheckReport::new("consensus", false, format!("generation failed: {e}")),
    };
    let mut r = rng::stream(seed, &[105]);
    let mut states: Vec<Point> = (0..net.len())
        .map(|_| Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect()))
        .collect();
    let initial = disagreement(&states);
    let mut prev = initial;
    let mut reached = None;
    for k in 1..=10_000usize {
        let alpha = 0.05 / (k as f64).powf(0.3);
        states = diffuse(&states, &net, alpha).expect("sizes match");
        let d = disagreement(&states);
        if d > prev * (1.0 + 1e-12) {
            return CheckReport::new(
                "consensus",
                false,
                format!("disagreement increased at iteration {k}: {prev} -> {d}"),
            );
        }
        prev = d;
        if reached.is_none() && d < 1e-3 * initial {
            reached = Some(k);
        }
    }
    match reached {
        Some(k) => CheckReport::new(
            "consensus",
            true,
            format!("non-increasing; fell below 1e-3 of initial after {k} iterations"),
        ),
        None => CheckReport::new(
            "consensus",
            false,
            format!(
                "disagreement only reached {} of initial {initial} after 10000 iterations",
                prev / initial
            ),
        ),
    }
}

/// Monte Carlo calibration of the noise samplers: Laplace variance within 2%
/// of `2 / rate^2`, Cauchy median absolute value within 1% of the scale.
pub fn sampler_calibration_check(seed: u64, draws: usize) -> CheckReport {
    let mut r = rng::stream(seed, &[106]);
    let rate = 1.3;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..draws {
        let v = sample_laplace(&mut r, rate);
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / draws as f64;
    let var = sumsq / draws as f64 - mean * mean;
    let var_expect = 2.0 / (rate * rate);
    let var_err = (var - var_expect).abs() / var_expect;

    let gamma = 0.8;
    let mut abs: Vec<f64> = (0..draws)
        .map(|_| sample_cauchy(&mut r, gamma).abs())
        .collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = abs[draws / 2];
    let med_err = (median - gamma).abs() / gamma;

    CheckReport::new(
        "sampler-calibration",
        var_err < 0.02 && med_err < 0.01,
        format!(
            "laplace variance error {var_err:.4} (limit 0.02), cauchy median error {med_err:.4} (limit 0.01)"
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for report in run_all(2024) {
            assert!(report.passed, "{}: {}", report.name, report.detail);
        }
    }
}
