//! Centralized reference solvers.
//!
//! Two single-estimate solvers anchor the distributed results: plain gradient
//! descent on the squared-residual objective (the non-robust contrast) and a
//! centralized sub-gradient method on the absolute-residual objective (the
//! consensus-free accuracy bound). Both report their best-objective iterate,
//! since neither descent is monotone under decaying steps.

use crate::geometry::SensorNetwork;
use crate::measurement::MeasurementSet;
use crate::point::Point;
use crate::schedule::Schedule;
use crate::solver::{global_objective, local_subgradient, SolverError};

/// Outcome of a centralized solve.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    /// Best-objective iterate.
    pub estimate: Point,
    /// Objective at the initial point and after each iteration
    /// (`iterations + 1` values).
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

/// The squared-residual objective `(1/L) sum_i (||x - a_i|| - d_i)^2`.
pub fn l2_objective(net: &SensorNetwork, m: &MeasurementSet, x: &Point) -> f64 {
    let l = net.len() as f64;
    net.positions()
        .iter()
        .zip(&m.ranges)
        .map(|(a, &d)| {
            let r = x.distance_to(a) - d;
            r * r / l
        })
        .sum()
}

/// Gradient of [`l2_objective`]; each sensor contributes
/// `(2/L)(||x - a_i|| - d_i)(x - a_i)/||x - a_i||`, zero at `x = a_i`.
pub fn l2_gradient(net: &SensorNetwork, m: &MeasurementSet, x: &Point) -> Point {
    let l = net.len() as f64;
    let mut g = Point::zeros(x.dim());
    for (a, &d) in net.positions().iter().zip(&m.ranges) {
        let dist = x.distance_to(a);
        if dist == 0.0 {
            continue;
        }
        let scale = 2.0 * (dist - d) / (l * dist);
        for c in 0..x.dim() {
            g[c] += scale * (x[c] - a[c]);
        }
    }
    g
}

/// Sum of the per-sensor sub-gradients of the absolute-residual objective.
pub fn l1_subgradient_sum(net: &SensorNetwork, m: &MeasurementSet, x: &Point) -> Point {
    let l = net.len();
    let mut g = Point::zeros(x.dim());
    for (a, &d) in net.positions().iter().zip(&m.ranges) {
        g.add_scaled(1.0, &local_subgradient(x, a, d, l));
    }
    g
}

/// Gradient descent on the squared-residual objective with step
/// `step0 / sqrt(k)`, returning the best-objective iterate.
pub fn centralized_l2_descent(
    net: &SensorNetwork,
    m: &MeasurementSet,
    step0: f64,
    iters: usize,
    init: Point,
) -> Result<BaselineResult, SolverError> {
    check_instance(net, m, &init)?;
    best_iterate_descent(
        iters,
        init,
        |x| l2_objective(net, m, x),
        |k, x| {
            let step = step0 / (k as f64).sqrt();
            (step, l2_gradient(net, m, x))
        },
    )
}

/// Centralized sub-gradient descent on the absolute-residual objective with
/// the schedule's step sizes, returning the best-objective iterate.
pub fn centralized_l1_subgradient(
    net: &SensorNetwork,
    m: &MeasurementSet,
    schedule: &Schedule,
    iters: usize,
    init: Point,
) -> Result<BaselineResult, SolverError> {
    check_instance(net, m, &init)?;
    best_iterate_descent(
        iters,
        init,
        |x| global_objective(net, m, x).expect("sizes checked"),
        |k, x| (schedule.step_at(k), l1_subgradient_sum(net, m, x)),
    )
}

fn check_instance(net: &SensorNetwork, m: &MeasurementSet, init: &Point) -> Result<(), SolverError> {
    if m.len() != net.len() {
        return Err(SolverError::SizeMismatch(format!(
            "{} measurements vs {} nodes",
            m.len(),
            net.len()
        )));
    }
    if init.dim() != net.dimension() {
        return Err(SolverError::SizeMismatch(format!(
            "initial point dimension {} vs network dimension {}",
            init.dim(),
            net.dimension()
        )));
    }
    Ok(())
}

fn best_iterate_descent<O, D>(
    iters: usize,
    init: Point,
    objective: O,
    direction: D,
) -> Result<BaselineResult, SolverError>
where
    O: Fn(&Point) -> f64,
    D: Fn(usize, &Point) -> (f64, Point),
{
    let mut x = init;
    let mut objective_trace = Vec::with_capacity(iters + 1);
    let mut best_obj = objective(&x);
    let mut best = x.clone();
    objective_trace.push(best_obj);
    for k in 1..=iters {
        let (step, dir) = direction(k, &x);
        x.add_scaled(-step, &dir);
        if !x.is_finite() {
            return Err(SolverError::NonFiniteState { iteration: k + 1 });
        }
        let obj = objective(&x);
        objective_trace.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best = x.clone();
        }
    }
    Ok(BaselineResult {
        estimate: best,
        objective_trace,
        iterations: iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_network, reference_params, NetworkParams};
    use crate::measurement::true_ranges;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn l2_stationary_at_exact_fit() {
        let net = generate_network(41, &reference_params()).unwrap();
        let x_true = Point::new(vec![0.5, 1.0, -1.5]);
        let m = true_ranges(&net, &x_true).unwrap();
        let res = centralized_l2_descent(&net, &m, 1.0, 10, x_true.clone()).unwrap();
        assert_eq!(res.estimate, x_true);
        assert!(res.objective_trace.iter().all(|&o| o == 0.0));
    }

    #[test]
    fn l2_single_sensor_projects_onto_sphere() {
        // Both sensors at the origin with unit range: the optimum is the unit
        // sphere, and from (2, 0, 0) descent lands on it.
        let net = generate_network(
            0,
            &NetworkParams {
                nodes: 2,
                dimension: 3,
                half_width: 0.0,
                connect_radius: 1.0,
                min_degree: 1,
                max_degree: 1,
                max_attempts: 1,
            },
        )
        .unwrap();
        let m = crate::measurement::MeasurementSet::exact(vec![1.0, 1.0]);
        let res =
            centralized_l2_descent(&net, &m, 0.5, 200, Point::new(vec![2.0, 0.0, 0.0])).unwrap();
        assert!(
            *res.objective_trace.last().unwrap() >= 0.0
                && res.objective_trace.iter().cloned().fold(f64::MAX, f64::min) < 1e-4
        );
        // Closed-form oracle: the projection of the start onto the sphere.
        assert!((res.estimate.norm() - 1.0).abs() < 1e-2);
        assert!((res.estimate[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn l2_gradient_matches_finite_differences() {
        let net = generate_network(42, &reference_params()).unwrap();
        let mut r = rng::stream(43, &[]);
        let x_true = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
        let m = true_ranges(&net, &x_true).unwrap();
        let h = 1e-6;
        for _ in 0..100 {
            let x = Point::new((0..3).map(|_| r.gen_range(-6.0..6.0)).collect());
            // Keep clear of the anchors, where the objective is non-smooth.
            if net.positions().iter().any(|a| x.distance_to(a) < 1e-3) {
                continue;
            }
            let g = l2_gradient(&net, &m, &x);
            let mut fd = Point::zeros(3);
            for d in 0..3 {
                let mut plus = x.clone();
                plus[d] += h;
                let mut minus = x.clone();
                minus[d] -= h;
                fd[d] = (l2_objective(&net, &m, &plus) - l2_objective(&net, &m, &minus))
                    / (2.0 * h);
            }
            let rel = fd.minus(&g).norm() / g.norm().max(1e-12);
            assert!(rel < 1e-5, "relative error {rel}");
        }
    }

    #[test]
    fn l1_stationary_at_truth_on_noiseless_instance() {
        let net = generate_network(44, &reference_params()).unwrap();
        let x_true = Point::new(vec![-1.0, 2.0, 0.0]);
        let m = true_ranges(&net, &x_true).unwrap();
        let res =
            centralized_l1_subgradient(&net, &m, &Schedule::reference(), 25, x_true.clone())
                .unwrap();
        assert_eq!(res.estimate, x_true);
    }

    #[test]
    fn zero_iterations_returns_init() {
        let net = generate_network(45, &reference_params()).unwrap();
        let x_true = Point::new(vec![0.0, 0.0, 1.0]);
        let m = true_ranges(&net, &x_true).unwrap();
        let init = Point::new(vec![2.0, 2.0, 2.0]);
        let res =
            centralized_l1_subgradient(&net, &m, &Schedule::reference(), 0, init.clone()).unwrap();
        assert_eq!(res.estimate, init);
        assert_eq!(res.objective_trace.len(), 1);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn l1_drives_noiseless_objective_near_zero() {
        let net = generate_network(46, &reference_params()).unwrap();
        let mut r = rng::stream(47, &[]);
        let x_true = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
        let m = true_ranges(&net, &x_true).unwrap();
        let init = Point::new((0..3).map(|_| r.gen_range(-3.0..3.0)).collect());
        let res =
            centralized_l1_subgradient(&net, &m, &Schedule::reference(), 3000, init).unwrap();
        let best = global_objective(&net, &m, &res.estimate).unwrap();
        assert!(best < 1e-2, "best objective {best}");
    }

    #[test]
    fn best_objective_is_nonincreasing_in_iteration_budget() {
        let net = generate_network(48, &reference_params()).unwrap();
        let x_true = Point::new(vec![1.0, 1.0, 1.0]);
        let m = true_ranges(&net, &x_true).unwrap();
        let init = Point::new(vec![-2.0, 0.0, 2.0]);
        let mut prev = f64::INFINITY;
        for iters in [0, 10, 100, 1000] {
            let res =
                centralized_l1_subgradient(&net, &m, &Schedule::reference(), iters, init.clone())
                    .unwrap();
            let best = global_objective(&net, &m, &res.estimate).unwrap();
            assert!(best <= prev + 1e-15);
            prev = best;
        }
    }

    #[test]
    fn objective_trace_length_matches_iterations() {
        let net = generate_network(49, &reference_params()).unwrap();
        let x_true = Point::zeros(3);
        let m = true_ranges(&net, &x_true).unwrap();
        let res = centralized_l2_descent(&net, &m, 1.0, 17, Point::new(vec![1.0, 1.0, 1.0]))
            .unwrap();
        assert_eq!(res.objective_trace.len(), res.iterations + 1);
        assert!(res.objective_trace.iter().all(|o| o.is_finite()));
    }
}
