//! Decaying weight and step-size sequences.
//!
//! The diffusion weight and sub-gradient step at iteration `k >= 1` are
//! `a / k^tau_alpha` and `b / k^tau_beta`. The convergence theory wants
//! `0 < tau_alpha < tau_beta` and `1/2 < tau_beta <= 1`; the reference
//! experiments themselves violate that, so by default violations are only
//! recorded as warnings and the run proceeds. Strict mode turns them into
//! construction errors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule constant {name} must be positive, got {value}")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("schedule violates the decay conditions in strict mode: {0}")]
    StrictViolation(String),
}

/// The pair of decaying sequences driving a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Diffusion weight scale; `alpha_k = a / k^tau_alpha`.
    pub a: f64,
    pub tau_alpha: f64,
    /// Step-size scale; `beta_k = b / k^tau_beta`.
    pub b: f64,
    pub tau_beta: f64,
    /// When set, the decay conditions are enforced at construction.
    pub strict_mode: bool,
}

impl Schedule {
    pub fn new(
        a: f64,
        tau_alpha: f64,
        b: f64,
        tau_beta: f64,
        strict_mode: bool,
    ) -> Result<Self, ScheduleError> {
        if !a.is_finite() || a <= 0.0 {
            return Err(ScheduleError::NonPositiveConstant { name: "a", value: a });
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(ScheduleError::NonPositiveConstant { name: "b", value: b });
        }
        let s = Schedule {
            a,
            tau_alpha,
            b,
            tau_beta,
            strict_mode,
        };
        if strict_mode {
            let warnings = s.decay_warnings();
            if !warnings.is_empty() {
                return Err(ScheduleError::StrictViolation(warnings.join("; ")));
            }
        }
        Ok(s)
    }

    /// The schedule used by the reference experiments:
    /// `alpha_k = 0.3 / k^0.55`, `beta_k = 3.5 / k^0.5`. Note that it violates
    /// the decay conditions (recorded as warnings).
    pub fn reference() -> Self {
        Schedule::new(0.3, 0.55, 3.5, 0.5, false).expect("reference schedule is constructible")
    }

    /// A preset satisfying the decay conditions, for theory-faithful runs.
    pub fn decay_compliant() -> Self {
        Schedule::new(0.3, 0.55, 3.5, 0.75, true).expect("compliant schedule is constructible")
    }

    /// Diffusion weight `alpha_k = a / k^tau_alpha` for `k >= 1`.
    pub fn weight_at(&self, k: usize) -> f64 {
        assert!(k >= 1, "iterations are one-based");
        self.a / (k as f64).powf(self.tau_alpha)
    }

    /// Step size `beta_k = b / k^tau_beta` for `k >= 1`.
    pub fn step_at(&self, k: usize) -> f64 {
        assert!(k >= 1, "iterations are one-based");
        self.b / (k as f64).powf(self.tau_beta)
    }

    /// Human-readable descriptions of every decay-condition violation.
    pub fn decay_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if !(self.tau_alpha > 0.0) {
            warnings.push(format!("tau_alpha = {} is not positive", self.tau_alpha));
        }
        if !(self.tau_alpha < self.tau_beta) {
            warnings.push(format!(
                "tau_alpha = {} is not strictly below tau_beta = {}",
                self.tau_alpha, self.tau_beta
            ));
        }
        if !(self.tau_beta > 0.5 && self.tau_beta <= 1.0) {
            warnings.push(format!(
                "tau_beta = {} is not in (1/2, 1]",
                self.tau_beta
            ));
        }
        warnings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values_at_first_iterations() {
        let s = Schedule::reference();
        assert_eq!(s.weight_at(1), 0.3);
        assert_eq!(s.step_at(1), 3.5);
        assert!((s.step_at(49) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simple_powers() {
        let s = Schedule::new(1.0, 1.0, 1.0, 1.0, false).unwrap();
        assert!((s.weight_at(4) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn weight_is_nonincreasing() {
        let s = Schedule::reference();
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let w = s.weight_at(k);
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn step_decays_to_zero() {
        for tau_beta in [0.5, 0.75, 1.0] {
            let s = Schedule::new(3.5, 0.3, 3.5, tau_beta, false).unwrap();
            assert!(s.step_at(1_000_000) <= s.b * 1e-3);
        }
    }

    #[test]
    fn nonpositive_constants_rejected() {
        assert!(Schedule::new(0.0, 0.5, 1.0, 0.75, false).is_err());
        assert!(Schedule::new(1.0, 0.5, -1.0, 0.75, false).is_err());
        assert!(Schedule::new(f64::NAN, 0.5, 1.0, 0.75, false).is_err());
    }

    #[test]
    fn reference_schedule_warns_but_constructs() {
        let s = Schedule::reference();
        let warnings = s.decay_warnings();
        // tau_beta = 0.5 is not in (1/2, 1] and tau_alpha > tau_beta.
        assert_eq!(warnings.len(), 2, "{warnings:?}");
    }

    #[test]
    fn strict_mode_rejects_reference_parameters() {
        assert!(matches!(
            Schedule::new(0.3, 0.55, 3.5, 0.5, true),
            Err(ScheduleError::StrictViolation(_))
        ));
        assert!(Schedule::new(0.3, 0.55, 3.5, 0.75, true).is_ok());
    }
}
