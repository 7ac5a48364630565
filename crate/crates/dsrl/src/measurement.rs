//! Range measurements and the noise scenarios that corrupt them.
//!
//! Three corruption models are supported on top of exact ranges:
//!
//! - uniform outliers: with probability `p` the range is *replaced* by a
//!   `Uniform(0, upper)` draw;
//! - a two-component Laplacian mixture added to the range, the second
//!   (heavy) component firing 10% of the time by default;
//! - additive Cauchy noise with scale `gamma`.
//!
//! All samplers are inverse-CDF constructions over open-interval uniforms, so
//! outputs are always finite and reproducible from the provided stream.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::SensorNetwork;
use crate::point::Point;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("source dimension {source_dim} does not match network dimension {network_dim}")]
    DimensionMismatch {
        source_dim: usize,
        network_dim: usize,
    },
}

/// Per-sensor observed ranges plus provenance flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    /// Observed range per sensor; may be negative under additive noise.
    pub ranges: Vec<f64>,
    /// True where the scenario replaced or perturbed the exact range.
    pub corrupted: Vec<bool>,
    /// Label of the generating scenario.
    pub scenario_tag: String,
}

impl MeasurementSet {
    /// An uncorrupted set with the given exact ranges.
    pub fn exact(ranges: Vec<f64>) -> Self {
        let n = ranges.len();
        MeasurementSet {
            ranges,
            corrupted: vec![false; n],
            scenario_tag: "noiseless".into(),
        }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.ranges.iter().all(|r| r.is_finite())
    }
}

/// One of the supported corruption models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseScenario {
    Noiseless,
    /// Replace each range, independently with probability `p`, by a
    /// `Uniform(0, upper)` draw.
    UniformOutlier { p: f64, upper: f64 },
    /// Additive mixture of two zero-mean Laplacians with rates
    /// `lambda_1` and `lambda_1 / rate_ratio`, chosen with weights
    /// `(c1, c2)`. `lambda_1` is derived from `sigma`; see
    /// [`laplace_mixture_rates`].
    LaplaceMixture {
        sigma: f64,
        c1: f64,
        c2: f64,
        rate_ratio: f64,
        /// Use the variance-consistent rate rule instead of the default one.
        variance_consistent: bool,
    },
    /// Additive `Cauchy(0, gamma)` noise.
    Cauchy { gamma: f64 },
}

impl NoiseScenario {
    /// The default heavy-tailed Laplace mixture: weights 0.9/0.1, rate ratio
    /// 10, default rate rule.
    pub fn laplace_mixture(sigma: f64) -> Self {
        NoiseScenario::LaplaceMixture {
            sigma,
            c1: 0.9,
            c2: 0.1,
            rate_ratio: 10.0,
            variance_consistent: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            NoiseScenario::Noiseless => Ok(()),
            NoiseScenario::UniformOutlier { p, upper } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("outlier probability must be in [0, 1], got {p}"));
                }
                if !upper.is_finite() || upper <= 0.0 {
                    return Err(format!("outlier upper bound must be > 0, got {upper}"));
                }
                Ok(())
            }
            NoiseScenario::LaplaceMixture {
                sigma,
                c1,
                c2,
                rate_ratio,
                ..
            } => {
                if !sigma.is_finite() || sigma <= 0.0 {
                    return Err(format!("sigma must be > 0, got {sigma}"));
                }
                if c1 < 0.0 || c2 < 0.0 || (c1 + c2 - 1.0).abs() > 1e-12 {
                    return Err(format!("mixture weights must satisfy c1 + c2 = 1, got {c1} + {c2}"));
                }
                if !rate_ratio.is_finite() || rate_ratio <= 0.0 {
                    return Err(format!("rate_ratio must be > 0, got {rate_ratio}"));
                }
                Ok(())
            }
            NoiseScenario::Cauchy { gamma } => {
                if !gamma.is_finite() || gamma <= 0.0 {
                    return Err(format!("gamma must be > 0, got {gamma}"));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            NoiseScenario::Noiseless => "noiseless".into(),
            NoiseScenario::UniformOutlier { p, upper } => {
                format!("uniform-outlier(p={p}, upper={upper})")
            }
            NoiseScenario::LaplaceMixture {
                sigma,
                variance_consistent,
                ..
            } => {
                if *variance_consistent {
                    format!("laplace-mixture(sigma={sigma}, variance-consistent)")
                } else {
                    format!("laplace-mixture(sigma={sigma})")
                }
            }
            NoiseScenario::Cauchy { gamma } => format!("cauchy(gamma={gamma})"),
        }
    }

    /// Corrupt an uncorrupted measurement set according to the scenario.
    pub fn apply<R: Rng>(&self, base: &MeasurementSet, rng: &mut R) -> MeasurementSet {
        match *self {
            NoiseScenario::Noiseless => {
                let mut out = base.clone();
                out.scenario_tag = self.label();
                out
            }
            NoiseScenario::UniformOutlier { p, upper } => {
                apply_uniform_outliers(base, p, upper, rng)
            }
            NoiseScenario::LaplaceMixture {
                sigma,
                c1,
                c2,
                rate_ratio,
                variance_consistent,
            } => {
                let (l1, l2) = laplace_mixture_rates(sigma, c1, c2, rate_ratio, variance_consistent);
                apply_mixture_rates(base, l1, l2, c1, &self.label(), rng)
            }
            NoiseScenario::Cauchy { gamma } => apply_cauchy(base, gamma, rng),
        }
    }
}

/// Exact source-to-sensor ranges; `corrupted` all false.
pub fn true_ranges(
    net: &SensorNetwork,
    x_true: &Point,
) -> Result<MeasurementSet, MeasurementError> {
    if x_true.dim() != net.dimension() {
        return Err(MeasurementError::DimensionMismatch {
            source_dim: x_true.dim(),
            network_dim: net.dimension(),
        });
    }
    Ok(MeasurementSet::exact(
        net.positions()
            .iter()
            .map(|a| x_true.distance_to(a))
            .collect(),
    ))
}

/// Replace each range, independently with probability `p`, by a
/// `Uniform(0, upper)` draw. Kept ranges stay exact; `corrupted` records the
/// replacements.
pub fn apply_uniform_outliers<R: Rng>(
    base: &MeasurementSet,
    p: f64,
    upper: f64,
    rng: &mut R,
) -> MeasurementSet {
    assert!((0.0..=1.0).contains(&p), "outlier probability out of range");
    assert!(upper > 0.0, "outlier upper bound must be positive");
    debug_assert!(base.corrupted.iter().all(|&c| !c), "base must be uncorrupted");
    let mut ranges = Vec::with_capacity(base.len());
    let mut corrupted = Vec::with_capacity(base.len());
    for &d in &base.ranges {
        let u: f64 = rng.gen();
        if u < p {
            ranges.push(rng.gen_range(0.0..upper));
            corrupted.push(true);
        } else {
            ranges.push(d);
            corrupted.push(false);
        }
    }
    MeasurementSet {
        ranges,
        corrupted,
        scenario_tag: NoiseScenario::UniformOutlier { p, upper }.label(),
    }
}

/// Additive Laplace-mixture noise with the default weights and rate ratio.
pub fn apply_laplace_mixture<R: Rng>(
    base: &MeasurementSet,
    sigma: f64,
    rng: &mut R,
) -> MeasurementSet {
    NoiseScenario::laplace_mixture(sigma).apply(base, rng)
}

fn apply_mixture_rates<R: Rng>(
    base: &MeasurementSet,
    lambda1: f64,
    lambda2: f64,
    c1: f64,
    tag: &str,
    rng: &mut R,
) -> MeasurementSet {
    debug_assert!(base.corrupted.iter().all(|&c| !c), "base must be uncorrupted");
    let mut out = base.clone();
    for r in &mut out.ranges {
        *r += sample_laplace_mixture(rng, lambda1, lambda2, c1).noise;
    }
    out.corrupted = vec![true; base.len()];
    out.scenario_tag = tag.to_string();
    out
}

/// Additive `Cauchy(0, gamma)` noise on every range.
pub fn apply_cauchy<R: Rng>(base: &MeasurementSet, gamma: f64, rng: &mut R) -> MeasurementSet {
    assert!(gamma > 0.0, "Cauchy scale must be positive");
    debug_assert!(base.corrupted.iter().all(|&c| !c), "base must be uncorrupted");
    let mut out = base.clone();
    for r in &mut out.ranges {
        *r += sample_cauchy(rng, gamma);
    }
    out.corrupted = vec![true; base.len()];
    out.scenario_tag = NoiseScenario::Cauchy { gamma }.label();
    out
}

/// Rates `(lambda_1, lambda_2)` of the Laplace mixture.
///
/// With component densities `(lambda/2) exp(-lambda |v|)` the mixture variance
/// is `2 (c1 + c2 ratio^2) / lambda_1^2`. Two rate rules are supported:
///
/// - default: `lambda_1 = sqrt(sigma^2 / (c1 + c2 ratio^2))`, i.e.
///   `sqrt(sigma^2 / 10.9)` at the default weights;
/// - variance-consistent: `lambda_1 = sqrt(2 (c1 + c2 ratio^2)) / sigma`,
///   which makes the mixture variance exactly `sigma^2`.
pub fn laplace_mixture_rates(
    sigma: f64,
    c1: f64,
    c2: f64,
    rate_ratio: f64,
    variance_consistent: bool,
) -> (f64, f64) {
    assert!(sigma > 0.0, "sigma must be positive");
    let denom = c1 + c2 * rate_ratio * rate_ratio;
    let lambda1 = if variance_consistent {
        (2.0 * denom).sqrt() / sigma
    } else {
        (sigma * sigma / denom).sqrt()
    };
    (lambda1, lambda1 / rate_ratio)
}

/// Zero-mean Laplace draw with the given rate, via the inverse CDF
/// `v = -sign(u - 1/2) ln(1 - 2|u - 1/2|) / rate` over an open-interval
/// uniform.
pub fn sample_laplace<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    assert!(rate > 0.0, "Laplace rate must be positive");
    let u: f64 = rng.sample(Open01);
    let centered = u - 0.5;
    -centered.signum() * (1.0 - 2.0 * centered.abs()).ln() / rate
}

/// `Cauchy(0, gamma)` draw via `gamma * tan(pi (u - 1/2))` over an
/// open-interval uniform.
pub fn sample_cauchy<R: Rng>(rng: &mut R, gamma: f64) -> f64 {
    assert!(gamma > 0.0, "Cauchy scale must be positive");
    let u: f64 = rng.sample(Open01);
    gamma * (std::f64::consts::PI * (u - 0.5)).tan()
}

/// One draw from the two-component Laplace mixture, exposing which component
/// fired.
#[derive(Debug, Clone, Copy)]
pub struct MixtureDraw {
    /// 0 for the `c1` component, 1 for the heavy one.
    pub component: usize,
    pub noise: f64,
}

pub fn sample_laplace_mixture<R: Rng>(
    rng: &mut R,
    lambda1: f64,
    lambda2: f64,
    c1: f64,
) -> MixtureDraw {
    let u: f64 = rng.gen();
    if u < c1 {
        MixtureDraw {
            component: 0,
            noise: sample_laplace(rng, lambda1),
        }
    } else {
        MixtureDraw {
            component: 1,
            noise: sample_laplace(rng, lambda2),
        }
    }
}
