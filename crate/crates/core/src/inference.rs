//! Post-hoc metric-optimal prediction from a fitted conditional distribution.
//!
//! Draw `S` samples from the predictive mixture, then read off the statistic
//! that minimizes the target metric: the mean for squared error, the lower
//! median for absolute error, an empirical quantile for pinball losses, and a
//! `y^β`-reweighted median for relative-error losses `|1 − (y/ŷ)^β|`.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{Distribution, ZnbpMixture};
use crate::linear_model::LinkLayer;
use crate::metrics::is_zero;
use crate::rng;
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricTarget {
    Mse,
    Rmse,
    Mae,
    Wape,
    /// Same statistic as `BetaLoss(-1.0)`.
    Mape,
    Quantile(f64),
    BetaLoss(f64),
}

impl MetricTarget {
    pub fn quantile(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(Self::Quantile(q))
    }

    pub fn beta(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("β must be finite, got {beta}")));
        }
        Ok(Self::BetaLoss(beta))
    }
}

impl fmt::Display for MetricTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricTarget::Mse => write!(f, "mse"),
            MetricTarget::Rmse => write!(f, "rmse"),
            MetricTarget::Mae => write!(f, "mae"),
            MetricTarget::Wape => write!(f, "wape"),
            MetricTarget::Mape => write!(f, "mape"),
            MetricTarget::Quantile(q) => write!(f, "quantile:{q}"),
            MetricTarget::BetaLoss(b) => write!(f, "beta:{b}"),
        }
    }
}

impl FromStr for MetricTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown metric target '{s}'"));
        match s.split_once(':') {
            None => match s {
                "mse" => Ok(Self::Mse),
                "rmse" => Ok(Self::Rmse),
                "mae" => Ok(Self::Mae),
                "wape" => Ok(Self::Wape),
                "mape" => Ok(Self::Mape),
                _ => Err(bad()),
            },
            Some((head, arg)) => {
                let v: f64 = arg.parse().map_err(|_| bad())?;
                match head {
                    "quantile" => Self::quantile(v).map_err(|e| Error::Parse(e.to_string())),
                    "beta" => Self::beta(v).map_err(|e| Error::Parse(e.to_string())),
                    _ => Err(bad()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSamples {
    values: Vec<f64>,
    seed: u64,
}

impl PredictiveSamples {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("need at least one predictive sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("predictive samples must be finite".into()));
        }
        Ok(Self { values, seed })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn draw_predictive(dist: &ZnbpMixture, samples: usize, seed: u64) -> Result<PredictiveSamples> {
    let mut r = rng::stream(seed);
    let values = (0..samples).map(|_| dist.sample(&mut r)).collect();
    PredictiveSamples::new(values, seed)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Nearest-rank empirical quantile: the `⌈qS⌉`-th smallest sample.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let s = sorted.len();
    let rank = ((q * s as f64).ceil() as usize).clamp(1, s);
    sorted[rank - 1]
}

/// Median of the samples reweighted by `s^β`; exact zeros are dropped when
/// `β < 0`. Returns the first sorted sample at which the cumulative weight
/// reaches half the total.
fn weighted_median(values: &[f64], beta: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|v| beta >= 0.0 || !is_zero(**v))
        .map(|&v| (v, v.powf(beta)))
        .collect();
    if pts.is_empty() {
        return Err(Error::NoPositiveMass);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NoPositiveMass);
    }
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &(v, w) in &pts {
        cum += w;
        if cum >= half {
            return Ok(v);
        }
    }
    Ok(pts[pts.len() - 1].0)
}

pub fn statistic(samples: &PredictiveSamples, target: MetricTarget) -> Result<f64> {
    let v = samples.values();
    match target {
        MetricTarget::Mse | MetricTarget::Rmse => Ok(v.iter().sum::<f64>() / v.len() as f64),
        MetricTarget::Mae | MetricTarget::Wape => Ok(nearest_rank(&sorted(v), 0.5)),
        MetricTarget::Quantile(q) => Ok(nearest_rank(&sorted(v), q)),
        MetricTarget::Mape => weighted_median(v, -1.0),
        MetricTarget::BetaLoss(beta) => weighted_median(v, beta),
    }
}

/// Metric-optimal point prediction for features `x` under a fitted layer.
pub fn point_predict(layer: &LinkLayer, x: &[f64], target: MetricTarget, samples: usize, seed: u64) -> Result<f64> {
    let dist = layer.mixture_at(x)?;
    statistic(&draw_predictive(&dist, samples, seed)?, target)
}
