//! Dataset-level evaluation metrics.
//!
//! - MSE `(1/n) Σ (ŷ−y)²`, RMSE its square root
//! - MAE `(1/n) Σ |ŷ−y|`
//! - WAPE `Σ |ŷ−y| / Σ |y|`
//! - MAPE `(1/n) Σ_{y≠0} |1 − ŷ/y|` (note: divided by the full `n`)
//! - Huber, averaged over examples
//! - normalized quantile loss `Σ [2ρ(y−ŷ)₊ + 2(1−ρ)(ŷ−y)₊] / Σ |y|`

use std::fmt;
use std::str::FromStr;

use crate::distributions::ZERO_TOL;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Mse,
    Rmse,
    Mae,
    Wape,
    Mape,
    Huber(f64),
    Nql(f64),
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Mse => write!(f, "mse"),
            Metric::Rmse => write!(f, "rmse"),
            Metric::Mae => write!(f, "mae"),
            Metric::Wape => write!(f, "wape"),
            Metric::Mape => write!(f, "mape"),
            Metric::Huber(d) => write!(f, "huber:{d}"),
            Metric::Nql(r) => write!(f, "nql:{r}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let param = |name: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::Parse(format!("metric {name} needs a parameter, e.g. {name}:0.5")))?
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad parameter in metric '{s}'")))
        };
        let m = match head {
            "mse" => Metric::Mse,
            "rmse" => Metric::Rmse,
            "mae" => Metric::Mae,
            "wape" => Metric::Wape,
            "mape" => Metric::Mape,
            "huber" => Metric::Huber(param("huber")?),
            "nql" => Metric::Nql(param("nql")?),
            _ => return Err(Error::Parse(format!("unknown metric '{s}'"))),
        };
        match m {
            Metric::Huber(d) if !(d > 0.0) => Err(Error::Parse(format!("huber delta must be positive, got {d}"))),
            Metric::Nql(r) if !(r > 0.0 && r < 1.0) => Err(Error::Parse(format!("nql level must lie in (0,1), got {r}"))),
            _ if arg.is_some() && !matches!(m, Metric::Huber(_) | Metric::Nql(_)) => {
                Err(Error::Parse(format!("metric '{head}' takes no parameter")))
            }
            _ => Ok(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub name: String,
    pub value: f64,
    pub n_used: usize,
}

pub fn huber(residual: f64, delta: f64) -> f64 {
    let a = residual.abs();
    if a <= delta {
        0.5 * residual * residual
    } else {
        delta * a - 0.5 * delta * delta
    }
}

/// `q (y−ŷ)₊ + (1−q)(ŷ−y)₊`.
pub fn pinball(y: f64, yhat: f64, q: f64) -> f64 {
    if y >= yhat {
        q * (y - yhat)
    } else {
        (1.0 - q) * (yhat - y)
    }
}

#[inline]
pub(crate) fn is_zero(y: f64) -> bool {
    y.abs() <= ZERO_TOL
}

pub fn evaluate(metric: Metric, y: &[f64], yhat: &[f64]) -> Result<MetricValue> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: yhat.len() });
    }
    if y.is_empty() {
        return Err(Error::InvalidParameter("metrics need at least one example".into()));
    }
    let n = y.len();
    let nf = n as f64;
    let pairs = || y.iter().copied().zip(yhat.iter().copied());
    let abs_total = || y.iter().map(|v| v.abs()).sum::<f64>();

    let (value, n_used) = match metric {
        Metric::Mse => (pairs().map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / nf, n),
        Metric::Rmse => ((pairs().map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / nf).sqrt(), n),
        Metric::Mae => (pairs().map(|(a, b)| (b - a).abs()).sum::<f64>() / nf, n),
        Metric::Wape => {
            let denom = abs_total();
            if denom == 0.0 {
                return Err(Error::WapeUndefined);
            }
            (pairs().map(|(a, b)| (b - a).abs()).sum::<f64>() / denom, n)
        }
        Metric::Mape => {
            let used = y.iter().filter(|v| !is_zero(**v)).count();
            if used == 0 {
                return Err(Error::MapeUndefined);
            }
            let s: f64 = pairs().filter(|(a, _)| !is_zero(*a)).map(|(a, b)| (1.0 - b / a).abs()).sum();
            (s / nf, used)
        }
        Metric::Huber(delta) => (pairs().map(|(a, b)| huber(a - b, delta)).sum::<f64>() / nf, n),
        Metric::Nql(rho) => {
            let denom = abs_total();
            if denom == 0.0 {
                return Err(Error::WapeUndefined);
            }
            let s: f64 = pairs()
                .map(|(a, b)| if a >= b { 2.0 * rho * (a - b) } else { 2.0 * (1.0 - rho) * (b - a) })
                .sum();
            (s / denom, n)
        }
    };
    Ok(MetricValue { name: metric.to_string(), value, n_used })
}
