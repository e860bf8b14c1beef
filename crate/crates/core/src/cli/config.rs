//! `key = value` experiment files for `simulate`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::estimators::{EstimatorKind, OptConfig};
use crate::linear_model::{LinkLayer, ParamVector};
use crate::simharness::{DesignKind, DesignSpec, ResponseModel, TrialConfig};
use crate::{Error, Result};

const KEYS: &[&str] = &[
    "design.kind",
    "design.n",
    "design.d",
    "design.eps",
    "design.fraction",
    "design.magnitude",
    "design.gamma",
    "design.w",
    "design.r_cap",
    "model.kind",
    "model.b",
    "model.alpha",
    "model.theta_star",
    "model.layer",
    "estimators",
    "trials",
    "delta",
    "seed",
    "parallel",
    "output.path",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// One trial configuration per design size.
    pub runs: Vec<TrialConfig>,
    pub output_path: Option<PathBuf>,
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| v.parse().map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{v}'"))))
            .transpose()
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{s}'"))))
                    .collect()
            })
            .transpose()
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected 'key = value'", no + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Parse(format!("unknown config key '{key}'")));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("config key '{key}' given twice")));
        }
    }
    let e = Entries(map);

    let seed: u64 = e.get("seed")?.ok_or_else(|| Error::Parse("config key 'seed' is required".into()))?;
    let theta: Option<Vec<f64>> = e.list("model.theta_star")?;
    let d = e.or("design.d", theta.as_ref().map_or(1, Vec::len))?;
    let kind = match e.or("design.kind", "gaussian".to_string())?.as_str() {
        "gaussian" => DesignKind::Gaussian,
        "skewed_1d" => DesignKind::Skewed1d { eps: e.or("design.eps", 0.25)? },
        "heavy_norm" => DesignKind::HeavyNorm {
            fraction: e.or("design.fraction", 0.05)?,
            magnitude: e.or("design.magnitude", 10.0)?,
        },
        other => return Err(Error::Parse(format!("unknown design.kind '{other}'"))),
    };
    let theta_star = ParamVector::new(theta.unwrap_or_else(|| vec![1.0; d]))?;
    let model = match e.or("model.kind", "poisson".to_string())?.as_str() {
        "poisson" => ResponseModel::Poisson { theta_star },
        "pareto" => ResponseModel::Pareto {
            theta_star,
            tail: e.get("model.b")?.ok_or_else(|| Error::Parse("pareto model needs model.b".into()))?,
        },
        "znbp" => {
            let weights = e.list("model.layer")?.ok_or_else(|| Error::Parse("znbp model needs model.layer".into()))?;
            ResponseModel::Znbp { layer: LinkLayer::new(d, weights, e.or("model.alpha", 4.0)?)? }
        }
        other => return Err(Error::Parse(format!("unknown model.kind '{other}'"))),
    };
    let estimators: Vec<EstimatorKind> = e
        .list::<String>("estimators")?
        .ok_or_else(|| Error::Parse("config key 'estimators' is required".into()))?
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = e.list("design.n")?.ok_or_else(|| Error::Parse("config key 'design.n' is required".into()))?;
    let runs = sizes
        .into_iter()
        .map(|n| -> Result<TrialConfig> {
            Ok(TrialConfig {
                design: DesignSpec {
                    kind,
                    n,
                    d,
                    r_cap: e.or("design.r_cap", 1e6)?,
                    margin: e.or("design.gamma", 1e-6)?,
                    radius: e.or("design.w", 1e6)?,
                    seed,
                },
                model: model.clone(),
                estimators: estimators.clone(),
                trials: e.or("trials", 100)?,
                delta: e.or("delta", 0.05)?,
                seed,
                parallel: e.or("parallel", true)?,
                opt: OptConfig::with_seed(seed),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentConfig { runs, output_path: e.get::<String>("output.path")?.map(PathBuf::from) })
}
