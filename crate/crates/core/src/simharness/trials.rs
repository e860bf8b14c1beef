use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use super::design::{generate, respond, DesignSpec, ResponseModel};
use crate::estimators::{fit, EstimatorKind, FitOptions, OptConfig};
use crate::linalg::spd_solve;
use crate::linear_model::{excess_risk, FixedDesign, ParamSpace, ParamVector};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub design: DesignSpec,
    pub model: ResponseModel,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
    pub parallel: bool,
    pub opt: OptConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub estimator: String,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub p99: f64,
    pub failures: usize,
    /// Excess risk of every successful trial, in trial order.
    pub risks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub rows: Vec<RiskRow>,
}

/// Nearest-rank quantile of sorted data.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

impl RiskRow {
    fn from_outcomes(estimator: String, outcomes: impl Iterator<Item = Option<f64>>) -> Self {
        let mut risks = Vec::new();
        let mut failures = 0;
        for o in outcomes {
            match o {
                Some(r) => risks.push(r),
                None => failures += 1,
            }
        }
        let mut sorted = risks.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = if risks.is_empty() { f64::NAN } else { risks.iter().sum::<f64>() / risks.len() as f64 };
        RiskRow {
            estimator,
            mean,
            median: nearest_rank(&sorted, 0.5),
            p90: nearest_rank(&sorted, 0.9),
            p99: nearest_rank(&sorted, 0.99),
            failures,
            risks,
        }
    }
}

impl RiskTable {
    pub fn row(&self, estimator: &str) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }

    pub const CSV_HEADER: &'static str = "n,estimator,mean,median,p90,p99,failures";

    /// CSV body lines (no header).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", self.n, r.estimator, r.mean, r.median, r.p90, r.p99, r.failures);
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("### n = {}, d = {}, trials = {}\n\n", self.n, self.d, self.trials);
        out.push_str("| estimator | mean | median | p90 | p99 | failures |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {} |",
                r.estimator, r.mean, r.median, r.p90, r.p99, r.failures
            );
        }
        out
    }
}

/// Best linear approximation of the conditional mean, `Σ⁻¹ (1/n) Σ m(x_i) x_i`.
fn reference_theta(model: &ResponseModel, design: &FixedDesign) -> Result<ParamVector> {
    if let Some(t) = model.theta_star() {
        return Ok(t.clone());
    }
    let means = design.rows().map(|x| model.mean_at(x)).collect::<Result<Vec<_>>>()?;
    let b = nalgebra::DVector::from_vec(design.transpose_mul(&means)) / design.n() as f64;
    Ok(spd_solve(&design.covariance(), &b)?.into())
}

pub fn run_trials(cfg: &TrialConfig) -> Result<RiskTable> {
    if cfg.trials == 0 || cfg.estimators.is_empty() {
        return Err(Error::InvalidParameter("need at least one trial and one estimator".into()));
    }
    if let Some(k) = cfg.estimators.iter().find(|k| !k.is_linear()) {
        return Err(Error::InvalidParameter(format!("estimator '{k}' has no linear parameter to score")));
    }
    let design = generate(&cfg.design, cfg.model.theta_star())?;
    let theta_ref = reference_theta(&cfg.model, &design)?;
    let sigma = design.covariance();
    let space = ParamSpace::new(cfg.design.radius, cfg.design.margin)?;
    let base = FitOptions { opt: cfg.opt, delta: cfg.delta, pareto_tail: cfg.model.pareto_tail(), ..FitOptions::default() };

    let one = |t: usize| -> Result<Vec<Option<f64>>> {
        let mut stream = rng::split(cfg.seed, t as u64);
        let y = respond(&cfg.model, &design, &mut stream)?;
        let opts = FitOptions { opt: OptConfig { seed: stream.random(), ..base.opt }, ..base };
        Ok(cfg
            .estimators
            .iter()
            .map(|&kind| {
                let report = fit(kind, &design, &y, &space, &opts).ok()?;
                excess_risk(report.theta()?, &theta_ref, &sigma).ok()
            })
            .collect())
    };
    let outcomes: Vec<Vec<Option<f64>>> = if cfg.parallel {
        (0..cfg.trials).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.trials).map(one).collect::<Result<_>>()?
    };

    let rows = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(j, kind)| RiskRow::from_outcomes(kind.to_string(), outcomes.iter().map(|o| o[j])))
        .collect();
    Ok(RiskTable { n: design.n(), d: design.d(), trials: cfg.trials, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simharness::DesignKind;

    fn config(model: ResponseModel, estimators: &[&str], trials: usize) -> TrialConfig {
        let d = model.theta_star().map_or(1, |t| t.dim());
        TrialConfig {
            design: DesignSpec { kind: DesignKind::Gaussian, n: 300, d, r_cap: 100.0, margin: 0.1, radius: 100.0, seed: 5 },
            model,
            estimators: estimators.iter().map(|s| s.parse().unwrap()).collect(),
            trials,
            delta: 0.05,
            seed: 17,
            parallel: true,
            opt: OptConfig::default(),
        }
    }

    #[test]
    fn noise_free_model_has_zero_risk() {
        let theta = ParamVector::new(vec![1.0, 2.0]).unwrap();
        let cfg = config(ResponseModel::Deterministic { theta_star: theta }, &["ls", "tmo-huber"], 3);
        let table = run_trials(&cfg).unwrap();
        assert_eq!(table.row("ls").unwrap().failures, 0);
        assert!(table.row("ls").unwrap().p99 < 1e-20);
        assert!(table.row("tmo-huber:1").unwrap().p99 < 1e-8);
    }

    #[test]
    fn parallel_equals_sequential_and_is_deterministic() {
        let theta = ParamVector::new(vec![1.0, 1.0]).unwrap();
        let mut cfg = config(ResponseModel::Poisson { theta_star: theta }, &["ls", "poisson-mle", "tmo-mae"], 8);
        let a = run_trials(&cfg).unwrap();
        assert_eq!(a, run_trials(&cfg).unwrap());
        cfg.parallel = false;
        assert_eq!(a, run_trials(&cfg).unwrap());
        for row in &a.rows {
            assert!(row.median <= row.p90 && row.p90 <= row.p99);
        }
    }

    #[test]
    fn failures_are_counted() {
        // pareto-mle has no tail under a Poisson model, so every fit fails
        let theta = ParamVector::new(vec![1.0]).unwrap();
        let cfg = config(ResponseModel::Poisson { theta_star: theta }, &["ls", "pareto-mle"], 4);
        let table = run_trials(&cfg).unwrap();
        assert_eq!(table.row("ls").unwrap().failures, 0);
        assert_eq!(table.row("pareto-mle").unwrap().failures, 4);
        assert!(table.row("pareto-mle").unwrap().median.is_nan());
    }

    #[test]
    fn rejects_znbp_estimator() {
        let theta = ParamVector::new(vec![1.0]).unwrap();
        assert!(run_trials(&config(ResponseModel::Poisson { theta_star: theta }, &["znbp"], 1)).is_err());
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.5), 5.0);
        assert_eq!(nearest_rank(&v, 0.9), 9.0);
        assert_eq!(nearest_rank(&v, 0.99), 10.0);
    }
}
