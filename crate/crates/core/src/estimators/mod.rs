//! Fitting procedures.
//!
//! Every routine is single-threaded and deterministic given its inputs and
//! `OptConfig::seed`.

mod least_squares;
mod median_of_means;
mod optim;
mod pareto;
mod poisson;
mod tmo;
mod znbp;

pub use least_squares::fit_least_squares;
pub use median_of_means::{
    fit_median_of_means, fit_median_of_means_blocks, geometric_median, mom_block_count, partition_blocks,
};
pub use optim::{projected_gradient_norm, ProjectedGradientOutcome};
pub use pareto::{fit_pareto_mle, pareto_objective};
pub use poisson::{
    fit_poisson_mle, fit_poisson_mle_iterative, poisson_closed_form_1d, poisson_nll, poisson_nll_gradient,
    poisson_nll_hessian_min_eig,
};
pub use tmo::{fit_tmo, tmo_objective, TmoLoss};
pub use znbp::{fit_znbp, znbp_example_gradient, znbp_nll, znbp_nll_gradient};

use std::fmt;
use std::str::FromStr;

use crate::linear_model::{FixedDesign, LinkLayer, ParamSpace, ParamVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { max_iters: 100_000, grad_tol: 1e-8, step_init: 1.0, seed: 0 }
    }
}

impl OptConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.grad_tol > 0.0) || !(self.step_init > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid optimizer config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Theta(ParamVector),
    Layer(LinkLayer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: Fitted,
    pub final_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity measure behind the method's stopping rule: the
    /// projected-gradient norm for smooth solvers, the Newton decrement for
    /// the barrier solver, the last relative objective change for the
    /// subgradient and mixture trainers, and 0 for closed forms.
    pub gradient_norm: f64,
}

impl FitReport {
    pub fn theta(&self) -> Option<&ParamVector> {
        match &self.params {
            Fitted::Theta(t) => Some(t),
            Fitted::Layer(_) => None,
        }
    }

    pub fn layer(&self) -> Option<&LinkLayer> {
        match &self.params {
            Fitted::Layer(l) => Some(l),
            Fitted::Theta(_) => None,
        }
    }
}

/// Names of the estimators the CLI and the trial runner can dispatch to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    LeastSquares,
    Tmo(TmoLoss),
    PoissonMle,
    ParetoMle,
    MedianOfMeans,
    Znbp,
}

impl EstimatorKind {
    /// Whether the estimator produces a linear `θ` comparable by excess risk.
    pub fn is_linear(&self) -> bool {
        !matches!(self, EstimatorKind::Znbp)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::LeastSquares => write!(f, "ls"),
            EstimatorKind::Tmo(TmoLoss::Mae) => write!(f, "tmo-mae"),
            EstimatorKind::Tmo(TmoLoss::Mape) => write!(f, "tmo-mape"),
            EstimatorKind::Tmo(TmoLoss::Huber(d)) => write!(f, "tmo-huber:{d}"),
            EstimatorKind::Tmo(TmoLoss::Pinball(q)) => write!(f, "tmo-pinball:{q}"),
            EstimatorKind::PoissonMle => write!(f, "poisson-mle"),
            EstimatorKind::ParetoMle => write!(f, "pareto-mle"),
            EstimatorKind::MedianOfMeans => write!(f, "mom"),
            EstimatorKind::Znbp => write!(f, "znbp"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    /// `tmo-huber` and `tmo-pinball` take an optional `:param` suffix
    /// (defaults δ = 1, q = 0.5).
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let param = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad parameter in estimator '{s}'"))),
            }
        };
        let kind = match head {
            "ls" => EstimatorKind::LeastSquares,
            "tmo-mae" => EstimatorKind::Tmo(TmoLoss::Mae),
            "tmo-mape" => EstimatorKind::Tmo(TmoLoss::Mape),
            "tmo-huber" => EstimatorKind::Tmo(TmoLoss::huber(param(1.0)?)?),
            "tmo-pinball" => EstimatorKind::Tmo(TmoLoss::pinball(param(0.5)?)?),
            "poisson-mle" => EstimatorKind::PoissonMle,
            "pareto-mle" => EstimatorKind::ParetoMle,
            "mom" => EstimatorKind::MedianOfMeans,
            "znbp" => EstimatorKind::Znbp,
            _ => return Err(Error::Parse(format!("unknown estimator '{s}'"))),
        };
        if arg.is_some() && !matches!(kind, EstimatorKind::Tmo(TmoLoss::Huber(_) | TmoLoss::Pinball(_))) {
            return Err(Error::Parse(format!("estimator '{head}' takes no parameter")));
        }
        Ok(kind)
    }
}

/// Settings beyond `OptConfig` that particular estimators need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub opt: OptConfig,
    /// Confidence parameter for median of means.
    pub delta: f64,
    /// Pareto tail `b`, required by `pareto-mle`.
    pub pareto_tail: Option<f64>,
    /// Pareto tail `α` of the ZNBP mixture.
    pub znbp_tail: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { opt: OptConfig::default(), delta: 0.05, pareto_tail: None, znbp_tail: 4.0 }
    }
}

/// Run the named estimator.
pub fn fit(
    kind: EstimatorKind,
    design: &FixedDesign,
    y: &[f64],
    space: &ParamSpace,
    opts: &FitOptions,
) -> Result<FitReport> {
    match kind {
        EstimatorKind::LeastSquares => fit_least_squares(design, y, space),
        EstimatorKind::Tmo(loss) => fit_tmo(design, y, loss, space, &opts.opt),
        EstimatorKind::PoissonMle => fit_poisson_mle(design, y, space, &opts.opt),
        EstimatorKind::ParetoMle => {
            let tail = opts
                .pareto_tail
                .ok_or_else(|| Error::InvalidParameter("pareto-mle needs a tail parameter b".into()))?;
            fit_pareto_mle(design, y, tail, space, &opts.opt)
        }
        EstimatorKind::MedianOfMeans => {
            let theta = fit_median_of_means(design, y, opts.delta, opts.opt.seed)?;
            Ok(FitReport {
                final_objective: least_squares::mean_squared_residual(design, y, &theta),
                params: Fitted::Theta(theta),
                iterations: 0,
                converged: true,
                gradient_norm: 0.0,
            })
        }
        EstimatorKind::Znbp => fit_znbp(design, y, opts.znbp_tail, &opts.opt),
    }
}

pub(crate) fn check_response(design: &FixedDesign, y: &[f64]) -> Result<()> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch { expected: design.n(), got: y.len() });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidResponse(format!("non-finite response at row {i}")));
    }
    Ok(())
}
