use nalgebra::DVector;

use super::optim::minimize;
use super::{check_response, FitReport, Fitted, OptConfig};
use crate::linalg::spd_solve;
use crate::linear_model::{project, FixedDesign, ParamSpace, ParamVector, FEAS_TOL};
use crate::{Error, Result};

pub(crate) const RANK_TOL: f64 = 1e-12;

pub(crate) fn mean_squared_residual(design: &FixedDesign, y: &[f64], theta: &ParamVector) -> f64 {
    design
        .predict(theta)
        .iter()
        .zip(y)
        .map(|(p, v)| (v - p) * (v - p))
        .sum::<f64>()
        / design.n() as f64
}

/// Unconstrained normal-equation solution `(XᵀX)⁻¹ Xᵀ y`.
pub(crate) fn unconstrained_ls(design: &FixedDesign, y: &[f64]) -> Result<ParamVector> {
    check_response(design, y)?;
    let eig = design.covariance_eigen();
    if eig.min() <= RANK_TOL {
        return Err(Error::RankDeficient(eig.min()));
    }
    let sigma = design.covariance();
    let n = design.n() as f64;
    let b = DVector::from_iterator(design.d(), design.transpose_mul(y).into_iter().map(|v| v / n));
    Ok(spd_solve(&sigma, &b)?.into())
}

/// Least squares over `Θ`: the normal-equation solution when it is feasible,
/// otherwise projected gradient on the quadratic started from its projection.
pub fn fit_least_squares(design: &FixedDesign, y: &[f64], space: &ParamSpace) -> Result<FitReport> {
    let theta = unconstrained_ls(design, y)?;
    if space.contains(&theta, design, FEAS_TOL) {
        return Ok(FitReport {
            final_objective: mean_squared_residual(design, y, &theta),
            params: Fitted::Theta(theta),
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
        });
    }

    let sigma = design.covariance();
    let n = design.n() as f64;
    let b = DVector::from_iterator(design.d(), design.transpose_mul(y).into_iter().map(|v| v / n));
    let c = y.iter().map(|v| v * v).sum::<f64>() / n;
    let value = |t: &ParamVector| {
        let tv = t.to_dvector();
        (tv.transpose() * &sigma * &tv)[(0, 0)] - 2.0 * b.dot(&tv) + c
    };
    let eval = |t: &ParamVector| {
        let tv = t.to_dvector();
        let g = 2.0 * (&sigma * &tv - &b);
        (value(t), g.iter().copied().collect())
    };
    let start = project(&theta, space, design)?;
    let out = minimize(start, eval, value, |t| project(t, space, design), &OptConfig::default())?;
    Ok(FitReport {
        final_objective: mean_squared_residual(design, y, &out.theta),
        params: Fitted::Theta(out.theta),
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.pg_norm,
    })
}
