//! Target-metric optimization for linear predictors by projected subgradient
//! descent with `η_t = step_init/√t`.
//!
//! Iterates are averaged over epochs of doubling length `[2^k, 2^(k+1))`;
//! each epoch average is feasible (Θ is convex) and is scored on the full
//! objective. The best of the starting point and the epoch averages is
//! returned, and the run stops once successive epoch averages agree to a
//! relative `TMO_REL_TOL`.

use super::least_squares::unconstrained_ls;
use super::{check_response, FitReport, Fitted, OptConfig};
use crate::linalg::dot;
use crate::linear_model::{project, FixedDesign, ParamSpace, ParamVector};
use crate::metrics::{huber, is_zero, pinball};
use crate::{Error, Result};

const TMO_REL_TOL: f64 = 1e-7;
const MIN_EPOCHS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TmoLoss {
    Mae,
    Mape,
    Huber(f64),
    Pinball(f64),
}

impl TmoLoss {
    pub fn huber(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("huber delta must be positive, got {delta}")));
        }
        Ok(Self::Huber(delta))
    }

    pub fn pinball(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("pinball level must lie in (0,1), got {q}")));
        }
        Ok(Self::Pinball(q))
    }

    fn loss(&self, y: f64, yhat: f64) -> f64 {
        match *self {
            TmoLoss::Mae => (yhat - y).abs(),
            TmoLoss::Mape => {
                if is_zero(y) {
                    0.0
                } else {
                    (1.0 - yhat / y).abs()
                }
            }
            TmoLoss::Huber(delta) => huber(y - yhat, delta),
            TmoLoss::Pinball(q) => pinball(y, yhat, q),
        }
    }

    /// A subgradient of the per-example loss with respect to `ŷ`.
    fn slope(&self, y: f64, yhat: f64) -> f64 {
        let sign = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
        match *self {
            TmoLoss::Mae => sign(yhat - y),
            TmoLoss::Mape => {
                if is_zero(y) {
                    0.0
                } else {
                    sign(yhat - y) / y.abs()
                }
            }
            TmoLoss::Huber(delta) => (yhat - y).clamp(-delta, delta),
            TmoLoss::Pinball(q) => {
                if y > yhat {
                    -q
                } else if y < yhat {
                    1.0 - q
                } else {
                    0.0
                }
            }
        }
    }
}

/// `(1/n) Σ_i ℓ(y_i, ⟨θ, x_i⟩)`.
pub fn tmo_objective(design: &FixedDesign, y: &[f64], loss: TmoLoss, theta: &ParamVector) -> f64 {
    design
        .rows()
        .zip(y)
        .map(|(x, &yi)| loss.loss(yi, dot(x, theta.as_slice())))
        .sum::<f64>()
        / design.n() as f64
}

fn subgradient(design: &FixedDesign, y: &[f64], loss: TmoLoss, theta: &ParamVector, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (x, &yi) in design.rows().zip(y) {
        let s = loss.slope(yi, dot(x, theta.as_slice()));
        if s != 0.0 {
            for (o, xj) in out.iter_mut().zip(x) {
                *o += s * xj;
            }
        }
    }
    let n = design.n() as f64;
    out.iter_mut().for_each(|v| *v /= n);
}

pub fn fit_tmo(
    design: &FixedDesign,
    y: &[f64],
    loss: TmoLoss,
    space: &ParamSpace,
    cfg: &OptConfig,
) -> Result<FitReport> {
    check_response(design, y)?;
    cfg.validate()?;
    if loss == TmoLoss::Mape && y.iter().all(|v| is_zero(*v)) {
        return Err(Error::MapeUndefined);
    }
    let d = design.d();
    let start = project(&unconstrained_ls(design, y)?, space, design)?;
    let f_start = tmo_objective(design, y, loss, &start);

    let mut best = (start.clone(), f_start);
    let mut x = start;
    let mut g = vec![0.0; d];
    let mut epoch_sum = vec![0.0; d];
    let mut epoch_len = 0usize;
    let mut next_boundary = 2usize;
    let mut epochs = 0u32;
    let mut prev_epoch_f = f64::INFINITY;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        iterations = t;
        subgradient(design, y, loss, &x, &mut g);
        let eta = cfg.step_init / (t as f64).sqrt();
        let stepped = ParamVector::new(x.as_slice().iter().zip(&g).map(|(a, b)| a - eta * b).collect())?;
        x = project(&stepped, space, design)?;

        for (s, v) in epoch_sum.iter_mut().zip(x.as_slice()) {
            *s += v;
        }
        epoch_len += 1;

        if t + 1 == next_boundary || t == cfg.max_iters {
            let avg = ParamVector::new(epoch_sum.iter().map(|s| s / epoch_len as f64).collect())?;
            let avg = project(&avg, space, design)?;
            let f_avg = tmo_objective(design, y, loss, &avg);
            if f_avg < best.1 {
                best = (avg, f_avg);
            }
            epochs += 1;
            last_change = (prev_epoch_f - f_avg).abs() / f_avg.abs().max(1e-12);
            if epochs >= MIN_EPOCHS && last_change < TMO_REL_TOL {
                converged = true;
                break;
            }
            prev_epoch_f = f_avg;
            epoch_sum.iter_mut().for_each(|s| *s = 0.0);
            epoch_len = 0;
            next_boundary *= 2;
        }
    }

    Ok(FitReport {
        params: Fitted::Theta(best.0),
        final_objective: best.1,
        iterations,
        converged: converged || best.1 == 0.0,
        gradient_norm: if best.1 == 0.0 { 0.0 } else { last_change },
    })
}
