//! Spectral projected gradient with nonmonotone Armijo backtracking
//! (reference value: max of the last ten objectives) along the projection arc.

use super::OptConfig;
use crate::linear_model::ParamVector;
use crate::Result;

const ARMIJO: f64 = 1e-4;
const NONMONOTONE_MEMORY: usize = 10;
const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct ProjectedGradientOutcome {
    pub theta: ParamVector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pg_norm: f64,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn axpy(x: &[f64], alpha: f64, g: &[f64]) -> ParamVector {
    ParamVector::new(x.iter().zip(g).map(|(a, b)| a + alpha * b).collect())
        .unwrap_or_else(|_| ParamVector::new(x.to_vec()).expect("finite iterate"))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `‖θ − P(θ − ∇f(θ))‖₂`, the unit-step projected-gradient norm.
pub fn projected_gradient_norm(
    theta: &ParamVector,
    grad: &[f64],
    project: impl Fn(&ParamVector) -> Result<ParamVector>,
) -> Result<f64> {
    let p = project(&axpy(theta.as_slice(), -1.0, grad))?;
    Ok(l2(&sub(theta.as_slice(), p.as_slice())))
}

/// Minimize a smooth convex function over a convex set given its projection.
///
/// Stops when the gradient mapping at step `min(α, 1)` has norm at most
/// `cfg.grad_tol`; since that mapping shrinks as the step grows, this also
/// certifies the unit-step projected-gradient norm.
pub(crate) fn minimize(
    x0: ParamVector,
    eval: impl Fn(&ParamVector) -> (f64, Vec<f64>),
    value: impl Fn(&ParamVector) -> f64,
    project: impl Fn(&ParamVector) -> Result<ParamVector>,
    cfg: &OptConfig,
) -> Result<ProjectedGradientOutcome> {
    let mut x = x0;
    let (mut f, mut g) = eval(&x);
    let gn = l2(&g);
    let mut alpha = if gn > 0.0 { (cfg.step_init / gn).clamp(STEP_MIN, STEP_MAX) } else { cfg.step_init };
    let mut pg_norm = f64::INFINITY;
    let mut history = std::collections::VecDeque::with_capacity(NONMONOTONE_MEMORY);
    history.push_back(f);

    for it in 0..cfg.max_iters {
        let check_step = alpha.min(1.0);
        let xc = project(&axpy(x.as_slice(), -check_step, &g))?;
        pg_norm = l2(&sub(x.as_slice(), xc.as_slice())) / check_step;
        if pg_norm <= cfg.grad_tol {
            return Ok(ProjectedGradientOutcome { theta: x, objective: f, iterations: it, converged: true, pg_norm });
        }

        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut step = alpha;
        let mut trial = if step == check_step { xc } else { project(&axpy(x.as_slice(), -step, &g))? };
        let accepted = loop {
            let ft = value(&trial);
            let dir = sub(trial.as_slice(), x.as_slice());
            let decrease: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if ft.is_finite() && ft <= reference + ARMIJO * decrease {
                break Some(ft);
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
            trial = project(&axpy(x.as_slice(), -step, &g))?;
        };
        let Some(ft) = accepted else {
            // no representable decrease left
            return Ok(ProjectedGradientOutcome { theta: x, objective: f, iterations: it, converged: false, pg_norm });
        };

        let (_, gt) = eval(&trial);
        let s = sub(trial.as_slice(), x.as_slice());
        let yv = sub(&gt, &g);
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        alpha = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX.min(alpha * 4.0) };
        x = trial;
        f = ft;
        g = gt;
        if history.len() == NONMONOTONE_MEMORY {
            history.pop_front();
        }
        history.push_back(f);
    }
    Ok(ProjectedGradientOutcome { theta: x, objective: f, iterations: cfg.max_iters, converged: false, pg_norm })
}
