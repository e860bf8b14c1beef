//! Pareto regression MLE with `m_i = ((b−1)/b)⟨θ, x_i⟩`.
//!
//! The log-likelihood depends on `θ` through `b Σ ln m_i`, so the MLE
//! maximizes `Σ ln⟨θ, x_i⟩` subject to the support constraints
//! `((b−1)/b)⟨θ, x_i⟩ <= y_i` and `θ ∈ Θ`. It is solved by a log-barrier
//! method (weights `t ∈ {1, 10, 100, 1000}·n`) with damped Newton centering;
//! a phase-I barrier problem finds the strictly feasible start.

use nalgebra::{DMatrix, DVector};

use super::least_squares::unconstrained_ls;
use super::{check_response, FitReport, Fitted, OptConfig};
use crate::linalg::{dot, norm};
use crate::linear_model::{project, FixedDesign, ParamSpace, ParamVector};
use crate::{Error, Result};

const CENTERING_MAX_ITERS: usize = 200;
const DECREMENT_TOL: f64 = 1e-10;
const BARRIER_SCHEDULE: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// `−weight · ln(coefᵀz + offset)`.
struct LogTerm {
    coef: Vec<f64>,
    offset: f64,
    weight: f64,
}

/// `lin_weight · linᵀz − Σ weight_k ln(coef_kᵀz + offset_k) − ln(r² − ‖z[..d]‖²)`.
struct Barrier {
    terms: Vec<LogTerm>,
    lin: Vec<f64>,
    lin_weight: f64,
    radius_sq: f64,
    d: usize,
}

impl Barrier {
    fn ball_arg(&self, z: &[f64]) -> f64 {
        let sq: f64 = z[..self.d].iter().map(|v| v * v).sum();
        self.radius_sq - sq
    }

    fn value(&self, z: &[f64]) -> f64 {
        let e = self.ball_arg(z);
        if !(e > 0.0) {
            return f64::INFINITY;
        }
        let mut f = self.lin_weight * dot(&self.lin, z) - e.ln();
        for term in &self.terms {
            let a = dot(&term.coef, z) + term.offset;
            if !(a > 0.0) {
                return f64::INFINITY;
            }
            f -= term.weight * a.ln();
        }
        f
    }

    fn grad_hess(&self, z: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let m = z.len();
        let mut g = DVector::from_iterator(m, self.lin.iter().map(|v| self.lin_weight * v));
        let mut h = DMatrix::zeros(m, m);
        for term in &self.terms {
            let a = dot(&term.coef, z) + term.offset;
            let gi = term.weight / a;
            let hi = term.weight / (a * a);
            for p in 0..m {
                let cp = term.coef[p];
                if cp == 0.0 {
                    continue;
                }
                g[p] -= gi * cp;
                for q in 0..m {
                    h[(p, q)] += hi * cp * term.coef[q];
                }
            }
        }
        // ball: grad of e is −2θ
        let e = self.ball_arg(z);
        let mut de = DVector::zeros(m);
        for j in 0..self.d {
            de[j] = -2.0 * z[j];
        }
        g -= &de / e;
        h += &de * de.transpose() / (e * e);
        for j in 0..self.d {
            h[(j, j)] += 2.0 / e;
        }
        (g, h)
    }
}

struct Centering {
    z: Vec<f64>,
    decrement: f64,
    iterations: usize,
    converged: bool,
}

fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> DVector<f64> {
    let rhs = -g;
    if let Some(ch) = h.clone().cholesky() {
        return ch.solve(&rhs);
    }
    let ridge = 1e-12 * h.trace().abs().max(1.0);
    let mut hr = h.clone();
    for j in 0..hr.nrows() {
        hr[(j, j)] += ridge;
    }
    match hr.cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => rhs,
    }
}

fn center(barrier: &Barrier, mut z: Vec<f64>, stop: impl Fn(&[f64]) -> bool) -> Centering {
    let mut f = barrier.value(&z);
    for it in 0..CENTERING_MAX_ITERS {
        if stop(&z) {
            return Centering { z, decrement: f64::NAN, iterations: it, converged: true };
        }
        let (g, h) = barrier.grad_hess(&z);
        let dir = newton_direction(&g, &h);
        let slope = g.dot(&dir);
        let decrement = (-slope).max(0.0).sqrt();
        if decrement * decrement / 2.0 <= DECREMENT_TOL {
            return Centering { z, decrement, iterations: it, converged: true };
        }
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = z.iter().zip(dir.iter()).map(|(a, b)| a + step * b).collect();
            let ft = barrier.value(&trial);
            if ft.is_finite() && ft <= f + 0.25 * step * slope {
                break Some((trial, ft));
            }
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        match accepted {
            Some((trial, ft)) => {
                z = trial;
                f = ft;
            }
            None => return Centering { z, decrement, iterations: it, converged: false },
        }
    }
    let (g, h) = barrier.grad_hess(&z);
    let decrement = (-g.dot(&newton_direction(&g, &h))).max(0.0).sqrt();
    Centering { z, decrement, iterations: CENTERING_MAX_ITERS, converged: false }
}

/// Pareto negative log-likelihood `−Σ [ln b + b ln m_i − (b+1) ln y_i]`,
/// `+inf` when some `y_i < m_i`.
pub fn pareto_objective(design: &FixedDesign, y: &[f64], tail: f64, theta: &ParamVector) -> f64 {
    let c = (tail - 1.0) / tail;
    let mut nll = 0.0;
    for (x, &yi) in design.rows().zip(y) {
        let m = c * dot(x, theta.as_slice());
        if !(m > 0.0) || yi < m {
            return f64::INFINITY;
        }
        nll -= tail.ln() + tail * m.ln() - (tail + 1.0) * yi.ln();
    }
    nll
}

/// Strictly feasible point for the support and `Θ` constraints, or
/// `NoFeasiblePareto`.
///
/// Maximizes the common slack `τ` of the linear constraints; the ball stays
/// a hard barrier so the iterates cannot trade radius for slack.
fn phase_one(design: &FixedDesign, y: &[f64], c: f64, space: &ParamSpace, start: &[f64]) -> Result<Vec<f64>> {
    let d = design.d();
    let gamma = space.margin();
    let shrink = (0.9 * space.radius() / norm(start)).min(1.0);
    let start: Vec<f64> = start.iter().map(|v| v * shrink).collect();
    let mut terms = Vec::with_capacity(2 * design.n());
    let mut min_slack = f64::INFINITY;
    for (x, &yi) in design.rows().zip(y) {
        let mut coef: Vec<f64> = x.iter().map(|v| -c * v).collect();
        coef.push(-1.0);
        terms.push(LogTerm { coef, offset: yi, weight: 1.0 });
        let mut coef: Vec<f64> = x.to_vec();
        coef.push(-1.0);
        terms.push(LogTerm { coef, offset: -gamma, weight: 1.0 });
        let mu = dot(x, &start);
        min_slack = min_slack.min(yi - c * mu).min(mu - gamma);
    }
    let mut lin = vec![0.0; d + 1];
    lin[d] = -1.0;
    let mut z = start;
    z.push(min_slack - 1.0);
    let mut barrier = Barrier {
        terms,
        lin,
        lin_weight: 1.0,
        radius_sq: space.radius().powi(2),
        d,
    };
    let mut t = 1.0;
    while t <= 1e12 {
        barrier.lin_weight = t;
        let out = center(&barrier, z, |z| z[d] > 0.0);
        z = out.z;
        if z[d] > 0.0 {
            z.truncate(d);
            return Ok(z);
        }
        t *= 10.0;
    }
    Err(Error::NoFeasiblePareto)
}

pub fn fit_pareto_mle(
    design: &FixedDesign,
    y: &[f64],
    tail: f64,
    space: &ParamSpace,
    cfg: &OptConfig,
) -> Result<FitReport> {
    check_response(design, y)?;
    cfg.validate()?;
    if !(tail > 1.0 && tail.is_finite()) {
        return Err(Error::InvalidParameter(format!("Pareto tail must exceed 1, got {tail}")));
    }
    if let Some(i) = y.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::InvalidResponse(format!("Pareto responses must be positive (row {i} is {})", y[i])));
    }
    let c = (tail - 1.0) / tail;
    let n = design.n() as f64;
    let d = design.d();

    let start = unconstrained_ls(design, y)
        .and_then(|t| project(&t, space, design))
        .map(|t| t.into_vec())
        .unwrap_or_else(|_| vec![0.0; d]);
    let mut z = phase_one(design, y, c, space, &start)?;

    let gamma = space.margin();
    let mut terms = Vec::with_capacity(3 * design.n());
    for (x, &yi) in design.rows().zip(y) {
        terms.push(LogTerm { coef: x.to_vec(), offset: 0.0, weight: 1.0 });
        terms.push(LogTerm { coef: x.iter().map(|v| -c * v).collect(), offset: yi, weight: 1.0 });
        terms.push(LogTerm { coef: x.to_vec(), offset: -gamma, weight: 1.0 });
    }
    let mut barrier = Barrier {
        terms,
        lin: vec![0.0; d],
        lin_weight: 0.0,
        radius_sq: space.radius().powi(2),
        d,
    };

    let mut iterations = 0;
    let mut last = None;
    for factor in BARRIER_SCHEDULE {
        let t = factor * n;
        for k in (0..barrier.terms.len()).step_by(3) {
            barrier.terms[k].weight = t;
        }
        let out = center(&barrier, z, |_| false);
        iterations += out.iterations;
        z = out.z.clone();
        last = Some(out);
    }
    let last = last.expect("nonempty schedule");
    let theta = ParamVector::new(z)?;
    Ok(FitReport {
        final_objective: pareto_objective(design, y, tail, &theta),
        params: Fitted::Theta(theta),
        iterations,
        converged: last.converged,
        gradient_norm: last.decrement,
    })
}
