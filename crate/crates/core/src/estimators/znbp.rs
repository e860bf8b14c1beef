//! Maximum-likelihood training of the ZNBP link layer.
//!
//! Full-batch L-BFGS on the mean negative log-likelihood with backtracking
//! by halving. A failed quasi-Newton line search falls back to steepest
//! descent; training stops after 50 consecutive relative changes below
//! `1e-9` or at `max_iters`, returning the best layer seen.

use std::collections::VecDeque;

use rand::Rng;
use statrs::function::gamma::digamma;

use super::{FitReport, Fitted, OptConfig};
use crate::linalg::dot;
use crate::linear_model::{apply_links, phi_prime, LinkLayer, RAW_DIM};
use crate::linear_model::FixedDesign;
use crate::rng;
use crate::{Error, Result};

const MEMORY: usize = 10;
const REL_TOL: f64 = 1e-9;
const PATIENCE: usize = 50;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const INIT_NOISE: f64 = 1e-2;
const SUCCESS_EPS: f64 = 1e-12;

/// NLL of one example and its gradient with respect to the six raw outputs.
fn raw_gradient(raw: &[f64; RAW_DIM], tail: f64, y: f64) -> (f64, [f64; RAW_DIM]) {
    let mix = apply_links(raw, tail);
    let terms = mix.component_terms(y);
    let total = terms.total();
    let w = mix.weights();
    let rho = [terms.atom, terms.nb, terms.pareto].map(|t| if t == f64::NEG_INFINITY { 0.0 } else { (t - total).exp() });
    let r = mix.nb().count();
    let p = mix.nb().success();
    let m = mix.pareto().scale();

    let mut g = [0.0; RAW_DIM];
    for k in 0..3 {
        g[k] = w[k] - rho[k];
    }
    if rho[1] > 0.0 {
        g[3] = -rho[1] * (digamma(y + r) - digamma(r) + p.ln()) * phi_prime(raw[3]);
        let clamped = p <= SUCCESS_EPS || p >= 1.0 - SUCCESS_EPS;
        g[4] = if clamped { 0.0 } else { -rho[1] * (r * (1.0 - p) - y * p) };
    }
    if rho[2] > 0.0 {
        g[5] = -rho[2] * (tail / m) * phi_prime(raw[5]);
    }
    (-total, g)
}

/// Per-example NLL and its gradient with respect to the layer weights
/// (row-major, bias last).
pub fn znbp_example_gradient(layer: &LinkLayer, x: &[f64], y: f64) -> Result<(f64, Vec<f64>)> {
    let raw = layer.predict_raw(x)?;
    let (nll, g) = raw_gradient(&raw, layer.pareto_tail(), y);
    let width = layer.d() + 1;
    let mut out = vec![0.0; RAW_DIM * width];
    for (k, gk) in g.iter().enumerate() {
        let row = &mut out[k * width..(k + 1) * width];
        for (o, xj) in row.iter_mut().zip(x) {
            *o = gk * xj;
        }
        row[layer.d()] = *gk;
    }
    Ok((nll, out))
}

fn check_inputs(layer: &LinkLayer, design: &FixedDesign, y: &[f64]) -> Result<()> {
    if design.d() != layer.d() {
        return Err(Error::DimensionMismatch { expected: layer.d(), got: design.d() });
    }
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch { expected: design.n(), got: y.len() });
    }
    if let Some(i) = y.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidResponse(format!("ZNBP responses must be nonnegative (row {i} is {})", y[i])));
    }
    Ok(())
}

/// Total NLL `−Σ ln p(y_i | x_i)`.
pub fn znbp_nll(layer: &LinkLayer, design: &FixedDesign, y: &[f64]) -> Result<f64> {
    check_inputs(layer, design, y)?;
    Ok(nll_unchecked(layer, design, y))
}

fn nll_unchecked(layer: &LinkLayer, design: &FixedDesign, y: &[f64]) -> f64 {
    let tail = layer.pareto_tail();
    design
        .rows()
        .zip(y)
        .map(|(x, &yi)| -apply_links(&layer.raw_unchecked(x), tail).component_terms(yi).total())
        .sum()
}

/// Total NLL and its gradient; a non-finite gradient names the first
/// offending example.
pub fn znbp_nll_gradient(layer: &LinkLayer, design: &FixedDesign, y: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_inputs(layer, design, y)?;
    nll_gradient_unchecked(layer, design, y)
}

fn nll_gradient_unchecked(layer: &LinkLayer, design: &FixedDesign, y: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = layer.d();
    let width = d + 1;
    let tail = layer.pareto_tail();
    let mut grad = vec![0.0; RAW_DIM * width];
    let mut total = 0.0;
    for (i, (x, &yi)) in design.rows().zip(y).enumerate() {
        let (nll, g) = raw_gradient(&layer.raw_unchecked(x), tail, yi);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { index: i });
        }
        total += nll;
        for (k, gk) in g.iter().enumerate() {
            let row = &mut grad[k * width..(k + 1) * width];
            for (o, xj) in row.iter_mut().zip(x) {
                *o += gk * xj;
            }
            row[d] += gk;
        }
    }
    Ok((total, grad))
}

fn initial_layer(d: usize, tail: f64, seed: u64) -> Result<LinkLayer> {
    let mut layer = LinkLayer::zeros(d, tail)?;
    let mut stream = rng::stream(seed);
    for w in layer.weights_mut() {
        *w = stream.random_range(-INIT_NOISE..INIT_NOISE);
    }
    let bias = layer.output_row(1)[d];
    layer.set_bias(1, bias + 1.0);
    Ok(layer)
}

/// L-BFGS two-loop recursion: `−H g`.
fn lbfgs_direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, yv, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(yv) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, yv, _)) = memory.back() {
        let gamma = dot(s, yv) / dot(yv, yv);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, yv, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(yv, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

pub fn fit_znbp(design: &FixedDesign, y: &[f64], tail: f64, cfg: &OptConfig) -> Result<FitReport> {
    cfg.validate()?;
    let mut layer = initial_layer(design.d(), tail, cfg.seed)?;
    check_inputs(&layer, design, y)?;
    let scale = 1.0 / design.n().max(1) as f64;

    let eval = |l: &LinkLayer| -> Result<(f64, Vec<f64>)> {
        let (f, mut g) = nll_gradient_unchecked(l, design, y)?;
        g.iter_mut().for_each(|v| *v *= scale);
        Ok((f * scale, g))
    };
    let value = |l: &LinkLayer| nll_unchecked(l, design, y) * scale;

    let (mut f, mut g) = eval(&layer)?;
    let mut best = (f, layer.clone());
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut quiet = 0usize;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        let mut step_taken = None;
        for steepest in [false, true] {
            let dir: Vec<f64> = if steepest || memory.is_empty() {
                g.iter().map(|v| -v).collect()
            } else {
                lbfgs_direction(&g, &memory)
            };
            let slope = dot(&g, &dir);
            if !(slope < 0.0) {
                memory.clear();
                continue;
            }
            let mut step = if memory.is_empty() {
                cfg.step_init / dot(&dir, &dir).sqrt().max(1e-300)
            } else {
                1.0
            };
            for _ in 0..MAX_HALVINGS {
                let mut trial = layer.clone();
                for (w, dv) in trial.weights_mut().iter_mut().zip(&dir) {
                    *w += step * dv;
                }
                let ft = value(&trial);
                if ft.is_finite() && ft <= f + ARMIJO * step * slope {
                    step_taken = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            if step_taken.is_some() {
                break;
            }
            memory.clear();
        }
        let Some(next) = step_taken else {
            converged = true;
            break;
        };
        let (fn_, gn) = eval(&next)?;
        let s: Vec<f64> = next.weights().iter().zip(layer.weights()).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv).sqrt() * dot(&s, &s).sqrt() {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, yv, 1.0 / sy));
        }
        last_change = (f - fn_).abs() / f.abs().max(1e-300);
        layer = next;
        f = fn_;
        g = gn;
        if f < best.0 {
            best = (f, layer.clone());
        }
        quiet = if last_change < REL_TOL { quiet + 1 } else { 0 };
        if quiet >= PATIENCE {
            converged = true;
            break;
        }
    }

    let (best_f, best_layer) = best;
    Ok(FitReport {
        final_objective: best_f / scale,
        params: Fitted::Layer(best_layer),
        iterations,
        converged,
        gradient_norm: if last_change.is_finite() { last_change } else { 0.0 },
    })
}
