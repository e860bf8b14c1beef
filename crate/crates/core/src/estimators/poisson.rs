//! Poisson regression with the identity link, `y_i ~ Poisson(⟨θ, x_i⟩)`.

use nalgebra::DMatrix;

use super::least_squares::unconstrained_ls;
use super::optim::minimize;
use super::{check_response, FitReport, Fitted, OptConfig};
use crate::linalg::{dot, sym_eigen};
use crate::linear_model::{project, FixedDesign, ParamSpace, ParamVector};
use crate::{Error, Result};

/// `Σ_i [⟨θ,x_i⟩ − y_i ln⟨θ,x_i⟩]`, `+inf` off the domain.
pub fn poisson_nll(design: &FixedDesign, y: &[f64], theta: &ParamVector) -> f64 {
    let mut total = 0.0;
    for (x, &yi) in design.rows().zip(y) {
        let mu = dot(x, theta.as_slice());
        if mu > 0.0 {
            total += mu - yi * mu.ln();
        } else if mu == 0.0 && yi == 0.0 {
            continue;
        } else {
            return f64::INFINITY;
        }
    }
    total
}

/// `Σ_i (1 − y_i/⟨θ,x_i⟩) x_i`.
pub fn poisson_nll_gradient(design: &FixedDesign, y: &[f64], theta: &ParamVector) -> Vec<f64> {
    let mut g = vec![0.0; design.d()];
    for (x, &yi) in design.rows().zip(y) {
        let mu = dot(x, theta.as_slice());
        let c = 1.0 - yi / mu;
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += c * xj;
        }
    }
    g
}

/// Smallest eigenvalue of the NLL Hessian `Σ_i y_i x_i x_iᵀ / ⟨θ,x_i⟩²`.
pub fn poisson_nll_hessian_min_eig(design: &FixedDesign, y: &[f64], theta: &ParamVector) -> f64 {
    let d = design.d();
    let mut h = DMatrix::zeros(d, d);
    for (x, &yi) in design.rows().zip(y) {
        if yi == 0.0 {
            continue;
        }
        let mu = dot(x, theta.as_slice());
        let c = yi / (mu * mu);
        for a in 0..d {
            for b in 0..d {
                h[(a, b)] += c * x[a] * x[b];
            }
        }
    }
    sym_eigen(&h).min()
}

fn validate_counts(y: &[f64]) -> Result<()> {
    if let Some(i) = y.iter().position(|v| !(*v >= 0.0 && v.fract() == 0.0)) {
        return Err(Error::InvalidResponse(format!(
            "Poisson responses must be nonnegative integers (row {i} is {})",
            y[i]
        )));
    }
    Ok(())
}

/// 1-D feasible interval `{θ : |θ| <= w, θ x_i >= γ}`.
fn feasible_interval_1d(x: &[f64], space: &ParamSpace) -> Result<(f64, f64)> {
    let (w, gamma) = (space.radius(), space.margin());
    let mut lo = -w;
    let mut hi = w;
    for &xi in x {
        if xi > 0.0 {
            lo = lo.max(gamma / xi);
        } else if xi < 0.0 {
            hi = hi.min(gamma / xi);
        } else {
            return Err(Error::ProjectionFailed { violation: gamma, sweeps: 0 });
        }
    }
    if lo > hi {
        return Err(Error::ProjectionFailed { violation: lo - hi, sweeps: 0 });
    }
    Ok((lo, hi))
}

/// `Σy/Σx` clamped to the feasible interval; requires covariates of one sign.
pub fn poisson_closed_form_1d(x: &[f64], y: &[f64], space: &ParamSpace) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let (lo, hi) = feasible_interval_1d(x, space)?;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    Ok((sy / sx).clamp(lo, hi))
}

/// Poisson MLE over `Θ`; one-dimensional designs with same-sign covariates
/// take the closed form.
pub fn fit_poisson_mle(design: &FixedDesign, y: &[f64], space: &ParamSpace, cfg: &OptConfig) -> Result<FitReport> {
    check_response(design, y)?;
    validate_counts(y)?;
    let x: Vec<f64> = design.rows().map(|r| r[0]).collect();
    let one_signed = x.iter().all(|v| *v > 0.0) || x.iter().all(|v| *v < 0.0);
    if design.d() == 1 && one_signed {
        let theta = ParamVector::new(vec![poisson_closed_form_1d(&x, y, space)?])?;
        return Ok(FitReport {
            final_objective: poisson_nll(design, y, &theta),
            params: Fitted::Theta(theta),
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
        });
    }
    fit_poisson_mle_iterative(design, y, space, cfg)
}

/// Projected spectral gradient on the NLL, started from the projected
/// least-squares solution.
pub fn fit_poisson_mle_iterative(
    design: &FixedDesign,
    y: &[f64],
    space: &ParamSpace,
    cfg: &OptConfig,
) -> Result<FitReport> {
    check_response(design, y)?;
    validate_counts(y)?;
    cfg.validate()?;
    let start = project(&unconstrained_ls(design, y)?, space, design)?;
    let out = minimize(
        start,
        |t| (poisson_nll(design, y, t), poisson_nll_gradient(design, y, t)),
        |t| poisson_nll(design, y, t),
        |t| project(t, space, design),
        cfg,
    )?;
    Ok(FitReport {
        final_objective: out.objective,
        params: Fitted::Theta(out.theta),
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.pg_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::projected_gradient_norm;
    use rand::Rng;

    fn space(w: f64, g: f64) -> ParamSpace {
        ParamSpace::new(w, g).unwrap()
    }

    #[test]
    fn closed_form_example() {
        let x = FixedDesign::from_column(&[1.0, 2.0, 3.0]).unwrap();
        let r = fit_poisson_mle(&x, &[2.0, 4.0, 6.0], &space(10.0, 0.1), &OptConfig::default()).unwrap();
        assert_eq!(r.theta().unwrap().as_slice()[0], 2.0);
        let it = fit_poisson_mle_iterative(&x, &[2.0, 4.0, 6.0], &space(10.0, 0.1), &OptConfig::default()).unwrap();
        assert!((it.theta().unwrap().as_slice()[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn all_zero_counts_hit_margin() {
        let x = FixedDesign::from_rows(&[vec![1.0, 0.2], vec![0.3, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = space(10.0, 0.5);
        let r = fit_poisson_mle(&x, &[0.0, 0.0, 0.0], &s, &OptConfig::default()).unwrap();
        let theta = r.theta().unwrap();
        let min_margin = x.rows().map(|row| dot(row, theta.as_slice())).fold(f64::INFINITY, f64::min);
        assert!((min_margin - 0.5).abs() < 1e-6, "{min_margin}");

        let x1 = FixedDesign::from_column(&[1.0, 2.0]).unwrap();
        let r = fit_poisson_mle(&x1, &[0.0, 0.0], &s, &OptConfig::default()).unwrap();
        assert_eq!(r.theta().unwrap().as_slice()[0], 0.5);
    }

    #[test]
    fn rejects_non_counts() {
        let x = FixedDesign::from_column(&[1.0, 2.0]).unwrap();
        let s = space(10.0, 0.1);
        assert!(matches!(fit_poisson_mle(&x, &[1.5, 2.0], &s, &OptConfig::default()), Err(Error::InvalidResponse(_))));
        assert!(matches!(fit_poisson_mle(&x, &[-1.0, 2.0], &s, &OptConfig::default()), Err(Error::InvalidResponse(_))));
    }

    #[test]
    fn infeasible_space_surfaces_projection_error() {
        let x = FixedDesign::from_column(&[1.0, 2.0]).unwrap();
        let s = space(0.1, 1.0);
        assert!(matches!(
            fit_poisson_mle(&x, &[1.0, 2.0], &s, &OptConfig::default()),
            Err(Error::ProjectionFailed { .. })
        ));
    }

    #[test]
    fn hessian_examples() {
        let x = FixedDesign::from_column(&[1.0]).unwrap();
        let t = ParamVector::new(vec![2.0]).unwrap();
        assert!((poisson_nll_hessian_min_eig(&x, &[4.0], &t) - 1.0).abs() < 1e-15);
        assert_eq!(poisson_nll_hessian_min_eig(&x, &[0.0], &t), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::stream(4);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| 0.5 + rng.random::<f64>()).collect()).collect();
        let x = FixedDesign::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..30).map(|i| (i % 5) as f64).collect();
        let t = ParamVector::new(vec![0.7, 1.1, 0.4]).unwrap();
        let g = poisson_nll_gradient(&x, &y, &t);
        let h = 1e-6;
        for j in 0..3 {
            let mut up = t.clone();
            up.as_mut_slice()[j] += h;
            let mut dn = t.clone();
            dn.as_mut_slice()[j] -= h;
            let fd = (poisson_nll(&x, &y, &up) - poisson_nll(&x, &y, &dn)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-5 * g[j].abs().max(1.0));
        }
    }

    #[test]
    fn convexity_along_random_chords() {
        let mut rng = crate::rng::stream(8);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..2).map(|_| 0.2 + rng.random::<f64>()).collect()).collect();
        let x = FixedDesign::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..40).map(|i| (i % 4) as f64).collect();
        for _ in 0..100 {
            let a = ParamVector::new(vec![0.1 + 3.0 * rng.random::<f64>(), 0.1 + 3.0 * rng.random::<f64>()]).unwrap();
            let b = ParamVector::new(vec![0.1 + 3.0 * rng.random::<f64>(), 0.1 + 3.0 * rng.random::<f64>()]).unwrap();
            let t: f64 = rng.random();
            let mid = ParamVector::new(
                a.as_slice().iter().zip(b.as_slice()).map(|(u, v)| t * u + (1.0 - t) * v).collect(),
            )
            .unwrap();
            let lhs = poisson_nll(&x, &y, &mid);
            let rhs = t * poisson_nll(&x, &y, &a) + (1.0 - t) * poisson_nll(&x, &y, &b);
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn certificate_and_perturbation() {
        let mut rng = crate::rng::stream(21);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| 0.5 + rng.random::<f64>()).collect()).collect();
        let x = FixedDesign::from_rows(&rows).unwrap();
        let star = ParamVector::new(vec![1.0, 2.0, 0.5]).unwrap();
        let mut r = crate::rng::stream(22);
        let y: Vec<f64> = x
            .rows()
            .map(|row| {
                use crate::distributions::{Distribution, PoissonDist};
                PoissonDist::new(dot(row, star.as_slice())).unwrap().sample(&mut r)
            })
            .collect();
        let s = space(100.0, 0.1);
        let fit = fit_poisson_mle(&x, &y, &s, &OptConfig::default()).unwrap();
        assert!(fit.converged);
        let theta = fit.theta().unwrap();
        let g = poisson_nll_gradient(&x, &y, theta);
        let pg = projected_gradient_norm(theta, &g, |t| project(t, &s, &x)).unwrap();
        assert!(pg <= 1e-8, "pg {pg}");
        let f0 = poisson_nll(&x, &y, theta);
        for _ in 0..10 {
            let dir: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
            let nrm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let moved = ParamVector::new(theta.as_slice().iter().zip(&dir).map(|(t, v)| t + 1e-3 * v / nrm).collect()).unwrap();
            if s.contains(&moved, &x, 0.0) {
                assert!(poisson_nll(&x, &y, &moved) >= f0 - 1e-8);
            }
        }
    }
}
