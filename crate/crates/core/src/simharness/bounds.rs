use crate::{Error, Result};

/// One-dimensional risk-bound terms for least squares and the Poisson MLE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    /// `Σ|x|³ / Σx²`
    pub b_ls: f64,
    /// `Σx² / Σ|x|`
    pub b_mle: f64,
    /// `b_ls / b_mle`, at least 1 by Cauchy–Schwarz.
    pub ratio: f64,
}

pub fn bound_terms_1d(x: &[f64]) -> Result<BoundTerms> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("bound terms need finite covariates".into()));
    }
    let s1: f64 = x.iter().map(|v| v.abs()).sum();
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let s3: f64 = x.iter().map(|v| v.abs().powi(3)).sum();
    if s1 == 0.0 {
        return Err(Error::InvalidParameter("bound terms undefined for the zero vector".into()));
    }
    let b_ls = s3 / s2;
    let b_mle = s2 / s1;
    Ok(BoundTerms { b_ls, b_mle, ratio: s3 * s1 / (s2 * s2) })
}

/// `round(√n)` entries equal to `√n`, the rest `n^ε`.
pub fn skewed_1d_column(n: usize, eps: f64) -> Vec<f64> {
    let root = (n as f64).sqrt();
    let big = (root.round() as usize).min(n);
    let small = (n as f64).powf(eps);
    (0..n).map(|i| if i < big { root } else { small }).collect()
}
