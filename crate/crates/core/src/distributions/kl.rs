use crate::{Error, Result};

/// `KL(Poisson(mu1) || Poisson(mu2)) = mu1 ln(mu1/mu2) - mu1 + mu2`.
pub fn kl_poisson(mu1: f64, mu2: f64) -> Result<f64> {
    if !(mu1 > 0.0 && mu2 > 0.0) || !mu1.is_finite() || !mu2.is_finite() {
        return Err(Error::InvalidParameter(format!("Poisson rates must be positive, got ({mu1}, {mu2})")));
    }
    Ok((mu1 * (mu1 / mu2).ln() - mu1 + mu2).max(0.0))
}

/// KL between Pareto laws sharing the tail index `b`.
///
/// Finite (`b ln(m1/m2)`) only when the first support `[m1, inf)` sits inside
/// the second; otherwise `+inf`.
pub fn kl_pareto(m1: f64, m2: f64, b: f64) -> Result<f64> {
    if !(m1 > 0.0 && m2 > 0.0) || !m1.is_finite() || !m2.is_finite() {
        return Err(Error::InvalidParameter(format!("Pareto scales must be positive, got ({m1}, {m2})")));
    }
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("Pareto tail must exceed 1, got {b}")));
    }
    if m1 < m2 {
        return Ok(f64::INFINITY);
    }
    Ok(b * (m1 / m2).ln())
}
