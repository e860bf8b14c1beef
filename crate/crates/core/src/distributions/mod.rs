//! Conditional response distributions.
//!
//! All types are immutable after construction and validate their parameters
//! in `new`. Log-densities never return NaN: values outside the support map
//! to `-inf`.

mod kl;
mod mixture;
mod negbin;
mod pareto;
mod poisson;

pub use kl::{kl_pareto, kl_poisson};
pub use mixture::{ZnbpMixture, ZERO_TOL};
pub use negbin::NegBinomialDist;
pub use pareto::ParetoDist;
pub use poisson::PoissonDist;

use rand::Rng;

use crate::Result;

/// Floor applied inside every logarithm of a positive quantity.
pub(crate) const LOG_FLOOR: f64 = 1e-300;

#[inline]
pub(crate) fn safe_ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

pub trait Distribution {
    /// Log-density (or log-mass) at `y`; `-inf` outside the support.
    fn log_density(&self, y: f64) -> f64;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    fn mean(&self) -> Result<f64>;
}

/// `ln(sum(exp(terms)))` over the finite entries; `-inf` when none are finite.
///
/// A single finite term is returned unchanged.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms
        .iter()
        .copied()
        .filter(|t| t.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms
        .iter()
        .filter(|t| t.is_finite())
        .map(|t| (t - max).exp())
        .sum();
    max + s.ln()
}

/// Smallest integer `k >= 0` with `cdf(k) >= q`, accumulating a pmf.
pub(crate) fn discrete_quantile(q: f64, mut log_pmf: impl FnMut(u64) -> f64) -> u64 {
    let mut cdf = 0.0;
    let mut k = 0u64;
    loop {
        cdf += log_pmf(k).exp();
        if cdf >= q {
            return k;
        }
        // the pmf has underflowed far into the tail; stop at the rounding limit
        if k > 10 && cdf >= 1.0 - 1e-15 {
            return k;
        }
        k += 1;
    }
}
