use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{discrete_quantile, safe_ln, Distribution, PoissonDist};
use crate::{Error, Result};

/// Negative binomial with pmf `C(k+r-1, k) p^r (1-p)^k`, mean `r(1-p)/p`.
///
/// `log_density` accepts any real `y >= 0` through the gamma-function
/// extension of the binomial coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinomialDist {
    count: f64,
    success: f64,
}

impl NegBinomialDist {
    pub fn new(count: f64, success: f64) -> Result<Self> {
        if !(count.is_finite() && count > 0.0) {
            return Err(Error::InvalidParameter(format!("NB count must be positive, got {count}")));
        }
        if !(success > 0.0 && success < 1.0) {
            return Err(Error::InvalidParameter(format!("NB success must lie in (0,1), got {success}")));
        }
        Ok(Self { count, success })
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn success(&self) -> f64 {
        self.success
    }

    pub fn variance(&self) -> f64 {
        self.count * (1.0 - self.success) / (self.success * self.success)
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(discrete_quantile(q, |k| self.log_density(k as f64)) as f64)
    }
}

impl Distribution for NegBinomialDist {
    fn log_density(&self, y: f64) -> f64 {
        if !(y >= 0.0) || !y.is_finite() {
            return f64::NEG_INFINITY;
        }
        let (r, p) = (self.count, self.success);
        ln_gamma(y + r) - ln_gamma(r) - ln_gamma(y + 1.0) + r * safe_ln(p) + y * safe_ln(1.0 - p)
    }

    /// Gamma–Poisson compound: `lambda ~ Gamma(r, (1-p)/p)`, then `Poisson(lambda)`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let scale = (1.0 - self.success) / self.success;
        let gamma = rand_distr::Gamma::new(self.count, scale).expect("validated parameters");
        let lambda: f64 = rng.sample(gamma);
        match PoissonDist::new(lambda) {
            Ok(pois) => pois.sample(rng),
            Err(_) => 0.0,
        }
    }

    fn mean(&self) -> Result<f64> {
        Ok(self.count * (1.0 - self.success) / self.success)
    }
}
