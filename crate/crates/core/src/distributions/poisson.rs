use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{discrete_quantile, safe_ln, Distribution};
use crate::{Error, Result};

/// Rate below which draws use sequential-search inversion.
const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonDist {
    mu: f64,
}

impl PoissonDist {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("Poisson mean must be positive, got {mu}")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn variance(&self) -> f64 {
        self.mu
    }

    /// Smallest `k` with `P(Y <= k) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(discrete_quantile(q, |k| self.log_density(k as f64)) as f64)
    }
}

impl Distribution for PoissonDist {
    fn log_density(&self, y: f64) -> f64 {
        if !(y >= 0.0) || y.fract() != 0.0 {
            return f64::NEG_INFINITY;
        }
        y * safe_ln(self.mu) - self.mu - ln_gamma(y + 1.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.mu <= INVERSION_LIMIT {
            let u: f64 = rng.random();
            let mut k = 0u64;
            let mut p = (-self.mu).exp();
            let mut cdf = p;
            while u > cdf {
                k += 1;
                p *= self.mu / k as f64;
                cdf += p;
                if p == 0.0 {
                    break;
                }
            }
            k as f64
        } else {
            // rand_distr's rejection sampler for large rates
            let d = rand_distr::Poisson::new(self.mu).expect("rate validated at construction");
            rng.sample(d)
        }
    }

    fn mean(&self) -> Result<f64> {
        Ok(self.mu)
    }
}
