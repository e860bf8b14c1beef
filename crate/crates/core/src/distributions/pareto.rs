use rand::Rng;

use super::{safe_ln, Distribution};
use crate::rng::open_closed01;
use crate::{Error, Result};

/// Pareto law with density `b m^b / y^(b+1)` on `y >= m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoDist {
    scale: f64,
    tail: f64,
}

impl ParetoDist {
    pub fn new(scale: f64, tail: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!("Pareto scale must be positive, got {scale}")));
        }
        if !(tail.is_finite() && tail > 0.0) {
            return Err(Error::InvalidParameter(format!("Pareto tail must be positive, got {tail}")));
        }
        Ok(Self { scale, tail })
    }

    /// The Pareto law with mean `mean` and tail `tail`, i.e. scale `(tail-1)/tail * mean`.
    pub fn with_mean(mean: f64, tail: f64) -> Result<Self> {
        if !(tail > 1.0) {
            return Err(Error::MeanUndefined(tail));
        }
        Self::new((tail - 1.0) / tail * mean, tail)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < self.scale {
            0.0
        } else {
            1.0 - (self.scale / y).powf(self.tail)
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("quantile level must lie in (0,1), got {q}")));
        }
        Ok(self.scale * (1.0 - q).powf(-1.0 / self.tail))
    }

    /// Inverse-CDF transform of a uniform `u` in (0, 1]: `m u^(-1/b)`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        self.scale * u.powf(-1.0 / self.tail)
    }

    /// Variance; infinite when `tail <= 2`.
    pub fn variance(&self) -> f64 {
        let b = self.tail;
        if b <= 2.0 {
            return f64::INFINITY;
        }
        self.scale * self.scale * b / ((b - 1.0) * (b - 1.0) * (b - 2.0))
    }
}

impl Distribution for ParetoDist {
    fn log_density(&self, y: f64) -> f64 {
        if !(y >= self.scale) {
            return f64::NEG_INFINITY;
        }
        self.tail.ln() + self.tail * safe_ln(self.scale) - (self.tail + 1.0) * safe_ln(y)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(open_closed01(rng))
    }

    fn mean(&self) -> Result<f64> {
        if self.tail <= 1.0 {
            return Err(Error::MeanUndefined(self.tail));
        }
        Ok(self.scale * self.tail / (self.tail - 1.0))
    }
}
