use crate::distributions::{NegBinomialDist, ParetoDist, ZnbpMixture};
use crate::{Error, Result};

/// Raw outputs per example: three mixture logits, NB count, NB success, Pareto scale.
pub const RAW_DIM: usize = 6;

/// Success probabilities are kept this far from {0, 1}.
pub(crate) const SUCCESS_EPS: f64 = 1e-12;

/// Positive link: `x + 1` for `x > 0`, `1/(1 - x)` otherwise.
#[inline]
pub fn phi(x: f64) -> f64 {
    if x > 0.0 {
        x + 1.0
    } else {
        1.0 / (1.0 - x)
    }
}

#[inline]
pub fn phi_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        1.0 / ((1.0 - x) * (1.0 - x))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(SUCCESS_EPS, 1.0 - SUCCESS_EPS)
}

/// Softmax over three logits; the result sums to 1 up to rounding.
pub fn softmax3(z: [f64; 3]) -> [f64; 3] {
    let m = z[0].max(z[1]).max(z[2]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp(), (z[2] - m).exp()];
    let s = e[0] + e[1] + e[2];
    [e[0] / s, e[1] / s, e[2] / s]
}

/// Map six raw outputs to mixture parameters: softmax weights, `φ` for the NB
/// count, sigmoid for the NB success and `φ` for the Pareto scale.
pub fn apply_links(raw: &[f64; RAW_DIM], pareto_tail: f64) -> ZnbpMixture {
    let weights = softmax3([raw[0], raw[1], raw[2]]);
    let nb = NegBinomialDist::new(phi(raw[3]), sigmoid(raw[4])).expect("links yield valid NB parameters");
    let pareto = ParetoDist::new(phi(raw[5]), pareto_tail).expect("links yield a positive Pareto scale");
    ZnbpMixture::from_links(weights, nb, pareto)
}

/// Affine map from `d` features to the six raw mixture outputs.
///
/// Weights are stored row-major as a `6 × (d + 1)` matrix whose last column
/// is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLayer {
    d: usize,
    weights: Vec<f64>,
    pareto_tail: f64,
}

pub(crate) fn validate_tail(alpha: f64) -> Result<()> {
    if [3.0, 4.0, 5.0].contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Pareto tail α must be one of 3, 4, 5; got {alpha}")))
    }
}

impl LinkLayer {
    pub fn new(d: usize, weights: Vec<f64>, pareto_tail: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("link layer needs d >= 1".into()));
        }
        if weights.len() != RAW_DIM * (d + 1) {
            return Err(Error::DimensionMismatch { expected: RAW_DIM * (d + 1), got: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("link layer weights must be finite".into()));
        }
        validate_tail(pareto_tail)?;
        Ok(Self { d, weights, pareto_tail })
    }

    pub fn zeros(d: usize, pareto_tail: f64) -> Result<Self> {
        Self::new(d, vec![0.0; RAW_DIM * (d + 1)], pareto_tail)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pareto_tail(&self) -> f64 {
        self.pareto_tail
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Row `k` of the weight matrix (length `d + 1`).
    pub fn output_row(&self, k: usize) -> &[f64] {
        let w = self.d + 1;
        &self.weights[k * w..(k + 1) * w]
    }

    pub fn set_bias(&mut self, k: usize, value: f64) {
        let w = self.d + 1;
        self.weights[k * w + self.d] = value;
    }

    /// `W · (x ⧺ 1)`.
    pub fn predict_raw(&self, x: &[f64]) -> Result<[f64; RAW_DIM]> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        Ok(self.raw_unchecked(x))
    }

    #[inline]
    pub(crate) fn raw_unchecked(&self, x: &[f64]) -> [f64; RAW_DIM] {
        let mut out = [0.0; RAW_DIM];
        for (k, o) in out.iter_mut().enumerate() {
            let row = self.output_row(k);
            *o = row[..self.d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + row[self.d];
        }
        out
    }

    pub fn mixture_at(&self, x: &[f64]) -> Result<ZnbpMixture> {
        Ok(apply_links(&self.predict_raw(x)?, self.pareto_tail))
    }
}
