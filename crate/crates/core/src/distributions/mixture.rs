use rand::Rng;

use super::{log_sum_exp, Distribution, NegBinomialDist, ParetoDist};
use crate::{Error, Result};

/// Responses with `|y| <= ZERO_TOL` hit the zero atom.
pub const ZERO_TOL: f64 = 1e-12;

/// Three-component mixture: zero atom, negative binomial, Pareto.
///
/// The density is taken against a hybrid reference measure: the atom
/// contributes its mass `w1` at zero, the NB term uses its gamma-extended
/// pmf at any real `y >= 0`, and the Pareto term its Lebesgue density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnbpMixture {
    weights: [f64; 3],
    nb: NegBinomialDist,
    pareto: ParetoDist,
}

/// Per-component log terms `ln w_j + ln p_j(y)`, `-inf` where absent.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ComponentTerms {
    pub atom: f64,
    pub nb: f64,
    pub pareto: f64,
}

impl ComponentTerms {
    pub fn total(&self) -> f64 {
        log_sum_exp(&[self.atom, self.nb, self.pareto])
    }
}

#[inline]
fn ln_weight(w: f64) -> f64 {
    if w > 0.0 {
        w.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl ZnbpMixture {
    pub fn new(weights: [f64; 3], nb: NegBinomialDist, pareto_scale: f64, pareto_tail: f64) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("mixture weights must be nonnegative, got {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}, not 1")));
        }
        if !(pareto_tail > 1.0) {
            return Err(Error::InvalidParameter(format!("Pareto tail must exceed 1, got {pareto_tail}")));
        }
        let pareto = ParetoDist::new(pareto_scale, pareto_tail)?;
        Ok(Self { weights, nb, pareto })
    }

    /// Constructor for parameters produced by total link functions.
    pub(crate) fn from_links(weights: [f64; 3], nb: NegBinomialDist, pareto: ParetoDist) -> Self {
        Self { weights, nb, pareto }
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn nb(&self) -> &NegBinomialDist {
        &self.nb
    }

    pub fn pareto(&self) -> &ParetoDist {
        &self.pareto
    }

    pub(crate) fn component_terms(&self, y: f64) -> ComponentTerms {
        let [w1, w2, w3] = self.weights;
        let atom = if y.abs() <= ZERO_TOL { ln_weight(w1) } else { f64::NEG_INFINITY };
        let nb = if w2 > 0.0 { ln_weight(w2) + self.nb.log_density(y) } else { f64::NEG_INFINITY };
        let pareto = if w3 > 0.0 { ln_weight(w3) + self.pareto.log_density(y) } else { f64::NEG_INFINITY };
        ComponentTerms { atom, nb, pareto }
    }
}

impl Distribution for ZnbpMixture {
    fn log_density(&self, y: f64) -> f64 {
        if !(y >= 0.0) {
            return f64::NEG_INFINITY;
        }
        self.component_terms(y).total()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let [w1, w2, _] = self.weights;
        if u < w1 {
            0.0
        } else if u < w1 + w2 {
            self.nb.sample(rng)
        } else {
            self.pareto.sample(rng)
        }
    }

    fn mean(&self) -> Result<f64> {
        Ok(self.weights[1] * self.nb.mean()? + self.weights[2] * self.pareto.mean()?)
    }
}
