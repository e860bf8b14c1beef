use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use super::bounds::skewed_1d_column;
use crate::distributions::{Distribution, ParetoDist, PoissonDist};
use crate::linalg::{dot, norm};
use crate::linear_model::{FixedDesign, LinkLayer, ParamVector};
use crate::rng;
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignKind {
    /// Standard normal rows shifted by `c = 2γ√d/‖θ*‖` in every coordinate.
    Gaussian,
    /// `round(√n)` rows at `√n`, the rest at `n^ε`; one feature.
    Skewed1d { eps: f64 },
    /// Gaussian rows with a random `fraction` of them scaled by `magnitude`.
    HeavyNorm { fraction: f64, magnitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub kind: DesignKind,
    pub n: usize,
    pub d: usize,
    /// Rows longer than this are rescaled onto the sphere of this radius.
    pub r_cap: f64,
    pub margin: f64,
    pub radius: f64,
    pub seed: u64,
}

impl fmt::Display for DesignSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DesignKind::Gaussian => "gaussian".to_string(),
            DesignKind::Skewed1d { eps } => format!("skewed_1d(eps={eps})"),
            DesignKind::HeavyNorm { fraction, magnitude } => format!("heavy_norm(fraction={fraction}, magnitude={magnitude})"),
        };
        write!(
            f,
            "{kind} n={} d={} r_cap={} gamma={} w={} seed={}",
            self.n, self.d, self.r_cap, self.margin, self.radius, self.seed
        )
    }
}

impl DesignSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.d == 0 || self.n < self.d {
            return bad(format!("design needs n >= d >= 1, got n={} d={}", self.n, self.d));
        }
        if !(self.r_cap > 0.0) || !(self.margin > 0.0) || !(self.radius > 0.0) {
            return bad(format!("r_cap, gamma and w must be positive in {self}"));
        }
        match self.kind {
            DesignKind::Skewed1d { eps } if self.d != 1 || !eps.is_finite() => {
                bad(format!("skewed_1d needs d = 1 and finite eps, got {self}"))
            }
            DesignKind::HeavyNorm { fraction, magnitude } if !(0.0..=1.0).contains(&fraction) || !(magnitude > 0.0) => {
                bad(format!("heavy_norm needs fraction in [0, 1] and magnitude > 0, got {self}"))
            }
            _ => Ok(()),
        }
    }
}

fn cap(row: &mut [f64], r_cap: f64) {
    let len = norm(row);
    if len > r_cap {
        row.iter_mut().for_each(|v| *v *= r_cap / len);
    }
}

/// Draw the fixed design. When `theta_star` is given every row satisfies
/// `⟨θ*, x_i⟩ >= γ`; violating rows are redrawn up to 100 times.
pub fn generate(spec: &DesignSpec, theta_star: Option<&ParamVector>) -> Result<FixedDesign> {
    spec.validate()?;
    if let Some(t) = theta_star {
        if t.dim() != spec.d {
            return Err(Error::DimensionMismatch { expected: spec.d, got: t.dim() });
        }
    }
    let feasible = |row: &[f64]| theta_star.is_none_or(|t| dot(row, t.as_slice()) >= spec.margin);
    let infeasible = |attempts| Error::DesignInfeasible { attempts, spec: spec.to_string() };

    if let DesignKind::Skewed1d { eps } = spec.kind {
        let mut x = skewed_1d_column(spec.n, eps);
        for v in &mut x {
            *v = v.min(spec.r_cap);
        }
        if !x.iter().all(|v| feasible(&[*v])) {
            return Err(infeasible(1));
        }
        return FixedDesign::from_column(&x);
    }

    let d = spec.d;
    let shift = match theta_star {
        Some(t) if t.norm() > 0.0 => 2.0 * spec.margin * (d as f64).sqrt() / t.norm(),
        _ => 0.0,
    };
    let mut stream = rng::stream(spec.seed);
    let mut scale = vec![1.0; spec.n];
    if let DesignKind::HeavyNorm { fraction, magnitude } = spec.kind {
        let heavy = (fraction * spec.n as f64).round() as usize;
        for i in sample(&mut stream, spec.n, heavy) {
            scale[i] = magnitude;
        }
    }
    let mut data = Vec::with_capacity(spec.n * d);
    for &s in &scale {
        let mut row = vec![0.0; d];
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            for v in row.iter_mut() {
                let z: f64 = stream.sample(StandardNormal);
                *v = s * (z + shift);
            }
            cap(&mut row, spec.r_cap);
            if feasible(&row) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(infeasible(MAX_ATTEMPTS));
        }
        data.extend_from_slice(&row);
    }
    FixedDesign::new(spec.n, d, data)
}

/// Conditional response model `y_i ~ p(· | x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseModel {
    Poisson { theta_star: ParamVector },
    /// Pareto with mean `⟨θ*, x⟩`, i.e. scale `((b−1)/b)⟨θ*, x⟩`.
    Pareto { theta_star: ParamVector, tail: f64 },
    Znbp { layer: LinkLayer },
    /// Noise-free `y = Xθ*`.
    Deterministic { theta_star: ParamVector },
}

impl ResponseModel {
    pub fn theta_star(&self) -> Option<&ParamVector> {
        match self {
            ResponseModel::Poisson { theta_star }
            | ResponseModel::Pareto { theta_star, .. }
            | ResponseModel::Deterministic { theta_star } => Some(theta_star),
            ResponseModel::Znbp { .. } => None,
        }
    }

    pub fn pareto_tail(&self) -> Option<f64> {
        match self {
            ResponseModel::Pareto { tail, .. } => Some(*tail),
            _ => None,
        }
    }

    /// Conditional mean `E[y | x]`.
    pub fn mean_at(&self, x: &[f64]) -> Result<f64> {
        match self {
            ResponseModel::Poisson { theta_star }
            | ResponseModel::Pareto { theta_star, .. }
            | ResponseModel::Deterministic { theta_star } => Ok(dot(x, theta_star.as_slice())),
            ResponseModel::Znbp { layer } => layer.mixture_at(x)?.mean(),
        }
    }
}

pub fn respond<R: Rng + ?Sized>(model: &ResponseModel, design: &FixedDesign, rng: &mut R) -> Result<Vec<f64>> {
    if let Some(t) = model.theta_star() {
        if t.dim() != design.d() {
            return Err(Error::DimensionMismatch { expected: design.d(), got: t.dim() });
        }
    }
    design
        .rows()
        .map(|x| match model {
            ResponseModel::Poisson { theta_star } => Ok(PoissonDist::new(dot(x, theta_star.as_slice()))?.sample(rng)),
            ResponseModel::Pareto { theta_star, tail } => {
                Ok(ParetoDist::with_mean(dot(x, theta_star.as_slice()), *tail)?.sample(rng))
            }
            ResponseModel::Znbp { layer } => Ok(layer.mixture_at(x)?.sample(rng)),
            ResponseModel::Deterministic { theta_star } => Ok(dot(x, theta_star.as_slice())),
        })
        .collect()
}
