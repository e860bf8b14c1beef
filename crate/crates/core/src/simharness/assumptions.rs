use std::fmt;

use nalgebra::DMatrix;

use crate::linalg::{dot, norm, sym_eigen};
use crate::linear_model::{FixedDesign, ParamSpace, ParamVector};

/// Rows used as candidate directions for the hypercontractivity ratio.
const MAX_DIRECTIONS: usize = 256;

/// Both inequalities of the sample-size condition on `M`, with each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A3Check {
    /// `λ_min(M)`
    pub min_eig_lhs: f64,
    /// `R²/(4nγ²) (d ln(24χ) + ln(1/δ))`
    pub min_eig_rhs: f64,
    /// `√(λ_max(M) (d ln(24χ) + ln(1/δ)))`
    pub spread_lhs: f64,
    /// `√n λ_min(M) / 16`
    pub spread_rhs: f64,
}

impl A3Check {
    pub fn min_eig_holds(&self) -> bool {
        self.min_eig_lhs >= self.min_eig_rhs
    }

    pub fn spread_holds(&self) -> bool {
        self.spread_lhs <= self.spread_rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub lambda_min_sigma: f64,
    pub lambda_max_sigma: f64,
    /// Largest row norm.
    pub r: f64,
    /// Condition number of `M = (1/n) Σ μ_i u_i u_iᵀ`, `u_i = x_i/‖x_i‖`.
    pub chi: f64,
    /// Condition number of `Σ`.
    pub zeta: f64,
    /// `max_u E[(Σ^{-1/2}x·u)⁴] / E[(Σ^{-1/2}x·u)²]²` over candidate directions.
    pub hypercontractivity_ratio: f64,
    /// Rows with `⟨θ*, x_i⟩ < γ`.
    pub margin_violations: Vec<usize>,
    /// `‖θ*‖ <= w`
    pub radius_ok: bool,
    /// `‖θ*‖² >= γ`
    pub norm_floor_ok: bool,
    /// `λ_min(Σ) > 0`
    pub sigma_positive: bool,
    pub a3: A3Check,
}

impl AssumptionReport {
    pub fn a1_holds(&self) -> bool {
        self.margin_violations.is_empty() && self.radius_ok && self.norm_floor_ok
    }
}

/// Smallest eigenvalue with round-off below `1e-12 λ_max` reported as 0.
fn clamp_small(min: f64, max: f64) -> f64 {
    if min.abs() <= 1e-12 * max.abs().max(f64::MIN_POSITIVE) {
        0.0
    } else {
        min
    }
}

fn condition(min: f64, max: f64) -> f64 {
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn hypercontractivity(design: &FixedDesign, sigma: &DMatrix<f64>) -> f64 {
    let eig = sym_eigen(sigma);
    if clamp_small(eig.min(), eig.max()) <= 0.0 {
        return f64::INFINITY;
    }
    let inv_sqrt = eig.map_spectrum(|l| 1.0 / l.sqrt());
    let d = design.d();
    let white: Vec<Vec<f64>> = design
        .rows()
        .map(|x| (0..d).map(|a| (0..d).map(|b| inv_sqrt[(a, b)] * x[b]).sum()).collect())
        .collect();
    let mut directions: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|k| f64::from(u8::from(j == k))).collect()).collect();
    let step = (white.len() / MAX_DIRECTIONS).max(1);
    directions.extend(white.iter().step_by(step).filter(|w| norm(w) > 0.0).map(|w| {
        let len = norm(w);
        w.iter().map(|v| v / len).collect()
    }));
    let n = white.len() as f64;
    directions
        .iter()
        .map(|u| {
            let (m2, m4) = white.iter().fold((0.0, 0.0), |(a, b), w| {
                let p = dot(w, u);
                (a + p * p, b + p.powi(4))
            });
            (m4 / n) / (m2 / n).powi(2)
        })
        .fold(0.0, f64::max)
}

/// Diagnostics for the margin, spectrum and sample-size conditions at
/// confidence `delta`. Always completes; undefined quantities come out as
/// `inf`.
pub fn check_assumptions(design: &FixedDesign, theta_star: &ParamVector, space: &ParamSpace, delta: f64) -> AssumptionReport {
    let n = design.n() as f64;
    let d = design.d();
    let sigma = design.covariance();
    let se = sym_eigen(&sigma);
    let lambda_min_sigma = clamp_small(se.min(), se.max());
    let lambda_max_sigma = se.max();

    let mut m = DMatrix::zeros(d, d);
    let mut margin_violations = Vec::new();
    for (i, x) in design.rows().enumerate() {
        let mu = dot(x, theta_star.as_slice());
        if mu < space.margin() {
            margin_violations.push(i);
        }
        let len = norm(x);
        if len > 0.0 {
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] += mu * x[a] * x[b] / (len * len * n);
                }
            }
        }
    }
    let me = sym_eigen(&m);
    let m_min = clamp_small(me.min(), me.max());
    let chi = condition(m_min, me.max());
    let r = design.max_row_norm();
    let gamma = space.margin();
    let complexity = d as f64 * (24.0 * chi).ln() + (1.0 / delta).ln();
    let a3 = A3Check {
        min_eig_lhs: m_min,
        min_eig_rhs: r * r / (4.0 * n * gamma * gamma) * complexity,
        spread_lhs: (me.max() * complexity).sqrt(),
        spread_rhs: n.sqrt() * m_min / 16.0,
    };
    let theta_norm = theta_star.norm();
    AssumptionReport {
        lambda_min_sigma,
        lambda_max_sigma,
        r,
        chi,
        zeta: condition(lambda_min_sigma, lambda_max_sigma),
        hypercontractivity_ratio: hypercontractivity(design, &sigma),
        margin_violations,
        radius_ok: theta_norm <= space.radius(),
        norm_floor_ok: theta_norm * theta_norm >= gamma,
        sigma_positive: lambda_min_sigma > 0.0,
        a3,
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda_min_Sigma: {}", self.lambda_min_sigma)?;
        writeln!(f, "lambda_max_Sigma: {}", self.lambda_max_sigma)?;
        writeln!(f, "R: {}", self.r)?;
        writeln!(f, "chi: {}", self.chi)?;
        writeln!(f, "zeta: {}", self.zeta)?;
        writeln!(f, "hypercontractivity_ratio: {}", self.hypercontractivity_ratio)?;
        let rows: Vec<String> = self.margin_violations.iter().map(usize::to_string).collect();
        writeln!(f, "A1_margin_violations: [{}]", rows.join(","))?;
        writeln!(f, "A1_radius_ok: {}", self.radius_ok)?;
        writeln!(f, "A1_norm_floor_ok: {}", self.norm_floor_ok)?;
        writeln!(f, "A1: {}", if self.a1_holds() { "ok" } else { "violated" })?;
        writeln!(f, "A2: {}", if self.sigma_positive { "ok" } else { "violated (lambda_min_Sigma <= 0)" })?;
        writeln!(
            f,
            "A3_min_eig: {} >= {} : {}",
            self.a3.min_eig_lhs,
            self.a3.min_eig_rhs,
            self.a3.min_eig_holds()
        )?;
        write!(f, "A3_spread: {} <= {} : {}", self.a3.spread_lhs, self.a3.spread_rhs, self.a3.spread_holds())
    }
}
