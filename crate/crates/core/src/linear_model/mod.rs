//! Fixed-design data model, the constrained parameter set, the affine link
//! layer and the excess-risk functional.

mod links;
mod projection;

pub use links::{apply_links, phi, phi_prime, sigmoid, softmax3, LinkLayer, RAW_DIM};
pub use projection::{project, FEAS_TOL};

use nalgebra::{DMatrix, DVector};

use crate::linalg::{dot, norm, sym_eigen, SymEigen};
use crate::{Error, Result};

/// Covariate matrix held fixed across response draws; rows are stored
/// contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedDesign {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl FixedDesign {
    /// Row-major `n × d` data.
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!("design needs n >= 1 and d >= 1, got {n}×{d}")));
        }
        if data.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: data.len() });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite design entry in row {}", i / d)));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, d, data)
    }

    /// One feature per example.
    pub fn from_column(x: &[f64]) -> Result<Self> {
        Self::new(x.len(), 1, x.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.d, &self.data)
    }

    /// `X θ`.
    pub fn predict(&self, theta: &ParamVector) -> Vec<f64> {
        self.rows().map(|x| dot(x, theta.as_slice())).collect()
    }

    /// `R = max_i ‖x_i‖₂`.
    pub fn max_row_norm(&self) -> f64 {
        self.rows().map(norm).fold(0.0, f64::max)
    }

    /// `Σ = (1/n) Σ_i x_i x_iᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.d;
        let mut s = DMatrix::zeros(d, d);
        for x in self.rows() {
            for a in 0..d {
                for b in a..d {
                    s[(a, b)] += x[a] * x[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                s[(a, b)] /= self.n as f64;
                s[(b, a)] = s[(a, b)];
            }
        }
        s
    }

    pub fn covariance_eigen(&self) -> SymEigen {
        sym_eigen(&self.covariance())
    }

    /// `Xᵀ v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (x, &vi) in self.rows().zip(v) {
            for (o, xj) in out.iter_mut().zip(x) {
                *o += xj * vi;
            }
        }
        out
    }
}

/// `Θ = {θ : ‖θ‖₂ <= radius, ⟨θ, x_i⟩ >= margin for every row}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpace {
    radius: f64,
    margin: f64,
}

impl ParamSpace {
    pub fn new(radius: f64, margin: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(Error::InvalidParameter(format!("margin must be positive, got {margin}")));
        }
        Ok(Self { radius, margin })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Largest constraint violation of `theta` (0 when feasible).
    pub fn violation(&self, theta: &ParamVector, design: &FixedDesign) -> f64 {
        let t = theta.as_slice();
        let ball = norm(t) - self.radius;
        design
            .rows()
            .map(|x| self.margin - dot(t, x))
            .fold(ball, f64::max)
            .max(0.0)
    }

    pub fn contains(&self, theta: &ParamVector, design: &FixedDesign, tol: f64) -> bool {
        self.violation(theta, design) <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameter vector must be nonempty and finite".into()));
        }
        Ok(Self(theta))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl From<DVector<f64>> for ParamVector {
    fn from(v: DVector<f64>) -> Self {
        Self(v.iter().copied().collect())
    }
}

/// `‖θ − θ*‖²_Σ`.
pub fn excess_risk(theta: &ParamVector, theta_star: &ParamVector, sigma: &DMatrix<f64>) -> Result<f64> {
    let d = theta_star.dim();
    if theta.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: theta.dim() });
    }
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: sigma.nrows() });
    }
    let diff = theta.to_dvector() - theta_star.to_dvector();
    Ok((diff.transpose() * sigma * &diff)[(0, 0)].max(0.0))
}
