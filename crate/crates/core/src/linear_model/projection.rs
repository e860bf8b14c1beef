use nalgebra::{DMatrix, DVector};

use super::{FixedDesign, ParamSpace, ParamVector};
use crate::linalg::{dot, norm};
use crate::{Error, Result};

/// Points violating no constraint by more than this are returned unchanged.
pub const FEAS_TOL: f64 = 1e-9;
const BISECTION_STEPS: usize = 200;

/// Euclidean projection onto `Θ = {‖θ‖ <= w, ⟨θ, x_i⟩ >= γ}`.
///
/// The polyhedral part is solved exactly by the Goldfarb–Idnani dual
/// active-set method. When the ball binds, the projection is
/// `P_H(θ/(1+μ))` for the multiplier `μ >= 0` with norm exactly `w`, found by
/// bisection (the norm is nonincreasing in `μ`).
pub fn project(theta: &ParamVector, space: &ParamSpace, design: &FixedDesign) -> Result<ParamVector> {
    let d = design.d();
    if theta.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: theta.dim() });
    }
    if space.violation(theta, design) <= FEAS_TOL {
        return Ok(theta.clone());
    }
    let gamma = space.margin();
    let radius = space.radius();
    let polyhedral = Polyhedral::new(design, gamma)?;

    let z = polyhedral.project(theta.as_slice())?;
    let z = if norm(&z) <= radius {
        z
    } else {
        let at = |mu: f64| polyhedral.project(&theta.as_slice().iter().map(|v| v / (1.0 + mu)).collect::<Vec<_>>());
        let closest = polyhedral.project(&vec![0.0; d])?;
        if norm(&closest) > radius {
            return Err(Error::ProjectionFailed { violation: norm(&closest) - radius, sweeps: 0 });
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while norm(&at(hi)?) > radius {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::ProjectionFailed { violation: norm(&at(hi)?) - radius, sweeps: 0 });
            }
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm(&at(mid)?) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut z = at(hi)?;
        let len = norm(&z);
        if len > radius {
            z.iter_mut().for_each(|v| *v *= radius / len);
        }
        z
    };
    let candidate = ParamVector(z);
    let violation = space.violation(&candidate, design);
    if violation > FEAS_TOL {
        return Err(Error::ProjectionFailed { violation, sweeps: 0 });
    }
    Ok(candidate)
}

/// Projection onto `{z : ⟨x_i, z⟩ >= γ for all i}`.
struct Polyhedral<'a> {
    design: &'a FixedDesign,
    gamma: f64,
    row_norms: Vec<f64>,
    tol: f64,
}

impl<'a> Polyhedral<'a> {
    fn new(design: &'a FixedDesign, gamma: f64) -> Result<Self> {
        let row_norms: Vec<f64> = design.rows().map(norm).collect();
        if row_norms.contains(&0.0) {
            // ⟨θ, 0⟩ >= γ > 0 has no solution
            return Err(Error::ProjectionFailed { violation: gamma, sweeps: 0 });
        }
        Ok(Self { design, gamma, row_norms, tol: 1e-12 * gamma.max(1.0) })
    }

    /// Row with the largest violation in distance units, if any exceeds the tolerance.
    fn most_violated(&self, z: &[f64]) -> Option<usize> {
        let mut worst = None;
        let mut worst_dist = 0.0;
        for (i, x) in self.design.rows().enumerate() {
            let slack = dot(x, z) - self.gamma;
            if slack < -self.tol {
                let dist = -slack / self.row_norms[i];
                if dist > worst_dist {
                    worst_dist = dist;
                    worst = Some(i);
                }
            }
        }
        worst
    }

    fn project(&self, a: &[f64]) -> Result<Vec<f64>> {
        let d = self.design.d();
        let mut z = a.to_vec();
        let mut active: Vec<usize> = Vec::with_capacity(d);
        let mut lambda: Vec<f64> = Vec::with_capacity(d);
        let max_steps = 2 * self.design.n() + 50 * (d + 1);
        let mut steps = 0;
        let fail = |z: &[f64], steps| {
            let violation = self.design.rows().map(|x| self.gamma - dot(x, z)).fold(0.0, f64::max);
            Error::ProjectionFailed { violation, sweeps: steps }
        };

        while let Some(p) = self.most_violated(&z) {
            let xp = self.design.row(p);
            let mut lambda_p = 0.0;
            loop {
                steps += 1;
                if steps > max_steps {
                    return Err(fail(&z, steps));
                }
                // r = (NᵀN)⁻¹ Nᵀ x_p, dz = x_p − N r
                let k = active.len();
                let r: Vec<f64> = if k == 0 {
                    Vec::new()
                } else {
                    let gram = DMatrix::from_fn(k, k, |a, b| dot(self.design.row(active[a]), self.design.row(active[b])));
                    let rhs = DVector::from_fn(k, |a, _| dot(self.design.row(active[a]), xp));
                    match gram.cholesky() {
                        Some(ch) => ch.solve(&rhs).iter().copied().collect(),
                        None => return Err(fail(&z, steps)),
                    }
                };
                let mut dz = xp.to_vec();
                for (j, &i) in active.iter().enumerate() {
                    for (v, xi) in dz.iter_mut().zip(self.design.row(i)) {
                        *v -= r[j] * xi;
                    }
                }
                let dz2 = dot(&dz, &dz);
                let moves = dz2 > 1e-14 * self.row_norms[p] * self.row_norms[p];

                let mut t_dual = f64::INFINITY;
                let mut blocking = None;
                for j in 0..k {
                    if r[j] > 0.0 {
                        let t = lambda[j] / r[j];
                        if t < t_dual {
                            t_dual = t;
                            blocking = Some(j);
                        }
                    }
                }
                let slack = dot(xp, &z) - self.gamma;
                let t_primal = if moves { (-slack / dz2).max(0.0) } else { f64::INFINITY };
                if t_dual.is_infinite() && t_primal.is_infinite() {
                    return Err(fail(&z, steps));
                }
                let t = t_dual.min(t_primal);
                if moves {
                    for (v, dv) in z.iter_mut().zip(&dz) {
                        *v += t * dv;
                    }
                }
                for j in 0..k {
                    lambda[j] -= t * r[j];
                }
                lambda_p += t;
                if t_primal <= t_dual {
                    active.push(p);
                    lambda.push(lambda_p);
                    break;
                }
                let j = blocking.expect("finite dual step has a blocking constraint");
                active.remove(j);
                lambda.remove(j);
            }
        }
        Ok(z)
    }
}
