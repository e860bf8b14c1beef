//! Median-of-means regression.
//!
//! Whitened responses `x'_i = y_i Σ^{-1/2} x_i` are split into `k` random
//! blocks; the geometric median `v` of the block means is mapped back as
//! `θ = Σ^{-1/2} v`.

use rand::seq::SliceRandom;

use super::check_response;
use crate::linalg::norm;
use crate::linear_model::{FixedDesign, ParamVector};
use crate::rng;
use crate::{Error, Result};

const WEISZFELD_TOL: f64 = 1e-10;
const WEISZFELD_MAX_ITERS: usize = 10_000;
const RANK_TOL: f64 = 1e-12;

/// `k = 20⌈ln(1/δ)⌉`.
pub fn mom_block_count(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(20 * ((1.0 / delta).ln().ceil() as usize).max(1))
}

/// Seeded shuffle of `0..n` cut into `k` blocks whose sizes differ by at most one.
pub fn partition_blocks(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 || n < k {
        return Err(Error::InsufficientSamples { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed));
    let (base, extra) = (n / k, n % k);
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let len = base + usize::from(b < extra);
        blocks.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(blocks)
}

/// Weiszfeld iteration from the coordinate-wise mean. An iterate landing on
/// a data point takes the modified step of Vardi and Zhang.
pub fn geometric_median(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidParameter("geometric median of no points".into()));
    };
    let d = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    let m = points.len() as f64;
    let mut z: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / m).collect();
    if points.len() == 1 || points.iter().all(|p| p == first) {
        return Ok(first.clone());
    }
    let scale = points.iter().map(|p| norm(p)).fold(1.0, f64::max);
    for _ in 0..WEISZFELD_MAX_ITERS {
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        let mut coincident = 0usize;
        for p in points {
            let diff: Vec<f64> = p.iter().zip(&z).map(|(a, b)| a - b).collect();
            let dist = norm(&diff);
            if dist <= 1e-14 * scale {
                coincident += 1;
                continue;
            }
            den += 1.0 / dist;
            for j in 0..d {
                num[j] += p[j] / dist;
            }
        }
        if den == 0.0 {
            return Ok(z);
        }
        let t: Vec<f64> = num.iter().map(|v| v / den).collect();
        let next = if coincident == 0 {
            t
        } else {
            let r_vec: Vec<f64> = t.iter().zip(&z).map(|(a, b)| (a - b) * den).collect();
            let r = norm(&r_vec);
            if r <= coincident as f64 {
                return Ok(z);
            }
            let lam = (coincident as f64 / r).min(1.0);
            t.iter().zip(&z).map(|(a, b)| (1.0 - lam) * a + lam * b).collect()
        };
        let shift = norm(&next.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        z = next;
        if shift <= WEISZFELD_TOL * scale {
            break;
        }
    }
    Ok(z)
}

/// Median of means with an explicit block count.
pub fn fit_median_of_means_blocks(design: &FixedDesign, y: &[f64], k: usize, seed: u64) -> Result<ParamVector> {
    check_response(design, y)?;
    let n = design.n();
    if k == 0 || n < 2 * k {
        return Err(Error::InsufficientSamples { n, k });
    }
    let eig = design.covariance_eigen();
    if eig.min() <= RANK_TOL * eig.max().max(1.0) {
        return Err(Error::RankDeficient(eig.min()));
    }
    let inv_sqrt = eig.map_spectrum(|l| 1.0 / l.sqrt());
    let d = design.d();
    let whitened: Vec<Vec<f64>> = design
        .rows()
        .zip(y)
        .map(|(x, &yi)| (0..d).map(|a| yi * (0..d).map(|b| inv_sqrt[(a, b)] * x[b]).sum::<f64>()).collect())
        .collect();
    let means: Vec<Vec<f64>> = partition_blocks(n, k, seed)?
        .iter()
        .map(|block| {
            let len = block.len() as f64;
            (0..d).map(|j| block.iter().map(|&i| whitened[i][j]).sum::<f64>() / len).collect()
        })
        .collect();
    let v = geometric_median(&means)?;
    let theta = (0..d).map(|a| (0..d).map(|b| inv_sqrt[(a, b)] * v[b]).sum()).collect();
    ParamVector::new(theta)
}

/// Median of means with `k = 20⌈ln(1/δ)⌉` blocks.
pub fn fit_median_of_means(design: &FixedDesign, y: &[f64], delta: f64, seed: u64) -> Result<ParamVector> {
    fit_median_of_means_blocks(design, y, mom_block_count(delta)?, seed)
}
