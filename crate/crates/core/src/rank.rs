//! Numerical rank of a set of real vectors via singular values.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ranks whose spectral gap falls below this ratio are reported as suspect.
pub const GAP_WARNING_RATIO: f64 = 1e3;

/// Unit roundoff of `f64`.
const ROUNDOFF: f64 = f64::EPSILON / 2.0;

pub(crate) fn automatic_tolerance(count: usize, len: usize, sigma_max: f64) -> f64 {
    count.max(len) as f64 * ROUNDOFF * sigma_max
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum TolPolicy {
    /// `max(m, L) * u * sigma_max`, `u` the unit roundoff.
    #[default]
    Automatic,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `sigma_rank / sigma_(rank+1)`, infinite when nothing was discarded,
    /// when the first discarded value is exactly zero, or when rank is 0.
    pub gap_ratio: f64,
    pub tolerance_used: f64,
}

impl RankResult {
    pub fn is_gap_suspect(&self) -> bool {
        self.gap_ratio < GAP_WARNING_RATIO
    }

    fn zero(tolerance: f64, count: usize, len: usize) -> Self {
        Self {
            rank: 0,
            singular_values: vec![0.0; count.min(len)],
            gap_ratio: f64::INFINITY,
            tolerance_used: tolerance,
        }
    }
}

/// Rank of the span of `vectors`.
pub fn numerical_rank(vectors: &[Vec<f64>], policy: TolPolicy) -> Result<RankResult> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("numerical_rank needs at least one vector".into()))?;
    let len = first.len();
    if let Some(bad) = vectors.iter().position(|v| v.len() != len) {
        return Err(Error::DimensionMismatch(format!(
            "vector {bad} has length {}, expected {len}",
            vectors[bad].len()
        )));
    }
    let mut flat = Vec::with_capacity(vectors.len() * len);
    for v in vectors {
        flat.extend_from_slice(v);
    }
    rank_of_rows(&flat, vectors.len(), len, policy)
}

/// Same as [`numerical_rank`] but on `count` row vectors of length `len`
/// stored contiguously.
pub fn rank_of_rows(
    flat: &[f64],
    count: usize,
    len: usize,
    policy: TolPolicy,
) -> Result<RankResult> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "numerical_rank needs at least one vector".into(),
        ));
    }
    if flat.len() != count * len {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {count} vectors of length {len}",
            flat.len()
        )));
    }
    if let TolPolicy::Explicit(eps) = policy {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {eps}"
            )));
        }
    }
    if len == 0 {
        return Ok(RankResult::zero(
            tolerance_floor(policy, 0.0, count, len),
            count,
            len,
        ));
    }

    // Zero columns contribute nothing to the singular values; dropping them
    // shrinks the SVD for the sparse generator sets.
    let live: Vec<usize> = (0..len)
        .filter(|&c| (0..count).any(|r| flat[r * len + c] != 0.0))
        .collect();
    if live.is_empty() {
        return Ok(RankResult::zero(
            tolerance_floor(policy, 0.0, count, len),
            count,
            len,
        ));
    }
    let m = DMatrix::from_fn(count, live.len(), |r, c| flat[r * len + live[c]]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));

    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let tol = tolerance_floor(policy, sigma_max, count, len);
    let rank = sv.iter().take_while(|&&s| s > tol).count();
    let gap_ratio = if rank == 0 || rank == sv.len() || sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    let result = RankResult {
        rank,
        singular_values: sv,
        gap_ratio,
        tolerance_used: tol,
    };
    if result.is_gap_suspect() {
        log::warn!(
            "numerical rank {rank} has a weak spectral gap (ratio {gap_ratio:.3e}); integer rank may be unreliable"
        );
    }
    Ok(result)
}

fn tolerance_floor(policy: TolPolicy, sigma_max: f64, count: usize, len: usize) -> f64 {
    let tol = match policy {
        TolPolicy::Automatic => automatic_tolerance(count, len, sigma_max),
        TolPolicy::Explicit(eps) => eps,
    };
    tol.max(f64::MIN_POSITIVE)
}
