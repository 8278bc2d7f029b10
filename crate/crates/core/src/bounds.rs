//! Exact integer lower bounds on the generalized defect of a Kronecker
//! product, as a function of the factor sizes only.
//!
//! Two routes are provided. [`expanded_lower_bound`] sums the per-subproduct
//! dimension bounds over every proper removed-position subset;
//! [`closed_form_lower_bound`] evaluates the product formula. They must agree
//! for every size sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::SizeSequence;

/// Largest admissible `N` for bound arithmetic.
pub const MAX_BOUND_N: usize = 1 << 31;

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

fn guard(sizes: &SizeSequence) -> Result<u128> {
    if sizes.total() > MAX_BOUND_N {
        return Err(Error::Overflow(format!(
            "N = {} exceeds the bound guard 2^31",
            sizes.total()
        )));
    }
    Ok(sizes.total() as u128)
}

/// Number of 2's in `sizes`, or 1 if there are none.
pub fn count_twos(sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "count_twos needs a non-empty sequence".into(),
        ));
    }
    let twos = sizes.iter().filter(|&&n| n == 2).count();
    Ok(twos.max(1))
}

/// Upper bound on the dimension of the all-components-differ subspace of a
/// product with the given factor sizes:
/// `(N - 2^(#2 - 1)) * prod(n_k - 1)`, which is 0 when any `n_k = 1`.
pub fn subspace_dim_bound(sizes: &[usize]) -> Result<u128> {
    let twos = count_twos(sizes)?;
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    if sizes.contains(&1) {
        return Ok(0);
    }
    let n: u128 = sizes
        .iter()
        .try_fold(1u128, |acc, &x| acc.checked_mul(x as u128))
        .ok_or_else(|| overflow("size product"))?;
    let shift = 1u128
        .checked_shl((twos - 1) as u32)
        .ok_or_else(|| overflow("power of two"))?;
    let reduced = sizes
        .iter()
        .try_fold(1u128, |acc, &x| acc.checked_mul(x as u128 - 1))
        .ok_or_else(|| overflow("reduced size product"))?;
    (n - shift)
        .checked_mul(reduced)
        .ok_or_else(|| overflow("subspace bound"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetBound {
    /// Removed positions, 1-based.
    pub removed: Vec<usize>,
    /// `prod_{k in removed} n_k`.
    pub multiplicity: u128,
    /// Bound on the retained subproduct's subspace dimension.
    pub bound: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub sizes: SizeSequence,
    pub per_subset_bounds: Vec<SubsetBound>,
    pub expanded_total: i128,
    pub closed_form_total: u128,
    pub naive_product: u128,
    /// Raw number of 2's (0 when there are none).
    pub twos_count: usize,
}

/// Proper subsets of `1..=r` as 1-based position lists, ordered by bitmask.
pub(crate) fn proper_subsets(r: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..(1u64 << r) - 1).map(move |mask| {
        (0..r)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| b + 1)
            .collect()
    })
}

/// `N^2 - sum_S (prod_{k in S} n_k) * subspace_dim_bound(retained)`, by
/// explicit enumeration of every proper subset `S`.
pub fn expanded_lower_bound(sizes: &SizeSequence) -> Result<BoundBreakdown> {
    let n = guard(sizes)?;
    let all = sizes.as_slice();
    let mut per_subset_bounds = Vec::new();
    let mut sum: i128 = 0;
    for removed in proper_subsets(all.len()) {
        let retained: Vec<usize> = (1..=all.len())
            .filter(|k| !removed.contains(k))
            .map(|k| all[k - 1])
            .collect();
        let multiplicity: u128 = removed.iter().map(|&k| all[k - 1] as u128).product();
        let bound = subspace_dim_bound(&retained)?;
        let term = multiplicity
            .checked_mul(bound)
            .ok_or_else(|| overflow("bound term"))?;
        sum = sum
            .checked_add(i128::try_from(term).map_err(|_| overflow("bound term"))?)
            .ok_or_else(|| overflow("bound sum"))?;
        per_subset_bounds.push(SubsetBound {
            removed,
            multiplicity,
            bound,
        });
    }
    let n_sq = i128::try_from(n * n).map_err(|_| overflow("N^2"))?;
    Ok(BoundBreakdown {
        sizes: sizes.clone(),
        per_subset_bounds,
        expanded_total: n_sq - sum,
        closed_form_total: closed_form_lower_bound(sizes)?,
        naive_product: naive_product(sizes)?,
        twos_count: all.iter().filter(|&&x| x == 2).count(),
    })
}

/// `prod (2 n_k - 1)`.
pub fn naive_product(sizes: &SizeSequence) -> Result<u128> {
    guard(sizes)?;
    sizes
        .as_slice()
        .iter()
        .try_fold(1u128, |acc, &x| acc.checked_mul(2 * x as u128 - 1))
        .ok_or_else(|| overflow("naive product"))
}

/// Product formula: `prod (2 n_l - 1)` with no 2's (or exactly one), and
/// `prod_{n_l > 2} (2 n_l - 1) * 2^(x-1) (2^x + 1)` for `x >= 1` twos.
/// Entries equal to 1 contribute a factor 1.
pub fn closed_form_lower_bound(sizes: &SizeSequence) -> Result<u128> {
    guard(sizes)?;
    let x = sizes.as_slice().iter().filter(|&&n| n == 2).count();
    if x <= 1 {
        return naive_product(sizes);
    }
    let others = sizes
        .as_slice()
        .iter()
        .filter(|&&n| n != 2)
        .try_fold(1u128, |acc, &n| acc.checked_mul(2 * n as u128 - 1))
        .ok_or_else(|| overflow("closed form"))?;
    let pow = |e: usize| {
        1u128
            .checked_shl(e as u32)
            .ok_or_else(|| overflow("power of two"))
    };
    let twos_part = pow(x - 1)?
        .checked_mul(pow(x)? + 1)
        .ok_or_else(|| overflow("closed form"))?;
    others
        .checked_mul(twos_part)
        .ok_or_else(|| overflow("closed form"))
}

/// Product of the factors' generalized defects, a floor on the product's.
pub fn supermultiplicative_floor(gendefects: &[u128]) -> Result<u128> {
    if gendefects.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one generalized defect".into(),
        ));
    }
    gendefects
        .iter()
        .try_fold(1u128, |acc, &g| acc.checked_mul(g))
        .ok_or_else(|| overflow("supermultiplicative floor"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyComparison {
    pub closed_form: u128,
    pub naive_product: u128,
    pub delta: u128,
}

/// Closed form versus splitting every factor off by supermultiplicativity.
pub fn compare_strategies(sizes: &SizeSequence) -> Result<StrategyComparison> {
    let closed_form = closed_form_lower_bound(sizes)?;
    let naive_product = naive_product(sizes)?;
    Ok(StrategyComparison {
        closed_form,
        naive_product,
        delta: closed_form - naive_product,
    })
}
