//! Dimension of the generator span, defect, and generalized defect.
//!
//! Two methods are offered. The direct method ranks every generator of the
//! materialized product at once. The decomposed method splits the span into
//! a direct sum over pattern subsets; all subsets sharing the same removed
//! positions have the dimension of the reduced product's all-differ
//! subspace, so
//!
//! `dim = sum over proper S of (prod_{k in S} n_k) * d(S)`
//!
//! where `d(S)` ranks only the generators of the product deprived of the
//! factors in `S`.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{closed_form_lower_bound, proper_subsets};
use crate::error::{Error, Result};
use crate::factors::FactorList;
use crate::matrix::ComplexMatrix;
use crate::mset::{pattern_subset, spanning_set, PatternKey};
use crate::rank::{RankResult, TolPolicy};

pub const DEFAULT_DIRECT_GUARD: usize = 64;
pub const DEFAULT_DECOMPOSED_GUARD: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Decomposed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub policy: TolPolicy,
    /// Largest `N` the direct method will materialize.
    pub direct_guard: usize,
    /// Largest retained subproduct the decomposed method will rank.
    pub decomposed_guard: usize,
    pub parallel: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            policy: TolPolicy::Automatic,
            direct_guard: DEFAULT_DIRECT_GUARD,
            decomposed_guard: DEFAULT_DECOMPOSED_GUARD,
            parallel: true,
        }
    }
}

/// One term of the decomposed sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetTerm {
    /// Removed factor positions, 1-based.
    pub removed: Vec<usize>,
    /// Dimension of the reduced product's all-differ subspace.
    pub dim: usize,
    /// `prod_{k in removed} n_k`: how many pattern subspaces share `dim`.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub n_total: usize,
    pub sizes: Vec<usize>,
    pub dim_mspace: usize,
    pub defect: i64,
    pub generalized_defect: i64,
    pub method: Method,
    pub per_subset_dims: Vec<SubsetTerm>,
    pub lower_bound: i64,
    #[serde(with = "float_or_inf")]
    pub min_gap_ratio: f64,
    /// Number of separate rank computations performed.
    pub rank_problems: usize,
    /// Phase name to seconds.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub wall_times: BTreeMap<String, f64>,
}

impl DefectReport {
    fn assemble(
        factors: &FactorList,
        dim_mspace: usize,
        method: Method,
        per_subset_dims: Vec<SubsetTerm>,
        min_gap_ratio: f64,
    ) -> Result<Self> {
        let n = factors.total() as i64;
        let dim = dim_mspace as i64;
        let lower_bound = closed_form_lower_bound(factors.sizes())?;
        Ok(Self {
            n_total: factors.total(),
            sizes: factors.sizes().as_slice().to_vec(),
            dim_mspace,
            defect: (n - 1) * (n - 1) - dim,
            generalized_defect: n * n - dim,
            method,
            per_subset_dims,
            lower_bound: i64::try_from(lower_bound)
                .map_err(|_| Error::Overflow("lower bound".into()))?,
            min_gap_ratio,
            rank_problems: 1,
            wall_times: BTreeMap::new(),
        })
    }

    /// Total wall time over all recorded phases.
    pub fn total_seconds(&self) -> f64 {
        self.wall_times.get("total").copied().unwrap_or(0.0)
    }
}

/// Serializes non-finite values as the string `"inf"`.
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad float {t:?}"))),
        }
    }
}

/// Rank of all generators of `u`.
pub fn dim_mspace(u: &ComplexMatrix) -> Result<RankResult> {
    dim_mspace_with(u, TolPolicy::Automatic)
}

pub fn dim_mspace_with(u: &ComplexMatrix, policy: TolPolicy) -> Result<RankResult> {
    spanning_set(u)?.rank(policy)
}

/// `(N - 1)^2 - dim M(U)`.
pub fn defect(u: &ComplexMatrix) -> Result<i64> {
    let n = u.rows() as i64;
    Ok((n - 1) * (n - 1) - dim_mspace(u)?.rank as i64)
}

/// `N^2 - dim M(U)`, the dimension of the feasible space.
pub fn generalized_defect(u: &ComplexMatrix) -> Result<i64> {
    let n = u.rows() as i64;
    Ok(n * n - dim_mspace(u)?.rank as i64)
}

fn check_removed(factors: &FactorList, removed: &[usize]) -> Result<()> {
    let r = factors.len();
    if removed.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "removed positions {removed:?} must be strictly increasing"
        )));
    }
    if removed.iter().any(|&k| k == 0 || k > r) {
        return Err(Error::IndexOutOfRange(format!(
            "removed positions {removed:?} not within 1..={r}"
        )));
    }
    if removed.len() == r {
        return Err(Error::InvalidArgument("cannot remove every factor".into()));
    }
    Ok(())
}

/// Rank of the all-differ subset of the product deprived of `removed`.
/// Zero, without ranking, when a retained factor is `1 x 1`.
pub fn subproduct_rank(
    factors: &FactorList,
    removed: &[usize],
    policy: TolPolicy,
) -> Result<RankResult> {
    check_removed(factors, removed)?;
    let reduced = factors.without(removed)?;
    pattern_subset(&reduced, &PatternKey::empty())?.rank(policy)
}

pub fn subproduct_dim(factors: &FactorList, removed: &[usize]) -> Result<usize> {
    Ok(subproduct_rank(factors, removed, TolPolicy::Automatic)?.rank)
}

/// Direct method on the materialized product.
pub fn dim_mspace_direct(factors: &FactorList, opts: &EngineOptions) -> Result<DefectReport> {
    let n = factors.total();
    if n > opts.direct_guard {
        return Err(Error::GuardExceeded(format!(
            "direct method limited to N <= {}, got N = {n}",
            opts.direct_guard
        )));
    }
    let start = Instant::now();
    let u = factors.product();
    let set = spanning_set(&u)?;
    let built = start.elapsed().as_secs_f64();
    let rank = set.rank(opts.policy)?;
    let total = start.elapsed().as_secs_f64();
    let mut report = DefectReport::assemble(
        factors,
        rank.rank,
        Method::Direct,
        Vec::new(),
        rank.gap_ratio,
    )?;
    report.wall_times.insert("generators".into(), built);
    report.wall_times.insert("rank".into(), total - built);
    report.wall_times.insert("total".into(), total);
    Ok(report)
}

/// Identity of each factor: index of the first bitwise-equal factor.
fn factor_identities(factors: &FactorList) -> Vec<usize> {
    let fs = factors.factors();
    (0..fs.len())
        .map(|k| (0..=k).find(|&m| fs[m] == fs[k]).unwrap_or(k))
        .collect()
}

/// Decomposed method: one small rank problem per distinct retained
/// subproduct, memoized by the ordered identities of the retained factors.
pub fn dim_mspace_kron(factors: &FactorList, opts: &EngineOptions) -> Result<DefectReport> {
    let start = Instant::now();
    let sizes = factors.sizes().as_slice();
    let r = sizes.len();
    let ids = factor_identities(factors);

    let subsets: Vec<Vec<usize>> = proper_subsets(r).collect();
    let retained_key = |removed: &[usize]| -> Vec<usize> {
        (1..=r)
            .filter(|k| !removed.contains(k))
            .map(|k| ids[k - 1])
            .collect()
    };

    let mut unique: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen = HashMap::new();
    for removed in &subsets {
        let key = retained_key(removed);
        let retained_has_unit = (1..=r).any(|k| !removed.contains(&k) && sizes[k - 1] == 1);
        if retained_has_unit || seen.contains_key(&key) {
            continue;
        }
        let retained_n: usize = (1..=r)
            .filter(|k| !removed.contains(k))
            .map(|k| sizes[k - 1])
            .product();
        if retained_n > opts.decomposed_guard {
            return Err(Error::GuardExceeded(format!(
                "decomposed method limited to subproducts with N <= {}, got {retained_n}",
                opts.decomposed_guard
            )));
        }
        seen.insert(key.clone(), unique.len());
        unique.push((key, removed.clone()));
    }

    let eval = |removed: &Vec<usize>| subproduct_rank(factors, removed, opts.policy);
    let ranks: Vec<RankResult> = if opts.parallel {
        unique
            .par_iter()
            .map(|(_, removed)| eval(removed))
            .collect::<Result<_>>()?
    } else {
        unique
            .iter()
            .map(|(_, removed)| eval(removed))
            .collect::<Result<_>>()?
    };
    let memo: HashMap<&Vec<usize>, &RankResult> =
        unique.iter().map(|(k, _)| k).zip(ranks.iter()).collect();

    let mut terms = Vec::with_capacity(subsets.len());
    let mut dim = 0usize;
    let mut min_gap = f64::INFINITY;
    for removed in subsets {
        let multiplicity: usize = removed.iter().map(|&k| sizes[k - 1]).product();
        // subsets whose retained product has a 1x1 factor were never ranked
        let d = match memo.get(&retained_key(&removed)) {
            Some(rank) => {
                min_gap = min_gap.min(rank.gap_ratio);
                rank.rank
            }
            None => 0,
        };
        dim += multiplicity * d;
        terms.push(SubsetTerm {
            removed,
            dim: d,
            multiplicity,
        });
    }
    let total = start.elapsed().as_secs_f64();
    let mut report = DefectReport::assemble(factors, dim, Method::Decomposed, terms, min_gap)?;
    report.wall_times.insert("subproducts".into(), total);
    report.wall_times.insert("total".into(), total);
    report.rank_problems = unique.len();
    Ok(report)
}

pub fn compute(factors: &FactorList, method: Method, opts: &EngineOptions) -> Result<DefectReport> {
    match method {
        Method::Direct => dim_mspace_direct(factors, opts),
        Method::Decomposed => dim_mspace_kron(factors, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRank {
    pub key: PatternKey,
    pub generators: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectSumCheck {
    pub holds: bool,
    pub total_rank: usize,
    pub sum_of_ranks: usize,
    pub per_key: Vec<KeyRank>,
}

/// Checks that the pattern subspaces form a direct sum: the rank of their
/// union equals the sum of their individual ranks.
pub fn verify_direct_sum(factors: &FactorList, opts: &EngineOptions) -> Result<DirectSumCheck> {
    let n = factors.total();
    if n > opts.direct_guard {
        return Err(Error::GuardExceeded(format!(
            "direct-sum check limited to N <= {}, got N = {n}",
            opts.direct_guard
        )));
    }
    let keys = PatternKey::all(factors.sizes());
    let eval = |key: &PatternKey| -> Result<(KeyRank, Vec<Vec<f64>>)> {
        let set = pattern_subset(factors, key)?;
        let rank = set.rank(opts.policy)?.rank;
        Ok((
            KeyRank {
                key: key.clone(),
                generators: set.len(),
                rank,
            },
            set.vectors,
        ))
    };
    let results: Vec<(KeyRank, Vec<Vec<f64>>)> = if opts.parallel {
        keys.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        keys.iter().map(eval).collect::<Result<_>>()?
    };

    let mut union = crate::mset::GeneratorSet {
        n,
        labels: Vec::new(),
        vectors: Vec::new(),
    };
    let mut per_key = Vec::with_capacity(results.len());
    for (kr, vectors) in results {
        union.vectors.extend(vectors);
        per_key.push(kr);
    }
    let total_rank = union.rank(opts.policy)?.rank;
    let sum_of_ranks = per_key.iter().map(|k| k.rank).sum();
    Ok(DirectSumCheck {
        holds: total_rank == sum_of_ranks,
        total_rank,
        sum_of_ranks,
        per_key,
    })
}
