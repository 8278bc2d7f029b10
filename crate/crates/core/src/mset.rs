//! Generator matrices `M^{ij} = A^{ij} + i S^{ij}` and their pattern subsets.
//!
//! `M^{ij}` has row `i` equal to `row_i(U) ⊙ conj(row_j(U))`, row `j` equal
//! to its negation, and zeros elsewhere. The real span of all `A^{ij}` and
//! `S^{ij}` (`i < j`) is the space whose dimension fixes the defect.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factors::{FactorList, UNITARITY_TOL};
use crate::indexing::{ordinary_to_vector, SizeSequence};
use crate::matrix::{unitarity_deviation, ComplexMatrix, RealMatrix};
use crate::rank::{rank_of_rows, RankResult, TolPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// Real part.
    A,
    /// Imaginary part.
    S,
}

/// `(i, j, kind)` with 1-based `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneratorLabel {
    pub i: usize,
    pub j: usize,
    pub kind: GeneratorKind,
}

/// Labeled generators flattened row-major into real `N^2`-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub n: usize,
    pub labels: Vec<GeneratorLabel>,
    pub vectors: Vec<Vec<f64>>,
}

impl GeneratorSet {
    fn empty(n: usize) -> Self {
        Self {
            n,
            labels: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Dimension of the span. An empty set spans the zero space.
    pub fn rank(&self, policy: TolPolicy) -> Result<RankResult> {
        if self.vectors.is_empty() {
            return Ok(RankResult {
                rank: 0,
                singular_values: Vec::new(),
                gap_ratio: f64::INFINITY,
                tolerance_used: match policy {
                    TolPolicy::Explicit(e) => e,
                    TolPolicy::Automatic => f64::MIN_POSITIVE,
                },
            });
        }
        let len = self.n * self.n;
        let mut flat = Vec::with_capacity(self.vectors.len() * len);
        for v in &self.vectors {
            flat.extend_from_slice(v);
        }
        rank_of_rows(&flat, self.vectors.len(), len, policy)
    }

    /// Generator matrix for entry `idx`, unflattened.
    pub fn matrix(&self, idx: usize) -> RealMatrix {
        RealMatrix::new(self.n, self.n, self.vectors[idx].clone()).expect("generator shape")
    }

    /// Appends one `(A, S)` pair given the complex row `row_i ⊙ conj(row_j)`.
    fn push_pair(&mut self, i: usize, j: usize, mrow: &[Complex64]) {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        let mut s = vec![0.0; n * n];
        for (c, z) in mrow.iter().enumerate() {
            a[(i - 1) * n + c] = z.re;
            a[(j - 1) * n + c] = -z.re;
            s[(i - 1) * n + c] = z.im;
            s[(j - 1) * n + c] = -z.im;
        }
        self.labels.push(GeneratorLabel {
            i,
            j,
            kind: GeneratorKind::A,
        });
        self.vectors.push(a);
        self.labels.push(GeneratorLabel {
            i,
            j,
            kind: GeneratorKind::S,
        });
        self.vectors.push(s);
    }
}

fn check_pair(u: &ComplexMatrix, i: usize, j: usize) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let n = u.rows();
    if i == 0 || j > n || i >= j {
        return Err(Error::IndexOutOfRange(format!(
            "generator indices need 1 <= i < j <= {n}, got ({i}, {j})"
        )));
    }
    Ok(())
}

fn product_row(u: &ComplexMatrix, i: usize, j: usize) -> Vec<Complex64> {
    u.row(i - 1)
        .iter()
        .zip(u.row(j - 1))
        .map(|(a, b)| a * b.conj())
        .collect()
}

/// `product_row` with its mean removed. For a unitary `U` and `i != j` the
/// row already sums to zero, so this only strips rounding error left in `U`;
/// without it, small generator sets can misreport their rank.
fn generator_row(u: &ComplexMatrix, i: usize, j: usize) -> Vec<Complex64> {
    let mut row = product_row(u, i, j);
    let mean = row.iter().sum::<Complex64>() / row.len() as f64;
    row.iter_mut().for_each(|z| *z -= mean);
    row
}

pub fn m_matrix(u: &ComplexMatrix, i: usize, j: usize) -> Result<ComplexMatrix> {
    check_pair(u, i, j)?;
    let row = product_row(u, i, j);
    let n = u.rows();
    let mut m = ComplexMatrix::zeros(n, n);
    for (c, z) in row.into_iter().enumerate() {
        m[(i - 1, c)] = z;
        m[(j - 1, c)] = -z;
    }
    Ok(m)
}

/// `(A^{ij}, S^{ij})`: real and imaginary parts of `M^{ij}`.
pub fn generator_pair(u: &ComplexMatrix, i: usize, j: usize) -> Result<(RealMatrix, RealMatrix)> {
    Ok(m_matrix(u, i, j)?.split())
}

/// All `A^{ij}`, `S^{ij}` for `i < j`, ordered by `(i, j)` with `A` first.
pub fn spanning_set(u: &ComplexMatrix) -> Result<GeneratorSet> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let deviation = unitarity_deviation(u)?;
    if deviation > UNITARITY_TOL {
        log::warn!("building generators for a non-unitary matrix (deviation {deviation:.3e})");
    }
    let n = u.rows();
    let mut set = GeneratorSet::empty(n);
    for i in 1..=n {
        for j in i + 1..=n {
            set.push_pair(i, j, &generator_row(u, i, j));
        }
    }
    Ok(set)
}

/// Row-major flattening; `<vec(A), vec(B)> = trace(A B^T)`.
pub fn vectorize(m: &RealMatrix) -> Vec<f64> {
    m.data().to_vec()
}

/// Fixed positions `(k_1 < ... < k_p)` with values `(v_1, ..., v_p)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternKey {
    pub fixed_positions: Vec<usize>,
    pub fixed_values: Vec<usize>,
}

impl PatternKey {
    pub fn new(fixed_positions: Vec<usize>, fixed_values: Vec<usize>) -> Self {
        Self {
            fixed_positions,
            fixed_values,
        }
    }

    /// The key `()`: every component differs.
    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn validate(&self, sizes: &SizeSequence) -> Result<()> {
        let p = self.fixed_positions.len();
        if p != self.fixed_values.len() {
            return Err(Error::InvalidArgument(format!(
                "pattern key has {p} positions but {} values",
                self.fixed_values.len()
            )));
        }
        if p >= sizes.len() {
            return Err(Error::InvalidArgument(format!(
                "pattern key fixes {p} of {} positions; at most r-1 allowed",
                sizes.len()
            )));
        }
        if self.fixed_positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "fixed positions must be strictly increasing".into(),
            ));
        }
        for (&k, &v) in self.fixed_positions.iter().zip(&self.fixed_values) {
            let n_k = sizes.size(k)?;
            if v == 0 || v > n_k {
                return Err(Error::IndexOutOfRange(format!(
                    "value {v} at position {k} not in 1..={n_k}"
                )));
            }
        }
        Ok(())
    }

    /// The key an index pair belongs to: the positions where the vector
    /// indices agree, with the shared values.
    pub fn of_pair(iv: &[usize], jv: &[usize]) -> Self {
        let mut key = Self::empty();
        for (k, (a, b)) in iv.iter().zip(jv).enumerate() {
            if a == b {
                key.fixed_positions.push(k + 1);
                key.fixed_values.push(*a);
            }
        }
        key
    }

    /// Every valid key for `sizes`, grouped by fixed-position set in
    /// increasing bitmask order, values in lexicographic order.
    pub fn all(sizes: &SizeSequence) -> Vec<PatternKey> {
        let r = sizes.len();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << r) - 1 {
            let positions: Vec<usize> = (0..r)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect();
            let radices: Vec<usize> = positions.iter().map(|&k| sizes.as_slice()[k - 1]).collect();
            let count: usize = radices.iter().product();
            for flat in 0..count {
                let mut values = vec![0; radices.len()];
                let mut rest = flat;
                for (slot, &n) in values.iter_mut().zip(&radices).rev() {
                    *slot = rest % n + 1;
                    rest /= n;
                }
                out.push(PatternKey::new(positions.clone(), values));
            }
        }
        out
    }
}

/// Generators of the full product whose index pairs match `key`.
///
/// Rows are assembled factor by factor, so the product is never
/// materialized: `row_i(U) ⊙ conj(row_j(U))` is the Kronecker product of the
/// per-factor rows `row_{i_k}(U_k) ⊙ conj(row_{j_k}(U_k))`.
pub fn pattern_subset(factors: &FactorList, key: &PatternKey) -> Result<GeneratorSet> {
    let sizes = factors.sizes();
    key.validate(sizes)?;
    let n = sizes.total();
    let mut set = GeneratorSet::empty(n);

    let free_has_unit = sizes
        .as_slice()
        .iter()
        .enumerate()
        .any(|(k, &nk)| nk == 1 && !key.fixed_positions.contains(&(k + 1)));
    if free_has_unit {
        return Ok(set);
    }

    let vidx: Vec<Vec<usize>> = (1..=n)
        .map(|i| ordinary_to_vector(i, sizes).map(|v| v.0))
        .collect::<Result<_>>()?;
    let matches = |i: usize| {
        key.fixed_positions
            .iter()
            .zip(&key.fixed_values)
            .all(|(&k, &v)| vidx[i - 1][k - 1] == v)
    };

    for i in (1..=n).filter(|&i| matches(i)) {
        for j in (i + 1..=n).filter(|&j| matches(j)) {
            let iv = &vidx[i - 1];
            let jv = &vidx[j - 1];
            let free_differ = (1..=sizes.len())
                .filter(|k| !key.fixed_positions.contains(k))
                .all(|k| iv[k - 1] != jv[k - 1]);
            if !free_differ {
                continue;
            }
            let mut row = vec![Complex64::new(1.0, 0.0)];
            for (f, (&a, &b)) in factors.factors().iter().zip(iv.iter().zip(jv)) {
                let local = if a == b {
                    product_row(f, a, b)
                } else {
                    generator_row(f, a, b)
                };
                row = row
                    .iter()
                    .flat_map(|x| local.iter().map(move |y| x * y))
                    .collect();
            }
            set.push_pair(i, j, &row);
        }
    }
    Ok(set)
}
