//! Mixed-radix ("vector") indices into Kronecker products.
//!
//! Public functions use 1-based indices and positions throughout: ordinary
//! index `i` in `1..=N`, factor position `k` in `1..=r`, and vector index
//! components `i_k` in `1..=n_k`. The first factor is the most significant
//! digit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, RealMatrix};

/// Factor sizes `(n_1, ..., n_r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SizeSequence {
    sizes: Vec<usize>,
    total: usize,
}

impl SizeSequence {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "size sequence must be non-empty".into(),
            ));
        }
        if let Some(pos) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidArgument(format!(
                "size at position {} is zero",
                pos + 1
            )));
        }
        let total = sizes
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Overflow(format!("product of sizes {sizes:?}")))?;
        Ok(Self { sizes, total })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of factors `r`.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// `N`, the product of all sizes.
    pub fn total(&self) -> usize {
        self.total
    }

    /// `n_k` for a 1-based position.
    pub fn size(&self, k: usize) -> Result<usize> {
        self.check_position(k)?;
        Ok(self.sizes[k - 1])
    }

    pub(crate) fn check_position(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.sizes.len() {
            return Err(Error::IndexOutOfRange(format!(
                "position {k} not in 1..={}",
                self.sizes.len()
            )));
        }
        Ok(())
    }

    /// Place value of position `k` (1-based): product of sizes after it.
    fn stride(&self, k: usize) -> usize {
        self.sizes[k..].iter().product()
    }

    /// Sizes with the listed 1-based positions removed.
    pub fn without(&self, drop_positions: &[usize]) -> Result<SizeSequence> {
        let kept = drop_by_positions(&self.sizes, drop_positions)?;
        SizeSequence::new(kept)
    }
}

impl TryFrom<Vec<usize>> for SizeSequence {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        SizeSequence::new(v)
    }
}

impl From<SizeSequence> for Vec<usize> {
    fn from(s: SizeSequence) -> Vec<usize> {
        s.sizes
    }
}

/// Components `(i_1, ..., i_r)`, each 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VectorIndex(pub Vec<usize>);

impl VectorIndex {
    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

pub fn ordinary_to_vector(i: usize, sizes: &SizeSequence) -> Result<VectorIndex> {
    if i == 0 || i > sizes.total() {
        return Err(Error::IndexOutOfRange(format!(
            "ordinary index {i} not in 1..={}",
            sizes.total()
        )));
    }
    let mut rest = i - 1;
    let mut comps = vec![0; sizes.len()];
    for (k, &n) in sizes.as_slice().iter().enumerate().rev() {
        comps[k] = rest % n + 1;
        rest /= n;
    }
    Ok(VectorIndex(comps))
}

pub fn vector_to_ordinary(v: &VectorIndex, sizes: &SizeSequence) -> Result<usize> {
    if v.0.len() != sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector index has {} components, sizes have {}",
            v.0.len(),
            sizes.len()
        )));
    }
    let mut acc = 0usize;
    for (k, (&c, &n)) in v.0.iter().zip(sizes.as_slice()).enumerate() {
        if c == 0 || c > n {
            return Err(Error::IndexOutOfRange(format!(
                "component {} = {c} not in 1..={n}",
                k + 1
            )));
        }
        acc = acc * n + (c - 1);
    }
    Ok(acc + 1)
}

fn drop_by_positions<T: Copy>(items: &[T], drop_positions: &[usize]) -> Result<Vec<T>> {
    if drop_positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "drop positions {drop_positions:?} must be strictly increasing"
        )));
    }
    if let Some(&bad) = drop_positions.iter().find(|&&p| p == 0 || p > items.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "drop position {bad} not in 1..={}",
            items.len()
        )));
    }
    if drop_positions.len() == items.len() {
        return Err(Error::InvalidArgument("cannot drop every position".into()));
    }
    Ok(items
        .iter()
        .enumerate()
        .filter(|(pos, _)| drop_positions.binary_search(&(pos + 1)).is_err())
        .map(|(_, &x)| x)
        .collect())
}

/// Removes the listed 1-based positions, keeping order.
pub fn reduce_index(v: &VectorIndex, drop_positions: &[usize]) -> Result<VectorIndex> {
    drop_by_positions(&v.0, drop_positions).map(VectorIndex)
}

/// 0-based ordinary positions whose `k`-th component equals `value`, in
/// increasing order.
pub fn positions_with(sizes: &SizeSequence, k: usize, value: usize) -> Result<Vec<usize>> {
    let n_k = sizes.size(k)?;
    if value == 0 || value > n_k {
        return Err(Error::IndexOutOfRange(format!(
            "value {value} not in 1..={n_k}"
        )));
    }
    let stride = sizes.stride(k);
    let block = stride * n_k;
    let mut out = Vec::with_capacity(sizes.total() / n_k);
    for outer in (0..sizes.total()).step_by(block) {
        let start = outer + (value - 1) * stride;
        out.extend(start..start + stride);
    }
    Ok(out)
}

/// Entries of `row` at columns whose `k`-th component is `y`.
pub fn subrow<T: Copy>(row: &[T], sizes: &SizeSequence, k: usize, y: usize) -> Result<Vec<T>> {
    if row.len() != sizes.total() {
        return Err(Error::DimensionMismatch(format!(
            "row of length {} for N = {}",
            row.len(),
            sizes.total()
        )));
    }
    Ok(positions_with(sizes, k, y)?
        .into_iter()
        .map(|c| row[c])
        .collect())
}

fn check_square(rows: usize, cols: usize, sizes: &SizeSequence) -> Result<()> {
    if rows != sizes.total() || cols != sizes.total() {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} matrix for N = {}",
            sizes.total()
        )));
    }
    Ok(())
}

/// Rows with `x_k = row_value` and columns with `y_k = col_value`.
pub fn submatrix(
    m: &ComplexMatrix,
    sizes: &SizeSequence,
    k: usize,
    row_value: usize,
    col_value: usize,
) -> Result<ComplexMatrix> {
    check_square(m.rows(), m.cols(), sizes)?;
    let rows = positions_with(sizes, k, row_value)?;
    let cols = positions_with(sizes, k, col_value)?;
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        m[(rows[a], cols[b])]
    }))
}

pub fn submatrix_real(
    m: &RealMatrix,
    sizes: &SizeSequence,
    k: usize,
    row_value: usize,
    col_value: usize,
) -> Result<RealMatrix> {
    check_square(m.rows(), m.cols(), sizes)?;
    let rows = positions_with(sizes, k, row_value)?;
    let cols = positions_with(sizes, k, col_value)?;
    Ok(RealMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        m[(rows[a], cols[b])]
    }))
}
