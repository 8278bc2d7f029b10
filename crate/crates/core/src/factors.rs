use crate::error::{Error, Result};
use crate::indexing::SizeSequence;
use crate::matrix::{kron_all, unitarity_deviation, ComplexMatrix};

/// Tolerance used to admit a factor as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Ordered unitary factors `U1, ..., Ur` standing for `U1 ⊗ ... ⊗ Ur`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList {
    factors: Vec<ComplexMatrix>,
    sizes: SizeSequence,
}

impl FactorList {
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "factor list must be non-empty".into(),
            ));
        }
        for (idx, f) in factors.iter().enumerate() {
            if !f.is_square() {
                return Err(Error::NotSquare {
                    rows: f.rows(),
                    cols: f.cols(),
                });
            }
            let deviation = unitarity_deviation(f)?;
            if deviation > UNITARITY_TOL {
                return Err(Error::NotUnitary {
                    index: idx + 1,
                    deviation,
                });
            }
        }
        let sizes = SizeSequence::new(factors.iter().map(ComplexMatrix::rows).collect())?;
        Ok(Self { factors, sizes })
    }

    pub fn single(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn sizes(&self) -> &SizeSequence {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Side length `N` of the product.
    pub fn total(&self) -> usize {
        self.sizes.total()
    }

    /// Materialized Kronecker product.
    pub fn product(&self) -> ComplexMatrix {
        kron_all(&self.factors).expect("factor list is non-empty")
    }

    /// Product deprived of the listed 1-based positions.
    pub fn without(&self, removed: &[usize]) -> Result<FactorList> {
        let sizes = self.sizes.without(removed)?;
        let factors = self
            .factors
            .iter()
            .enumerate()
            .filter(|(pos, _)| !removed.contains(&(pos + 1)))
            .map(|(_, f)| f.clone())
            .collect();
        Ok(Self { factors, sizes })
    }
}
