//! Defect and generalized defect of unitary matrices, with a Kronecker
//! decomposition that replaces one large rank problem by many small ones,
//! and exact lower bounds on the generalized defect of Kronecker products.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod factors;
pub mod feasible;
pub mod haar;
pub mod indexing;
pub mod matrix;
pub mod mset;
pub mod rank;

pub use engine::{DefectReport, EngineOptions, Method};
pub use error::{Error, Result};
pub use factors::FactorList;
pub use indexing::{SizeSequence, VectorIndex};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use mset::{GeneratorSet, PatternKey};
pub use rank::{RankResult, TolPolicy};

pub use num_complex::Complex64;
