//! The feasible space `F(U)`: real `R` such that `i (R ⊙ U) = E U` for some
//! antihermitian `E`, equivalently `(i R ⊙ U) U*` is antihermitian.
//!
//! Everything here works from that condition directly with matrix products,
//! without going through the generator matrices, so `dim F(U)` computed here
//! is an independent check on `N^2 - dim M(U)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{dagger, hadamard, kron_real, ComplexMatrix, RealMatrix};
use crate::rank::automatic_tolerance;

pub const FEASIBLE_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `E + E*` for `E = (i R ⊙ U) U*`.
fn hermitian_residual(u: &ComplexMatrix, r: &RealMatrix) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if r.rows() != u.rows() || r.cols() != u.cols() {
        return Err(Error::DimensionMismatch(format!(
            "R is {}x{}, U is {}x{}",
            r.rows(),
            r.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let direction = hadamard(&ComplexMatrix::from_real(r).scale(I), u)?;
    let e = direction.matmul(&dagger(u))?;
    let e_star = dagger(&e);
    Ok(ComplexMatrix::from_fn(e.rows(), e.cols(), |a, b| {
        e[(a, b)] + e_star[(a, b)]
    }))
}

pub fn feasible_space_contains(u: &ComplexMatrix, r: &RealMatrix) -> Result<bool> {
    let h = hermitian_residual(u, r)?;
    Ok(h.data().iter().all(|z| z.norm() <= FEASIBLE_TOL))
}

/// Row indicators `e_i 1^T` for `i = 1..n`, then column indicators `1 e_j^T`.
pub fn phasing_basis(n: usize) -> Vec<RealMatrix> {
    assert!(n >= 1, "phasing_basis needs n >= 1");
    let rows = (0..n).map(|i| RealMatrix::from_fn(n, n, |a, _| if a == i { 1.0 } else { 0.0 }));
    let cols = (0..n).map(|j| RealMatrix::from_fn(n, n, |_, b| if b == j { 1.0 } else { 0.0 }));
    rows.chain(cols).collect()
}

/// `R ⊗ S`; feasible for `U ⊗ V` whenever `R` and `S` are for `U` and `V`.
pub fn kron_feasible_product(r1: &RealMatrix, r2: &RealMatrix) -> RealMatrix {
    kron_real(r1, r2)
}

/// Real linear map `R -> E + E*`, one column per entry of `R` (row-major),
/// rows holding real then imaginary parts of every output entry.
pub fn feasibility_constraints(u: &ComplexMatrix) -> Result<RealMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let n = u.rows();
    let unknowns = n * n;
    let mut out = RealMatrix::zeros(2 * unknowns, unknowns);
    for col in 0..unknowns {
        let mut basis = RealMatrix::zeros(n, n);
        basis[(col / n, col % n)] = 1.0;
        let h = hermitian_residual(u, &basis)?;
        for (idx, z) in h.data().iter().enumerate() {
            out[(idx, col)] = z.re;
            out[(unknowns + idx, col)] = z.im;
        }
    }
    Ok(out)
}

/// Orthonormal basis of `F(U)`, from the null space of the constraint map.
pub fn feasible_space_basis(u: &ComplexMatrix) -> Result<Vec<RealMatrix>> {
    let k = feasibility_constraints(u)?;
    let n = u.rows();
    let m = DMatrix::from_row_slice(k.rows(), k.cols(), k.data());
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = automatic_tolerance(k.rows(), k.cols(), sigma_max).max(f64::MIN_POSITIVE);

    // thin SVD of a tall matrix returns all N^2 right singular vectors
    let mut basis = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            let row = v_t.row(idx);
            basis.push(RealMatrix::from_fn(n, n, |a, b| row[a * n + b]));
        }
    }
    Ok(basis)
}

/// `dim F(U)` via the constraint system.
pub fn feasible_space_dim(u: &ComplexMatrix) -> Result<usize> {
    Ok(feasible_space_basis(u)?.len())
}
