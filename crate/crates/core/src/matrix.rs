//! Dense row-major complex and real matrices.
//!
//! Entry access through `Index<(usize, usize)>` is 0-based, as is usual for
//! Rust containers. The index-aware modules (`indexing`, `mset`) take 1-based
//! indices and translate.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrixRepr", into = "ComplexMatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// On-disk layout: `{ "rows": r, "cols": c, "data": [[re, im], ...] }`.
#[derive(Serialize, Deserialize)]
struct ComplexMatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<ComplexMatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: ComplexMatrixRepr) -> Result<Self> {
        let data = repr
            .data
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, data)
    }
}

impl From<ComplexMatrix> for ComplexMatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        ComplexMatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidData(format!(
            "dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if rows.checked_mul(cols) != Some(len) {
        return Err(Error::InvalidData(format!(
            "expected {} entries for {rows}x{cols}, got {len}",
            rows.saturating_mul(cols)
        )));
    }
    Ok(())
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_shape(rows, cols, data.len())?;
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidData(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(m: &RealMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// Real and imaginary parts as separate real matrices.
    pub fn split(&self) -> (RealMatrix, RealMatrix) {
        let re = self.data.iter().map(|z| z.re).collect();
        let im = self.data.iter().map(|z| z.im).collect();
        (
            RealMatrix {
                rows: self.rows,
                cols: self.cols,
                data: re,
            },
            RealMatrix {
                rows: self.rows,
                cols: self.cols,
                data: im,
            },
        )
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("non-conformable matrix product")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, data.len())?;
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product. Row `(i1, i2)` maps to `i1 * b.rows + i2`, so the
/// first factor's index is the most significant digit.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

/// Kronecker product of a non-empty sequence, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut it = factors.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, f| kron(&acc, f)))
}

pub fn kron_real(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    RealMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    })
}

pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch(format!(
            "hadamard product of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(ComplexMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

/// Max-norm of `U*U - I`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows,
            cols: u.cols,
        });
    }
    let n = u.rows;
    let mut worst: f64 = 0.0;
    // (U*U)[a][b] = sum_k conj(U[k][a]) U[k][b]
    for a in 0..n {
        for b in a..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += u[(k, a)].conj() * u[(k, b)];
            }
            if a == b {
                s -= Complex64::new(1.0, 0.0);
            }
            worst = worst.max(s.norm());
        }
    }
    Ok(worst)
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(unitarity_deviation(u)? <= tol)
}

/// Unitary DFT matrix, entry `(j, k)` = `exp(2 pi i j k / n) / sqrt(n)` (0-based).
pub fn fourier(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "fourier matrix needs n >= 1");
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        // reduce the exponent mod n first so large products stay exact
        let e = (j * k) % n;
        let phase = match (4 * e) % (4 * n) {
            0 => Complex64::new(1.0, 0.0),
            q if q == 2 * n => Complex64::new(-1.0, 0.0),
            q if q == n => Complex64::new(0.0, 1.0),
            q if q == 3 * n => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, 2.0 * PI * e as f64 / n as f64),
        };
        phase * norm
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_identity_and_scalar() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        let b = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 2.0), c(0.5, 0.0), c(-3.0, 1.0), c(0.0, -1.0)],
        )
        .unwrap();
        let two = ComplexMatrix::new(1, 1, vec![c(2.0, 0.0)]).unwrap();
        assert_eq!(kron(&two, &b), b.scale(c(2.0, 0.0)));
    }

    #[test]
    fn kron_fourier_entry() {
        let f = fourier(2);
        let k = kron(&f, &f);
        // 1-based (1,4)
        assert!((k[(0, 3)] - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!((k.rows(), k.cols()), (4, 4));
    }

    #[test]
    fn hadamard_cases() {
        let f = fourier(2);
        let ones = ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert_eq!(hadamard(&f, &ones).unwrap(), f);
        assert_eq!(
            hadamard(&f, &ComplexMatrix::zeros(2, 2)).unwrap(),
            ComplexMatrix::zeros(2, 2)
        );
        let h = hadamard(&f, &f).unwrap();
        assert!((h[(1, 1)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(
            hadamard(&f, &ComplexMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn dagger_cases() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(dagger(&i3), i3);
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 + 1.0));
        assert_eq!(dagger(&dagger(&a)), a);
        let f = fourier(2);
        assert!(dagger(&f).max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn unitarity_checks() {
        assert!(is_unitary(&ComplexMatrix::identity(3), 1e-12).unwrap());
        let twice = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(!is_unitary(&twice, 1e-12).unwrap());
        assert!(is_unitary(&fourier(6), 1e-12).unwrap());
        assert!(matches!(
            is_unitary(&ComplexMatrix::zeros(2, 3), 1e-12),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn fourier_entries() {
        assert_eq!(fourier(1), ComplexMatrix::identity(1));
        let s = 1.0 / 2f64.sqrt();
        let f2 = fourier(2);
        let expected =
            ComplexMatrix::new(2, 2, vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]).unwrap();
        assert!(f2.max_abs_diff(&expected).unwrap() < 1e-15);
        // 1-based (2,3)
        assert!((fourier(4)[(1, 2)] - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn construction_rejects_bad_data() {
        assert!(ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(RealMatrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn json_schema() {
        let m = ComplexMatrix::new(1, 2, vec![c(0.1, -0.2), c(1.0 / 3.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"rows":1,"cols":2,"data":[[0.1,-0.2],[0.3333333333333333,0.0]]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"rows":2,"cols":2,"data":[[1,0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
