use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result, MAX_PRODUCT_DIM};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix with finite entries.
///
/// Entries are exposed in row-major order at the API boundary; storage is a
/// column-major `nalgebra` matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Malformed(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_dmatrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::Malformed("empty matrix".into()));
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                let z = data[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite(i, j));
                }
            }
        }
        Ok(Self { data })
    }

    /// Wraps a matrix produced by arithmetic on already validated inputs.
    pub(crate) fn wrap(data: DMatrix<Complex64>) -> Self {
        Self { data }
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self::wrap(m)
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Self {
        Self::wrap(a * b.adjoint())
    }

    /// `|i⟩⟨j|` in dimension `n`.
    pub fn matrix_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        Self::wrap(m)
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("fixed matrix")
    }

    pub fn pauli_y() -> Self {
        Self::wrap(DMatrix::from_row_slice(
            2,
            2,
            &[
                ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                ZERO,
            ],
        ))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(2, 2, &[h, h, h, -h]).expect("fixed matrix")
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.data.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::wrap(self.data.map(|z| z * factor))
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        (&self.data - &other.data).norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |a_ij - conj(a_ji)|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(A + A†) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `max |(V†V - I)_ij|`, the deviation of the columns from orthonormality.
    pub fn isometry_deviation(&self) -> f64 {
        let gram = self.data.adjoint() * &self.data;
        let n = gram.nrows();
        (gram - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from unitarity; infinite for non-square input.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let left = self.data.adjoint() * &self.data;
        let right = &self.data * self.data.adjoint();
        let eye = DMatrix::<Complex64>::identity(n, n);
        (left - &eye)
            .iter()
            .chain((right - &eye).iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &ComplexMatrix) -> Self {
        Self::wrap(&self.data * &other.data - &other.data * &self.data)
    }

    /// `U† A U`
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Self {
        Self::wrap(unitary.data.adjoint() * &self.data * &unitary.data)
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.data * v
    }

    /// `⟨v|A|v⟩`
    pub fn quadratic_form(&self, v: &DVector<Complex64>) -> Complex64 {
        v.dotc(&(&self.data * v))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.data[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data * &rhs.data)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data + &rhs.data)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data - &rhs.data)
    }
}

fn check_product_dims(rows: Option<usize>, cols: Option<usize>) -> Result<(usize, usize)> {
    match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_PRODUCT_DIM && c <= MAX_PRODUCT_DIM => Ok((r, c)),
        _ => Err(Error::SizeLimit {
            rows: rows.unwrap_or(usize::MAX),
            cols: cols.unwrap_or(usize::MAX),
            limit: MAX_PRODUCT_DIM,
        }),
    }
}

/// Kronecker product `a ⊗ b`: block `(i, j)` of the result is `a[i,j]·b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_product_dims(
        a.rows().checked_mul(b.rows()),
        a.cols().checked_mul(b.cols()),
    )?;
    Ok(ComplexMatrix::wrap(a.data.kronecker(&b.data)))
}

pub(crate) fn tensor_vectors(
    a: &DVector<Complex64>,
    b: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    check_product_dims(a.len().checked_mul(b.len()), Some(1))?;
    Ok(a.kronecker(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_tensor_identity() {
        let out = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(out, ComplexMatrix::identity(4));
    }

    #[test]
    fn diagonal_block_structure() {
        let out = tensor(
            &ComplexMatrix::diagonal(&[1.0, 2.0]),
            &ComplexMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(out, ComplexMatrix::diagonal(&[1.0, 1.0, 2.0, 2.0]));
    }

    #[test]
    fn blocks_are_scaled_copies() {
        let a = ComplexMatrix::from_row_major(1, 2, vec![c(1.0, 1.0), c(0.0, -2.0)]).unwrap();
        let b = ComplexMatrix::pauli_y();
        let out = tensor(&a, &b).unwrap();
        assert_eq!((out.rows(), out.cols()), (2, 4));
        for bi in 0..2 {
            for bj in 0..2 {
                assert_eq!(out.get(bi, 2 + bj), a.get(0, 1) * b.get(bi, bj));
            }
        }
    }

    #[test]
    fn size_guard_rejects_blowup() {
        let big = ComplexMatrix::identity(128);
        assert!(matches!(tensor(&big, &big), Err(Error::SizeLimit { .. })));
        assert!(tensor(&ComplexMatrix::identity(64), &ComplexMatrix::identity(64)).is_ok());
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            ComplexMatrix::from_row_major(1, 2, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]),
            Err(Error::NonFinite(0, 0))
        ));
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ComplexMatrix::from_row_major(0, 2, vec![]).is_err());
    }

    #[test]
    fn row_major_roundtrip() {
        let entries = vec![
            c(1.0, 0.0),
            c(2.0, 1.0),
            c(3.0, 0.0),
            c(4.0, -1.0),
            c(5.0, 0.0),
            c(6.0, 0.0),
        ];
        let m = ComplexMatrix::from_row_major(2, 3, entries.clone()).unwrap();
        assert_eq!(m.get(0, 1), c(2.0, 1.0));
        assert_eq!(m.get(1, 0), c(4.0, -1.0));
        assert_eq!(m.to_row_major(), entries);
    }

    #[test]
    fn hermitian_and_unitary_predicates() {
        assert!(ComplexMatrix::pauli_y().is_hermitian(0.0));
        let upper = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!upper.is_hermitian(1e-12));
        assert!(ComplexMatrix::hadamard().is_unitary(1e-15));
        assert!(!ComplexMatrix::diagonal(&[1.0, 2.0]).is_unitary(1e-10));
    }

    #[test]
    fn pauli_commutator() {
        // [X, Y] = 2iZ
        let comm = ComplexMatrix::pauli_x().commutator(&ComplexMatrix::pauli_y());
        let expected = ComplexMatrix::wrap(ComplexMatrix::pauli_z().data.map(|z| z * c(0.0, 2.0)));
        assert!(comm.distance(&expected) < 1e-15);
    }
}
