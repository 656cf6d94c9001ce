use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::{tensor, ComplexMatrix};
use crate::{Error, Result, DEFAULT_MERGE_TOL};

/// Hermiticity accepted by the eigensolver, relative to the largest entry.
const HERMITIAN_TOL: f64 = 1e-12;

/// One outcome of a sharp observable: an eigenvalue and the projector onto
/// its eigenspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBranch {
    pub eigenvalue: f64,
    pub projector: ComplexMatrix,
}

/// Spectral family `{E(x)}` of a Hermitian operator, sorted by eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    dim: usize,
    branches: Vec<SpectralBranch>,
}

impl SpectralDecomposition {
    /// Validates a user-supplied family: Hermitian idempotent projectors,
    /// mutually orthogonal, summing to identity within `tol`, with
    /// eigenvalues separated by more than the default merge tolerance.
    pub fn from_branches(mut branches: Vec<(f64, ComplexMatrix)>, tol: f64) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidSpectral("no branches".into()));
        }
        branches.sort_by(|a, b| a.0.total_cmp(&b.0));
        let dim = branches[0].1.rows();
        for (x, p) in &branches {
            if !x.is_finite() {
                return Err(Error::InvalidSpectral(format!(
                    "eigenvalue {x} is not finite"
                )));
            }
            if !p.is_square() || p.rows() != dim {
                return Err(Error::DimensionMismatch {
                    context: "spectral projector",
                    expected: dim,
                    found: p.rows(),
                });
            }
        }
        for pair in branches.windows(2) {
            if pair[1].0 - pair[0].0 <= DEFAULT_MERGE_TOL {
                return Err(Error::InvalidSpectral(format!(
                    "eigenvalues {} and {} are not separated",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let out = Self::assemble(dim, branches);
        let violation = out.max_invariant_violation();
        if violation > tol {
            return Err(Error::InvalidSpectral(format!(
                "projectors violate the resolution of identity by {violation:.3e}"
            )));
        }
        Ok(out)
    }

    pub(crate) fn assemble(dim: usize, branches: Vec<(f64, ComplexMatrix)>) -> Self {
        Self {
            dim,
            branches: branches
                .into_iter()
                .map(|(eigenvalue, projector)| SpectralBranch {
                    eigenvalue,
                    projector,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branches(&self) -> &[SpectralBranch] {
        &self.branches
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.eigenvalue).collect()
    }

    /// Projector of the branch whose eigenvalue is within `label_tol` of `x`.
    pub fn projector_for(&self, x: f64, label_tol: f64) -> Option<&ComplexMatrix> {
        self.branches
            .iter()
            .find(|b| (b.eigenvalue - x).abs() <= label_tol)
            .map(|b| &b.projector)
    }

    /// `Σ x·E(x)`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for b in &self.branches {
            acc += b.projector.as_dmatrix() * Complex64::new(b.eigenvalue, 0.0);
        }
        ComplexMatrix::wrap(acc)
    }

    /// Largest violation of Hermiticity, idempotence, mutual orthogonality
    /// and completeness, each measured in Frobenius norm.
    pub fn max_invariant_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut sum = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for (k, b) in self.branches.iter().enumerate() {
            let p = &b.projector;
            worst = worst.max(p.distance(&p.adjoint()));
            worst = worst.max((p * p).distance(p));
            for other in &self.branches[k + 1..] {
                worst = worst.max((p * &other.projector).frobenius_norm());
            }
            sum += p.as_dmatrix();
        }
        worst.max(ComplexMatrix::wrap(sum).distance(&ComplexMatrix::identity(self.dim)))
    }

    /// Heisenberg-picture family `{U† E(x) U}`.
    pub(crate) fn conjugate_by(&self, unitary: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            branches: self
                .branches
                .iter()
                .map(|b| SpectralBranch {
                    eigenvalue: b.eigenvalue,
                    projector: b.projector.conjugate_by(unitary),
                })
                .collect(),
        }
    }

    /// Family `{I_left ⊗ E(x) ⊗ I_right}` on an enlarged space.
    pub(crate) fn embed(&self, left: usize, right: usize) -> Result<Self> {
        let (l, r) = (
            ComplexMatrix::identity(left),
            ComplexMatrix::identity(right),
        );
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let p = tensor(&tensor(&l, &b.projector)?, &r)?;
                Ok(SpectralBranch {
                    eigenvalue: b.eigenvalue,
                    projector: p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: left * self.dim * right,
            branches,
        })
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare(a.rows(), a.cols()));
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(deviation));
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
fn sorted_eigen(a: &ComplexMatrix) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(a.hermitian_part().into_dmatrix());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(&order);
    (values, vectors)
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted and chained into clusters: a new branch starts
/// whenever the next eigenvalue exceeds the previous one by more than
/// `merge_tol`. Each branch carries the mean eigenvalue of its cluster and
/// the sum of the cluster's rank-one projectors.
pub fn hermitian_eig(a: &ComplexMatrix, merge_tol: f64) -> Result<SpectralDecomposition> {
    check_hermitian(a)?;
    let n = a.rows();
    let (values, vectors) = sorted_eigen(a);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if x - values[*c.last().unwrap()] <= merge_tol => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    let branches = clusters
        .into_iter()
        .map(|members| {
            let label = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
            let basis = vectors.select_columns(&members);
            let projector = ComplexMatrix::wrap(&basis * basis.adjoint());
            (label, projector)
        })
        .collect();
    Ok(SpectralDecomposition::assemble(n, branches))
}

/// [`hermitian_eig`] with the default merge tolerance.
pub fn spectral_decomposition(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    hermitian_eig(a, DEFAULT_MERGE_TOL)
}

/// Eigenvalues of a Hermitian matrix in ascending order, without merging.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    Ok(sorted_eigen(a).0)
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues
/// below zero are treated as rounding noise and clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_power(a, |x| x.max(0.0).sqrt())
}

/// `A^{-1/2}` for a positive definite matrix.
pub(crate) fn inverse_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, _) = sorted_eigen(a);
    if values[0] <= 0.0 {
        return Err(Error::NumericalConsistency(format!(
            "matrix is not positive definite (smallest eigenvalue {})",
            values[0]
        )));
    }
    psd_power(a, |x| 1.0 / x.sqrt())
}

fn psd_power(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    check_hermitian(a)?;
    let (values, vectors) = sorted_eigen(a);
    let mut scaled = vectors.clone();
    for (j, &x) in values.iter().enumerate() {
        let s = f(x);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    Ok(ComplexMatrix::wrap(scaled * vectors.adjoint()))
}
