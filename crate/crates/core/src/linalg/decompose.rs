use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::state::State;
use crate::{Error, Result, UNITARY_TOL};

/// Candidates whose residual norm falls below this are skipped during
/// isometry completion.
const DEPENDENCE_TOL: f64 = 1e-8;
/// Schmidt coefficients at or below this are dropped.
const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Extends a matrix with orthonormal columns to a square unitary whose
/// leading columns are the input.
///
/// Standard basis vectors are orthogonalized (two Gram-Schmidt passes)
/// against the columns collected so far, in index order; near-dependent
/// candidates are skipped.
pub fn complete_isometry_to_unitary(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = (v.rows(), v.cols());
    if n < k {
        return Err(Error::NotIsometry(f64::INFINITY));
    }
    let deviation = v.isometry_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotIsometry(deviation));
    }

    let mut out = DMatrix::<Complex64>::zeros(n, n);
    out.columns_mut(0, k).copy_from(v.as_dmatrix());
    let mut filled = k;
    for e in 0..n {
        if filled == n {
            break;
        }
        let mut w = DVector::<Complex64>::zeros(n);
        w[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for j in 0..filled {
                let q = out.column(j);
                let overlap = q.dotc(&w);
                w -= q * overlap;
            }
        }
        let norm = w.norm();
        if norm > DEPENDENCE_TOL {
            out.set_column(filled, &w.unscale(norm));
            filled += 1;
        }
    }
    if filled != n {
        return Err(Error::NumericalConsistency(
            "isometry completion ran out of candidates".into(),
        ));
    }
    Ok(ComplexMatrix::wrap(out))
}

/// `Φ = Σ_k c_k |l_k⟩⊗|r_k⟩` with `c_k` positive and nonincreasing.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<State>,
    pub right: Vec<State>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> DVector<Complex64> {
        let dim = self.left[0].dim() * self.right[0].dim();
        let mut acc = DVector::zeros(dim);
        for ((c, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            acc += l.amplitudes().kronecker(r.amplitudes()) * Complex64::new(*c, 0.0);
        }
        acc
    }
}

/// Schmidt decomposition of a state on `C^dim1 ⊗ C^dim2` via the SVD of its
/// `dim1 × dim2` coefficient matrix.
pub fn schmidt_decompose(phi: &State, dim1: usize, dim2: usize) -> Result<SchmidtDecomposition> {
    if dim1 == 0 || dim2 == 0 || dim1.checked_mul(dim2) != Some(phi.dim()) {
        return Err(Error::DimensionMismatch {
            context: "Schmidt decomposition",
            expected: dim1.saturating_mul(dim2),
            found: phi.dim(),
        });
    }
    let amps = phi.amplitudes();
    let coeff = DMatrix::from_fn(dim1, dim2, |i, j| amps[i * dim2 + j]);
    let svd = coeff.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut out = SchmidtDecomposition {
        coefficients: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    for k in order {
        let c = svd.singular_values[k];
        if c <= SCHMIDT_CUTOFF {
            continue;
        }
        out.coefficients.push(c);
        out.left.push(unit(u.column(k).into_owned())?);
        out.right.push(unit(v_t.row(k).transpose())?);
    }
    Ok(out)
}

fn unit(v: DVector<Complex64>) -> Result<State> {
    let norm = v.norm();
    State::from_vector(v.unscale(norm))
}
