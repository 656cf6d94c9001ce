use nalgebra::DVector;
use num_complex::Complex64;

use super::matrix::{tensor_vectors, ComplexMatrix};
use crate::{Error, Result, NORM_TOL};

/// Tolerated norm drift after applying a nearly unitary matrix.
const EVOLVE_NORM_TOL: f64 = 1e-9;

/// Unit vector in a finite-dimensional complex Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    amplitudes: DVector<Complex64>,
}

impl State {
    /// Wraps amplitudes whose Euclidean norm is one within `1e-12`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: DVector<Complex64>) -> Result<Self> {
        check_finite(&amplitudes)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Real amplitudes, checked for unit norm.
    pub fn real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Divides by the norm; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        check_finite(&v)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    /// `(|0⟩ + |1⟩)/√2`
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::real(&[h, h]).expect("fixed state")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &State) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|self⟩ ⊗ |other⟩`
    pub fn tensor(&self, other: &State) -> Result<State> {
        let v = tensor_vectors(&self.amplitudes, &other.amplitudes)?;
        Ok(Self { amplitudes: v })
    }

    /// `U|self⟩`, renormalized after checking that the norm drift is only
    /// rounding noise.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<State> {
        if unitary.cols() != self.dim() || !unitary.is_square() {
            return Err(Error::DimensionMismatch {
                context: "state evolution",
                expected: self.dim(),
                found: unitary.cols(),
            });
        }
        let v = unitary.apply(&self.amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > EVOLVE_NORM_TOL {
            return Err(Error::NumericalConsistency(format!(
                "evolved state has norm {norm}"
            )));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// `⟨ψ|A|ψ⟩`
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<Complex64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "expectation value",
                expected: self.dim(),
                found: op.rows(),
            });
        }
        Ok(op.quadratic_form(&self.amplitudes))
    }
}

fn check_finite(v: &DVector<Complex64>) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Malformed(
            "state must have positive dimension".into(),
        ));
    }
    match v
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i, 0)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            State::real(&[1.0, 1.0]),
            Err(Error::NotNormalized(_))
        ));
        assert!(State::real(&[0.6, 0.8]).is_ok());
        assert!(State::normalized(vec![Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn product_state_layout() {
        let s = State::basis(2, 1).tensor(&State::plus()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let got: Vec<f64> = s.amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(got, vec![0.0, 0.0, h, h]);
    }

    #[test]
    fn evolve_checks_dimensions() {
        let err = State::plus()
            .evolve(&ComplexMatrix::identity(3))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let flipped = State::basis(2, 0)
            .evolve(&ComplexMatrix::pauli_x())
            .unwrap();
        assert_eq!(flipped, State::basis(2, 1));
    }
}
