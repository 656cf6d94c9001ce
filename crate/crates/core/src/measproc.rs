//! Indirect measurement processes `(K, |ξ⟩, U, M)`.
//!
//! The coupling `U` is the evolution over the whole interaction window; no
//! Hamiltonian or intermediate time is modeled. Outcome statistics come from
//! the Heisenberg-evolved meter `M(T) = U†(I⊗M)U` on `H⊗K`, with the
//! composite basis index `i·dim K + a` for system index `i` and ancilla
//! index `a`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{complete_isometry_to_unitary, psd_sqrt, ComplexMatrix, State};
use crate::observables::{born_probabilities, Observable, OutcomeDistribution, Povm};
use crate::{Error, Result, DEFAULT_LABEL_TOL, UNITARY_TOL};

/// Tolerance used to accept a POVM handed to [`naimark_dilation`].
const DILATION_POVM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementProcess {
    system_dim: usize,
    ancilla_state: State,
    coupling: ComplexMatrix,
    meter: Observable,
}

impl MeasurementProcess {
    /// Checks that `coupling` is a unitary on `H⊗K` and that the meter acts
    /// on the ancilla.
    pub fn new(
        system_dim: usize,
        ancilla_state: State,
        coupling: ComplexMatrix,
        meter: Observable,
    ) -> Result<Self> {
        let ancilla_dim = ancilla_state.dim();
        if system_dim == 0 {
            return Err(Error::Malformed("system dimension must be positive".into()));
        }
        if meter.dim() != ancilla_dim {
            return Err(Error::DimensionMismatch {
                context: "meter observable",
                expected: ancilla_dim,
                found: meter.dim(),
            });
        }
        let composite = system_dim * ancilla_dim;
        if !coupling.is_square() || coupling.rows() != composite {
            return Err(Error::DimensionMismatch {
                context: "coupling unitary",
                expected: composite,
                found: coupling.rows(),
            });
        }
        let deviation = coupling.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(Self {
            system_dim,
            ancilla_state,
            coupling,
            meter,
        })
    }

    /// Process whose coupling is the identity: the meter never sees the
    /// system.
    pub fn uncoupled(system_dim: usize, ancilla_state: State, meter: Observable) -> Result<Self> {
        let n = system_dim * ancilla_state.dim();
        Self::new(system_dim, ancilla_state, ComplexMatrix::identity(n), meter)
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_state.dim()
    }

    pub fn ancilla_state(&self) -> &State {
        &self.ancilla_state
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    pub fn meter(&self) -> &Observable {
        &self.meter
    }

    /// `M(T) = U†(I⊗M)U`, with spectral family `U†(I⊗E_M(x))U`.
    pub fn heisenberg_meter(&self) -> Observable {
        let lifted = self
            .meter
            .spectral()
            .embed(self.system_dim, 1)
            .expect("dimension checked at construction");
        let spectral = lifted.conjugate_by(&self.coupling);
        let operator = spectral.reconstruct().hermitian_part();
        Observable::from_parts(operator, spectral)
    }

    /// `P(x) = ⟨ψξ|E_{M(T)}(x)|ψξ⟩`
    pub fn outcome_distribution(&self, psi: &State) -> Result<OutcomeDistribution> {
        self.check_system_state(psi)?;
        born_probabilities(&self.heisenberg_meter(), &psi.tensor(&self.ancilla_state)?)
    }

    /// `Π(x) = ⟨ξ|E_{M(T)}(x)|ξ⟩`, contracting the ancilla indices.
    pub fn induced_povm(&self) -> Povm {
        let evolved = self.heisenberg_meter();
        let outcomes = evolved
            .spectral()
            .branches()
            .iter()
            .map(|b| {
                let effect = contract_ancilla(&b.projector, self.system_dim, &self.ancilla_state);
                (b.eigenvalue, effect.hermitian_part())
            })
            .collect();
        Povm::new(outcomes).expect("meter labels are distinct")
    }

    /// Compares the induced POVM with the PVM of `a` outcome by outcome.
    pub fn reproducibility_report(
        &self,
        a: &Observable,
        tol: f64,
        label_tol: f64,
    ) -> Result<ReproducibilityReport> {
        if a.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "target observable",
                expected: self.system_dim,
                found: a.dim(),
            });
        }
        let induced = self.induced_povm();
        let target = a.pvm();
        let mut gaps = Vec::with_capacity(induced.len());
        let mut labels_match = induced.len() == target.len();
        for (x, effect) in induced.outcomes() {
            match target.effect(*x, label_tol) {
                Some(e) => gaps.push((*x, effect.distance(e))),
                None => labels_match = false,
            }
        }
        labels_match &= target
            .labels()
            .iter()
            .all(|&x| induced.effect(x, label_tol).is_some());
        let max_gap = if labels_match {
            gaps.iter().map(|g| g.1).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        Ok(ReproducibilityReport {
            labels_match,
            gaps,
            max_gap,
            tolerance: tol,
            reproduces: labels_match && max_gap <= tol,
        })
    }

    /// Algebraic test of probability reproducibility: the induced POVM must
    /// equal the PVM of `a`, with labels matched within the default label
    /// tolerance and every effect within `tol` in Frobenius norm.
    pub fn check_probability_reproducibility(&self, a: &Observable, tol: f64) -> bool {
        self.reproducibility_report(a, tol, DEFAULT_LABEL_TOL)
            .map(|r| r.reproduces)
            .unwrap_or(false)
    }

    /// Statistical counterpart of the reproducibility check: the largest
    /// pointwise gap between Born and meter statistics over `states`.
    pub fn max_statistical_gap<'a>(
        &self,
        a: &Observable,
        states: impl IntoIterator<Item = &'a State>,
        label_tol: f64,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for psi in states {
            let born = born_probabilities(a, psi)?;
            let meter = self.outcome_distribution(psi)?;
            worst = worst.max(born.max_abs_gap(&meter, label_tol));
        }
        Ok(worst)
    }

    fn check_system_state(&self, psi: &State) -> Result<()> {
        if psi.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "system state",
                expected: self.system_dim,
                found: psi.dim(),
            });
        }
        Ok(())
    }
}

/// Outcome-wise comparison between an induced POVM and a target PVM.
#[derive(Clone, Debug, PartialEq)]
pub struct ReproducibilityReport {
    pub labels_match: bool,
    /// `(label, ‖Π(x) − E_A(x)‖_F)` for every induced label found in the target.
    pub gaps: Vec<(f64, f64)>,
    pub max_gap: f64,
    pub tolerance: f64,
    pub reproduces: bool,
}

/// `⟨ξ|X|ξ⟩` as an operator on `H`:
/// `out[i,j] = Σ_{a,b} conj(ξ_a) X[(i,a),(j,b)] ξ_b`.
pub fn contract_ancilla(op: &ComplexMatrix, system_dim: usize, xi: &State) -> ComplexMatrix {
    let k = xi.dim();
    let x = op.as_dmatrix();
    let amps = xi.amplitudes();
    let out = DMatrix::from_fn(system_dim, system_dim, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..k {
            let ca = amps[a].conj();
            if ca == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..k {
                acc += ca * x[(i * k + a, j * k + b)] * amps[b];
            }
        }
        acc
    });
    ComplexMatrix::wrap(out)
}

/// Realizes a POVM as a measurement process.
///
/// The ancilla has one basis vector per outcome and starts in `|0⟩`. The
/// coupling extends the isometry `ψ⊗|0⟩ ↦ Σ_x (√Π(x) ψ)⊗|x⟩` to a unitary,
/// and the meter is diagonal with the POVM's labels.
pub fn naimark_dilation(p: &Povm) -> Result<MeasurementProcess> {
    p.validate(DILATION_POVM_TOL)?;
    let d = p.dim();
    let n = p.len();
    let composite = d * n;

    let roots = p
        .outcomes()
        .iter()
        .map(|(_, e)| psd_sqrt(e))
        .collect::<Result<Vec<_>>>()?;
    let isometry = DMatrix::from_fn(composite, d, |row, i| {
        let (j, x) = (row / n, row % n);
        roots[x].get(j, i)
    });
    let completed = complete_isometry_to_unitary(&ComplexMatrix::wrap(isometry))?;

    // Column i·n of the coupling must be the isometry's column i; the
    // completion columns fill the remaining slots in order.
    let src = completed.as_dmatrix();
    let mut coupling = DMatrix::<Complex64>::zeros(composite, composite);
    let mut spare = d;
    for col in 0..composite {
        let from = if col % n == 0 {
            col / n
        } else {
            spare += 1;
            spare - 1
        };
        coupling.set_column(col, &src.column(from));
    }

    let meter = Observable::diagonal(&p.labels())?;
    MeasurementProcess::new(d, State::basis(n, 0), ComplexMatrix::wrap(coupling), meter)
}
