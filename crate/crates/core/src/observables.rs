//! Sharp observables (PVMs), generalized observables (POVMs) and their
//! Born-rule statistics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{
    hermitian_eig, hermitian_eigenvalues, inverse_sqrt, random, ComplexMatrix,
    SpectralDecomposition, State,
};
use crate::{Error, Result, DEFAULT_MERGE_TOL, PROBABILITY_SUM_TOL};

/// Probabilities in `[-PROBABILITY_CLAMP, 0)` (or slightly above one) are
/// rounding noise and get clamped; anything further out is an error.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// Hermitian operator together with its spectral family.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    operator: ComplexMatrix,
    spectral: SpectralDecomposition,
}

impl Observable {
    /// Diagonalizes `operator`, merging eigenvalues closer than the default
    /// merge tolerance.
    pub fn new(operator: ComplexMatrix) -> Result<Self> {
        Self::with_merge_tol(operator, DEFAULT_MERGE_TOL)
    }

    pub fn with_merge_tol(operator: ComplexMatrix, merge_tol: f64) -> Result<Self> {
        let spectral = hermitian_eig(&operator, merge_tol)?;
        Ok(Self { operator, spectral })
    }

    /// Builds `Σ x·E(x)` from an explicit spectral family.
    pub fn from_spectral(spectral: SpectralDecomposition) -> Self {
        let operator = spectral.reconstruct();
        Self { operator, spectral }
    }

    /// Diagonal observable with the given (distinct) labels on the standard
    /// basis.
    pub fn diagonal(labels: &[f64]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidSpectral("no labels".into()));
        }
        let branches = labels
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, ComplexMatrix::matrix_unit(n, k, k)))
            .collect();
        Ok(Self::from_spectral(SpectralDecomposition::from_branches(
            branches, 0.0,
        )?))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0]).expect("fixed observable")
    }

    pub(crate) fn from_parts(operator: ComplexMatrix, spectral: SpectralDecomposition) -> Self {
        Self { operator, spectral }
    }

    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn dim(&self) -> usize {
        self.operator.rows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectral.eigenvalues()
    }

    pub fn num_outcomes(&self) -> usize {
        self.spectral.len()
    }

    /// The spectral family viewed as a POVM.
    pub fn pvm(&self) -> Povm {
        Povm {
            outcomes: self
                .spectral
                .branches()
                .iter()
                .map(|b| (b.eigenvalue, b.projector.clone()))
                .collect(),
        }
    }

    /// `P(x) = ⟨ψ|E(x)|ψ⟩` for each branch.
    pub fn born_probabilities(&self, psi: &State) -> Result<OutcomeDistribution> {
        born_probabilities(self, psi)
    }
}

/// Born rule for a sharp observable. Shares its code path with
/// [`povm_probabilities`].
pub fn born_probabilities(a: &Observable, psi: &State) -> Result<OutcomeDistribution> {
    expectation_distribution(
        a.spectral
            .branches()
            .iter()
            .map(|b| (b.eigenvalue, &b.projector)),
        psi,
    )
}

/// `P(x) = ⟨ψ|Π(x)|ψ⟩`
pub fn povm_probabilities(p: &Povm, psi: &State) -> Result<OutcomeDistribution> {
    expectation_distribution(p.outcomes.iter().map(|(x, e)| (*x, e)), psi)
}

fn expectation_distribution<'a>(
    effects: impl Iterator<Item = (f64, &'a ComplexMatrix)>,
    psi: &State,
) -> Result<OutcomeDistribution> {
    let raw = effects
        .map(|(x, e)| Ok((x, psi.expectation(e)?.re)))
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::from_raw(raw)
}

/// Clamps rounding noise out of a raw probability.
pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_CLAMP..=1.0 + PROBABILITY_CLAMP).contains(&p) {
        return Err(Error::NumericalConsistency(format!(
            "probability {p:e} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Discrete distribution over real outcome labels, sorted by label.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    entries: Vec<(f64, f64)>,
}

impl OutcomeDistribution {
    /// Clamps each probability and checks that the total is one within
    /// `1e-10`.
    pub fn from_raw(mut entries: Vec<(f64, f64)>) -> Result<Self> {
        for e in entries.iter_mut() {
            e.1 = clamp_probability(e.1)?;
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Malformed("duplicate outcome label".into()));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::NumericalConsistency(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { entries })
    }

    /// `(label, probability)` pairs in increasing label order.
    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn labels(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Probability of the outcome within `label_tol` of `label`; zero when
    /// no such outcome exists.
    pub fn probability(&self, label: f64, label_tol: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| (e.0 - label).abs() <= label_tol)
            .map(|e| e.1)
            .sum()
    }

    /// Largest pointwise gap over the union of both label sets; labels
    /// missing from one side count as probability zero there.
    pub fn max_abs_gap(&self, other: &OutcomeDistribution, label_tol: f64) -> f64 {
        self.entries
            .iter()
            .chain(other.entries.iter())
            .map(|&(x, _)| (self.probability(x, label_tol) - other.probability(x, label_tol)).abs())
            .fold(0.0, f64::max)
    }
}

/// Labeled family of effects.
///
/// Construction checks only the shape (square effects of a common
/// dimension, distinct finite labels). Whether the family is a valid POVM
/// is answered by [`Povm::is_resolution_of_identity`] and enforced by
/// [`Povm::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    outcomes: Vec<(f64, ComplexMatrix)>,
}

impl Povm {
    pub fn new(outcomes: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(Error::InvalidPovm("no outcomes".into()));
        };
        let dim = first.rows();
        for (x, e) in &outcomes {
            if !x.is_finite() {
                return Err(Error::InvalidPovm(format!("label {x} is not finite")));
            }
            if !e.is_square() {
                return Err(Error::NotSquare(e.rows(), e.cols()));
            }
            if e.rows() != dim {
                return Err(Error::DimensionMismatch {
                    context: "POVM effect",
                    expected: dim,
                    found: e.rows(),
                });
            }
        }
        for (i, (x, _)) in outcomes.iter().enumerate() {
            if outcomes[i + 1..]
                .iter()
                .any(|(y, _)| (x - y).abs() <= DEFAULT_MERGE_TOL)
            {
                return Err(Error::InvalidPovm(format!("label {x} is repeated")));
            }
        }
        Ok(Self { outcomes })
    }

    /// Effects labeled `0, 1, 2, …`.
    pub fn from_effects(effects: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(
            effects
                .into_iter()
                .enumerate()
                .map(|(k, e)| (k as f64, e))
                .collect(),
        )
    }

    /// Random POVM with `outcomes` full-rank effects,
    /// `Π(x) = S^{-1/2} G_x† G_x S^{-1/2}` with `S = Σ G_x† G_x` and
    /// Ginibre `G_x`; labels `0..outcomes`.
    pub fn random(dim: usize, outcomes: usize, seed: u64) -> Result<Self> {
        let mut rng = random::seeded_rng(seed);
        Self::random_from(&mut rng, dim, outcomes)
    }

    pub fn random_from(rng: &mut impl Rng, dim: usize, outcomes: usize) -> Result<Self> {
        if dim == 0 || outcomes == 0 {
            return Err(Error::InvalidPovm(
                "dimension and outcome count must be positive".into(),
            ));
        }
        let grams: Vec<ComplexMatrix> = (0..outcomes)
            .map(|_| {
                let g = random::ginibre(rng, dim, dim);
                ComplexMatrix::wrap(g.adjoint() * g)
            })
            .collect();
        let mut total = DMatrix::<Complex64>::zeros(dim, dim);
        for g in &grams {
            total += g.as_dmatrix();
        }
        let s = inverse_sqrt(&ComplexMatrix::wrap(total))?;
        Self::from_effects(
            grams
                .iter()
                .map(|g| (&(&s * g) * &s).hermitian_part())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.rows()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[(f64, ComplexMatrix)] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.0).collect()
    }

    pub fn effect(&self, label: f64, label_tol: f64) -> Option<&ComplexMatrix> {
        self.outcomes
            .iter()
            .find(|(x, _)| (x - label).abs() <= label_tol)
            .map(|(_, e)| e)
    }

    /// `‖Σ Π(x) − I‖_F`
    pub fn completeness_error(&self) -> f64 {
        let mut total = DMatrix::<Complex64>::zeros(self.dim(), self.dim());
        for (_, e) in &self.outcomes {
            total += e.as_dmatrix();
        }
        ComplexMatrix::wrap(total).distance(&ComplexMatrix::identity(self.dim()))
    }

    /// First violated effect condition, if any.
    fn effect_violation(&self, tol: f64) -> Option<String> {
        for (x, e) in &self.outcomes {
            let dev = e.hermitian_deviation();
            if dev > tol {
                return Some(format!("effect {x} is not Hermitian (deviation {dev:.3e})"));
            }
            let values =
                hermitian_eigenvalues(&e.hermitian_part()).expect("Hermitian part is Hermitian");
            let (lo, hi) = (values[0], values[values.len() - 1]);
            if lo < -tol || hi > 1.0 + tol {
                return Some(format!(
                    "effect {x} has spectrum [{lo:.6}, {hi:.6}] outside [0, 1]"
                ));
            }
        }
        let err = self.completeness_error();
        if err > tol {
            return Some(format!("effects sum to identity only within {err:.3e}"));
        }
        None
    }

    /// `Σ Π(x) = I` within `tol` and every effect is Hermitian with spectrum
    /// in `[−tol, 1+tol]`.
    pub fn is_resolution_of_identity(&self, tol: f64) -> bool {
        self.effect_violation(tol).is_none()
    }

    /// Fails with a diagnostic unless [`Self::is_resolution_of_identity`].
    pub fn validate(&self, tol: f64) -> Result<()> {
        match self.effect_violation(tol) {
            None => Ok(()),
            Some(msg) => Err(Error::InvalidPovm(msg)),
        }
    }

    /// A valid POVM whose effects are idempotent and mutually orthogonal
    /// within `tol` (Frobenius).
    pub fn is_projective(&self, tol: f64) -> bool {
        if !self.is_resolution_of_identity(tol) {
            return false;
        }
        self.outcomes.iter().enumerate().all(|(k, (_, e))| {
            (e * e).distance(e) <= tol
                && self.outcomes[k + 1..]
                    .iter()
                    .all(|(_, f)| (e * f).frobenius_norm() <= tol)
        })
    }

    /// Effect-wise Frobenius distance after matching labels; `None` when the
    /// label sets differ.
    pub fn max_effect_distance(&self, other: &Povm, label_tol: f64) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (x, e) in &self.outcomes {
            let f = other.effect(*x, label_tol)?;
            worst = worst.max(e.distance(f));
        }
        Some(worst)
    }
}
