//! Von Neumann's measurement coupling and entanglement of observables.
//!
//! Two compatible observables `A₁` (on the first factor) and `A₂` (on the
//! second) are entangled in `Φ` when their outcomes can be paired so that
//! only paired outcomes ever occur together. Five equivalent forms of that
//! statement are evaluated separately:
//!
//! | field | statement |
//! |---|---|
//! | `off_pairing_zero` | `P(a₁ₖ, a₂ₘ) = 0` for unpaired `(k, m)` |
//! | `paired_sum_one` | `Σₖ P(a₁ₖ, a₂σ₍ₖ₎) = 1` |
//! | `first_marginal_matches` | `P(a₁ₖ) = P(a₁ₖ, a₂σ₍ₖ₎)` |
//! | `second_marginal_matches` | `P(a₂σ₍ₖ₎) = P(a₁ₖ, a₂σ₍ₖ₎)` |
//! | `conditionals_one` | both Bayes conditionals of a paired outcome equal one |

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{
    complete_isometry_to_unitary, schmidt_decompose, ComplexMatrix, SpectralDecomposition, State,
};
use crate::measproc::MeasurementProcess;
use crate::observables::{clamp_probability, Observable};
use crate::{Error, Result};

/// Largest branch count for which the pairing search is exhaustive.
const EXHAUSTIVE_PAIRING_LIMIT: usize = 6;

/// Cyclic shift `S^k`: `|j⟩ ↦ |j+k mod n⟩`.
fn shift_power(n: usize, k: usize) -> ComplexMatrix {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        m[((j + k) % n, j)] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::wrap(m)
}

/// Measurement process realizing von Neumann's coupling for `a`.
///
/// The ancilla has one basis vector per distinct eigenvalue `x_k` of `a` and
/// starts in `|0⟩`; the coupling is the controlled shift
/// `U = Σ_k E_A(x_k) ⊗ S^k`, so `U(ψ⊗|0⟩) = Σ_k E_A(x_k)ψ ⊗ |k⟩`, and the
/// meter reads `x_k` on `|k⟩`.
pub fn build_vn_process(a: &Observable) -> Result<MeasurementProcess> {
    let labels = a.eigenvalues();
    let n = labels.len();
    let d = a.dim();
    let mut coupling = DMatrix::<Complex64>::zeros(d * n, d * n);
    for (k, branch) in a.spectral().branches().iter().enumerate() {
        let term = crate::linalg::tensor(&branch.projector, &shift_power(n, k))?;
        coupling += term.as_dmatrix();
    }
    MeasurementProcess::new(
        d,
        State::basis(n, 0),
        ComplexMatrix::wrap(coupling),
        Observable::diagonal(&labels)?,
    )
}

/// `Φ = U(ψ⊗|ξ₀⟩) = Σ_k c_k |ψ_k⟩|ξ_k⟩` for the von Neumann coupling of `a`.
pub fn entangled_state(psi: &State, a: &Observable) -> Result<State> {
    if psi.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "entangled state input",
            expected: a.dim(),
            found: psi.dim(),
        });
    }
    let mp = build_vn_process(a)?;
    psi.tensor(mp.ancilla_state())?.evolve(mp.coupling())
}

/// Per-condition outcome of [`check_observable_entanglement`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EntanglementConditions {
    pub off_pairing_zero: bool,
    pub paired_sum_one: bool,
    pub first_marginal_matches: bool,
    pub second_marginal_matches: bool,
    pub conditionals_one: bool,
}

impl EntanglementConditions {
    pub fn all(&self) -> bool {
        self.off_pairing_zero
            && self.paired_sum_one
            && self.first_marginal_matches
            && self.second_marginal_matches
            && self.conditionals_one
    }

    pub fn as_array(&self) -> [bool; 5] {
        [
            self.off_pairing_zero,
            self.paired_sum_one,
            self.first_marginal_matches,
            self.second_marginal_matches,
            self.conditionals_one,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    pub labels1: Vec<f64>,
    pub labels2: Vec<f64>,
    /// `joint[k][m] = P(A₁ = labels1[k], A₂ = labels2[m] | Φ)`
    pub joint: Vec<Vec<f64>>,
    /// `(k, m)` index pairs of the best enumeration found.
    pub pairing: Vec<(usize, usize)>,
    pub conditions: EntanglementConditions,
    /// Residual of each condition, in the order of
    /// [`EntanglementConditions::as_array`].
    pub residuals: [f64; 5],
    pub off_pairing_mass: f64,
    pub max_violation: f64,
    pub is_entangled: bool,
}

impl EntanglementReport {
    pub fn marginal1(&self) -> Vec<f64> {
        self.joint.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn marginal2(&self) -> Vec<f64> {
        (0..self.labels2.len())
            .map(|m| self.joint.iter().map(|row| row[m]).sum())
            .collect()
    }
}

/// `J[k][m] = ⟨Φ|E₁(k)⊗E₂(m)|Φ⟩`, computed as `‖E₁(k) C E₂(m)ᵀ‖²_F` on the
/// coefficient matrix `C` of `Φ`.
fn joint_matrix(a1: &Observable, a2: &Observable, phi: &State) -> Result<Vec<Vec<f64>>> {
    let (d1, d2) = (a1.dim(), a2.dim());
    if phi.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            context: "bipartite state",
            expected: d1 * d2,
            found: phi.dim(),
        });
    }
    let amps = phi.amplitudes();
    let coeff = DMatrix::from_fn(d1, d2, |i, j| amps[i * d2 + j]);
    a1.spectral()
        .branches()
        .iter()
        .map(|b1| {
            let left = b1.projector.as_dmatrix() * &coeff;
            a2.spectral()
                .branches()
                .iter()
                .map(|b2| {
                    let p = (&left * b2.projector.as_dmatrix().transpose()).norm_squared();
                    clamp_probability(p)
                })
                .collect()
        })
        .collect()
}

fn pairing_weight(joint: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(k, m)| joint[k][m]).sum()
}

/// Injective pairing of the smaller branch set into the larger one that
/// maximizes the paired probability mass.
fn best_pairing(joint: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n1 = joint.len();
    let n2 = joint[0].len();
    if n1.max(n2) <= EXHAUSTIVE_PAIRING_LIMIT {
        let candidates: Box<dyn Iterator<Item = Vec<(usize, usize)>>> = if n1 <= n2 {
            Box::new(
                (0..n2)
                    .permutations(n1)
                    .map(|perm| perm.into_iter().enumerate().collect()),
            )
        } else {
            Box::new(
                (0..n1)
                    .permutations(n2)
                    .map(|perm| perm.into_iter().enumerate().map(|(m, k)| (k, m)).collect()),
            )
        };
        let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
        for pairs in candidates {
            let w = pairing_weight(joint, &pairs);
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                best = Some((w, pairs));
            }
        }
        let mut pairs = best.expect("at least one candidate").1;
        pairs.sort_unstable();
        return pairs;
    }

    // Greedy: repeatedly take the heaviest entry in a free row and column.
    let mut entries: Vec<(usize, usize)> = (0..n1).cartesian_product(0..n2).collect();
    entries.sort_by(|&(a, b), &(c, d)| joint[c][d].total_cmp(&joint[a][b]));
    let (mut used1, mut used2) = (vec![false; n1], vec![false; n2]);
    let mut pairs = Vec::with_capacity(n1.min(n2));
    for (k, m) in entries {
        if !used1[k] && !used2[m] {
            used1[k] = true;
            used2[m] = true;
            pairs.push((k, m));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Evaluates the five entanglement conditions for `A₁ ⊗ A₂` in `Φ` under
/// the pairing that maximizes the paired mass. Conditionals are skipped for
/// pairs whose joint probability is at most `tol`.
pub fn check_observable_entanglement(
    a1: &Observable,
    a2: &Observable,
    phi: &State,
    tol: f64,
) -> Result<EntanglementReport> {
    let joint = joint_matrix(a1, a2, phi)?;
    let pairing = best_pairing(&joint);
    let (n1, n2) = (joint.len(), joint[0].len());

    let partner1: Vec<Option<usize>> = (0..n1)
        .map(|k| pairing.iter().find(|p| p.0 == k).map(|p| p.1))
        .collect();
    let partner2: Vec<Option<usize>> = (0..n2)
        .map(|m| pairing.iter().find(|p| p.1 == m).map(|p| p.0))
        .collect();
    let marg1: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let marg2: Vec<f64> = (0..n2).map(|m| joint.iter().map(|r| r[m]).sum()).collect();

    let mut off_max = 0.0f64;
    let mut off_mass = 0.0f64;
    for (k, row) in joint.iter().enumerate() {
        for (m, &p) in row.iter().enumerate() {
            if partner1[k] != Some(m) {
                off_max = off_max.max(p);
                off_mass += p;
            }
        }
    }
    let paired_sum = pairing_weight(&joint, &pairing);

    let first_gap = (0..n1)
        .map(|k| match partner1[k] {
            Some(m) => (marg1[k] - joint[k][m]).abs(),
            None => marg1[k],
        })
        .fold(0.0, f64::max);
    let second_gap = (0..n2)
        .map(|m| match partner2[m] {
            Some(k) => (marg2[m] - joint[k][m]).abs(),
            None => marg2[m],
        })
        .fold(0.0, f64::max);
    let conditional_gap = pairing
        .iter()
        .filter(|&&(k, m)| joint[k][m] > tol)
        .map(|&(k, m)| {
            let j = joint[k][m];
            (1.0 - j / marg2[m]).abs().max((1.0 - j / marg1[k]).abs())
        })
        .fold(0.0, f64::max);

    let residuals = [
        off_max,
        (1.0 - paired_sum).abs(),
        first_gap,
        second_gap,
        conditional_gap,
    ];
    let conditions = EntanglementConditions {
        off_pairing_zero: residuals[0] <= tol,
        paired_sum_one: residuals[1] <= tol,
        first_marginal_matches: residuals[2] <= tol,
        second_marginal_matches: residuals[3] <= tol,
        conditionals_one: residuals[4] <= tol,
    };
    Ok(EntanglementReport {
        labels1: a1.eigenvalues(),
        labels2: a2.eigenvalues(),
        joint,
        pairing,
        conditions,
        residuals,
        off_pairing_mass: off_mass,
        max_violation: residuals.iter().copied().fold(0.0, f64::max),
        is_entangled: conditions.all(),
    })
}

/// Total probability of outcome pairs outside the best pairing is at most
/// `tol`.
pub fn verify_perfect_correlation(
    a1: &Observable,
    a2: &Observable,
    phi: &State,
    tol: f64,
) -> Result<bool> {
    Ok(check_observable_entanglement(a1, a2, phi, tol)?.off_pairing_mass <= tol)
}

/// Observable on `C^dim` with eigenvalues `1, 2, …, dim` on the orthonormal
/// basis obtained by completing `vectors`.
fn observable_on_completed_basis(vectors: &[State], dim: usize) -> Result<Observable> {
    let partial = DMatrix::from_fn(dim, vectors.len(), |i, k| vectors[k].amplitude(i));
    let basis = complete_isometry_to_unitary(&ComplexMatrix::wrap(partial))?;
    let branches = (0..dim)
        .map(|k| {
            let col = basis.as_dmatrix().column(k).into_owned();
            ((k + 1) as f64, ComplexMatrix::outer(&col, &col))
        })
        .collect();
    Ok(Observable::from_spectral(
        SpectralDecomposition::from_branches(branches, 1e-10)?,
    ))
}

/// A pair `(A₁, A₂)` entangled in `phi`: both are diagonal in the (completed)
/// Schmidt bases of `phi`.
pub fn find_entangled_observables(
    phi: &State,
    dim1: usize,
    dim2: usize,
) -> Result<(Observable, Observable)> {
    let schmidt = schmidt_decompose(phi, dim1, dim2)?;
    Ok((
        observable_on_completed_basis(&schmidt.left, dim1)?,
        observable_on_completed_basis(&schmidt.right, dim2)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_state;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> State {
        State::real(&[H, 0.0, 0.0, H]).unwrap()
    }

    #[test]
    fn z_coupling_acts_as_controlled_not() {
        // U(α|0⟩ + β|1⟩)|ξ₀⟩ = α|0⟩|ξ₀⟩ + β|1⟩|ξ₁⟩ with ξ indexed by the
        // branch order of Z (−1 first), so |1⟩ ↦ ξ₀ and |0⟩ ↦ ξ₁.
        let mp = build_vn_process(&Observable::pauli_z()).unwrap();
        let psi = State::real(&[0.6, 0.8]).unwrap();
        let out = psi
            .tensor(mp.ancilla_state())
            .unwrap()
            .evolve(mp.coupling())
            .unwrap();
        let want = [0.0, 0.6, 0.8, 0.0];
        for (got, w) in out.amplitudes().iter().zip(want) {
            assert!((got - Complex64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_branch_coupling_is_identity() {
        let a = Observable::new(ComplexMatrix::identity(2)).unwrap();
        let mp = build_vn_process(&a).unwrap();
        assert_eq!(mp.ancilla_dim(), 1);
        assert!(mp.coupling().distance(&ComplexMatrix::identity(2)) < 1e-14);
        assert_eq!(mp.meter().eigenvalues(), vec![1.0]);
    }

    #[test]
    fn qutrit_induced_povm_is_pvm() {
        let a = Observable::new(ComplexMatrix::diagonal(&[1.0, 2.0, 3.0])).unwrap();
        let mp = build_vn_process(&a).unwrap();
        assert!(mp.coupling().is_unitary(1e-12));
        let d = mp
            .induced_povm()
            .max_effect_distance(&a.pvm(), 1e-8)
            .unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn superposition_gives_bell_type_state() {
        let phi = entangled_state(&State::plus(), &Observable::pauli_z()).unwrap();
        let s = crate::linalg::schmidt_decompose(&phi, 2, 2).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.coefficients.iter().all(|c| (c - H).abs() < 1e-14));
    }

    #[test]
    fn eigenstate_gives_product_state() {
        let phi = entangled_state(&State::basis(2, 0), &Observable::pauli_z()).unwrap();
        let s = crate::linalg::schmidt_decompose(&phi, 2, 2).unwrap();
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn coefficients_match_overlaps() {
        let z = Observable::pauli_z();
        let phi = entangled_state(&State::real(&[0.6, 0.8]).unwrap(), &z).unwrap();
        let mp = build_vn_process(&z).unwrap();
        let r = check_observable_entanglement(&z, mp.meter(), &phi, 1e-9).unwrap();
        // Branch order is (−1, +1): |c|² = (0.64, 0.36) on the diagonal.
        assert!((r.joint[0][0] - 0.64).abs() < 1e-12);
        assert!((r.joint[1][1] - 0.36).abs() < 1e-12);
        assert!(r.is_entangled);
    }

    #[test]
    fn bell_state_is_zz_entangled() {
        let z = Observable::pauli_z();
        let r = check_observable_entanglement(&z, &z, &bell(), 1e-9).unwrap();
        assert_eq!(r.pairing, vec![(0, 0), (1, 1)]);
        assert!(r.conditions.as_array().iter().all(|&c| c));
        assert!(r.is_entangled);
    }

    #[test]
    fn product_state_is_not_entangled_under_any_pairing() {
        let z = Observable::pauli_z();
        let phi = State::basis(2, 0).tensor(&State::plus()).unwrap();
        let r = check_observable_entanglement(&z, &z, &phi, 1e-9).unwrap();
        // Brute force: the |0⟩ row carries (1/2, 1/2), so either pairing
        // leaves 1/2 off the pairing.
        for pairs in [vec![(0, 0), (1, 1)], vec![(0, 1), (1, 0)]] {
            let on: f64 = pairs.iter().map(|&(k, m)| r.joint[k][m]).sum();
            assert!((1.0 - on - 0.5).abs() < 1e-12);
        }
        assert!(!r.conditions.off_pairing_zero);
        assert!(!r.is_entangled);
        assert!((r.off_pairing_mass - 0.5).abs() < 1e-12);
        assert!(!verify_perfect_correlation(&z, &z, &phi, 1e-9).unwrap());
    }

    #[test]
    fn deterministic_joint_outcome_is_entangled() {
        let z = Observable::pauli_z();
        let phi = State::basis(4, 0);
        let r = check_observable_entanglement(&z, &z, &phi, 1e-9).unwrap();
        assert!(r.is_entangled);
        assert!(verify_perfect_correlation(&z, &z, &phi, 1e-9).unwrap());
    }

    #[test]
    fn unequal_branch_counts() {
        // A qubit Z against a qutrit diag(1,2,3) on |0⟩|0⟩ + |1⟩|2⟩.
        let z = Observable::pauli_z();
        let q = Observable::new(ComplexMatrix::diagonal(&[1.0, 2.0, 3.0])).unwrap();
        let phi = State::real(&[H, 0.0, 0.0, 0.0, 0.0, H]).unwrap();
        let r = check_observable_entanglement(&z, &q, &phi, 1e-9).unwrap();
        assert_eq!(r.pairing.len(), 2);
        assert!(r.is_entangled);
        let r = check_observable_entanglement(
            &q,
            &z,
            &State::real(&[H, 0.0, 0.0, 0.0, 0.0, H]).unwrap(),
            1e-9,
        );
        assert!(r.unwrap().is_entangled);
    }

    #[test]
    fn greedy_pairing_above_limit() {
        let labels: Vec<f64> = (0..7).map(|k| k as f64).collect();
        let a = Observable::diagonal(&labels).unwrap();
        let mut amps = vec![0.0; 49];
        let w = (1.0 / 7.0f64).sqrt();
        for k in 0..7 {
            amps[k * 7 + (k + 3) % 7] = w;
        }
        let phi = State::real(&amps).unwrap();
        let r = check_observable_entanglement(&a, &a, &phi, 1e-9).unwrap();
        assert!(r.is_entangled);
        assert!(r.pairing.iter().all(|&(k, m)| m == (k + 3) % 7));
    }

    #[test]
    fn finds_observables_for_bell_and_product() {
        let (a1, a2) = find_entangled_observables(&bell(), 2, 2).unwrap();
        assert!(
            check_observable_entanglement(&a1, &a2, &bell(), 1e-9)
                .unwrap()
                .is_entangled
        );

        let prod = State::basis(4, 0);
        let (a1, a2) = find_entangled_observables(&prod, 2, 2).unwrap();
        let r = check_observable_entanglement(&a1, &a2, &prod, 1e-9).unwrap();
        assert!(r.is_entangled);
        assert_eq!(r.joint.iter().flatten().filter(|&&p| p > 1e-9).count(), 1);
    }

    #[test]
    fn finds_observables_for_random_states() {
        for seed in 0..10 {
            let phi = random_state(6, seed);
            let (a1, a2) = find_entangled_observables(&phi, 2, 3).unwrap();
            assert_eq!((a1.dim(), a2.dim()), (2, 3));
            let r = check_observable_entanglement(&a1, &a2, &phi, 1e-9).unwrap();
            assert!(r.is_entangled, "seed {seed}: {:?}", r.residuals);
        }
    }

    #[test]
    fn rejects_mismatched_state() {
        let z = Observable::pauli_z();
        assert!(check_observable_entanglement(&z, &z, &State::basis(3, 0), 1e-9).is_err());
        assert!(entangled_state(&State::basis(3, 0), &z).is_err());
        assert!(find_entangled_observables(&State::basis(4, 0), 3, 2).is_err());
    }
}
