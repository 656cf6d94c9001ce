//! Two observers measuring one system through separate ancillas.
//!
//! The composite space is `H⊗K₁⊗K₂`, indexed `(i·dim K₁ + a)·dim K₂ + b`.
//! Each local coupling is lifted to the composite space (identity on the
//! other ancilla) and the two lifts are applied in sequence. The evolved
//! meters `M_i(T) = U†(I⊗M_i)U` must commute for the joint statistics to be
//! defined; [`compose_joint_scenario`] refuses scenarios where they do not.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::linalg::{derive_seed, random_state, seeded_rng, ComplexMatrix, State};
use crate::measproc::{naimark_dilation, MeasurementProcess};
use crate::observables::{
    born_probabilities, clamp_probability, Observable, OutcomeDistribution, Povm,
};
use crate::vonneumann::build_vn_process;
use crate::{Error, Result, DEFAULT_LABEL_TOL, DEFAULT_OIT_TOL, PROBABILITY_SUM_TOL};

/// Largest commutator norm `‖[M₁(T), M₂(T)]‖_F` accepted as local.
pub const LOCALITY_TOL: f64 = 1e-9;
/// Frobenius tolerance for the reproducibility precondition in
/// [`verify_oit`].
pub const REPRODUCIBILITY_TOL: f64 = 1e-9;

/// Which local coupling acts first on `H⊗K₁⊗K₂`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CompositionOrder {
    /// `U = lift(U₂)·lift(U₁)`
    #[default]
    FirstThenSecond,
    /// `U = lift(U₁)·lift(U₂)`
    SecondThenFirst,
}

#[derive(Clone, Debug)]
pub struct JointScenario {
    system_dim: usize,
    process1: MeasurementProcess,
    process2: MeasurementProcess,
    composite_coupling: ComplexMatrix,
    evolved_meter1: Observable,
    evolved_meter2: Observable,
    commutator_norm: f64,
}

impl JointScenario {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn process1(&self) -> &MeasurementProcess {
        &self.process1
    }

    pub fn process2(&self) -> &MeasurementProcess {
        &self.process2
    }

    pub fn composite_coupling(&self) -> &ComplexMatrix {
        &self.composite_coupling
    }

    pub fn evolved_meter1(&self) -> &Observable {
        &self.evolved_meter1
    }

    pub fn evolved_meter2(&self) -> &Observable {
        &self.evolved_meter2
    }

    /// `‖[M₁(T), M₂(T)]‖_F`
    pub fn commutator_norm(&self) -> f64 {
        self.commutator_norm
    }

    /// `|ψ⟩⊗|ξ₁⟩⊗|ξ₂⟩`
    pub fn initial_state(&self, psi: &State) -> Result<State> {
        if psi.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "system state",
                expected: self.system_dim,
                found: psi.dim(),
            });
        }
        psi.tensor(self.process1.ancilla_state())?
            .tensor(self.process2.ancilla_state())
    }
}

/// `U₁` on `H⊗K₁` as `U₁⊗I` on `H⊗K₁⊗K₂`.
fn lift_first(u: &ComplexMatrix, k2: usize) -> Result<ComplexMatrix> {
    crate::linalg::tensor(u, &ComplexMatrix::identity(k2))
}

/// `U₂` on `H⊗K₂` acting on `H⊗K₁⊗K₂`, identity on `K₁`.
fn lift_second(u: &ComplexMatrix, h: usize, k1: usize, k2: usize) -> ComplexMatrix {
    let n = h * k1 * k2;
    let src = u.as_dmatrix();
    let zero = Complex64::new(0.0, 0.0);
    ComplexMatrix::wrap(DMatrix::from_fn(n, n, |row, col| {
        let (i, a, b) = (row / (k1 * k2), (row / k2) % k1, row % k2);
        let (j, a2, b2) = (col / (k1 * k2), (col / k2) % k1, col % k2);
        if a != a2 {
            zero
        } else {
            src[(i * k2 + b, j * k2 + b2)]
        }
    }))
}

/// `‖[M₁, M₂]‖_F`, or a locality error when it exceeds [`LOCALITY_TOL`].
pub fn check_locality(m1: &Observable, m2: &Observable) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            context: "evolved meters",
            expected: m1.dim(),
            found: m2.dim(),
        });
    }
    let norm = m1.operator().commutator(m2.operator()).frobenius_norm();
    if norm > LOCALITY_TOL {
        return Err(Error::Locality(norm));
    }
    Ok(norm)
}

/// Joint scenario with the first process's coupling applied first.
pub fn compose_joint_scenario(
    p1: &MeasurementProcess,
    p2: &MeasurementProcess,
) -> Result<JointScenario> {
    compose_joint_scenario_with_order(p1, p2, CompositionOrder::FirstThenSecond)
}

pub fn compose_joint_scenario_with_order(
    p1: &MeasurementProcess,
    p2: &MeasurementProcess,
    order: CompositionOrder,
) -> Result<JointScenario> {
    let h = p1.system_dim();
    if p2.system_dim() != h {
        return Err(Error::DimensionMismatch {
            context: "second process system",
            expected: h,
            found: p2.system_dim(),
        });
    }
    let (k1, k2) = (p1.ancilla_dim(), p2.ancilla_dim());
    h.checked_mul(k1)
        .and_then(|x| x.checked_mul(k2))
        .filter(|&n| n <= crate::MAX_PRODUCT_DIM)
        .ok_or(Error::SizeLimit {
            rows: h.saturating_mul(k1).saturating_mul(k2),
            cols: h.saturating_mul(k1).saturating_mul(k2),
            limit: crate::MAX_PRODUCT_DIM,
        })?;

    let u1 = lift_first(p1.coupling(), k2)?;
    let u2 = lift_second(p2.coupling(), h, k1, k2);
    let composite = match order {
        CompositionOrder::FirstThenSecond => &u2 * &u1,
        CompositionOrder::SecondThenFirst => &u1 * &u2,
    };

    let evolve = |family: crate::linalg::SpectralDecomposition| {
        let spectral = family.conjugate_by(&composite);
        let operator = spectral.reconstruct().hermitian_part();
        Observable::from_parts(operator, spectral)
    };
    let m1 = evolve(p1.meter().spectral().embed(h, k2)?);
    let m2 = evolve(p2.meter().spectral().embed(h * k1, 1)?);

    let commutator_norm = check_locality(&m1, &m2)?;
    Ok(JointScenario {
        system_dim: h,
        process1: p1.clone(),
        process2: p2.clone(),
        composite_coupling: composite,
        evolved_meter1: m1,
        evolved_meter2: m2,
        commutator_norm,
    })
}

/// `P(x, y)` over all label pairs of the two evolved meters, in the label
/// order of each meter.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    entries: Vec<((f64, f64), f64)>,
}

impl JointDistribution {
    pub fn entries(&self) -> &[((f64, f64), f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn probability(&self, x: f64, y: f64, label_tol: f64) -> f64 {
        self.entries
            .iter()
            .filter(|((a, b), _)| (a - x).abs() <= label_tol && (b - y).abs() <= label_tol)
            .map(|e| e.1)
            .sum()
    }

    fn marginal(&self, pick: impl Fn(&(f64, f64)) -> f64) -> Result<OutcomeDistribution> {
        let mut acc: Vec<(f64, f64)> = Vec::new();
        for (pair, p) in &self.entries {
            let x = pick(pair);
            match acc.iter_mut().find(|e| e.0 == x) {
                Some(e) => e.1 += p,
                None => acc.push((x, *p)),
            }
        }
        OutcomeDistribution::from_raw(acc)
    }

    pub fn marginal1(&self) -> Result<OutcomeDistribution> {
        self.marginal(|pair| pair.0)
    }

    pub fn marginal2(&self) -> Result<OutcomeDistribution> {
        self.marginal(|pair| pair.1)
    }

    /// Splits the mass into matched (`|x − y| ≤ label_tol`) and unmatched
    /// pairs.
    pub fn intersubjectivity(&self, tol: f64, label_tol: f64) -> IntersubjectivityReport {
        let mut diagonal: Vec<(f64, f64)> = Vec::new();
        let mut off = 0.0;
        for ((x, y), p) in &self.entries {
            if (x - y).abs() <= label_tol {
                match diagonal.iter_mut().find(|e| e.0 == *x) {
                    Some(e) => e.1 += p,
                    None => diagonal.push((*x, *p)),
                }
            } else {
                off += p;
            }
        }
        IntersubjectivityReport {
            off_diagonal_mass: off,
            diagonal,
            passes: off <= tol,
            tolerance_used: tol,
        }
    }
}

/// `P(M₁(T) = x, M₂(T) = y) = ⟨ψξ₁ξ₂|E_{M₁(T)}(x) E_{M₂(T)}(y)|ψξ₁ξ₂⟩`
pub fn joint_distribution(s: &JointScenario, psi: &State) -> Result<JointDistribution> {
    let init = s.initial_state(psi)?;
    let v = init.amplitudes();
    let mut entries = Vec::new();
    for b1 in s.evolved_meter1.spectral().branches() {
        let left = b1.projector.apply(v);
        for b2 in s.evolved_meter2.spectral().branches() {
            let p = left.dotc(&b2.projector.apply(v)).re;
            entries.push(((b1.eigenvalue, b2.eigenvalue), clamp_probability(p)?));
        }
    }
    let jd = JointDistribution { entries };
    let total = jd.total();
    if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::NumericalConsistency(format!(
            "joint probabilities sum to {total}"
        )));
    }
    Ok(jd)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersubjectivityReport {
    pub off_diagonal_mass: f64,
    /// Matched label and `P(x, x)`.
    pub diagonal: Vec<(f64, f64)>,
    pub passes: bool,
    pub tolerance_used: f64,
}

impl IntersubjectivityReport {
    pub fn diagonal_mass(&self) -> f64 {
        self.diagonal.iter().map(|e| e.1).sum()
    }

    /// Largest gap between the diagonal and a reference distribution,
    /// typically the Born statistics `‖E_A(x)ψ‖²` of the measured observable.
    pub fn max_diagonal_gap(&self, reference: &OutcomeDistribution, label_tol: f64) -> f64 {
        let lookup = |x: f64| {
            self.diagonal
                .iter()
                .filter(|e| (e.0 - x).abs() <= label_tol)
                .map(|e| e.1)
                .sum::<f64>()
        };
        reference
            .entries()
            .iter()
            .map(|&(x, p)| (lookup(x) - p).abs())
            .chain(
                self.diagonal
                    .iter()
                    .map(|&(x, p)| (p - reference.probability(x, label_tol)).abs()),
            )
            .fold(0.0, f64::max)
    }
}

/// Intersubjectivity check with the default label tolerance.
pub fn check_intersubjectivity(
    s: &JointScenario,
    psi: &State,
    tol: f64,
) -> Result<IntersubjectivityReport> {
    check_intersubjectivity_with(s, psi, tol, DEFAULT_LABEL_TOL)
}

pub fn check_intersubjectivity_with(
    s: &JointScenario,
    psi: &State,
    tol: f64,
    label_tol: f64,
) -> Result<IntersubjectivityReport> {
    Ok(joint_distribution(s, psi)?.intersubjectivity(tol, label_tol))
}

/// Second observer's process in [`verify_oit`]; the first is always the
/// von Neumann coupling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OitPartner {
    /// Naimark dilation of the observable's PVM.
    #[default]
    NaimarkDilation,
    /// A second von Neumann coupling on its own ancilla.
    VonNeumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OitConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub label_tol: f64,
    pub partner: OitPartner,
}

impl Default for OitConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            tol: DEFAULT_OIT_TOL,
            label_tol: DEFAULT_LABEL_TOL,
            partner: OitPartner::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OitSummary {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub label_tol: f64,
    pub max_off_diagonal_mass: f64,
    /// Worst `|P(x, x) − ‖E_A(x)ψ‖²|` over trials and outcomes.
    pub max_diagonal_gap: f64,
    pub commutator_norm: f64,
    pub passes: bool,
}

/// The two reproducible processes used by [`verify_oit`].
pub fn oit_processes(
    a: &Observable,
    partner: OitPartner,
) -> Result<(MeasurementProcess, MeasurementProcess)> {
    let first = build_vn_process(a)?;
    let second = match partner {
        OitPartner::NaimarkDilation => naimark_dilation(&a.pvm())?,
        OitPartner::VonNeumann => build_vn_process(a)?,
    };
    for (name, mp) in [("von Neumann", &first), ("partner", &second)] {
        if !mp.check_probability_reproducibility(a, REPRODUCIBILITY_TOL) {
            return Err(Error::InternalConsistency(format!(
                "{name} process does not reproduce the observable"
            )));
        }
    }
    Ok((first, second))
}

/// Randomized check that two reproducible measurements of `a` agree.
pub fn verify_oit(a: &Observable, trials: usize, seed: u64, tol: f64) -> Result<OitSummary> {
    verify_oit_with(
        a,
        &OitConfig {
            trials,
            seed,
            tol,
            ..OitConfig::default()
        },
    )
}

/// Trial `i` draws its state from `derive_seed(seed, i)`; trials run in
/// parallel and the summary only takes maxima, so it does not depend on
/// scheduling.
pub fn verify_oit_with(a: &Observable, cfg: &OitConfig) -> Result<OitSummary> {
    if cfg.trials == 0 {
        return Err(Error::Malformed("trial count must be positive".into()));
    }
    let (p1, p2) = oit_processes(a, cfg.partner)?;
    let scenario = compose_joint_scenario(&p1, &p2)?;

    let results = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let psi = random_state(a.dim(), derive_seed(cfg.seed, i));
            let report = check_intersubjectivity_with(&scenario, &psi, cfg.tol, cfg.label_tol)?;
            let born = born_probabilities(a, &psi)?;
            Ok((
                report.off_diagonal_mass,
                report.max_diagonal_gap(&born, cfg.label_tol),
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let max_off = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_gap = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(OitSummary {
        trials: cfg.trials,
        seed: cfg.seed,
        tolerance: cfg.tol,
        label_tol: cfg.label_tol,
        max_off_diagonal_mass: max_off,
        max_diagonal_gap: max_gap,
        commutator_norm: scenario.commutator_norm(),
        passes: max_off <= cfg.tol && max_gap <= cfg.tol,
    })
}

/// Qubit coin process: `U = I⊗H` puts the ancilla in `(|0⟩+|1⟩)/√2`
/// regardless of the system, and the meter reads `0` or `1`.
fn coin_process() -> MeasurementProcess {
    let coupling = crate::linalg::tensor(&ComplexMatrix::identity(2), &ComplexMatrix::hadamard())
        .expect("small dimensions");
    MeasurementProcess::new(
        2,
        State::basis(2, 0),
        coupling,
        Observable::diagonal(&[0.0, 1.0]).expect("distinct labels"),
    )
    .expect("fixed process is valid")
}

/// The uninformative POVM `Π(0) = Π(1) = I/2` and two independent coin
/// processes that each reproduce it. Their outcomes disagree half the time.
pub fn counterexample_uninformative_povm() -> (Povm, JointScenario) {
    let half = ComplexMatrix::identity(2).scale(0.5);
    let povm = Povm::from_effects(vec![half.clone(), half]).expect("fixed POVM");
    let scenario =
        compose_joint_scenario(&coin_process(), &coin_process()).expect("coins act locally");
    (povm, scenario)
}

/// Observed outcome pairs with their counts; pairs never drawn are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JointCounts {
    pub samples: u64,
    pub counts: Vec<((OrderedLabel, OrderedLabel), u64)>,
}

/// Outcome label wrapper with total equality, so counts can derive `Eq`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedLabel(pub f64);

impl Eq for OrderedLabel {}

impl JointCounts {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, x: f64, y: f64, label_tol: f64) -> u64 {
        self.counts
            .iter()
            .filter(|((a, b), _)| (a.0 - x).abs() <= label_tol && (b.0 - y).abs() <= label_tol)
            .map(|e| e.1)
            .sum()
    }

    pub fn frequency(&self, x: f64, y: f64, label_tol: f64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.count(x, y, label_tol) as f64 / self.samples as f64
    }
}

/// Draws `n` outcome pairs from [`joint_distribution`] by inverse CDF, one
/// uniform `f64` per draw from `seeded_rng(seed)`.
pub fn sample_outcomes(s: &JointScenario, psi: &State, n: u64, seed: u64) -> Result<JointCounts> {
    let jd = joint_distribution(s, psi)?;
    let entries = jd.entries();
    let mut cumulative = Vec::with_capacity(entries.len());
    let mut acc = 0.0;
    for e in entries {
        acc += e.1;
        cumulative.push(acc);
    }
    let fallback = entries
        .iter()
        .rposition(|e| e.1 > 0.0)
        .expect("distribution has positive mass");

    let mut tallies = vec![0u64; entries.len()];
    let mut rng = seeded_rng(seed);
    for _ in 0..n {
        let u: f64 = rng.random();
        let idx = cumulative.iter().position(|&c| u < c).unwrap_or(fallback);
        tallies[idx] += 1;
    }
    Ok(JointCounts {
        samples: n,
        counts: entries
            .iter()
            .zip(tallies)
            .filter(|(_, c)| *c > 0)
            .map(|(((x, y), _), c)| ((OrderedLabel(*x), OrderedLabel(*y)), c))
            .collect(),
    })
}
