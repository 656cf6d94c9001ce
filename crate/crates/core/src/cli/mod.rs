//! The `qmeas` command-line front end.
//!
//! Every subcommand reads an optional JSON scenario file (see [`schema`]),
//! runs one verification from the library and produces a [`RunReport`].
//! Flags take precedence over values in the file, which take precedence over
//! the library defaults. Exit codes: 0 pass, 1 verification failed, 2 invalid
//! input, 3 internal consistency error.

pub mod report;
pub mod schema;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::intersub::{
    check_intersubjectivity_with, compose_joint_scenario, counterexample_uninformative_povm,
    joint_distribution, sample_outcomes, verify_oit_with, JointDistribution, OitConfig,
};
use crate::linalg::{derive_seed, random_state, State};
use crate::measproc::naimark_dilation;
use crate::observables::{povm_probabilities, Observable, OutcomeDistribution};
use crate::vonneumann::{
    build_vn_process, check_observable_entanglement, entangled_state, EntanglementReport,
};
use crate::{DEFAULT_LABEL_TOL, DEFAULT_OIT_TOL};

pub use report::{Metrics, RunReport};
pub use schema::ScenarioFile;

const DEFAULT_TRIALS: usize = 100;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_SAMPLES: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "qmeas",
    version,
    about = "Verify quantum measurement processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (JSON, schema_version "1").
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Emit a machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,

    /// Seed for random states and sampling.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Random trials, or draws for `sample`.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,

    /// Pass/fail tolerance.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,

    /// Two outcome labels closer than this denote the same outcome.
    #[arg(long = "label-tol", global = true, value_name = "X")]
    pub label_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Two reproducible measurements of `observable` agree on random states.
    VerifyOit,
    /// Does `process` reproduce the statistics of `observable`?
    Reproducibility,
    /// Dump the POVM induced on the system by `process`.
    InducedPovm,
    /// Naimark-dilate `povm` and check the round trip.
    Dilate,
    /// Run the von Neumann coupling of `observable` on `state`.
    Entangle,
    /// Check whether `observable` and `observable2` are entangled in `state`.
    CheckEntanglement,
    /// The uninformative POVM whose two measurements disagree.
    Counterexample,
    /// Sample joint outcomes of two observers.
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyOit => "verify-oit",
            Command::Reproducibility => "reproducibility",
            Command::InducedPovm => "induced-povm",
            Command::Dilate => "dilate",
            Command::Entangle => "entangle",
            Command::CheckEntanglement => "check-entanglement",
            Command::Counterexample => "counterexample",
            Command::Sample => "sample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

/// Parameters after resolving flags against the scenario file.
#[derive(Clone, Debug)]
struct Resolved {
    file: ScenarioFile,
    tol: f64,
    label_tol: f64,
    seed: u64,
    trials: Option<u64>,
}

impl Resolved {
    fn new(cli: &Cli, file: ScenarioFile) -> Result<Self, CliError> {
        let tol = cli.tol.or(file.tol).unwrap_or(DEFAULT_OIT_TOL);
        let label_tol = cli
            .label_tol
            .or(file.label_tol)
            .unwrap_or(DEFAULT_LABEL_TOL);
        for (name, v) in [("tol", tol), ("label_tol", label_tol)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Input(format!(
                    "{name}: must be a finite non-negative number, got {v}"
                )));
            }
        }
        Ok(Self {
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            trials: cli.trials,
            tol,
            label_tol,
            file,
        })
    }

    fn trials(&self) -> Result<usize, CliError> {
        let n = self
            .trials
            .map(|t| usize::try_from(t).unwrap_or(usize::MAX))
            .or(self.file.trials)
            .unwrap_or(DEFAULT_TRIALS);
        if n == 0 {
            return Err(CliError::Input("trials: must be positive".into()));
        }
        Ok(n)
    }

    fn samples(&self) -> Result<u64, CliError> {
        let n = self.trials.or(self.file.samples).unwrap_or(DEFAULT_SAMPLES);
        if n == 0 {
            return Err(CliError::Input("samples: must be positive".into()));
        }
        Ok(n)
    }

    fn metrics(&self) -> Metrics {
        Metrics::new(self.tol, self.label_tol)
    }
}

fn load_file(cli: &Cli) -> Result<ScenarioFile, CliError> {
    match &cli.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            ScenarioFile::parse(&text)
        }
        None if cli.command == Command::Counterexample => Ok(ScenarioFile {
            schema_version: schema::SCHEMA_VERSION.into(),
            ..ScenarioFile::default()
        }),
        None => Err(CliError::Input(format!(
            "{} requires --input FILE",
            cli.command.name()
        ))),
    }
}

/// Runs one subcommand. A failed verification is an `Ok` report with
/// `pass = false`; errors are reserved for bad input and internal failures.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let r = Resolved::new(cli, load_file(cli)?)?;
    let name = cli.command.name();
    match cli.command {
        Command::VerifyOit => verify_oit_cmd(name, &r),
        Command::Reproducibility => reproducibility_cmd(name, &r),
        Command::InducedPovm => induced_povm_cmd(name, &r),
        Command::Dilate => dilate_cmd(name, &r),
        Command::Entangle => entangle_cmd(name, &r),
        Command::CheckEntanglement => check_entanglement_cmd(name, &r),
        Command::Counterexample => counterexample_cmd(name, &r),
        Command::Sample => sample_cmd(name, &r),
    }
}

/// Runs `cli` and renders the outcome; returns the text to print on stdout
/// and the process exit code.
pub fn execute(cli: &Cli) -> (String, u8) {
    let name = cli.command.name();
    match run(cli) {
        Ok(report) => {
            let out = if cli.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            (out, report.exit_code())
        }
        Err(e) => {
            let out = if cli.json {
                report::error_json(name, &e) + "\n"
            } else {
                report::error_text(name, &e)
            };
            (out, e.exit_code())
        }
    }
}

fn distribution_json(d: &OutcomeDistribution) -> Value {
    d.entries()
        .iter()
        .map(|(x, p)| json!({ "label": x, "probability": p }))
        .collect()
}

fn joint_json(jd: &JointDistribution) -> Value {
    jd.entries()
        .iter()
        .map(|((x, y), p)| json!({ "x": x, "y": y, "probability": p }))
        .collect()
}

fn entanglement_json(rep: &EntanglementReport) -> Value {
    let c = &rep.conditions;
    json!({
        "labels1": rep.labels1,
        "labels2": rep.labels2,
        "joint": rep.joint,
        "pairing": rep.pairing,
        "conditions": {
            "off_pairing_zero": c.off_pairing_zero,
            "paired_sum_one": c.paired_sum_one,
            "first_marginal_matches": c.first_marginal_matches,
            "second_marginal_matches": c.second_marginal_matches,
            "conditionals_one": c.conditionals_one,
        },
        "residuals": rep.residuals,
        "off_pairing_mass": rep.off_pairing_mass,
        "is_entangled": rep.is_entangled,
    })
}

fn verify_oit_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let a = r.file.observable(name)?;
    let cfg = OitConfig {
        trials: r.trials()?,
        seed: r.seed,
        tol: r.tol,
        label_tol: r.label_tol,
        ..OitConfig::default()
    };
    let summary = verify_oit_with(&a, &cfg)?;
    let mut m = r.metrics();
    m.off_diagonal_mass = Some(summary.max_off_diagonal_mass);
    m.max_diagonal_gap = Some(summary.max_diagonal_gap);
    m.commutator_norm = Some(summary.commutator_norm);
    m.trials = Some(summary.trials);
    m.seed = Some(summary.seed);
    let details = json!({
        "eigenvalues": a.eigenvalues(),
        "first_process": "von-neumann",
        "second_process": "naimark-dilation",
    });
    Ok(RunReport::new(name, summary.passes, m, details))
}

fn reproducibility_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let mp = r.file.process(name)?;
    let a = r.file.observable(name)?;
    let rep = mp.reproducibility_report(&a, r.tol, r.label_tol)?;
    let trials = r.trials()?;
    let states: Vec<State> = (0..trials as u64)
        .map(|i| random_state(a.dim(), derive_seed(r.seed, i)))
        .collect();
    let stat_gap = mp.max_statistical_gap(&a, &states, r.label_tol)?;

    let mut m = r.metrics();
    m.max_frobenius_error = rep.labels_match.then_some(rep.max_gap);
    m.max_statistical_gap = Some(stat_gap);
    m.trials = Some(trials);
    m.seed = Some(r.seed);
    let gaps: Value = rep
        .gaps
        .iter()
        .map(|(x, g)| json!({ "label": x, "frobenius_gap": g }))
        .collect();
    let details = json!({
        "labels_match": rep.labels_match,
        "observable_labels": a.eigenvalues(),
        "induced_labels": mp.induced_povm().labels(),
        "gaps": gaps,
    });
    Ok(RunReport::new(name, rep.reproduces, m, details))
}

fn induced_povm_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let mp = r.file.process(name)?;
    let povm = mp.induced_povm();
    let err = povm.completeness_error();
    let mut m = r.metrics();
    m.max_frobenius_error = Some(err);
    let details = json!({
        "povm": schema::povm_to_json(&povm),
        "projective": povm.is_projective(r.tol),
    });
    Ok(RunReport::new(name, err <= r.tol, m, details))
}

fn dilate_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let povm = r.file.povm(name)?;
    let mp = naimark_dilation(&povm)?;
    let induced = mp.induced_povm();
    let err = induced
        .max_effect_distance(&povm, r.label_tol)
        .ok_or_else(|| CliError::Internal("dilation changed the outcome labels".into()))?;
    let mut m = r.metrics();
    m.max_frobenius_error = Some(err);
    let details = json!({
        "process": schema::process_to_json(&mp),
        "induced_povm": schema::povm_to_json(&induced),
    });
    Ok(RunReport::new(name, err <= r.tol, m, details))
}

fn entangle_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let a = r.file.observable(name)?;
    let psi = r.file.state(name)?;
    let mp = build_vn_process(&a)?;
    let phi = entangled_state(&psi, &a)?;
    let rep = check_observable_entanglement(&a, mp.meter(), &phi, r.tol)?;
    let mut m = r.metrics();
    m.off_diagonal_mass = Some(rep.off_pairing_mass);
    m.max_violation = Some(rep.max_violation);
    let details = json!({
        "system_dim": a.dim(),
        "ancilla_dim": mp.ancilla_dim(),
        "entangled_state": schema::state_to_json(&phi),
        "report": entanglement_json(&rep),
    });
    Ok(RunReport::new(name, rep.is_entangled, m, details))
}

fn check_entanglement_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let a1 = r.file.observable(name)?;
    let a2 = r.file.observable2(name)?;
    let phi = r.file.state(name)?;
    if phi.dim() != a1.dim() * a2.dim() {
        return Err(CliError::Input(format!(
            "state: dimension {} does not match observable ({}) times observable2 ({})",
            phi.dim(),
            a1.dim(),
            a2.dim()
        )));
    }
    let rep = check_observable_entanglement(&a1, &a2, &phi, r.tol)?;
    let mut m = r.metrics();
    m.off_diagonal_mass = Some(rep.off_pairing_mass);
    m.max_violation = Some(rep.max_violation);
    Ok(RunReport::new(
        name,
        rep.is_entangled,
        m,
        entanglement_json(&rep),
    ))
}

fn counterexample_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let (povm, scenario) = counterexample_uninformative_povm();
    let psi = match &r.file.state {
        Some(_) => r.file.state(name)?,
        None => random_state(scenario.system_dim(), r.seed),
    };
    let jd = joint_distribution(&scenario, &psi)?;
    let isr = jd.intersubjectivity(r.tol, r.label_tol);
    let povm_stats = povm_probabilities(&povm, &psi)?;
    let (m1, m2) = (jd.marginal1()?, jd.marginal2()?);
    let marginal_gap = m1
        .max_abs_gap(&povm_stats, r.label_tol)
        .max(m2.max_abs_gap(&povm_stats, r.label_tol));

    let mut m = r.metrics();
    m.off_diagonal_mass = Some(isr.off_diagonal_mass);
    m.max_statistical_gap = Some(marginal_gap);
    m.commutator_norm = Some(scenario.commutator_norm());
    if r.file.state.is_none() {
        m.seed = Some(r.seed);
    }
    let details = json!({
        "povm": schema::povm_to_json(&povm),
        "state": schema::state_to_json(&psi),
        "povm_statistics": distribution_json(&povm_stats),
        "marginal1": distribution_json(&m1),
        "marginal2": distribution_json(&m2),
        "joint": joint_json(&jd),
    });
    Ok(RunReport::new(name, isr.passes, m, details))
}

fn sample_cmd(name: &str, r: &Resolved) -> Result<RunReport, CliError> {
    let (p1, p2) = match (&r.file.process, &r.file.observable) {
        (Some(_), _) => {
            let p1 = r.file.process(name)?;
            let p2 = r.file.process2()?.unwrap_or_else(|| p1.clone());
            (p1, p2)
        }
        (None, Some(_)) => {
            let a: Observable = r.file.observable(name)?;
            let p = build_vn_process(&a)?;
            (p.clone(), p)
        }
        (None, None) => {
            return Err(CliError::Input(format!(
                "{name} requires `process` or `observable`"
            )))
        }
    };
    let psi = r.file.state(name)?;
    let n = r.samples()?;
    let scenario = compose_joint_scenario(&p1, &p2)?;
    let jd = joint_distribution(&scenario, &psi)?;
    let counts = sample_outcomes(&scenario, &psi, n, r.seed)?;
    let isr = check_intersubjectivity_with(&scenario, &psi, r.tol, r.label_tol)?;

    // Exact label matching: counts carry the labels of `jd` verbatim.
    let rows: Value = jd
        .entries()
        .iter()
        .map(|&((x, y), p)| {
            let c = counts.count(x, y, 0.0);
            let freq = c as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            json!({
                "x": x,
                "y": y,
                "probability": p,
                "count": c,
                "frequency": freq,
                "standard_error": se,
            })
        })
        .collect();
    let mut m = r.metrics();
    m.off_diagonal_mass = Some(isr.off_diagonal_mass);
    m.commutator_norm = Some(scenario.commutator_norm());
    m.samples = Some(n);
    m.seed = Some(r.seed);
    Ok(RunReport::new(name, true, m, json!({ "outcomes": rows })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(command: Command) -> Cli {
        Cli {
            command,
            input: None,
            json: true,
            seed: None,
            trials: None,
            tol: None,
            label_tol: None,
        }
    }

    #[test]
    fn counterexample_needs_no_input_and_fails() {
        let (out, code) = execute(&cli(Command::Counterexample));
        assert_eq!(code, 1);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], false);
        assert!((v["metrics"]["off_diagonal_mass"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn missing_input_is_an_input_error() {
        let (out, code) = execute(&cli(Command::VerifyOit));
        assert_eq!(code, 2);
        assert!(out.contains("requires --input"));
    }

    #[test]
    fn library_errors_map_to_exit_codes() {
        let e: CliError = crate::Error::NotHermitian(1.0).into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = crate::Error::InternalConsistency("x".into()).into();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn negative_tolerance_is_rejected() {
        let mut c = cli(Command::Counterexample);
        c.tol = Some(-1.0);
        assert_eq!(execute(&c).1, 2);
    }
}
