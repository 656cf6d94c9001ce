//! JSON scenario documents (schema version "1").
//!
//! Complex numbers are `[re, im]` pairs, vectors are arrays of pairs and
//! matrices are arrays of rows. Every field other than `schema_version` is
//! optional; each subcommand names the fields it needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::linalg::{ComplexMatrix, State};
use crate::measproc::MeasurementProcess;
use crate::observables::{Observable, Povm};

pub const SCHEMA_VERSION: &str = "1";

pub type ComplexJson = [f64; 2];
pub type VectorJson = Vec<ComplexJson>;
pub type MatrixJson = Vec<Vec<ComplexJson>>;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable2: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<PovmOutcomeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process2: Option<ProcessJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmOutcomeJson {
    pub label: f64,
    pub effect: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessJson {
    pub system_dim: usize,
    pub ancilla_state: VectorJson,
    pub coupling: MatrixJson,
    pub meter: MatrixJson,
}

fn invalid(field: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {err}"))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("scenario file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "schema_version: expected \"{SCHEMA_VERSION}\", found \"{}\"",
                file.schema_version
            )));
        }
        Ok(file)
    }

    fn require<'a, T>(field: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, CliError> {
        field
            .as_ref()
            .ok_or_else(|| CliError::Input(format!("missing field `{name}` required by {command}")))
    }

    pub fn observable(&self, command: &str) -> Result<Observable, CliError> {
        let m = Self::require(&self.observable, "observable", command)?;
        observable_from_json(m, "observable")
    }

    pub fn observable2(&self, command: &str) -> Result<Observable, CliError> {
        let m = Self::require(&self.observable2, "observable2", command)?;
        observable_from_json(m, "observable2")
    }

    pub fn state(&self, command: &str) -> Result<State, CliError> {
        let v = Self::require(&self.state, "state", command)?;
        state_from_json(v, "state")
    }

    pub fn povm(&self, command: &str) -> Result<Povm, CliError> {
        let outcomes = Self::require(&self.povm, "povm", command)?;
        let parsed = outcomes
            .iter()
            .enumerate()
            .map(|(k, o)| {
                Ok((
                    o.label,
                    matrix_from_json(&o.effect, &format!("povm[{k}].effect"))?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Povm::new(parsed).map_err(|e| invalid("povm", e))
    }

    pub fn process(&self, command: &str) -> Result<MeasurementProcess, CliError> {
        let p = Self::require(&self.process, "process", command)?;
        process_from_json(p, "process")
    }

    pub fn process2(&self) -> Result<Option<MeasurementProcess>, CliError> {
        self.process2
            .as_ref()
            .map(|p| process_from_json(p, "process2"))
            .transpose()
    }
}

pub fn matrix_from_json(rows: &MatrixJson, field: &str) -> Result<ComplexMatrix, CliError> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
        return Err(invalid(
            field,
            format!(
                "row {bad} has {} entries, expected {n_cols}",
                rows[bad].len()
            ),
        ));
    }
    let entries = rows
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    ComplexMatrix::from_row_major(n_rows, n_cols, entries).map_err(|e| invalid(field, e))
}

pub fn observable_from_json(rows: &MatrixJson, field: &str) -> Result<Observable, CliError> {
    let m = matrix_from_json(rows, field)?;
    Observable::new(m).map_err(|e| invalid(field, e))
}

pub fn state_from_json(v: &VectorJson, field: &str) -> Result<State, CliError> {
    State::new(v.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .map_err(|e| invalid(field, e))
}

pub fn process_from_json(p: &ProcessJson, field: &str) -> Result<MeasurementProcess, CliError> {
    let xi = state_from_json(&p.ancilla_state, &format!("{field}.ancilla_state"))?;
    let coupling = matrix_from_json(&p.coupling, &format!("{field}.coupling"))?;
    let meter = observable_from_json(&p.meter, &format!("{field}.meter"))?;
    MeasurementProcess::new(p.system_dim, xi, coupling, meter).map_err(|e| invalid(field, e))
}

pub fn complex_to_json(z: Complex64) -> ComplexJson {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| complex_to_json(m.get(i, j)))
                .collect()
        })
        .collect()
}

pub fn state_to_json(s: &State) -> VectorJson {
    s.amplitudes().iter().map(|&z| complex_to_json(z)).collect()
}

pub fn povm_to_json(p: &Povm) -> Vec<PovmOutcomeJson> {
    p.outcomes()
        .iter()
        .map(|(label, e)| PovmOutcomeJson {
            label: *label,
            effect: matrix_to_json(e),
        })
        .collect()
}

pub fn process_to_json(mp: &MeasurementProcess) -> ProcessJson {
    ProcessJson {
        system_dim: mp.system_dim(),
        ancilla_state: state_to_json(mp.ancilla_state()),
        coupling: matrix_to_json(mp.coupling()),
        meter: matrix_to_json(mp.meter().operator()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document() {
        let f = ScenarioFile::parse(
            r#"{"schema_version":"1","observable":[[[1,0],[0,0]],[[0,0],[-1,0]]]}"#,
        )
        .unwrap();
        assert_eq!(f.observable("test").unwrap().eigenvalues(), vec![-1.0, 1.0]);
        assert!(matches!(f.state("test"), Err(CliError::Input(msg)) if msg.contains("`state`")));
    }

    #[test]
    fn rejects_wrong_version_and_unknown_fields() {
        assert!(ScenarioFile::parse(r#"{"schema_version":"2"}"#).is_err());
        assert!(ScenarioFile::parse(r#"{"schema_version":"1","bogus":1}"#).is_err());
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let rows: MatrixJson = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        let err = matrix_from_json(&rows, "observable").unwrap_err();
        assert!(matches!(err, CliError::Input(msg) if msg.starts_with("observable: row 1")));
    }

    #[test]
    fn process_roundtrip() {
        let mp = crate::vonneumann::build_vn_process(&Observable::pauli_z()).unwrap();
        let back = process_from_json(&process_to_json(&mp), "process").unwrap();
        assert_eq!(back.coupling(), mp.coupling());
        assert_eq!(back.meter().eigenvalues(), mp.meter().eigenvalues());
    }
}
