//! Run reports and their text/JSON rendering.

use serde::Serialize;
use serde_json::Value;

use super::schema::SCHEMA_VERSION;
use super::CliError;

/// Headline numbers of a run. Absent metrics are omitted from the JSON
/// document; `tolerance` and `label_tol` are always recorded.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub tolerance: f64,
    pub label_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub off_diagonal_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_frobenius_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_diagonal_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_statistical_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutator_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Metrics {
    pub fn new(tolerance: f64, label_tol: f64) -> Self {
        Self {
            tolerance,
            label_tol,
            ..Self::default()
        }
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("tolerance", fmt_f64(self.tolerance)),
            ("label_tol", fmt_f64(self.label_tol)),
        ];
        let floats = [
            ("off_diagonal_mass", self.off_diagonal_mass),
            ("max_frobenius_error", self.max_frobenius_error),
            ("max_diagonal_gap", self.max_diagonal_gap),
            ("max_statistical_gap", self.max_statistical_gap),
            ("commutator_norm", self.commutator_norm),
            ("max_violation", self.max_violation),
        ];
        out.extend(
            floats
                .iter()
                .filter_map(|(k, v)| v.map(|v| (*k, fmt_f64(v)))),
        );
        if let Some(t) = self.trials {
            out.push(("trials", t.to_string()));
        }
        if let Some(n) = self.samples {
            out.push(("samples", n.to_string()));
        }
        if let Some(s) = self.seed {
            out.push(("seed", s.to_string()));
        }
        out
    }
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:.6e}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub command: String,
    pub pass: bool,
    pub metrics: Metrics,
    pub details: Value,
}

impl RunReport {
    pub fn new(command: &str, pass: bool, metrics: Metrics, details: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            pass,
            metrics,
            details,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "qmeas {}: {}\n",
            self.command,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for (k, v) in self.metrics.lines() {
            s.push_str(&format!("  {k:<20} {v}\n"));
        }
        match &self.details {
            Value::Null => {}
            Value::Object(map) => {
                for (k, v) in map {
                    s.push_str(&format!("{k}: {v}\n"));
                }
            }
            other => s.push_str(&format!("details: {other}\n")),
        }
        s
    }
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    schema_version: &'static str,
    command: &'a str,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'static str,
    message: &'a str,
}

pub fn error_json(command: &str, err: &CliError) -> String {
    let doc = ErrorDocument {
        schema_version: SCHEMA_VERSION,
        command,
        error: ErrorBody {
            kind: err.kind(),
            message: err.message(),
        },
    };
    serde_json::to_string_pretty(&doc).expect("error document serializes")
}

pub fn error_text(command: &str, err: &CliError) -> String {
    format!("qmeas {command}: {} error: {}\n", err.kind(), err.message())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_metrics_are_omitted() {
        let r = RunReport::new("x", true, Metrics::new(1e-9, 1e-8), Value::Null);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        let m = v["metrics"].as_object().unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m["tolerance"], 1e-9);
        assert_eq!(v["schema_version"], "1");
    }

    #[test]
    fn text_lists_verdict_and_metrics() {
        let mut m = Metrics::new(1e-9, 1e-8);
        m.off_diagonal_mass = Some(0.5);
        let t = RunReport::new("counterexample", false, m, Value::Null).to_text();
        assert!(t.starts_with("qmeas counterexample: FAIL\n"));
        assert!(t.contains("off_diagonal_mass    0.5"));
    }
}
