//! JSON trace files.
//!
//! ```json
//! {
//!   "n_slots": 3,
//!   "tx_energy": [6.5, 13.5, 9],
//!   "rx_energy": [5, 8, 3],
//!   "helper_energy": [7, 1, 2],
//!   "alpha": 0.7,
//!   "cost_model": { "kind": "rate_half_log2" }
//! }
//! ```
//!
//! `cost_model` is optional and defaults to `rate_half_log2`; the other kind
//! is `scaled_inverse_rate`, which takes a positive `beta`.

use std::fmt;

use ehcoop_core::{builtin_cost_model, validate_trace, CostKind, CostModel, EnergyTrace};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub n_slots: Option<usize>,
    pub tx_energy: Option<Vec<f64>>,
    pub rx_energy: Option<Vec<f64>>,
    pub helper_energy: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model: Option<CostModelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModelSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceFileError {
    /// Not well-formed JSON, or a value of the wrong type.
    Syntax { line: usize, column: usize, message: String },
    /// One message per offending field, each prefixed with the field name.
    Invalid(Vec<String>),
}

impl fmt::Display for TraceFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceFileError::Syntax { line, column, message } => write!(f, "line {line}, column {column}: {message}"),
            TraceFileError::Invalid(errors) => f.write_str(&errors.join("\n")),
        }
    }
}

impl std::error::Error for TraceFileError {}

/// Parses and validates a trace document.
pub fn parse_trace(document: &str) -> Result<(EnergyTrace, CostModel), TraceFileError> {
    let file: TraceFile = serde_json::from_str(document).map_err(|e| TraceFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_model()
}

impl TraceFile {
    pub fn from_trace(trace: &EnergyTrace, cost: &CostModel) -> Self {
        let cost_model = match cost.kind() {
            CostKind::RateHalfLog2 => None,
            CostKind::ScaledInverseRate { beta } => {
                Some(CostModelSpec { kind: "scaled_inverse_rate".into(), beta: Some(beta) })
            }
        };
        TraceFile {
            n_slots: Some(trace.n_slots),
            tx_energy: Some(trace.tx_energy.clone()),
            rx_energy: Some(trace.rx_energy.clone()),
            helper_energy: Some(trace.helper_energy.clone()),
            alpha: Some(trace.alpha),
            cost_model,
        }
    }

    pub fn into_model(self) -> Result<(EnergyTrace, CostModel), TraceFileError> {
        let mut errors = Vec::new();
        let mut required = |name: &str, present: bool| {
            if !present {
                errors.push(format!("{name}: required"));
            }
        };
        required("n_slots", self.n_slots.is_some());
        required("tx_energy", self.tx_energy.is_some());
        required("rx_energy", self.rx_energy.is_some());
        required("helper_energy", self.helper_energy.is_some());
        required("alpha", self.alpha.is_some());

        let cost = match self.cost_model.as_ref().map(cost_model) {
            None => Some(CostModel::default()),
            Some(Ok(c)) => Some(c),
            Some(Err(e)) => {
                errors.push(e);
                None
            }
        };

        if !errors.is_empty() {
            return Err(TraceFileError::Invalid(errors));
        }
        let trace = EnergyTrace {
            n_slots: self.n_slots.unwrap(),
            tx_energy: self.tx_energy.unwrap(),
            rx_energy: self.rx_energy.unwrap(),
            helper_energy: self.helper_energy.unwrap(),
            alpha: self.alpha.unwrap(),
        };
        let invalid = validate_trace(&trace);
        if !invalid.is_empty() {
            return Err(TraceFileError::Invalid(invalid.iter().map(ToString::to_string).collect()));
        }
        Ok((trace, cost.unwrap()))
    }
}

fn cost_model(spec: &CostModelSpec) -> Result<CostModel, String> {
    let kind = match (spec.kind.as_str(), spec.beta) {
        ("rate_half_log2", None) => CostKind::RateHalfLog2,
        ("rate_half_log2", Some(1.0)) => CostKind::RateHalfLog2,
        ("rate_half_log2", Some(b)) => {
            return Err(format!("cost_model.beta: rate_half_log2 decodes at beta = 1, got {b}"));
        }
        ("scaled_inverse_rate", Some(beta)) => CostKind::ScaledInverseRate { beta },
        ("scaled_inverse_rate", None) => return Err("cost_model.beta: required for scaled_inverse_rate".into()),
        (other, _) => {
            return Err(format!("cost_model.kind: unknown kind {other:?} (expected rate_half_log2 or scaled_inverse_rate)"));
        }
    };
    builtin_cost_model(kind).map_err(|e| format!("cost_model.{e}"))
}
