//! Problem data: harvested-energy traces, the rate / decoding-cost family and
//! the per-slot policy produced by the solvers.

use alloc::vec::Vec;
use core::f64::consts::LN_2;
use core::fmt;

/// Harvested energy per slot at the transmitter, the receiver and the helper,
/// together with the helper-to-receiver transfer efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrace {
    pub n_slots: usize,
    pub tx_energy: Vec<f64>,
    pub rx_energy: Vec<f64>,
    pub helper_energy: Vec<f64>,
    pub alpha: f64,
}

impl EnergyTrace {
    /// Builds a trace with `n_slots` taken from the receiver list and checks
    /// every invariant.
    pub fn new(tx_energy: Vec<f64>, rx_energy: Vec<f64>, helper_energy: Vec<f64>, alpha: f64) -> Result<Self, Vec<TraceError>> {
        let trace = Self { n_slots: rx_energy.len(), tx_energy, rx_energy, helper_energy, alpha };
        let errors = validate_trace(&trace);
        if errors.is_empty() {
            Ok(trace)
        } else {
            Err(errors)
        }
    }

    /// Receiver energy available per slot if the helper forwarded everything
    /// the moment it was harvested.
    pub fn virtual_rx_energy(&self) -> Vec<f64> {
        self.rx_energy.iter().zip(&self.helper_energy).map(|(e, h)| e + self.alpha * h).collect()
    }
}

/// Which energy list a [`TraceError`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyField {
    Tx,
    Rx,
    Helper,
}

impl EnergyField {
    pub fn name(self) -> &'static str {
        match self {
            EnergyField::Tx => "tx_energy",
            EnergyField::Rx => "rx_energy",
            EnergyField::Helper => "helper_energy",
        }
    }
}

/// A violated [`EnergyTrace`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    NoSlots,
    LengthMismatch { field: EnergyField, expected: usize, found: usize },
    NegativeEnergy { field: EnergyField, index: usize, value: f64 },
    NonFinite { field: EnergyField, index: usize },
    AlphaOutOfRange(f64),
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::NoSlots => write!(f, "n_slots: must be positive"),
            TraceError::LengthMismatch { field, expected, found } => {
                write!(f, "{}: length mismatch (expected {expected}, found {found})", field.name())
            }
            TraceError::NegativeEnergy { field, index, value } => {
                write!(f, "{}[{index}]: must be non-negative, got {value}", field.name())
            }
            TraceError::NonFinite { field, index } => write!(f, "{}[{index}]: must be finite", field.name()),
            TraceError::AlphaOutOfRange(a) => write!(f, "alpha out of range: {a} is not in [0, 1]"),
        }
    }
}

/// Returns every violated trace invariant; an empty list means the trace is valid.
pub fn validate_trace(trace: &EnergyTrace) -> Vec<TraceError> {
    let mut errors = Vec::new();
    if trace.n_slots == 0 {
        errors.push(TraceError::NoSlots);
    }
    for (field, values) in [
        (EnergyField::Tx, &trace.tx_energy),
        (EnergyField::Rx, &trace.rx_energy),
        (EnergyField::Helper, &trace.helper_energy),
    ] {
        if values.len() != trace.n_slots {
            errors.push(TraceError::LengthMismatch { field, expected: trace.n_slots, found: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                errors.push(TraceError::NonFinite { field, index });
            } else if value < 0.0 {
                errors.push(TraceError::NegativeEnergy { field, index, value });
            }
        }
    }
    if !(0.0..=1.0).contains(&trace.alpha) {
        errors.push(TraceError::AlphaOutOfRange(trace.alpha));
    }
    errors
}

/// Built-in members of the rate / decoding-cost family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind {
    /// `g(p) = ½·log₂(1+p)` with the decoding cost `φ = g⁻¹`.
    RateHalfLog2,
    /// Same rate function, decoding cost `φ(r) = β·(2^{2r} − 1)`.
    ScaledInverseRate { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidBeta(f64),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidBeta(b) => write!(f, "beta: must be a positive finite number, got {b}"),
        }
    }
}

/// Rate function `g` (power to bits per channel use) and decoding cost `φ`
/// (rate to receiver energy), with their inverses.
///
/// Both members of the family satisfy `φ(g(p)) = β·p`, so a receiver that
/// decodes whatever the transmitter sends spends energy linear in the
/// transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    kind: CostKind,
    beta: f64,
}

/// Constructs a validated cost model.
pub fn builtin_cost_model(kind: CostKind) -> Result<CostModel, ModelError> {
    let beta = match kind {
        CostKind::RateHalfLog2 => 1.0,
        CostKind::ScaledInverseRate { beta } => beta,
    };
    if !(beta.is_finite() && beta > 0.0) {
        return Err(ModelError::InvalidBeta(beta));
    }
    Ok(CostModel { kind, beta })
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { kind: CostKind::RateHalfLog2, beta: 1.0 }
    }
}

impl CostModel {
    pub fn kind(&self) -> CostKind {
        self.kind
    }

    /// Receiver energy spent per unit of transmit power, `φ(g(p)) / p`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `g(p) = ½·log₂(1+p)`.
    pub fn rate(&self, power: f64) -> f64 {
        0.5 * libm::log1p(power) / LN_2
    }

    /// `g⁻¹(r) = 2^{2r} − 1`.
    pub fn rate_inv(&self, rate: f64) -> f64 {
        libm::expm1(2.0 * rate * LN_2)
    }

    /// `φ(r) = β·(2^{2r} − 1)`.
    pub fn decode_cost(&self, rate: f64) -> f64 {
        self.beta * self.rate_inv(rate)
    }

    /// `φ⁻¹(x) = g(x/β)`.
    pub fn decode_inv(&self, energy: f64) -> f64 {
        self.rate(energy / self.beta)
    }

    /// `g'(p)`.
    pub fn rate_slope(&self, power: f64) -> f64 {
        1.0 / (2.0 * LN_2 * (1.0 + power))
    }

    /// Derivative of `φ⁻¹` at `energy`.
    pub fn decode_inv_slope(&self, energy: f64) -> f64 {
        self.rate_slope(energy / self.beta) / self.beta
    }
}

/// Per-slot decisions: transmit power `p`, rate `r`, receiver decoding
/// energy `q` and helper transfer `δ` (energy leaving the helper).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Policy {
    pub tx_power: Vec<f64>,
    pub rate: Vec<f64>,
    pub rx_consumption: Vec<f64>,
    pub helper_transfer: Vec<f64>,
}

impl Policy {
    pub fn zeros(n: usize) -> Self {
        Policy {
            tx_power: alloc::vec![0.0; n],
            rate: alloc::vec![0.0; n],
            rx_consumption: alloc::vec![0.0; n],
            helper_transfer: alloc::vec![0.0; n],
        }
    }

    pub fn n_slots(&self) -> usize {
        self.rate.len()
    }

    pub fn objective(&self) -> f64 {
        self.rate.iter().sum()
    }

    /// True when all four lists share one length and hold finite, non-negative values.
    pub fn is_well_formed(&self) -> bool {
        let n = self.rate.len();
        [&self.tx_power, &self.rate, &self.rx_consumption, &self.helper_transfer]
            .iter()
            .all(|v| v.len() == n && v.iter().all(|x| x.is_finite() && *x >= 0.0))
    }
}
