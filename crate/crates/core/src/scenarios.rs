//! End-to-end solvers for the four battery configurations.
//!
//! | scenario | transmitter        | receiver   |
//! |----------|--------------------|------------|
//! | S1       | battery            | battery    |
//! | S2       | unlimited power    | no battery |
//! | S3       | battery            | no battery |
//! | S4       | no battery         | no battery |
//!
//! The helper always has a battery and forwards energy to the receiver with
//! efficiency `alpha`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{validate_trace, CostModel, EnergyTrace, Policy, TraceError};
use crate::waterfill::{capped_waterfill, exclusion_loop, min_capped_waterfill, SegmentSchedule, WaterfillError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    S1BothBatteries,
    S2FullPowerTxNoBatteryRx,
    S3BatteryTxNoBatteryRx,
    S4NoBatteries,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::S1BothBatteries,
        ScenarioKind::S2FullPowerTxNoBatteryRx,
        ScenarioKind::S3BatteryTxNoBatteryRx,
        ScenarioKind::S4NoBatteries,
    ];

    /// Short command-line name, `s1` … `s4`.
    pub fn code(self) -> &'static str {
        match self {
            ScenarioKind::S1BothBatteries => "s1",
            ScenarioKind::S2FullPowerTxNoBatteryRx => "s2",
            ScenarioKind::S3BatteryTxNoBatteryRx => "s3",
            ScenarioKind::S4NoBatteries => "s4",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code().eq_ignore_ascii_case(code))
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::S1BothBatteries => "transmitter and receiver with batteries",
            ScenarioKind::S2FullPowerTxNoBatteryRx => "full-power transmitter, receiver without battery",
            ScenarioKind::S3BatteryTxNoBatteryRx => "transmitter with battery, receiver without battery",
            ScenarioKind::S4NoBatteries => "transmitter and receiver without batteries",
        }
    }

    /// Whether the receiver must spend at least its own harvest every slot.
    pub fn receiver_without_battery(self) -> bool {
        !matches!(self, ScenarioKind::S1BothBatteries)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Result of a scenario solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub scenario: ScenarioKind,
    pub policy: Policy,
    /// Sum of rates, bits per channel use.
    pub objective: f64,
    /// Rate staircase for S1, final transmit-power fill for S3.
    pub segments: Option<SegmentSchedule>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransferError {
    LengthMismatch { expected: usize, found: usize },
    /// The receiver needs energy beyond its harvest but `alpha` is zero.
    NoTransferLink { slot: usize },
    InsufficientHelper { demand: f64, available: f64 },
    /// Helper causality fails at this one-based prefix.
    PrefixViolation { prefix: usize, demand: f64, available: f64 },
}

impl fmt::Display for TransferError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferError::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            TransferError::NoTransferLink { slot } => {
                write!(f, "slot {} needs helper energy but alpha is zero", slot + 1)
            }
            TransferError::InsufficientHelper { demand, available } => {
                write!(f, "helper demand {demand} exceeds harvested helper energy {available}")
            }
            TransferError::PrefixViolation { prefix, demand, available } => write!(
                f,
                "helper causality violated at prefix j={prefix}: transfers {demand} exceed harvest {available}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    InvalidTrace(Vec<TraceError>),
    Waterfill(WaterfillError),
    Transfer(TransferError),
    /// A solver produced a state that the model rules out.
    Inconsistent(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::InvalidTrace(errors) => {
                write!(f, "invalid trace:")?;
                for e in errors {
                    write!(f, " {e};")?;
                }
                Ok(())
            }
            SolveError::Waterfill(e) => write!(f, "waterfilling failed: {e}"),
            SolveError::Transfer(e) => write!(f, "transfer schedule failed: {e}"),
            SolveError::Inconsistent(msg) => write!(f, "internal inconsistency: {msg}"),
        }
    }
}

impl From<WaterfillError> for SolveError {
    fn from(e: WaterfillError) -> Self {
        SolveError::Waterfill(e)
    }
}

impl From<TransferError> for SolveError {
    fn from(e: TransferError) -> Self {
        SolveError::Transfer(e)
    }
}

fn check(trace: &EnergyTrace) -> Result<(), SolveError> {
    let errors = validate_trace(trace);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidTrace(errors))
    }
}

/// Dispatches to the solver for `kind`.
pub fn solve(kind: ScenarioKind, trace: &EnergyTrace, cost: &CostModel) -> Result<Solution, SolveError> {
    match kind {
        ScenarioKind::S1BothBatteries => solve_s1(trace, cost),
        ScenarioKind::S2FullPowerTxNoBatteryRx => {
            check(trace)?;
            solve_s2(&trace.rx_energy, &trace.helper_energy, trace.alpha, cost)
        }
        ScenarioKind::S3BatteryTxNoBatteryRx => solve_s3(trace, cost),
        ScenarioKind::S4NoBatteries => solve_s4(trace, cost),
    }
}

fn prefix_sums(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

/// Both batteries. The helper hands over its harvest immediately, after which
/// the rates follow the two-resource staircase: each segment runs at the
/// smaller of the rate the transmitter can sustain and the rate the receiver
/// can decode, averaged over the window that minimises it.
pub fn solve_s1(trace: &EnergyTrace, cost: &CostModel) -> Result<Solution, SolveError> {
    check(trace)?;
    let n = trace.n_slots;
    let tx_cum = prefix_sums(trace.tx_energy.iter().copied());
    let rx_cum = prefix_sums(trace.virtual_rx_energy().into_iter());

    let mut rates = vec![0.0; n];
    let mut boundaries = Vec::new();
    let mut levels = Vec::new();
    let (mut tx_used, mut rx_used) = (0.0, 0.0);
    let mut start = 0;
    while start < n {
        let mut best: Option<(usize, f64)> = None;
        for end in start + 1..=n {
            let width = (end - start) as f64;
            let tx_avg = ((tx_cum[end] - tx_used) / width).max(0.0);
            let rx_avg = ((rx_cum[end] - rx_used) / width).max(0.0);
            let candidate = cost.rate(tx_avg).min(cost.decode_inv(rx_avg));
            if best.is_none_or(|(_, r)| candidate < r) {
                best = Some((end, candidate));
            }
        }
        let (end, rate) = best.expect("window is non-empty");
        let width = (end - start) as f64;
        rates[start..end].fill(rate);
        tx_used += width * cost.rate_inv(rate);
        rx_used += width * cost.decode_cost(rate);
        boundaries.push(end);
        levels.push(rate);
        start = end;
    }

    let policy = Policy {
        tx_power: rates.iter().map(|&r| cost.rate_inv(r)).collect(),
        rx_consumption: rates.iter().map(|&r| cost.decode_cost(r)).collect(),
        helper_transfer: trace.helper_energy.clone(),
        rate: rates.clone(),
    };
    Ok(Solution {
        scenario: ScenarioKind::S1BothBatteries,
        objective: policy.objective(),
        policy,
        segments: Some(SegmentSchedule { boundaries, segment_levels: levels, per_slot: rates }),
        diagnostics: Vec::new(),
    })
}

/// Full-power transmitter, receiver without battery. Transmitter energies are
/// not needed: the rate in each slot is whatever the receiver can decode.
pub fn solve_s2(rx_energy: &[f64], helper_energy: &[f64], alpha: f64, cost: &CostModel) -> Result<Solution, SolveError> {
    let (levels, state) = crate::waterfill::min_constrained_waterfill(rx_energy, helper_energy, alpha)?;
    if alpha == 0.0 {
        if let Some(i) = (0..levels.len()).find(|&i| levels[i] > rx_energy[i] * (1.0 + 1e-12) + 1e-12) {
            return Err(SolveError::Inconsistent(format!(
                "slot {} is above its own harvest without a transfer link",
                i + 1
            )));
        }
    }
    let helper_transfer = transfer_schedule(&levels, rx_energy, helper_energy, alpha)?;
    let rate: Vec<f64> = levels.iter().map(|&q| cost.decode_inv(q)).collect();
    let mut diagnostics = Vec::new();
    if !state.excluded.is_empty() {
        let slots: Vec<usize> = state.excluded.iter().map(|i| i + 1).collect();
        diagnostics.push(format!("slots pinned to their own harvest: {slots:?}"));
    }
    let policy = Policy {
        tx_power: rate.iter().map(|&r| cost.rate_inv(r)).collect(),
        rate,
        rx_consumption: levels,
        helper_transfer,
    };
    Ok(Solution {
        scenario: ScenarioKind::S2FullPowerTxNoBatteryRx,
        objective: policy.objective(),
        policy,
        segments: None,
        diagnostics,
    })
}

/// One forward step of the battery-transmitter / no-battery-receiver solver.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPass {
    /// Zero-based slot fixed by this step.
    pub slot: usize,
    /// Receiver levels from the floor-constrained fill over `slot..N`.
    pub receiver_levels: Vec<f64>,
    /// Rate the receiver could decode in `slot` at that level.
    pub decode_rate: f64,
    /// Transmit power the capped transmitter fill assigns to `slot`.
    pub tx_power: f64,
    pub rate: f64,
    /// Helper energy (helper units) held back from `slot` for `slot + 1`.
    pub saved_helper: f64,
    /// Transmitter energy carried into the next slot.
    pub tx_carry: f64,
}

/// Transmitter with battery, receiver without.
pub fn solve_s3(trace: &EnergyTrace, cost: &CostModel) -> Result<Solution, SolveError> {
    solve_s3_traced(trace, cost).map(|(s, _)| s)
}

/// [`solve_s3`] together with the per-slot forward steps.
///
/// Step `k` runs the floor-constrained receiver fill on slots `k..N` with the
/// helper energy still unassigned, caps the transmitter fill by the resulting
/// decodable rates, and keeps the rate that fill gives slot `k`. Helper energy
/// that slot `k` does not need for that rate is held back for slot `k + 1`.
/// After each receiver fill the remaining helper energy is re-expressed as the
/// transfers that fill implies, so every later step starts from a causal
/// schedule. The final rates come from one capped transmitter fill over the
/// receiver budgets those transfers produce.
pub fn solve_s3_traced(trace: &EnergyTrace, cost: &CostModel) -> Result<(Solution, Vec<StepPass>), SolveError> {
    check(trace)?;
    let n = trace.n_slots;
    let alpha = trace.alpha;
    let rx = &trace.rx_energy;
    let mut helper = trace.helper_energy.clone();
    let mut passes = Vec::with_capacity(n);
    let mut carry = 0.0;
    let mut stranded = 0.0;

    for k in 0..n {
        let (levels, state) = exclusion_loop(&rx[k..], &helper[k..], alpha, None, false);
        let caps: Vec<f64> = levels.iter().map(|&s| cost.rate_inv(cost.decode_inv(s)).max(0.0)).collect();
        let mut budgets = trace.tx_energy[k..].to_vec();
        budgets[0] += carry;
        let fill = capped_waterfill(&budgets, &caps)?;
        let tx_power = fill.per_slot[0];
        carry = (budgets[0] - tx_power).max(0.0);
        let rate = cost.rate(tx_power);
        let decode_rate = cost.decode_inv(levels[0]);

        let mut saved = 0.0;
        if alpha > 0.0 {
            for (offset, h) in helper[k..].iter_mut().enumerate() {
                *h = if state.excluded.binary_search(&offset).is_ok() {
                    0.0
                } else {
                    ((levels[offset] - rx[k + offset]) / alpha).max(0.0)
                };
            }
            let needed = cost.decode_cost(rate);
            let excess = if rx[k] < needed {
                cost.decode_cost(decode_rate) - needed
            } else {
                cost.decode_cost(decode_rate) - rx[k]
            };
            saved = (excess.max(0.0) / alpha).min(helper[k]);
            helper[k] -= saved;
            if k + 1 < n {
                helper[k + 1] += saved;
            } else {
                stranded += saved;
            }
        }
        passes.push(StepPass { slot: k, receiver_levels: levels, decode_rate, tx_power, rate, saved_helper: saved, tx_carry: carry });
    }

    let caps: Vec<f64> = rx
        .iter()
        .zip(&helper)
        .map(|(e, h)| cost.rate_inv(cost.decode_inv(e + alpha * h)).max(0.0))
        .collect();
    let fill = capped_waterfill(&trace.tx_energy, &caps)?;
    let policy = no_battery_receiver_policy(&fill.per_slot, trace, cost)?;
    let mut diagnostics = Vec::new();
    if stranded > 0.0 {
        diagnostics.push(format!("{stranded} helper units left unused after the last slot"));
    }
    let solution = Solution {
        scenario: ScenarioKind::S3BatteryTxNoBatteryRx,
        objective: policy.objective(),
        policy,
        segments: Some(fill),
        diagnostics,
    };
    Ok((solution, passes))
}

/// Neither node has a battery. The transmitter harvest caps the receiver
/// level of each slot at the energy needed to decode `g(E_i)`.
pub fn solve_s4(trace: &EnergyTrace, cost: &CostModel) -> Result<Solution, SolveError> {
    check(trace)?;
    let caps: Vec<f64> = trace.tx_energy.iter().map(|&e| cost.decode_cost(cost.rate(e))).collect();
    let (levels, state) = min_capped_waterfill(&trace.rx_energy, &trace.helper_energy, trace.alpha, &caps)?;
    let tx_power: Vec<f64> = levels
        .iter()
        .zip(&trace.tx_energy)
        .map(|(&s, &e)| {
            let rate = cost.rate(e).min(cost.decode_inv(s));
            cost.rate_inv(rate).clamp(0.0, e)
        })
        .collect();
    let policy = no_battery_receiver_policy(&tx_power, trace, cost)?;
    let mut diagnostics = Vec::new();
    if !state.floor_above_cap.is_empty() {
        let slots: Vec<usize> = state.floor_above_cap.iter().map(|i| i + 1).collect();
        diagnostics.push(format!(
            "receiver harvest exceeds what the transmitter can use in slots {slots:?}; receiver pinned to its harvest there"
        ));
    }
    if state.dropped_helper > 0.0 {
        diagnostics.push(format!("{} helper units stranded in excluded final slots", state.dropped_helper));
    }
    Ok(Solution {
        scenario: ScenarioKind::S4NoBatteries,
        objective: policy.objective(),
        policy,
        segments: None,
        diagnostics,
    })
}

/// Policy for a receiver without battery: it burns at least its own harvest
/// and draws on the helper only for the remainder.
fn no_battery_receiver_policy(tx_power: &[f64], trace: &EnergyTrace, cost: &CostModel) -> Result<Policy, SolveError> {
    let rate: Vec<f64> = tx_power.iter().map(|&p| cost.rate(p)).collect();
    let rx_consumption: Vec<f64> =
        rate.iter().zip(&trace.rx_energy).map(|(&r, &e)| cost.decode_cost(r).max(e)).collect();
    let helper_transfer = transfer_schedule(&rx_consumption, &trace.rx_energy, &trace.helper_energy, trace.alpha)?;
    Ok(Policy { tx_power: tx_power.to_vec(), rate, rx_consumption, helper_transfer })
}

/// Helper transfers `δ_i = (q_i − Ē_i)⁺ / α` that deliver the receiver
/// consumption `q`, checked against helper causality.
///
/// A receiver without a battery cannot bank early transfers, so a demand that
/// violates causality has no later-shifted repair; the first violating prefix
/// is reported instead.
pub fn transfer_schedule(q: &[f64], rx_energy: &[f64], helper_energy: &[f64], alpha: f64) -> Result<Vec<f64>, TransferError> {
    let n = q.len();
    for len in [rx_energy.len(), helper_energy.len()] {
        if len != n {
            return Err(TransferError::LengthMismatch { expected: n, found: len });
        }
    }
    let demand: Vec<f64> = q.iter().zip(rx_energy).map(|(q, e)| (q - e).max(0.0)).collect();
    if alpha == 0.0 {
        let tol = |i: usize| 1e-12 * (1.0 + rx_energy[i]);
        return match (0..n).find(|&i| demand[i] > tol(i)) {
            Some(slot) => Err(TransferError::NoTransferLink { slot }),
            None => Ok(vec![0.0; n]),
        };
    }
    let delta: Vec<f64> = demand.iter().map(|d| d / alpha).collect();
    let total_demand: f64 = delta.iter().sum();
    let total_helper: f64 = helper_energy.iter().sum();
    if total_demand > total_helper + 1e-9 * (1.0 + total_helper) {
        return Err(TransferError::InsufficientHelper { demand: total_demand, available: total_helper });
    }
    let (mut cum_delta, mut cum_helper) = (0.0, 0.0);
    for j in 0..n {
        cum_delta += delta[j];
        cum_helper += helper_energy[j];
        if cum_delta > cum_helper + 1e-9 * (1.0 + cum_helper) {
            return Err(TransferError::PrefixViolation { prefix: j + 1, demand: cum_delta, available: cum_helper });
        }
    }
    Ok(delta)
}
