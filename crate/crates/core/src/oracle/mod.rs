//! Independent verification of scenario solutions.
//!
//! [`check_feasible`] evaluates every constraint of a scenario directly on a
//! [`Policy`]. [`brute_force`] solves the same constraint system from scratch
//! for small horizons with explicit helper-transfer variables: the concave
//! rate sum is replaced by an outer approximation of tangent cuts, each
//! approximation is an LP, and cuts are added at the LP optimum until the
//! LP bound and the true objective of the LP point agree to the requested
//! resolution. Every iterate is feasible, so the returned objective is
//! achievable and the returned upper bound certifies it.

mod simplex;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CostModel, EnergyTrace, Policy};
use crate::scenarios::ScenarioKind;
use simplex::{LinearProgram, LpError};

/// Slack below which a constraint counts as violated.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Largest horizon [`brute_force`] accepts.
pub const MAX_ORACLE_SLOTS: usize = 5;

const MAX_ROUNDS: usize = 400;

/// Cuts are added wherever the LP overestimates a term by more than this.
/// Independent of `grid_step`, so a finer step only runs the same sequence of
/// rounds for longer and never returns a worse point.
const CUT_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// One inequality per prefix `1..=j`.
    Prefix,
    /// One inequality per slot.
    PerSlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtMost,
    AtLeast,
}

/// The constraint families that make up the four scenario problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `Σ_{i≤j} g⁻¹(r_i) ≤ Σ_{i≤j} E_i`
    TxCausality,
    /// `r_j ≤ g(E_j)`
    TxNoBattery,
    /// Receiver decoding energy up to `j` within `Σ_{i≤j} Ē_i + α·δ_i`.
    RxCausality,
    /// `Σ_{i≤j} δ_i ≤ Σ_{i≤j} H_i`
    HelperCausality,
    /// `q_j ≥ Ē_j`: a receiver without battery spends its whole harvest.
    RxNoBattery,
    /// `r_j ≤ φ⁻¹(q_j)`: the receiver spends enough to decode the rate sent.
    DecodeCoversRate,
}

impl ConstraintKind {
    pub fn shape(self) -> Shape {
        match self {
            ConstraintKind::TxCausality | ConstraintKind::RxCausality | ConstraintKind::HelperCausality => Shape::Prefix,
            _ => Shape::PerSlot,
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            ConstraintKind::RxNoBattery => Sense::AtLeast,
            _ => Sense::AtMost,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::TxCausality => "transmitter energy causality",
            ConstraintKind::TxNoBattery => "transmitter saving inability",
            ConstraintKind::RxCausality => "receiver energy causality",
            ConstraintKind::HelperCausality => "helper energy causality",
            ConstraintKind::RxNoBattery => "receiver saving inability",
            ConstraintKind::DecodeCoversRate => "decoding covers rate",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scenario's full constraint set over a given trace and cost model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub scenario: ScenarioKind,
    pub trace: EnergyTrace,
    pub cost: CostModel,
    pub constraints: Vec<ConstraintKind>,
}

impl ConstraintSystem {
    pub fn new(scenario: ScenarioKind, trace: EnergyTrace, cost: CostModel) -> Self {
        use ConstraintKind::*;
        let constraints = match scenario {
            ScenarioKind::S1BothBatteries => vec![TxCausality, RxCausality, HelperCausality],
            ScenarioKind::S2FullPowerTxNoBatteryRx => vec![RxNoBattery, RxCausality, HelperCausality],
            ScenarioKind::S3BatteryTxNoBatteryRx => {
                vec![TxCausality, RxCausality, HelperCausality, RxNoBattery, DecodeCoversRate]
            }
            ScenarioKind::S4NoBatteries => vec![TxNoBattery, RxCausality, HelperCausality, RxNoBattery, DecodeCoversRate],
        };
        ConstraintSystem { scenario, trace, cost, constraints }
    }

    pub fn n_slots(&self) -> usize {
        self.trace.n_slots
    }
}

/// Signed slacks of one constraint family; negative means violated.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSlack {
    pub kind: ConstraintKind,
    /// One entry per prefix length or per slot, in slot order.
    pub slacks: Vec<f64>,
    pub min_slack: f64,
    /// Zero-based index of the smallest slack.
    pub worst: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlackReport {
    pub scenario: ScenarioKind,
    pub entries: Vec<ConstraintSlack>,
    /// Largest violation of the policy's own well-formedness: negative entries
    /// and rates that disagree with the powers or energies they come from.
    pub domain_error: f64,
}

impl SlackReport {
    pub fn min_slack(&self) -> f64 {
        self.entries.iter().map(|e| e.min_slack).fold(f64::INFINITY, f64::min)
    }

    pub fn is_feasible(&self) -> bool {
        self.is_feasible_within(FEASIBILITY_TOL)
    }

    pub fn is_feasible_within(&self, tol: f64) -> bool {
        self.min_slack() >= -tol && self.domain_error <= tol
    }

    pub fn entry(&self, kind: ConstraintKind) -> Option<&ConstraintSlack> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    LengthMismatch { expected: usize, found: usize },
    TooManySlots(usize),
    InvalidGridStep(f64),
    /// The cutting-plane loop hit its round limit; best point so far attached.
    NotConverged(Box<OracleResult>),
    Lp(&'static str),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::LengthMismatch { expected, found } => {
                write!(f, "policy length mismatch: expected {expected}, found {found}")
            }
            OracleError::TooManySlots(n) => write!(f, "oracle supports at most {MAX_ORACLE_SLOTS} slots, got {n}"),
            OracleError::InvalidGridStep(s) => write!(f, "grid step must be positive, got {s}"),
            OracleError::NotConverged(best) => write!(
                f,
                "oracle did not converge after {} rounds (best {}, bound {})",
                best.iterations, best.objective, best.upper_bound
            ),
            OracleError::Lp(msg) => write!(f, "LP failure: {msg}"),
        }
    }
}

/// Evaluates every constraint of `system` on `policy`.
///
/// For receivers without battery the decoding rate is `r̄_i = φ⁻¹(q_i)`;
/// the per-slot rate must not exceed it.
pub fn check_feasible(policy: &Policy, system: &ConstraintSystem) -> Result<SlackReport, OracleError> {
    let n = system.n_slots();
    for len in [policy.tx_power.len(), policy.rate.len(), policy.rx_consumption.len(), policy.helper_transfer.len()] {
        if len != n {
            return Err(OracleError::LengthMismatch { expected: n, found: len });
        }
    }
    let trace = &system.trace;
    let cost = &system.cost;
    let alpha = trace.alpha;
    let receiver_draw: Vec<f64> = match system.scenario {
        ScenarioKind::S1BothBatteries => policy.tx_power.iter().map(|&p| cost.decode_cost(cost.rate(p))).collect(),
        _ => policy.rx_consumption.iter().map(|&q| cost.decode_cost(cost.decode_inv(q))).collect(),
    };

    let prefix = |lhs: &mut dyn FnMut(usize) -> f64, rhs: &mut dyn FnMut(usize) -> f64| -> Vec<f64> {
        let (mut l, mut r) = (0.0, 0.0);
        (0..n)
            .map(|j| {
                l += lhs(j);
                r += rhs(j);
                r - l
            })
            .collect()
    };

    let mut entries = Vec::with_capacity(system.constraints.len());
    for &kind in &system.constraints {
        let slacks: Vec<f64> = match kind {
            ConstraintKind::TxCausality => {
                prefix(&mut |i| cost.rate_inv(policy.rate[i]), &mut |i| trace.tx_energy[i])
            }
            ConstraintKind::TxNoBattery => (0..n).map(|j| cost.rate(trace.tx_energy[j]) - policy.rate[j]).collect(),
            ConstraintKind::RxCausality => prefix(&mut |i| receiver_draw[i], &mut |i| {
                trace.rx_energy[i] + alpha * policy.helper_transfer[i]
            }),
            ConstraintKind::HelperCausality => {
                prefix(&mut |i| policy.helper_transfer[i], &mut |i| trace.helper_energy[i])
            }
            ConstraintKind::RxNoBattery => (0..n).map(|j| receiver_draw[j] - trace.rx_energy[j]).collect(),
            ConstraintKind::DecodeCoversRate => {
                (0..n).map(|j| cost.decode_inv(policy.rx_consumption[j]) - policy.rate[j]).collect()
            }
        };
        let (worst, min_slack) = slacks
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, s)| if s < acc.1 { (j, s) } else { acc });
        entries.push(ConstraintSlack { kind, slacks, min_slack, worst });
    }

    let mut domain_error: f64 = 0.0;
    for v in [&policy.tx_power, &policy.rate, &policy.rx_consumption, &policy.helper_transfer] {
        for &x in v.iter() {
            domain_error = domain_error.max(if x.is_finite() { -x } else { f64::INFINITY });
        }
    }
    for i in 0..n {
        let implied = match system.scenario {
            ScenarioKind::S2FullPowerTxNoBatteryRx => cost.decode_inv(policy.rx_consumption[i]),
            _ => cost.rate(policy.tx_power[i]),
        };
        domain_error = domain_error.max((policy.rate[i] - implied).abs() / (1.0 + implied.abs()));
    }
    Ok(SlackReport { scenario: system.scenario, entries, domain_error })
}

/// Best policy found by [`brute_force`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Objective of `argmax`, which is feasible.
    pub objective: f64,
    /// No feasible policy does better than this.
    pub upper_bound: f64,
    pub argmax: Policy,
    pub grid_step: f64,
    /// Cutting-plane rounds (one LP each).
    pub iterations: usize,
}

impl OracleResult {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.objective
    }
}

/// Column layout of the oracle LP.
struct Layout {
    n: usize,
    /// Column of the variable the objective depends on: transmit power, or
    /// the receiver's draw above its harvest when the transmitter is ideal.
    main: usize,
    delta: usize,
    /// Receiver draw above harvest when it is separate from `main`.
    extra: Option<usize>,
    epigraph: usize,
    width: usize,
}

impl Layout {
    fn new(scenario: ScenarioKind, n: usize) -> Self {
        let extra = matches!(scenario, ScenarioKind::S3BatteryTxNoBatteryRx | ScenarioKind::S4NoBatteries);
        let main = 0;
        let delta = n;
        let extra_col = if extra { Some(2 * n) } else { None };
        let epigraph = if extra { 3 * n } else { 2 * n };
        Layout { n, main, delta, extra: extra_col, epigraph, width: epigraph + n }
    }

    /// Column holding the receiver's draw above harvest, if one exists.
    fn surplus(&self, scenario: ScenarioKind) -> Option<usize> {
        match scenario {
            ScenarioKind::S1BothBatteries => None,
            ScenarioKind::S2FullPowerTxNoBatteryRx => Some(self.main),
            _ => self.extra,
        }
    }
}

/// The per-slot concave objective term and its derivative.
fn term(system: &ConstraintSystem, slot: usize, x: f64) -> (f64, f64) {
    let cost = &system.cost;
    match system.scenario {
        ScenarioKind::S2FullPowerTxNoBatteryRx => {
            let q = system.trace.rx_energy[slot] + x;
            (cost.decode_inv(q), cost.decode_inv_slope(q))
        }
        _ => (cost.rate(x), cost.rate_slope(x)),
    }
}

/// Solves `system` to within `grid_step / 100` in objective, for at most
/// [`MAX_ORACLE_SLOTS`] slots. `seed` adds random initial cut points, so
/// results are reproducible per seed.
pub fn brute_force(system: &ConstraintSystem, grid_step: f64, seed: u64) -> Result<OracleResult, OracleError> {
    let n = system.n_slots();
    if n > MAX_ORACLE_SLOTS {
        return Err(OracleError::TooManySlots(n));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(OracleError::InvalidGridStep(grid_step));
    }
    let scenario = system.scenario;
    let trace = &system.trace;
    let alpha = trace.alpha;
    let layout = Layout::new(scenario, n);
    let tolerance = grid_step / 100.0;

    let base = base_rows(system, &layout);

    let total_tx: f64 = trace.tx_energy.iter().sum();
    let total_helper: f64 = trace.helper_energy.iter().sum();
    let upper: Vec<f64> = (0..n)
        .map(|i| match scenario {
            ScenarioKind::S1BothBatteries | ScenarioKind::S3BatteryTxNoBatteryRx => total_tx,
            ScenarioKind::S4NoBatteries => trace.tx_energy[i],
            ScenarioKind::S2FullPowerTxNoBatteryRx => alpha * total_helper,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: Vec<Vec<f64>> = upper
        .iter()
        .map(|&ub| {
            let mut pts = vec![0.0];
            let mut a = 0.25;
            while a < ub {
                pts.push(a);
                a *= 2.0;
            }
            if ub > 0.0 {
                pts.push(ub);
                for _ in 0..2 {
                    pts.push(rng.gen::<f64>() * ub);
                }
            }
            pts
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut upper_bound = f64::INFINITY;
    for round in 1..=MAX_ROUNDS {
        let mut objective = vec![0.0; layout.width];
        objective[layout.epigraph..].fill(1.0);
        let mut lp = LinearProgram::new(objective);
        for (coeffs, rhs) in &base {
            lp.add_row(coeffs.clone(), *rhs);
        }
        for (i, points) in cuts.iter().enumerate() {
            for &a in points {
                // t_i − f'(a)·x_i ≤ f(a) − f'(a)·a
                let (fa, slope) = term(system, i, a);
                let mut row = vec![0.0; layout.width];
                row[layout.epigraph + i] = 1.0;
                row[layout.main + i] = -slope;
                lp.add_row(row, (fa - slope * a).max(0.0));
            }
        }
        let sol = lp.solve().map_err(|e| match e {
            LpError::Unbounded => OracleError::Lp("unbounded relaxation"),
            LpError::IterationLimit => OracleError::Lp("iteration limit"),
            LpError::NegativeRhs(_) => OracleError::Lp("negative right-hand side"),
        })?;
        upper_bound = upper_bound.min(sol.value);

        let values: Vec<(f64, f64)> = (0..n).map(|i| term(system, i, sol.x[layout.main + i])).collect();
        let achieved: f64 = values.iter().map(|v| v.0).sum();
        if best.as_ref().is_none_or(|(b, _)| achieved > *b) {
            best = Some((achieved, sol.x.clone()));
        }
        let (best_value, best_x) = best.as_ref().unwrap();
        let result = || OracleResult {
            objective: *best_value,
            upper_bound,
            argmax: policy_from(system, &layout, best_x),
            grid_step,
            iterations: round,
        };
        if upper_bound - best_value <= tolerance {
            return Ok(result());
        }
        if round == MAX_ROUNDS {
            return Err(OracleError::NotConverged(Box::new(result())));
        }
        let mut added = false;
        for i in 0..n {
            let x = sol.x[layout.main + i];
            let gap = sol.x[layout.epigraph + i] - values[i].0;
            if gap > CUT_EPS && cuts[i].iter().all(|a| (a - x).abs() > 1e-13) {
                cuts[i].push(x);
                added = true;
            }
        }
        if !added {
            // cuts already sit at the LP point; the gap is rounding noise
            return Ok(result());
        }
    }
    unreachable!("loop returns on the last round")
}

/// Constraint rows shared by every cutting-plane round. Receiver draws above
/// harvest are their own non-negative variables, which encodes the
/// no-battery floor `q ≥ Ē` and keeps every right-hand side non-negative.
fn base_rows(system: &ConstraintSystem, layout: &Layout) -> Vec<(Vec<f64>, f64)> {
    let n = layout.n;
    let trace = &system.trace;
    let alpha = trace.alpha;
    let beta = system.cost.beta();
    let surplus = layout.surplus(system.scenario);
    let mut rows = Vec::new();
    let cum = |values: &[f64], j: usize| values[..=j].iter().sum::<f64>();
    for &kind in &system.constraints {
        for j in 0..n {
            let mut row = vec![0.0; layout.width];
            let rhs = match kind {
                ConstraintKind::TxCausality => {
                    row[layout.main..=layout.main + j].fill(1.0);
                    cum(&trace.tx_energy, j)
                }
                ConstraintKind::TxNoBattery => {
                    row[layout.main + j] = 1.0;
                    trace.tx_energy[j]
                }
                ConstraintKind::RxCausality => {
                    for i in 0..=j {
                        row[layout.delta + i] = -alpha;
                    }
                    match surplus {
                        // draw = β·p, harvest on the right
                        None => {
                            for i in 0..=j {
                                row[layout.main + i] = beta;
                            }
                            cum(&trace.rx_energy, j)
                        }
                        // draw = Ē + surplus, harvest cancels
                        Some(col) => {
                            for i in 0..=j {
                                row[col + i] = 1.0;
                            }
                            0.0
                        }
                    }
                }
                ConstraintKind::HelperCausality => {
                    row[layout.delta..=layout.delta + j].fill(1.0);
                    cum(&trace.helper_energy, j)
                }
                // encoded by non-negativity of the surplus column
                ConstraintKind::RxNoBattery => continue,
                ConstraintKind::DecodeCoversRate => {
                    // g(p) ≤ φ⁻¹(Ē + s)  ⇔  β·p − s ≤ Ē
                    row[layout.main + j] = beta;
                    row[layout.extra.expect("scenario has a surplus column") + j] = -1.0;
                    trace.rx_energy[j]
                }
            };
            rows.push((row, rhs));
        }
    }
    rows
}

fn policy_from(system: &ConstraintSystem, layout: &Layout, x: &[f64]) -> Policy {
    let n = layout.n;
    let cost = &system.cost;
    let rx = &system.trace.rx_energy;
    let main: Vec<f64> = x[layout.main..layout.main + n].iter().map(|v| v.max(0.0)).collect();
    let helper_transfer: Vec<f64> = x[layout.delta..layout.delta + n].iter().map(|v| v.max(0.0)).collect();
    match system.scenario {
        ScenarioKind::S1BothBatteries => {
            let rate: Vec<f64> = main.iter().map(|&p| cost.rate(p)).collect();
            let rx_consumption = rate.iter().map(|&r| cost.decode_cost(r)).collect();
            Policy { tx_power: main, rate, rx_consumption, helper_transfer }
        }
        ScenarioKind::S2FullPowerTxNoBatteryRx => {
            let rx_consumption: Vec<f64> = main.iter().zip(rx).map(|(s, e)| e + s).collect();
            let rate: Vec<f64> = rx_consumption.iter().map(|&q| cost.decode_inv(q)).collect();
            let tx_power = rate.iter().map(|&r| cost.rate_inv(r)).collect();
            Policy { tx_power, rate, rx_consumption, helper_transfer }
        }
        _ => {
            let extra = layout.extra.expect("scenario has a surplus column");
            let rate = main.iter().map(|&p| cost.rate(p)).collect();
            let rx_consumption = (0..n).map(|i| rx[i] + x[extra + i].max(0.0)).collect();
            Policy { tx_power: main, rate, rx_consumption, helper_transfer }
        }
    }
}
