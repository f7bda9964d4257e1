//! Solve reports: a JSON form that re-parses to identical values, and a
//! plain-text table for the terminal.

use std::fmt::Write as _;

use ehcoop_core::{EnergyTrace, SlackReport, Solution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scenario: String,
    pub description: String,
    pub objective_bits: f64,
    pub units: Units,
    pub slots: Vec<SlotRow>,
    pub constraints: Vec<ConstraintRow>,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub diagnostics: Vec<String>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub energy: String,
    pub rate: String,
}

impl Default for Units {
    fn default() -> Self {
        Units { energy: "energy units".into(), rate: "bits/use".into() }
    }
}

/// One slot; `i` is one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRow {
    pub i: usize,
    pub tx_energy: f64,
    pub rx_energy: f64,
    pub helper_energy: f64,
    pub tx_power: f64,
    pub rate: f64,
    pub rx_consumption: f64,
    pub helper_transfer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub name: String,
    pub min_slack: f64,
    /// One-based prefix length or slot of the smallest slack.
    pub at: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// Feasibility plus an independent re-solve.
    Oracle,
    /// Feasibility only; the horizon is too long to re-solve.
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub verdict: String,
    pub mode: VerifyMode,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_upper_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }
}

impl SolveReport {
    pub fn new(trace: &EnergyTrace, solution: &Solution, slack: &SlackReport, wall_time_ms: f64) -> Self {
        let p = &solution.policy;
        let slots = (0..trace.n_slots)
            .map(|i| SlotRow {
                i: i + 1,
                tx_energy: trace.tx_energy[i],
                rx_energy: trace.rx_energy[i],
                helper_energy: trace.helper_energy[i],
                tx_power: p.tx_power[i],
                rate: p.rate[i],
                rx_consumption: p.rx_consumption[i],
                helper_transfer: p.helper_transfer[i],
            })
            .collect();
        let constraints = slack
            .entries
            .iter()
            .map(|e| ConstraintRow { name: e.kind.name().to_string(), min_slack: e.min_slack, at: e.worst + 1 })
            .collect();
        SolveReport {
            scenario: solution.scenario.code().to_string(),
            description: solution.scenario.description().to_string(),
            objective_bits: solution.objective,
            units: Units::default(),
            slots,
            constraints,
            feasible: slack.is_feasible(),
            verification: None,
            diagnostics: solution.diagnostics.clone(),
            wall_time_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}: {}", self.scenario, self.description);
        let _ = writeln!(out, "objective: {:.6} bits/use summed over {} slots", self.objective_bits, self.slots.len());
        let _ = writeln!(
            out,
            "\n{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "i", "E", "E_rx", "H", "p", "r", "q", "delta"
        );
        for s in &self.slots {
            let _ = writeln!(
                out,
                "{:>4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                s.i, s.tx_energy, s.rx_energy, s.helper_energy, s.tx_power, s.rate, s.rx_consumption, s.helper_transfer
            );
        }
        let _ = writeln!(out, "(energies in {}, rates in {})", self.units.energy, self.units.rate);
        let _ = writeln!(out, "\nconstraints (smallest slack):");
        for c in &self.constraints {
            let _ = writeln!(out, "  {:<32} {:>12.3e} at {}", c.name, c.min_slack, c.at);
        }
        let _ = writeln!(out, "feasible: {}", if self.feasible { "yes" } else { "NO" });
        if let Some(v) = &self.verification {
            match (v.mode, v.oracle_objective) {
                (VerifyMode::Oracle, Some(o)) => {
                    let _ = writeln!(out, "verification: {} (oracle objective {o:.6}, tolerance {:.1e})", v.verdict, v.tolerance.unwrap_or(0.0));
                }
                _ => {
                    let _ = writeln!(out, "verification: {} (feasibility only)", v.verdict);
                }
            }
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        let _ = writeln!(out, "solver time: {:.3} ms", self.wall_time_ms);
        out
    }
}
