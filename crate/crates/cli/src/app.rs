//! Argument parsing and the `solve` command.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ehcoop_core::{brute_force, check_feasible, solve, ConstraintSystem, OracleError, ScenarioKind, MAX_ORACLE_SLOTS};

use crate::plot::write_plot_data;
use crate::report::{SolveReport, Verification, VerifyMode};
use crate::trace_file::parse_trace;

/// Oracle resolution used by `--verify`.
pub const VERIFY_STEP: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "ehcoop", version, about = "Offline rate maximisation for an energy-harvesting link with a helper node")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario for a trace file.
    Solve(SolveArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    /// JSON trace file.
    #[arg(long)]
    pub input: PathBuf,
    /// Re-solve independently and compare (feasibility only beyond 5 slots).
    #[arg(long)]
    pub verify: bool,
    /// Seed for the verification oracle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write step series for plotting (CSV) here.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
}

impl From<Scenario> for ScenarioKind {
    fn from(s: Scenario) -> Self {
        match s {
            Scenario::S1 => ScenarioKind::S1BothBatteries,
            Scenario::S2 => ScenarioKind::S2FullPowerTxNoBatteryRx,
            Scenario::S3 => ScenarioKind::S3BatteryTxNoBatteryRx,
            Scenario::S4 => ScenarioKind::S4NoBatteries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    /// Infeasible result or failed verification.
    Failed = 1,
    /// Unreadable or invalid input, or an output path that cannot be written.
    Input = 2,
}

pub fn run(cli: &Cli) -> Exit {
    match &cli.command {
        Command::Solve(args) => run_solve(args),
    }
}

fn input_error(msg: impl std::fmt::Display) -> Exit {
    eprintln!("error: {msg}");
    Exit::Input
}

pub fn run_solve(args: &SolveArgs) -> Exit {
    let kind = ScenarioKind::from(args.scenario);
    let text = match fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => return input_error(format!("cannot read {}: {e}", args.input.display())),
    };
    let (trace, cost) = match parse_trace(&text) {
        Ok(v) => v,
        Err(e) => return input_error(format!("{}:\n{e}", args.input.display())),
    };

    let start = Instant::now();
    let solution = solve(kind, &trace, &cost);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let solution = match solution {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: solver failed: {e}");
            return Exit::Failed;
        }
    };

    let system = ConstraintSystem::new(kind, trace.clone(), cost);
    let slack = check_feasible(&solution.policy, &system).expect("solver output has one entry per slot");
    let mut report = SolveReport::new(&trace, &solution, &slack, wall_time_ms);
    if args.verify {
        report.verification = Some(verify(&system, &report, args.seed));
    }

    print!("{}", report.render());
    if let Some(path) = &args.output {
        if let Err(e) = fs::write(path, report.to_json()) {
            return input_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.plot_data {
        if let Err(e) = write_plot(path, &trace, &solution.policy) {
            return input_error(format!("cannot write {}: {e}", path.display()));
        }
    }

    let verified = report.verification.as_ref().is_none_or(Verification::passed);
    if report.feasible && verified {
        Exit::Ok
    } else {
        Exit::Failed
    }
}

fn write_plot(path: &Path, trace: &ehcoop_core::EnergyTrace, policy: &ehcoop_core::Policy) -> Result<(), Box<dyn std::error::Error>> {
    let file = File::create(path)?;
    write_plot_data(BufWriter::new(file), trace, policy)?;
    Ok(())
}

fn verify(system: &ConstraintSystem, report: &SolveReport, seed: u64) -> Verification {
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" }.to_string();
    if system.n_slots() > MAX_ORACLE_SLOTS {
        eprintln!(
            "warning: --verify re-solves at most {MAX_ORACLE_SLOTS} slots; checking feasibility only for {} slots",
            system.n_slots()
        );
        return Verification {
            verdict: verdict(report.feasible),
            mode: VerifyMode::Feasibility,
            seed,
            oracle_objective: None,
            oracle_upper_bound: None,
            tolerance: None,
        };
    }
    let result = match brute_force(system, VERIFY_STEP, seed) {
        Ok(r) => r,
        Err(OracleError::NotConverged(best)) => {
            eprintln!("warning: oracle stopped before reaching its target gap; comparing against its best point");
            *best
        }
        Err(e) => {
            eprintln!("warning: oracle failed ({e}); checking feasibility only");
            return Verification {
                verdict: verdict(report.feasible),
                mode: VerifyMode::Feasibility,
                seed,
                oracle_objective: None,
                oracle_upper_bound: None,
                tolerance: None,
            };
        }
    };
    let tolerance = VERIFY_STEP.max(VERIFY_STEP * result.objective.abs());
    let agrees = (report.objective_bits - result.objective).abs() <= tolerance;
    Verification {
        verdict: verdict(report.feasible && agrees),
        mode: VerifyMode::Oracle,
        seed,
        oracle_objective: Some(result.objective),
        oracle_upper_bound: Some(result.upper_bound),
        tolerance: Some(tolerance),
    }
}
