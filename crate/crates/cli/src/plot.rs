//! Step-series CSV for external plotting.
//!
//! Columns are `series,boundary,level`. Every series is piecewise constant on
//! the slots: slot `i` (one-based) contributes the points `(i-1, v)` and
//! `(i, v)`. Cumulative series hold the running total up to and including the
//! slot.

use std::io::Write;

use ehcoop_core::{EnergyTrace, Policy};

fn running(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Named per-slot series written by [`write_plot_data`].
pub fn series(trace: &EnergyTrace, policy: &Policy) -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("tx_power", policy.tx_power.clone()),
        ("rx_consumption", policy.rx_consumption.clone()),
        ("tx_budget_cumulative", running(trace.tx_energy.iter().copied())),
        ("tx_used_cumulative", running(policy.tx_power.iter().copied())),
        ("rx_budget_cumulative", running(trace.virtual_rx_energy().into_iter())),
        ("rx_used_cumulative", running(policy.rx_consumption.iter().copied())),
        ("helper_budget_cumulative", running(trace.helper_energy.iter().copied())),
        ("helper_used_cumulative", running(policy.helper_transfer.iter().copied())),
    ]
}

pub fn write_plot_data<W: Write>(out: W, trace: &EnergyTrace, policy: &Policy) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "boundary", "level"])?;
    for (name, values) in series(trace, policy) {
        for (i, v) in values.iter().enumerate() {
            w.serialize((name, i, v))?;
            w.serialize((name, i + 1, v))?;
        }
    }
    w.flush()?;
    Ok(())
}
