//! Command-line front end: trace files in, solve reports and plot series out.

pub mod app;
pub mod plot;
pub mod report;
pub mod trace_file;

pub use app::{run, Cli, Command, Exit, SolveArgs};
pub use report::SolveReport;
pub use trace_file::{parse_trace, TraceFile, TraceFileError};
