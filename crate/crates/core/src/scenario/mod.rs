//! Batch front end: JSON scenario configs, the evolve and curvature runners,
//! the randomized verification sweep, and their CSV/JSON outputs.

mod config;
mod curvature_run;
mod evolve;
mod report;
mod verify;

#[cfg(test)]
mod tests;

pub use config::{
    load_config, parse_config, CurvatureSpec, FrameSpec, HamiltonianSpec, Outputs, PictureSpec, ScenarioConfig,
    Thresholds, DOMAIN_PADDING,
};
pub use curvature_run::{run_curvature, write_curvature, CurvatureOutcome, FlatFrameSummary, FlatnessSummary};
pub use evolve::run_evolve;
pub use report::{write_report, write_traces, Check, InvariantReport, ObservableMeans, TraceRow, TraceTable};
pub use verify::{run_verify, run_verify_with, VerifyOptions};
