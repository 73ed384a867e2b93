//! μ-sweeps, ray scans, report emission and the kernel identity suite.

mod ray;
mod report;
mod sweep;
mod verify;

pub use ray::{geometric_taus, ray_scan, RayPoint, RayScan, EXPONENT_TOL, FIT_POINTS};
pub use report::{emit_report, plot_data_path, read_json, write_csv, write_json, write_plot_data, ReportFormat, CSV_COLUMNS};
pub use sweep::{
    geometric_mus, run_sweep, SweepReport, MIN_SWEEP_POINTS, NORM_DECAY_RATIO, NORM_MONOTONE_TOL, STRICT_DECREASE_TOL,
};
pub use verify::{format_table, kernel_verify, IdentityCheck, COMPOSITION_TOL, EXACTNESS_FLOOR, IBP_TOL, POWER_RULE_TOL};
