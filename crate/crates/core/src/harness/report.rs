//! CSV, JSON and plot-data emission of sweep reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::SweepReport;
use crate::{Error, Result};

/// Column order of the sweep CSV.
pub const CSV_COLUMNS: [&str; 9] = [
    "mu",
    "norm_alpha",
    "norm_inf",
    "phi",
    "psi",
    "energy",
    "residual",
    "converged",
    "restarts_used",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Write `report` to `out` in `format` together with the plot-data companion
/// (see [`plot_data_path`]). Returns the paths written.
pub fn emit_report(report: &SweepReport, out: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    match format {
        ReportFormat::Csv => write_csv(report, &mut w),
        ReportFormat::Json => write_json(report, &mut w),
    }
    .and_then(|()| w.flush())
    .map_err(|e| Error::io(out, e))?;

    let plot = plot_data_path(out);
    let file = File::create(&plot).map_err(|e| Error::io(&plot, e))?;
    let mut w = BufWriter::new(file);
    write_plot_data(report, &mut w).and_then(|()| w.flush()).map_err(|e| Error::io(&plot, e))?;
    Ok(vec![out.to_path_buf(), plot])
}

/// `sweep.csv` → `sweep.plot.dat`.
pub fn plot_data_path(out: &Path) -> PathBuf {
    out.with_extension("plot.dat")
}

/// Floats use the shortest representation that round-trips.
pub fn write_csv(report: &SweepReport, w: impl Write) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(CSV_COLUMNS)?;
    for r in &report.records {
        csv.write_record([
            format!("{:?}", r.mu),
            format!("{:?}", r.norm_alpha),
            format!("{:?}", r.norm_inf),
            format!("{:?}", r.phi),
            format!("{:?}", r.psi),
            format!("{:?}", r.energy),
            format!("{:?}", r.residual),
            r.converged.to_string(),
            r.restarts_used.to_string(),
        ])?;
    }
    csv.flush()
}

pub fn write_json(report: &SweepReport, mut w: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)
}

/// Two gnuplot data blocks: `μ energy`, then `μ norm_alpha`.
pub fn write_plot_data(report: &SweepReport, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# mu energy")?;
    for r in &report.records {
        writeln!(w, "{:.17e} {:.17e}", r.mu, r.energy)?;
    }
    writeln!(w, "\n\n# mu norm_alpha")?;
    for r in &report.records {
        writeln!(w, "{:.17e} {:.17e}", r.mu, r.norm_alpha)?;
    }
    Ok(())
}

pub fn read_json(path: &Path) -> Result<SweepReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_sweep;
    use crate::nonlinearity::{Nonlinearity, NonlinearitySpec};
    use crate::problem::Problem;
    use crate::solver::SolverConfig;
    use crate::space::SpaceConfig;

    fn report() -> SweepReport {
        let nl = Nonlinearity::from_spec(&NonlinearitySpec::PowerSum { r: 1.5, s: 3.0 }).unwrap();
        let p = Problem::new(SpaceConfig::new(0.75, 1.0, 256, 16).unwrap(), nl, SolverConfig::default()).unwrap();
        run_sweep(&p, 0.05, 0.5, 8).unwrap()
    }

    #[test]
    fn csv_has_header_and_one_row_per_record() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep.csv");
        let rep = report();
        let written = emit_report(&rep, &out, ReportFormat::Csv).unwrap();
        assert_eq!(written[1], dir.path().join("sweep.plot.dat"));
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 9);
        let mu: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(mu, 0.05);
        let plot = std::fs::read_to_string(&written[1]).unwrap();
        assert_eq!(plot.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count(), 16);
    }

    #[test]
    fn json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep.json");
        let rep = report();
        emit_report(&rep, &out, ReportFormat::Json).unwrap();
        assert_eq!(read_json(&out).unwrap(), rep);
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut rep = report();
        rep.records.clear();
        rep.mu_values.clear();
        rep.certificates.clear();
        let mut buf = Vec::new();
        write_csv(&rep, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_COLUMNS.join(",") + "\n");
        let mut buf = Vec::new();
        write_json(&rep, &mut buf).unwrap();
        let back: SweepReport = serde_json::from_slice(&buf).unwrap();
        assert!(back.records.is_empty());
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = emit_report(&report(), Path::new("/nonexistent/dir/sweep.csv"), ReportFormat::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/dir/sweep.csv"));
    }
}
