//! Command line front end.
//!
//! Exit codes: 0 on success, 1 on usage, validation or hypothesis errors and
//! failed identity checks, 2 on I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::conditions::ConditionReport;
use crate::harness::{
    emit_report, format_table, geometric_taus, kernel_verify, ray_scan, run_sweep, write_csv, write_json,
    ReportFormat, SweepReport,
};
use crate::problem::{Problem, ProblemSpec};
use crate::solver::{certify, minimize};
use crate::space::SpectralElement;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "fracvar", version, about = "Variational solver for fractional boundary-value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the discrete fractional operators against their identities.
    KernelVerify {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
    /// Evaluate the existence conditions for a problem's nonlinearity.
    Conditions {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the energy on the sublevel set at one μ.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve at geometrically spaced μ and grade the verdicts.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu_min: f64,
        #[arg(long)]
        mu_max: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the energy along the ray τ·A·e_mode.
    RayScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1)]
        mode: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_min: f64,
        #[arg(long, default_value_t = 100.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 25)]
        tau_count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::KernelVerify { alpha, t_end, n } => {
            let checks = kernel_verify(alpha, t_end, n)?;
            print!("{}", format_table(&checks));
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                eprintln!("{failed} identity check(s) failed");
                return Ok(1);
            }
        }
        Command::Conditions { config, out } => {
            let spec = ProblemSpec::load(&config)?;
            let problem = spec.build()?;
            eprint!("{}", conditions_table(problem.conditions()));
            write_json_to(out.as_deref(), problem.conditions())?;
        }
        Command::Solve { config, mu, out, seed } => {
            let problem = load_problem(&config, seed)?;
            let record = minimize(&problem, mu, problem.solver_config())?;
            let cert = certify(&record, &problem, problem.conditions());
            eprintln!(
                "μ = {mu}: converged = {}, J = {:.6e}, ‖u‖_∞ = {:.6e}, residual = {:.3e}",
                record.converged, record.energy, record.norm_inf, record.residual
            );
            eprintln!("certificates: {cert:?}");
            write_json_to(out.as_deref(), &record)?;
        }
        Command::Sweep { config, mu_min, mu_max, count, out, format, seed } => {
            let problem = load_problem(&config, seed)?;
            let report = run_sweep(&problem, mu_min, mu_max, count)?;
            eprint!("{}", sweep_summary(&report));
            match out {
                Some(path) => {
                    emit_report(&report, &path, format)?;
                }
                None => {
                    let stdout = std::io::stdout().lock();
                    match format {
                        ReportFormat::Csv => write_csv(&report, stdout),
                        ReportFormat::Json => write_json(&report, stdout),
                    }
                    .map_err(|e| Error::io("<stdout>", e))?;
                }
            }
        }
        Command::RayScan { config, mu, mode, amplitude, tau_min, tau_max, tau_count, out } => {
            let problem = load_problem(&config, None)?;
            let k_max = problem.space().k_max();
            if mode == 0 || mode > k_max {
                return Err(Error::validation(format!("mode {mode} outside 1..={k_max}")));
            }
            let direction = SpectralElement::mode(k_max, mode).scaled(amplitude);
            let scan = ray_scan(&problem, mu, &direction, &geometric_taus(tau_min, tau_max, tau_count)?)?;
            eprintln!(
                "fitted exponent {:.4}, coefficient {:.4e}, unbounded below: {}",
                scan.fitted_exponent, scan.fitted_coefficient, scan.unbounded_below
            );
            write_json_to(out.as_deref(), &scan)?;
        }
    }
    Ok(0)
}

fn load_problem(config: &Path, seed: Option<u64>) -> Result<Problem> {
    let mut spec = ProblemSpec::load(config)?;
    if let Some(seed) = seed {
        spec.solver.seed = seed;
    }
    spec.build()
}

fn write_json_to<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::validation(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn conditions_table(c: &ConditionReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.7}"));
    [
        format!("nonlinearity   {}", c.nonlinearity),
        format!("alpha, T       {}, {}", c.alpha, c.t_end),
        format!("kappa_alpha    {:.7}", c.kappa_alpha),
        format!("sup ratio      {:.7}", c.sup_ratio),
        format!("gamma_bar      {}", opt(c.gamma_bar)),
        format!("mu*            {:.7}", c.mu_star),
        format!("Lambda right   {}", if c.lambda_unbounded { "+inf".to_string() } else { opt(c.lambda_right_endpoint) }),
        format!("(S_G)          {:?}", c.sg_holds),
        format!("(S_0)          {:?}", c.s0_holds),
        format!("(S_inf)        {:?}", c.sinf_holds),
        format!("(ZeRo)         {:?}", c.zero_holds),
    ]
    .join("\n")
        + "\n"
}

fn sweep_summary(r: &SweepReport) -> String {
    let mut out = String::new();
    for (rec, cert) in r.records.iter().zip(&r.certificates) {
        out += &format!(
            "μ = {:.6e}  J = {:+.6e}  ‖u‖_α = {:.6e}  converged = {}  certified = {}\n",
            rec.mu,
            rec.energy,
            rec.norm_alpha,
            rec.converged,
            cert.all_hold()
        );
    }
    out += &format!(
        "negative: {}  strictly decreasing: {}  norm decay: {}{}\n",
        r.negativity_verdict,
        r.monotonicity_verdict,
        r.norm_decay_verdict,
        if r.trivial_datum { "  (trivial datum: every record is u = 0)" } else { "" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> i32 {
        cli_main(std::iter::once("fracvar").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(code(&["frobnicate"]), 1);
        assert_eq!(code(&["solve", "--config", "x.json"]), 1);
        assert_eq!(code(&["sweep", "--bogus"]), 1);
        assert_eq!(code(&["--help"]), 0);
    }

    #[test]
    fn missing_config_exits_two() {
        assert_eq!(code(&["conditions", "--config", "/nonexistent/problem.json"]), 2);
    }

    #[test]
    fn kernel_verify_exit_codes() {
        assert_eq!(code(&["kernel-verify", "--alpha", "0.75", "--n", "256"]), 0);
        assert_eq!(code(&["kernel-verify", "--alpha", "0.3"]), 1);
    }
}
