//! Config-driven runner for the Bessel-determinant verification pipeline.
//!
//! Exit codes: 0 success, 1 numerical non-convergence, 2 config/usage
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bessel_szego::asympt::{predict, trace_asymptote};
use bessel_szego::bessel_op::{assemble, trace_truncated};
use bessel_szego::fredholm::converged_logdet;
use bessel_szego::pipeline::{
    crosscheck_rows_to_csv, fmt_f64, rows_to_json, run_crosscheck, run_verify, verify_rows_to_csv,
    OutputFormat, RunConfig,
};
use bessel_szego::symbols::exp_symbol;
use bessel_szego::{specfun, Error};

#[derive(Parser)]
#[command(name = "bessel-szego", version, about = "Fredholm determinants of truncated Bessel operators and their asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the key = value run configuration
    #[arg(long)]
    config: PathBuf,
    /// Write output here instead of the config's `output` (or stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the output format
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: determinant, trace, prediction and residual per tau
    Verify(CommonArgs),
    /// Converged log-determinants per tau
    Det(CommonArgs),
    /// The three-term asymptotic prediction per tau
    Predict(CommonArgs),
    /// Truncated trace versus its two-term asymptote per tau
    Trace(CommonArgs),
    /// Bessel path versus Wiener-Hopf ± Hankel path at nu = ±1/2
    Crosscheck(CommonArgs),
    /// Built-in special-function identity suite
    SpecfunSelftest {
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn effective_format(cfg: &RunConfig, arg: Option<FormatArg>) -> OutputFormat {
    match arg {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => cfg.format,
    }
}

fn emit(common: &CommonArgs, cfg: &RunConfig, text: String) -> Result<(), Error> {
    let target = common.out.clone().or_else(|| cfg.output.clone());
    match target {
        Some(path) => std::fs::write(path, text).map_err(bessel_szego::pipeline::ConfigError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Verify(common) => {
            let cfg = RunConfig::load(&common.config)?;
            let report = run_verify(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let text = match effective_format(&cfg, common.format) {
                OutputFormat::Csv => verify_rows_to_csv(&report.rows),
                OutputFormat::Json => rows_to_json(&report.rows),
            };
            emit(&common, &cfg, text)?;
            Ok(if report.all_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Crosscheck(common) => {
            let cfg = RunConfig::load(&common.config)?;
            let report = run_crosscheck(&cfg)?;
            let text = match effective_format(&cfg, common.format) {
                OutputFormat::Csv => crosscheck_rows_to_csv(&report.rows),
                OutputFormat::Json => rows_to_json(&report.rows),
            };
            emit(&common, &cfg, text)?;
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Det(common) => {
            let cfg = RunConfig::load(&common.config)?;
            let order = cfg.order()?;
            let a = exp_symbol(&cfg.build_b()?);
            let mut rows = Vec::new();
            let mut all_converged = true;
            for &tau in &cfg.tau_list {
                let det = converged_logdet(
                    |n| assemble(order, &a, tau, n, cfg.resolution).map_err(Error::from),
                    cfg.det_tol,
                    cfg.n0,
                    cfg.n_max,
                )?;
                all_converged &= det.converged;
                rows.push(DetRow {
                    tau,
                    n_final: det.n_final,
                    logdet: det.logdet,
                    sign: det.sign,
                    est_error: det.est_error,
                    converged: det.converged,
                });
            }
            let text = match effective_format(&cfg, common.format) {
                OutputFormat::Csv => {
                    let mut out = String::from("tau,n_final,logdet,sign,est_error,converged\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            fmt_f64(r.tau),
                            r.n_final,
                            fmt_f64(r.logdet),
                            r.sign,
                            fmt_f64(r.est_error),
                            r.converged
                        ));
                    }
                    out
                }
                OutputFormat::Json => rows_to_json(&rows),
            };
            emit(&common, &cfg, text)?;
            Ok(if all_converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Predict(common) => {
            let cfg = RunConfig::load(&common.config)?;
            let b = cfg.build_b()?;
            let p = predict(cfg.order()?, &b)?;
            for w in &p.warnings {
                eprintln!("warning: {w}");
            }
            let rows: Vec<PredictRow> = cfg
                .tau_list
                .iter()
                .map(|&tau| PredictRow {
                    tau,
                    linear_coeff: p.linear_coeff,
                    order_term: p.order_term,
                    e_term: p.e_term,
                    log_value: p.log_value(tau),
                })
                .collect();
            let text = match effective_format(&cfg, common.format) {
                OutputFormat::Csv => {
                    let mut out = String::from("tau,linear_coeff,order_term,e_term,log_value\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            fmt_f64(r.tau),
                            fmt_f64(r.linear_coeff),
                            fmt_f64(r.order_term),
                            fmt_f64(r.e_term),
                            fmt_f64(r.log_value)
                        ));
                    }
                    out
                }
                OutputFormat::Json => rows_to_json(&rows),
            };
            emit(&common, &cfg, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace(common) => {
            let cfg = RunConfig::load(&common.config)?;
            let order = cfg.order()?;
            let b = cfg.build_b()?;
            let mut rows = Vec::new();
            for &tau in &cfg.tau_list {
                let tr = trace_truncated(order, &b, tau)?;
                let asy = trace_asymptote(order, &b, tau)?;
                rows.push(TraceRow {
                    tau,
                    trace_truncated: tr,
                    trace_asymptote: asy,
                    difference: tr - asy,
                });
            }
            let text = match effective_format(&cfg, common.format) {
                OutputFormat::Csv => {
                    let mut out =
                        String::from("tau,trace_truncated,trace_asymptote,difference\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt_f64(r.tau),
                            fmt_f64(r.trace_truncated),
                            fmt_f64(r.trace_asymptote),
                            fmt_f64(r.difference)
                        ));
                    }
                    out
                }
                OutputFormat::Json => rows_to_json(&rows),
            };
            emit(&common, &cfg, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SpecfunSelftest { format } => {
            let rows = specfun_selftest();
            let pass = rows.iter().all(|r| r.pass);
            let text = match format.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => {
                    let mut out = String::from("check,residual,threshold,pass\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            r.check,
                            fmt_f64(r.residual),
                            fmt_f64(r.threshold),
                            r.pass
                        ));
                    }
                    out
                }
                FormatArg::Json => rows_to_json(&rows),
            };
            print!("{text}");
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

#[derive(Serialize)]
struct DetRow {
    tau: f64,
    n_final: usize,
    logdet: f64,
    sign: i8,
    est_error: f64,
    converged: bool,
}

#[derive(Serialize)]
struct PredictRow {
    tau: f64,
    linear_coeff: f64,
    order_term: f64,
    e_term: f64,
    log_value: f64,
}

#[derive(Serialize)]
struct TraceRow {
    tau: f64,
    trace_truncated: f64,
    trace_asymptote: f64,
    difference: f64,
}

#[derive(Serialize)]
struct SelftestRow {
    check: String,
    residual: f64,
    threshold: f64,
    pass: bool,
}

fn specfun_selftest() -> Vec<SelftestRow> {
    use specfun::{bessel_j, envelope_deviation, gamma_real, BesselOrder};
    let mut rows = Vec::new();
    let mut push = |check: &str, residual: f64, threshold: f64| {
        rows.push(SelftestRow {
            check: check.to_string(),
            residual,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
        });
    };

    // gamma reference points
    let g = (gamma_real(0.5).unwrap() - core::f64::consts::PI.sqrt()).abs()
        / core::f64::consts::PI.sqrt();
    push("gamma_half", g, 1e-13);
    push("gamma_factorial", (gamma_real(6.0).unwrap() - 120.0).abs() / 120.0, 1e-13);

    // three-term recurrence over the order grid
    let mut worst: f64 = 0.0;
    for nu in [-0.9, -0.5, 0.0, 0.5, 1.0, 2.5] {
        let o0 = BesselOrder::new(nu).unwrap();
        let o1 = o0.raised();
        let o2 = o1.raised();
        let mut x = 0.01;
        while x <= 500.0 {
            let j0 = bessel_j(o0, x).unwrap();
            let j1 = bessel_j(o1, x).unwrap();
            let j2 = bessel_j(o2, x).unwrap();
            let scale = j0
                .abs()
                .max((2.0 * (nu + 1.0) / x * j1).abs())
                .max(j2.abs())
                .max(1e-300);
            worst = worst.max((j0 + j2 - 2.0 * (nu + 1.0) / x * j1).abs() / scale);
            x *= 2.1;
        }
    }
    push("recurrence_residual", worst, 1e-10);

    // half-order envelopes are exact
    let mut worst: f64 = 0.0;
    for nu in [-0.5, 0.5] {
        let o = BesselOrder::new(nu).unwrap();
        let mut z = 0.5;
        while z < 500.0 {
            worst = worst.max(envelope_deviation(o, z).unwrap().abs());
            z *= 2.7;
        }
    }
    push("half_order_envelope", worst, 1e-12);

    // J_0(1) against the frozen reference
    let j = (bessel_j(BesselOrder::new(0.0).unwrap(), 1.0).unwrap() - 0.7651976865579666).abs();
    push("j0_at_1", j / 0.7651976865579666, 1e-12);

    rows
}
