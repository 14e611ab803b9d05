//! Config-driven experiment runner: parses flat `key = value` configs,
//! sweeps the determinant/prediction comparison over a tau list, and
//! serializes machine-readable convergence tables.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::asympt::predict;
use crate::bessel_op::assemble;
use crate::fredholm::converged_logdet;
use crate::specfun::BesselOrder;
use crate::symbols::{build_symbol, exp_symbol, Symbol, SymbolFamily};
use crate::wh_op::{assemble_wh, WHSign};
use crate::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config field '{field}': {message}")]
    Invalid { field: String, message: String },
    #[error("missing required field '{0}'")]
    Missing(String),
    #[error("crosscheck needs nu = -0.5 or 0.5, got {0}")]
    CrosscheckOrder(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Parsed run configuration.
///
/// File format: UTF-8 text, one `key = value` per line, `#` starts a
/// comment, nested groups via dotted keys (`symbol.family = gaussian`).
/// The configured symbol is `b`; determinants act on `a = e^b − 1`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub nu: f64,
    pub symbol: SymbolFamily,
    pub tau_list: Vec<f64>,
    pub det_tol: f64,
    pub n0: usize,
    pub n_max: usize,
    pub resolution: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
        let mut nu = None;
        let mut family_name: Option<String> = None;
        let mut beta: Option<f64> = None;
        let mut table_path: Option<PathBuf> = None;
        let mut tau_list: Option<Vec<f64>> = None;
        let mut det_tol = 1e-8;
        let mut n0 = 16usize;
        let mut n_max = 1024usize;
        let mut resolution = 2.0;
        let mut output = None;
        let mut format = OutputFormat::Csv;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
                v.parse().map_err(|_| ConfigError::Parse {
                    line: line_no,
                    message: format!("field '{key}': expected a number, got '{v}'"),
                })
            };
            let parse_usize = |v: &str| -> Result<usize, ConfigError> {
                v.parse().map_err(|_| ConfigError::Parse {
                    line: line_no,
                    message: format!("field '{key}': expected an integer, got '{v}'"),
                })
            };
            match key {
                "nu" => nu = Some(parse_f64(value)?),
                "symbol.family" => family_name = Some(value.to_string()),
                "symbol.beta" => beta = Some(parse_f64(value)?),
                "symbol.path" => table_path = Some(PathBuf::from(value)),
                "tau_list" => {
                    let mut taus = Vec::new();
                    for tok in value.split(|c: char| c == ',' || c.is_whitespace()) {
                        if tok.is_empty() {
                            continue;
                        }
                        taus.push(parse_f64(tok)?);
                    }
                    tau_list = Some(taus);
                }
                "det_tol" => det_tol = parse_f64(value)?,
                "n0" => n0 = parse_usize(value)?,
                "n_max" => n_max = parse_usize(value)?,
                "resolution" => resolution = parse_f64(value)?,
                "output" => output = Some(PathBuf::from(value)),
                "format" => {
                    format = match value {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        other => {
                            return Err(ConfigError::Parse {
                                line: line_no,
                                message: format!("field 'format': expected csv or json, got '{other}'"),
                            })
                        }
                    }
                }
                other => {
                    return Err(ConfigError::Parse {
                        line: line_no,
                        message: format!("unknown field '{other}'"),
                    })
                }
            }
        }

        let nu = nu.ok_or(ConfigError::Missing("nu".into()))?;
        if !(nu > -1.0) || !nu.is_finite() {
            return Err(ConfigError::Invalid {
                field: "nu".into(),
                message: format!("must satisfy nu > -1, got {nu}"),
            });
        }
        let tau_list = tau_list.ok_or(ConfigError::Missing("tau_list".into()))?;
        if tau_list.is_empty() {
            return Err(ConfigError::Invalid {
                field: "tau_list".into(),
                message: "must be nonempty".into(),
            });
        }
        if tau_list.windows(2).any(|w| !(w[0] < w[1])) || tau_list.iter().any(|t| !(t > &0.0)) {
            return Err(ConfigError::Invalid {
                field: "tau_list".into(),
                message: "must be positive and strictly increasing".into(),
            });
        }
        if !(det_tol > 0.0) {
            return Err(ConfigError::Invalid {
                field: "det_tol".into(),
                message: format!("must be positive, got {det_tol}"),
            });
        }
        if n0 < 8 || n_max < 2 * n0 {
            return Err(ConfigError::Invalid {
                field: "n0/n_max".into(),
                message: format!("need n0 >= 8 and n_max >= 2 n0, got {n0}/{n_max}"),
            });
        }
        let family_name = family_name.ok_or(ConfigError::Missing("symbol.family".into()))?;
        let symbol = match family_name.as_str() {
            "table" => {
                let path = table_path.ok_or(ConfigError::Missing("symbol.path".into()))?;
                let text = std::fs::read_to_string(&path)?;
                let knots = parse_table_knots(&text).map_err(|message| ConfigError::Invalid {
                    field: "symbol.path".into(),
                    message,
                })?;
                SymbolFamily::Table { knots }
            }
            name => SymbolFamily::from_config(name, beta, None).map_err(|e| ConfigError::Invalid {
                field: "symbol.family".into(),
                message: e.to_string(),
            })?,
        };
        Ok(RunConfig {
            nu,
            symbol,
            tau_list,
            det_tol,
            n0,
            n_max,
            resolution,
            output,
            format,
        })
    }

    pub fn order(&self) -> Result<BesselOrder, ConfigError> {
        BesselOrder::new(self.nu).map_err(|e| ConfigError::Invalid {
            field: "nu".into(),
            message: e.to_string(),
        })
    }

    pub fn build_b(&self) -> Result<Symbol, Error> {
        Ok(build_symbol(&self.symbol).map_err(crate::bessel_op::OperatorError::from)?)
    }
}

fn parse_table_knots(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut knots = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => {
                let t: f64 = a.parse().map_err(|_| format!("line {}: bad abscissa", idx + 1))?;
                let v: f64 = b.parse().map_err(|_| format!("line {}: bad value", idx + 1))?;
                knots.push((t, v));
            }
            _ => return Err(format!("line {}: expected two columns", idx + 1)),
        }
    }
    Ok(knots)
}

/// One row of the verification sweep.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub tau: f64,
    pub n_final: usize,
    pub logdet: f64,
    pub trace: f64,
    pub log_prediction: f64,
    pub residual: f64,
    pub gap: f64,
    pub converged: bool,
}

/// Outcome of [`run_verify`]: one row per tau, plus hypothesis warnings.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub warnings: Vec<String>,
    /// The tau-independent prediction backing the rows.
    pub prediction: crate::asympt::Prediction,
}

impl VerifyReport {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Run the determinant-versus-prediction sweep over the configured tau
/// list. Rows are assembled in tau order; the sweep itself runs in
/// parallel.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, Error> {
    let order = cfg.order()?;
    let b = cfg.build_b()?;
    let prediction = predict(order, &b)?;
    let a = exp_symbol(&b);

    let rows: Result<Vec<VerifyRow>, Error> = cfg
        .tau_list
        .par_iter()
        .map(|&tau| {
            let det = converged_logdet(
                |n| assemble(order, &a, tau, n, cfg.resolution).map_err(Error::from),
                cfg.det_tol,
                cfg.n0,
                cfg.n_max,
            )?;
            if det.converged && det.sign < 0 {
                return Err(Error::NegativeDeterminant);
            }
            let trace = crate::bessel_op::trace_truncated(order, &b, tau)?;
            // R(tau) = logdet - tau b̂(0) + (nu/2) b(0); order_term stores -(nu/2) b(0)
            let residual = det.logdet - tau * prediction.linear_coeff - prediction.order_term;
            let gap = (residual - prediction.e_term).abs();
            Ok(VerifyRow {
                tau,
                n_final: det.n_final,
                logdet: det.logdet,
                trace,
                log_prediction: prediction.log_value(tau),
                residual,
                gap,
                converged: det.converged,
            })
        })
        .collect();

    Ok(VerifyReport {
        rows: rows?,
        warnings: prediction.warnings.clone(),
        prediction,
    })
}

/// One row of the `nu = ±1/2` cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckRow {
    pub tau: f64,
    pub logdet_bessel: f64,
    pub logdet_wh: f64,
    pub diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub rows: Vec<CrosscheckRow>,
    pub pass: bool,
}

/// Compare the Bessel-kernel determinant against the Wiener-Hopf ± Hankel
/// route; only defined for `nu = ±1/2`. Passes iff every difference stays
/// within `10 · det_tol`.
pub fn run_crosscheck(cfg: &RunConfig) -> Result<CrosscheckReport, Error> {
    let order = cfg.order()?;
    let sign = WHSign::from_order(order)
        .ok_or(ConfigError::CrosscheckOrder(cfg.nu))?;
    let b = cfg.build_b()?;
    let a = exp_symbol(&b);

    let rows: Result<Vec<CrosscheckRow>, Error> = cfg
        .tau_list
        .par_iter()
        .map(|&tau| {
            let bes = converged_logdet(
                |n| assemble(order, &a, tau, n, cfg.resolution).map_err(Error::from),
                cfg.det_tol,
                cfg.n0,
                cfg.n_max,
            )?;
            let wh = converged_logdet(
                |n| assemble_wh(&a, sign, tau, n).map_err(Error::from),
                cfg.det_tol,
                cfg.n0,
                cfg.n_max,
            )?;
            let diff = (bes.logdet - wh.logdet).abs();
            Ok(CrosscheckRow {
                tau,
                logdet_bessel: bes.logdet,
                logdet_wh: wh.logdet,
                diff,
                pass: bes.converged && wh.converged && diff <= 10.0 * cfg.det_tol,
            })
        })
        .collect();
    let rows = rows?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(CrosscheckReport { rows, pass })
}

/// Format a float with 17 significant digits (the CSV schema contract).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn verify_rows_to_csv(rows: &[VerifyRow]) -> String {
    let mut out = String::from("tau,n_final,logdet,trace,log_prediction,residual,gap,converged\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.tau),
            r.n_final,
            fmt_f64(r.logdet),
            fmt_f64(r.trace),
            fmt_f64(r.log_prediction),
            fmt_f64(r.residual),
            fmt_f64(r.gap),
            r.converged
        ));
    }
    out
}

pub fn crosscheck_rows_to_csv(rows: &[CrosscheckRow]) -> String {
    let mut out = String::from("tau,logdet_bessel,logdet_wh,diff,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.tau),
            fmt_f64(r.logdet_bessel),
            fmt_f64(r.logdet_wh),
            fmt_f64(r.diff),
            r.pass
        ));
    }
    out
}

/// JSON mirror of the CSV rows: an array of objects with identical field
/// names.
pub fn rows_to_json<T: Serialize>(rows: &[T]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}
