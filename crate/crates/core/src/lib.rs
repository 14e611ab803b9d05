//! Numerics for determinants of truncated Bessel operators.
//!
//! The library evaluates the Fredholm determinant `det(I + B_tau(a))` of the
//! integral operator on `L^2[0, tau]` with kernel
//!
//! ```text
//! K(x, y) = ∫_0^∞ t √(xy) J_nu(xt) J_nu(yt) a(t) dt,
//! ```
//!
//! and compares it against the Szegő-Akhiezer-Kac-type prediction
//!
//! ```text
//! det(I + B_tau(a)) ~ exp( tau·b̂(0) − (nu/2)·b(0) + ½ ∫_0^∞ x b̂(x)² dx ),
//! ```
//!
//! where `a = e^b − 1` and `b̂` is the cosine transform of `b`. Several
//! independent routes cross-check the computation: a Wiener-Hopf ± Hankel
//! reduction at `nu = ∓1/2`, trace asymptotics, and two evaluations of the
//! constant term.
//!
//! See the `book/` guide for a chapter-by-chapter walk through the pieces,
//! and the `bessel-szego` binary for the config-driven pipeline.

pub mod asympt;
pub mod bessel_op;
pub mod fredholm;
pub mod pipeline;
pub mod quadrature;
pub mod specfun;
pub mod symbols;
pub mod wh_op;

pub use asympt::{e_constant, e_constant_via_hankel_trace, predict, ratio_diagnostic, trace_asymptote, Prediction};
pub use bessel_op::{assemble, kernel_eval, trace_truncated, DiscretizedOperator, TGrid};
pub use fredholm::{converged_logdet, logdet, DeterminantResult};
pub use pipeline::{run_crosscheck, run_verify, OutputFormat, RunConfig, VerifyRow};
pub use quadrature::{gauss_legendre, integrate, integrate_oscillatory_tail, PanelScheme, QuadRule};
pub use specfun::{bessel_j, bessel_pair, envelope_deviation, gamma_real, BesselOrder};
pub use symbols::{build_symbol, cosine_transform, exp_symbol, validate_hypotheses, HypothesisReport, Symbol, SymbolFamily};
pub use wh_op::{assemble_wh, hankel_correction, k_t_diagnostic, wh_kernel, WHSign};

/// Crate-wide error type; each module keeps its own focused error enum.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] specfun::SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] quadrature::QuadratureError),
    #[error(transparent)]
    Symbol(#[from] symbols::SymbolError),
    #[error(transparent)]
    Operator(#[from] bessel_op::OperatorError),
    #[error(transparent)]
    Fredholm(#[from] fredholm::FredholmError),
    #[error(transparent)]
    Config(#[from] pipeline::ConfigError),
    #[error("determinant did not converge: estimated error {est_error} at n = {n_final}")]
    NotConverged { est_error: f64, n_final: usize },
    #[error("determinant sign is negative; configuration outside the positive-determinant regime")]
    NegativeDeterminant,
}
