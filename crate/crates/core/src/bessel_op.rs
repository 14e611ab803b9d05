//! The Bessel kernel `K(x,y) = ∫_0^∞ t √(xy) J_nu(xt) J_nu(yt) a(t) dt`,
//! its Nyström discretization on `[0, tau]`, and the trace of the
//! truncated operator.
//!
//! Assembly is factorized: one shared t-grid turns the matrix into
//! `A = Φ diag(c) Φᵀ` with `Φ_iq = √(w_i x_i) J_nu(x_i t_q)`, which is
//! symmetric by construction and needs only O(n·m) Bessel evaluations.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::quadrature::{gauss_legendre, PanelScheme, QuadratureError};
use crate::specfun::{bessel_j, bessel_pair, BesselOrder, SpecFunError};
use crate::symbols::{Symbol, SymbolError, Tail};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(
        "t-integration tail cannot reach the accuracy target: estimated tail {estimated:.3e} \
         exceeds {needed:.3e}; symbol decays too slowly for the kernel quadrature"
    )]
    TailTruncation { estimated: f64, needed: f64 },
    #[error("t-grid under-resolves the oscillation: {m} points for a required minimum of {required}")]
    Resolution { m: usize, required: usize },
    #[error("bad operator parameter: {0}")]
    BadParameter(String),
}

/// Discretization of the t-integral shared by all kernel entries:
/// nodes `t_q`, their panel weights, and coefficients
/// `c_q = w_q · t_q · a(t_q)`.
#[derive(Debug, Clone)]
pub struct TGrid {
    t_nodes: Vec<f64>,
    coefficients: Vec<f64>,
    x_max: f64,
    t_upper: f64,
}

impl TGrid {
    pub fn len(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_nodes.is_empty()
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Largest kernel argument the grid resolves.
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Upper end of the t-integration range.
    pub fn t_upper(&self) -> f64 {
        self.t_upper
    }
}

/// Geometric-grading depth that pushes the leftover endpoint mass
/// `eps^(2 nu + 2)` below 1e-12 for the `t^(2 nu + 1)` small-t behavior of
/// the kernel integrand.
fn grading_levels(nu: f64) -> usize {
    let gamma = 2.0 * nu + 2.0; // exponent of the leftover mass
    ((40.0 / gamma).ceil() as usize + 4).min(240)
}

/// Upper limit of the t-integration for the requested absolute accuracy.
fn t_upper(a: &Symbol, needed: f64) -> Result<f64, OperatorError> {
    match a.tail() {
        Tail::None => Ok(a.numeric_cutoff().min(a.support_cutoff())),
        Tail::PowerLaw { p } => {
            let t0 = a.numeric_cutoff();
            // kernel integrand amplitude beyond t0 is ~ (2/pi)|a(t)|
            let estimated = 2.0 / core::f64::consts::PI * a.value(t0).abs() * t0 / (p - 1.0).max(0.1);
            if estimated > needed {
                Err(OperatorError::TailTruncation { estimated, needed })
            } else {
                Ok(t0)
            }
        }
    }
}

/// Build the shared t-grid for kernel arguments up to `x_max`.
///
/// Density: at least 8 points per period of the fastest oscillation
/// `x_max · t`, times the `resolution` safety factor (default 2), plus a
/// geometric grading toward t = 0 where the integrand behaves like
/// `t^(2 nu + 1)`.
pub fn build_tgrid(
    order: BesselOrder,
    a: &Symbol,
    x_max: f64,
    resolution: f64,
) -> Result<TGrid, OperatorError> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(OperatorError::BadParameter(format!("x_max = {x_max}")));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(OperatorError::BadParameter(format!("resolution = {resolution}")));
    }
    let t_top = t_upper(a, 1e-9)?;
    let points_per_panel = 16usize;
    // panel width so that points-per-period >= 8 * resolution
    let per_unit = 8.0 * resolution * x_max / (2.0 * core::f64::consts::PI);
    let cap_freq = per_unit * core::f64::consts::PI / points_per_panel as f64;

    let interior: Vec<f64> = a
        .breakpoints()
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_top)
        .collect();
    let scheme = PanelScheme::new(interior, points_per_panel)?
        .with_oscillation_hint(cap_freq)
        .with_left_grading(grading_levels(order.nu()));

    // materialize nodes and weights panel by panel
    let rule = gauss_legendre(points_per_panel)?;
    let edges = scheme.panel_edges(0.0, t_top);
    let mut t_nodes = Vec::with_capacity(points_per_panel * (edges.len() - 1));
    let mut coefficients = Vec::with_capacity(t_nodes.capacity());
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let half = 0.5 * (w[1] - w[0]);
        for (xi, wi) in rule.nodes().iter().zip(rule.weights()) {
            let t = mid + half * xi;
            let wq = wi * half;
            t_nodes.push(t);
            coefficients.push(wq * t * a.value(t));
        }
    }

    // baseline requirement (resolution factor 1): every panel must carry at
    // least 8 points per period of the fastest oscillation
    let width_limit = points_per_panel as f64 * 2.0 * core::f64::consts::PI / (8.0 * x_max);
    let widest = edges.windows(2).fold(0.0_f64, |w, e| w.max(e[1] - e[0]));
    if widest > width_limit {
        let required = (8.0 * x_max * t_top / (2.0 * core::f64::consts::PI)).ceil() as usize;
        return Err(OperatorError::Resolution {
            m: t_nodes.len(),
            required,
        });
    }

    Ok(TGrid {
        t_nodes,
        coefficients,
        x_max,
        t_upper: t_top,
    })
}

/// Kernel value by the factorized quadrature of a prebuilt grid. `x` and
/// `y` must not exceed `grid.x_max()`.
pub fn kernel_eval_on(
    grid: &TGrid,
    order: BesselOrder,
    x: f64,
    y: f64,
) -> Result<f64, OperatorError> {
    debug_assert!(x <= grid.x_max * (1.0 + 1e-12) && y <= grid.x_max * (1.0 + 1e-12));
    let mut acc = 0.0;
    for (&t, &c) in grid.t_nodes.iter().zip(&grid.coefficients) {
        if c != 0.0 {
            acc += c * bessel_j(order, x * t)? * bessel_j(order, y * t)?;
        }
    }
    Ok((x * y).sqrt() * acc)
}

/// Bessel kernel `K(x, y)` for `x, y > 0`; smooth on the diagonal.
pub fn kernel_eval(order: BesselOrder, a: &Symbol, x: f64, y: f64) -> Result<f64, OperatorError> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(OperatorError::BadParameter(format!("need x, y > 0, got ({x}, {y})")));
    }
    let grid = build_tgrid(order, a, x.max(y), 2.0)?;
    kernel_eval_on(&grid, order, x, y)
}

/// Nyström matrix of `B_tau(a)` on `[0, tau]`: `A_ij = √w_i K(x_i, x_j) √w_j`
/// at Gauss-Legendre nodes, assembled through one shared t-grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    tau: f64,
    x_nodes: Vec<f64>,
    x_weights: Vec<f64>,
    matrix: Vec<f64>, // row-major n x n
    tgrid: Option<Arc<TGrid>>,
}

impl DiscretizedOperator {
    pub fn n(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n() + j]
    }

    /// The shared t-grid (absent for operators assembled from transform
    /// kernels).
    pub fn tgrid(&self) -> Option<&Arc<TGrid>> {
        self.tgrid.as_ref()
    }

    pub(crate) fn from_parts(
        tau: f64,
        x_nodes: Vec<f64>,
        x_weights: Vec<f64>,
        matrix: Vec<f64>,
        tgrid: Option<Arc<TGrid>>,
    ) -> Self {
        DiscretizedOperator {
            tau,
            x_nodes,
            x_weights,
            matrix,
            tgrid,
        }
    }

    /// Gauss-Legendre nodes and weights on `[0, tau]`; nodes are interior,
    /// so the `x = 0` endpoint (singular for -1 < nu < 0) is never touched.
    pub(crate) fn x_rule(tau: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), OperatorError> {
        let rule = gauss_legendre(n)?;
        let mid = 0.5 * tau;
        let x_nodes: Vec<f64> = rule.nodes().iter().map(|xi| mid + mid * xi).collect();
        let x_weights: Vec<f64> = rule.weights().iter().map(|wi| wi * mid).collect();
        Ok((x_nodes, x_weights))
    }
}

/// Assemble the Nyström discretization of `B_tau(a)` with `n` nodes.
pub fn assemble(
    order: BesselOrder,
    a: &Symbol,
    tau: f64,
    n: usize,
    resolution: f64,
) -> Result<DiscretizedOperator, OperatorError> {
    if n < 4 {
        return Err(OperatorError::BadParameter(format!("need n >= 4, got {n}")));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(OperatorError::BadParameter(format!("tau = {tau}")));
    }
    let (x_nodes, x_weights) = DiscretizedOperator::x_rule(tau, n)?;
    let grid = Arc::new(build_tgrid(order, a, tau, resolution)?);
    let m = grid.len();

    // Φ_iq = sqrt(w_i x_i) J_nu(x_i t_q), one row per x node
    let phi: Vec<Vec<f64>> = x_nodes
        .par_iter()
        .zip(x_weights.par_iter())
        .map(|(&x, &w)| {
            let pref = (w * x).sqrt();
            grid.t_nodes
                .iter()
                .map(|&t| Ok(pref * bessel_j(order, x * t)?))
                .collect::<Result<Vec<f64>, SpecFunError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    // A = Φ diag(c) Φᵀ, filled symmetrically
    let mut matrix = vec![0.0; n * n];
    let rows: Vec<(usize, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let scaled: Vec<f64> = (0..m).map(|q| phi[i][q] * grid.coefficients[q]).collect();
            let mut row = vec![0.0; n - i];
            for j in i..n {
                let mut acc = 0.0;
                let pj = &phi[j];
                for q in 0..m {
                    acc += scaled[q] * pj[q];
                }
                row[j - i] = acc;
            }
            (i, row)
        })
        .collect();
    for (i, row) in rows {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            matrix[i * n + j] = v;
            matrix[j * n + i] = v;
        }
    }

    Ok(DiscretizedOperator {
        tau,
        x_nodes,
        x_weights,
        matrix,
        tgrid: Some(grid),
    })
}

/// Trace of `B_tau(b)`, evaluated in the reduced single-integral form
///
/// ```text
/// trace B_tau(b) = ∫_0^∞ b(t) (tau² t / 2) (J_nu²(tau t) - J_{nu+1}(tau t) J_{nu-1}(tau t)) dt
/// ```
///
/// with `J_{nu-1}` eliminated through the three-term recurrence.
pub fn trace_truncated(order: BesselOrder, b: &Symbol, tau: f64) -> Result<f64, OperatorError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(OperatorError::BadParameter(format!("tau = {tau}")));
    }
    let nu = order.nu();
    let t_top = t_upper(b, 1e-10)?;
    let u_top = tau * t_top;

    // after u = tau t the bracket oscillates at frequency 2
    let interior: Vec<f64> = b
        .breakpoints()
        .iter()
        .map(|&t| t * tau)
        .filter(|&u| u > 0.0 && u < u_top)
        .collect();
    let scheme = PanelScheme::new(interior, 16)?
        .with_oscillation_hint(2.0)
        .with_left_grading(grading_levels(nu));

    let value = crate::quadrature::integrate(
        |u| {
            let (j0, j1) = match bessel_pair(order, u) {
                Ok(p) => p,
                Err(_) => return f64::NAN,
            };
            // J_nu^2 - J_{nu+1} J_{nu-1} = J_nu^2 + J_{nu+1}^2 - (2 nu / u) J_nu J_{nu+1}
            let bracket = j0 * j0 + j1 * j1 - 2.0 * nu / u * j0 * j1;
            b.value(u / tau) * 0.5 * u * bracket
        },
        0.0,
        u_top,
        &scheme,
    )?;
    Ok(value)
}
