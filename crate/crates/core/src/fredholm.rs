//! Log-determinants `log det(I + A)` of discretized operators, with
//! convergence control by node doubling.

use thiserror::Error;

use crate::bessel_op::DiscretizedOperator;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FredholmError {
    #[error("matrix I + A is numerically singular (zero pivot at step {0})")]
    Singular(usize),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("invalid determinant parameters: {0}")]
    BadParameter(String),
}

/// Result of a node-doubling determinant run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantResult {
    /// `log |det(I + A)|` at the final node count.
    pub logdet: f64,
    /// Sign of the determinant (+1 or -1).
    pub sign: i8,
    pub n_final: usize,
    /// `(n, logdet)` pairs in increasing `n`.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
    /// Magnitude of the last doubling increment.
    pub est_error: f64,
}

/// `log |det(I + A)|` and the determinant sign for a row-major `n x n`
/// matrix `A`, by partial-pivoted triangular factorization of `I + A`.
pub fn logdet_i_plus(a: &[f64], n: usize) -> Result<(f64, i8), FredholmError> {
    if a.len() != n * n {
        return Err(FredholmError::BadParameter(format!(
            "matrix length {} != n^2 = {}",
            a.len(),
            n * n
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(FredholmError::NonFinite);
    }
    let mut m = a.to_vec();
    for i in 0..n {
        m[i * n + i] += 1.0;
    }
    let mut log_abs = 0.0;
    let mut sign = 1i8;
    for k in 0..n {
        // partial pivot
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for r in k + 1..n {
            let v = m[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(FredholmError::Singular(k));
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            sign = -sign;
        }
        let pivot = m[k * n + k];
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();
        let inv = 1.0 / pivot;
        for r in k + 1..n {
            let factor = m[r * n + k] * inv;
            if factor == 0.0 {
                continue;
            }
            m[r * n + k] = 0.0;
            for c in k + 1..n {
                m[r * n + c] -= factor * m[k * n + c];
            }
        }
    }
    Ok((log_abs, sign))
}

/// `log |det(I + A)|` of a discretized operator.
pub fn logdet(op: &DiscretizedOperator) -> Result<(f64, i8), FredholmError> {
    logdet_i_plus(op.matrix(), op.n())
}

/// Double the node count until the log-determinant increment drops below
/// `tol` or `n_max` is reached. Non-convergence is reported in the result,
/// not as an error.
pub fn converged_logdet<F, E>(
    make_op: F,
    tol: f64,
    n0: usize,
    n_max: usize,
) -> Result<DeterminantResult, E>
where
    F: Fn(usize) -> Result<DiscretizedOperator, E>,
    E: From<FredholmError>,
{
    if n0 < 8 || n_max < 2 * n0 {
        return Err(FredholmError::BadParameter(format!(
            "need n0 >= 8 and n_max >= 2 n0, got n0 = {n0}, n_max = {n_max}"
        ))
        .into());
    }
    if !(tol > 0.0) {
        return Err(FredholmError::BadParameter(format!("tol = {tol}")).into());
    }
    let mut history = Vec::new();
    let op = make_op(n0)?;
    let (mut prev, mut sign) = logdet(&op)?;
    history.push((n0, prev));
    let mut n = n0;
    loop {
        n *= 2;
        if n > n_max {
            return Ok(DeterminantResult {
                logdet: prev,
                sign,
                n_final: history.last().unwrap().0,
                est_error: history
                    .windows(2)
                    .last()
                    .map(|w| (w[1].1 - w[0].1).abs())
                    .unwrap_or(f64::INFINITY),
                history,
                converged: false,
            });
        }
        let op = make_op(n)?;
        let (cur, s) = logdet(&op)?;
        history.push((n, cur));
        let inc = (cur - prev).abs();
        sign = s;
        prev = cur;
        if inc < tol {
            return Ok(DeterminantResult {
                logdet: cur,
                sign,
                n_final: n,
                history,
                converged: true,
                est_error: inc,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel_op::{assemble, DiscretizedOperator};
    use crate::specfun::BesselOrder;
    use crate::symbols::{build_symbol, exp_symbol, SymbolFamily};
    use approx::assert_abs_diff_eq;

    fn op_from_matrix(a: Vec<f64>, n: usize) -> DiscretizedOperator {
        DiscretizedOperator::from_parts(1.0, vec![0.5; n], vec![1.0 / n as f64; n], a, None)
    }

    #[test]
    fn zero_matrix() {
        let op = op_from_matrix(vec![0.0; 16], 4);
        let (ld, s) = logdet(&op).unwrap();
        assert_eq!(ld, 0.0);
        assert_eq!(s, 1);
    }

    #[test]
    fn rank_one_update() {
        // det(I + c u uᵀ) = 1 + c ||u||²
        let u = [0.3, -1.2, 0.7, 2.0, -0.4];
        let c = 0.8;
        let n = u.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = c * u[i] * u[j];
            }
        }
        let norm2: f64 = u.iter().map(|v| v * v).sum();
        let (ld, s) = logdet_i_plus(&a, n).unwrap();
        assert_abs_diff_eq!(ld, (1.0 + c * norm2).ln(), epsilon = 1e-13);
        assert_eq!(s, 1);
    }

    #[test]
    fn diagonal_matrix() {
        let lambda = [0.5_f64, -0.3, 2.0, -0.9];
        let n = lambda.len();
        let mut a = vec![0.0; n * n];
        for (i, &l) in lambda.iter().enumerate() {
            a[i * n + i] = l;
        }
        let want: f64 = lambda.iter().map(|&l| (1.0 + l).abs().ln()).sum();
        let (ld, s) = logdet_i_plus(&a, n).unwrap();
        assert_abs_diff_eq!(ld, want, epsilon = 1e-13);
        assert_eq!(s, 1);

        // negative determinant: single eigenvalue below -1
        let a = vec![-2.5];
        let (ld, s) = logdet_i_plus(&a, 1).unwrap();
        assert_abs_diff_eq!(ld, 1.5_f64.ln(), epsilon = 1e-15);
        assert_eq!(s, -1);

        // exactly singular
        let a = vec![-1.0];
        assert!(matches!(logdet_i_plus(&a, 1), Err(FredholmError::Singular(_))));
    }

    #[test]
    fn cross_check_against_nalgebra() {
        // deterministic pseudo-random matrix
        let n = 24;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 0.3 * ((i * 31 + j * 17) as f64).sin() / (1.0 + i as f64 + j as f64);
            }
        }
        let (ld, sign) = logdet_i_plus(&a, n).unwrap();
        let mut m = nalgebra::DMatrix::from_row_slice(n, n, &a);
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let det = m.lu().determinant();
        assert_eq!(sign as f64, det.signum());
        assert_abs_diff_eq!(ld, det.abs().ln(), epsilon = 1e-12);
    }

    #[test]
    fn doubling_on_zero_operator() {
        let make = |n: usize| -> Result<DiscretizedOperator, FredholmError> {
            Ok(op_from_matrix(vec![0.0; n * n], n))
        };
        let r = converged_logdet(make, 1e-10, 8, 64).unwrap();
        assert!(r.converged);
        assert_eq!(r.logdet, 0.0);
        assert_eq!(r.n_final, 16);
        assert_eq!(r.history.len(), 2);
    }

    #[test]
    fn doubling_converges_for_gaussian_symbol() {
        let b = build_symbol(&SymbolFamily::Gaussian { beta: 0.5 }).unwrap();
        let a = exp_symbol(&b);
        let order = BesselOrder::new(0.0).unwrap();
        let r = converged_logdet(
            |n| assemble(order, &a, 5.0, n, 2.0).map_err(crate::Error::from),
            1e-8,
            16,
            512,
        )
        .unwrap();
        assert!(r.converged, "history {:?}", r.history);
        assert!(r.n_final <= 256, "n_final {}", r.n_final);
        assert_eq!(r.sign, 1);
        // increments shrink monotonically (factor-3 slack on one step)
        let incs: Vec<f64> = r.history.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        let mut slack_used = false;
        for w in incs.windows(2) {
            if w[1] > w[0] {
                assert!(!slack_used && w[1] <= 3.0 * w[0], "increments {incs:?}");
                slack_used = true;
            }
        }
    }

    #[test]
    fn perturbative_regime_matches_trace() {
        // log det(I + B(e^b - 1)) = trace B(b) + O(beta^2)
        let beta = 0.01;
        let b = build_symbol(&SymbolFamily::Gaussian { beta }).unwrap();
        let a = exp_symbol(&b);
        let order = BesselOrder::new(0.0).unwrap();
        let tau = 5.0;
        let r = converged_logdet(
            |n| assemble(order, &a, tau, n, 2.0).map_err(crate::Error::from),
            1e-10,
            16,
            512,
        )
        .unwrap();
        let tr = crate::bessel_op::trace_truncated(order, &b, tau).unwrap();
        assert!(
            (r.logdet - tr).abs() <= 1e-3 * beta,
            "logdet {} vs trace {}",
            r.logdet,
            tr
        );
    }

    #[test]
    fn logdet_invariant_under_resolution_doubling() {
        // past convergence the t-grid density no longer moves the value
        let b = build_symbol(&SymbolFamily::Gaussian { beta: 0.5 }).unwrap();
        let a = exp_symbol(&b);
        let order = BesselOrder::new(0.0).unwrap();
        let run = |resolution: f64| {
            converged_logdet(
                |n| assemble(order, &a, 4.0, n, resolution).map_err(crate::Error::from),
                1e-9,
                16,
                512,
            )
            .unwrap()
        };
        let r2 = run(2.0);
        let r4 = run(4.0);
        assert!(r2.converged && r4.converged);
        assert!(
            (r2.logdet - r4.logdet).abs() <= 2e-9,
            "{} vs {}",
            r2.logdet,
            r4.logdet
        );
    }

    #[test]
    fn parameter_validation() {
        let make = |n: usize| -> Result<DiscretizedOperator, FredholmError> {
            Ok(op_from_matrix(vec![0.0; n * n], n))
        };
        assert!(converged_logdet(&make, 1e-8, 4, 64).is_err());
        assert!(converged_logdet(&make, 1e-8, 8, 8).is_err());
        assert!(converged_logdet(&make, -1.0, 8, 64).is_err());
    }
}
