//! The asymptotic side of the determinant formula: the prediction
//!
//! ```text
//! log det(I + B_tau(e^b - 1)) ≈ tau·b̂(0) − (nu/2)·b(0) + ½ ∫_0^∞ x b̂(x)² dx,
//! ```
//!
//! the two-term trace asymptote, the constant term by two independent
//! routes, and the determinant/trace ratio diagnostic.

use crate::bessel_op::{assemble, trace_truncated};
use crate::fredholm::converged_logdet;
use crate::quadrature::{integrate, integrate_oscillatory_tail, PanelScheme};
use crate::specfun::BesselOrder;
use crate::symbols::{
    cosine_transform, exp_symbol, validate_hypotheses, Symbol, SymbolError, TransformDecay,
};
use crate::Error;

/// The three terms of the asymptotic prediction. `linear_coeff` multiplies
/// `tau`; all comparisons happen in log space since the geometric factor
/// overflows quickly.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `b̂(0)` = log G per unit tau.
    pub linear_coeff: f64,
    /// `-(nu/2) b(0)`.
    pub order_term: f64,
    /// `½ ∫_0^∞ x b̂(x)² dx` = log E-part; nonnegative for real symbols.
    pub e_term: f64,
    /// Hypothesis-validation findings, empty when all checks pass.
    pub warnings: Vec<String>,
}

impl Prediction {
    /// `log` of the predicted determinant at truncation `tau`.
    pub fn log_value(&self, tau: f64) -> f64 {
        tau * self.linear_coeff + self.order_term + self.e_term
    }
}

/// Assemble the prediction for order `nu` and symbol `b`.
pub fn predict(order: BesselOrder, b: &Symbol) -> Result<Prediction, Error> {
    let mut warnings = Vec::new();
    let report = validate_hypotheses(b);
    if !report.overall() {
        warnings.push(format!(
            "symbol fails the smoothness/decay hypotheses: {report:?}"
        ));
    }
    let linear_coeff = cosine_transform(b, 0.0).map_err(crate::bessel_op::OperatorError::from)?;
    let order_term = -0.5 * order.nu() * b.value(0.0);
    let e_term = e_constant(b)?;
    Ok(Prediction {
        linear_coeff,
        order_term,
        e_term,
        warnings,
    })
}

/// Where to stop the weighted transform integral `∫ x b̂(x)² dx`, plus an
/// optional accelerated tail beyond it.
fn weighted_tail_plan(b: &Symbol) -> Result<(f64, bool), Error> {
    match b.transform_decay() {
        TransformDecay::RapidBeyond { x_max } => Ok((x_max, false)),
        TransformDecay::PowerLaw { onset } => Ok((onset, true)),
        TransformDecay::Unknown => {
            // numeric scan: find X with x b̂(x)^2 below 1e-15 of the peak
            let mut peak = 0.0_f64;
            for k in 1..=16 {
                let x = k as f64 * 0.25;
                let v = x * cosine_transform(b, x).map_err(op_err)?.powi(2);
                peak = peak.max(v);
            }
            let mut x = 4.0;
            while x <= 512.0 {
                let v = x * cosine_transform(b, x).map_err(op_err)?.powi(2);
                if v < 1e-15 * peak.max(1e-300) {
                    return Ok((x, false));
                }
                x *= 2.0;
            }
            Err(Error::Symbol(SymbolError::DivergentTail(format!(
                "x b̂(x)^2 has not decayed by x = 512 for {}",
                b.name()
            ))))
        }
    }
}

fn op_err(e: SymbolError) -> Error {
    Error::Operator(crate::bessel_op::OperatorError::from(e))
}

/// Segmentation frequency for weighted transform tails: `b̂(x)²` of a
/// compactly supported symbol carries frequencies up to twice the support
/// edge.
fn tail_frequency(b: &Symbol) -> f64 {
    if b.support_cutoff().is_finite() {
        (2.0 * b.support_cutoff()).max(2.0)
    } else {
        2.0
    }
}

/// `log E`-part `½ ∫_0^∞ x b̂(x)² dx` by weighted quadrature of the
/// cosine transform.
pub fn e_constant(b: &Symbol) -> Result<f64, Error> {
    let (x_max, needs_tail) = weighted_tail_plan(b)?;
    let scheme = PanelScheme::new(vec![], 16)
        .map_err(|e| op_err(SymbolError::from(e)))?
        .with_oscillation_hint(2.0);
    let head = integrate(
        |x| {
            let t = cosine_transform(b, x).expect("transform in head range");
            x * t * t
        },
        0.0,
        x_max,
        &scheme,
    )
    .map_err(|e| op_err(SymbolError::from(e)))?;
    let tail = if needs_tail {
        integrate_oscillatory_tail(
            |x| {
                let t = cosine_transform(b, x).expect("transform in tail range");
                x * t * t
            },
            tail_frequency(b),
            x_max,
            8e-10,
        )
        .map_err(|e| op_err(SymbolError::from(e)))?
    } else {
        0.0
    };
    Ok(0.5 * (head + tail))
}

/// The same constant through the Hankel-trace route: `½ ∬ b̂(x+y)² dx dy`
/// over the quarter plane, as a genuinely two-dimensional iterated
/// quadrature. Must agree with [`e_constant`]; the substitution
/// `u = x + y` collapses one to the other exactly in the continuum.
pub fn e_constant_via_hankel_trace(b: &Symbol) -> Result<f64, Error> {
    let (cut, needs_tail) = weighted_tail_plan(b)?;
    let scheme = PanelScheme::new(vec![], 16)
        .map_err(|e| op_err(SymbolError::from(e)))?
        .with_oscillation_hint(2.0);

    let inner = |x: f64| -> Result<f64, Error> {
        let head = integrate(
            |y| {
                let t = cosine_transform(b, x + y).expect("transform");
                t * t
            },
            0.0,
            cut,
            &scheme,
        )
        .map_err(|e| op_err(SymbolError::from(e)))?;
        let tail = if needs_tail {
            // the outer integral accumulates inner errors over a long
            // range, so the tail tolerance must scale with the local
            // magnitude rather than stay absolute
            let local = cosine_transform(b, x + cut).map_err(op_err)?.powi(2);
            let tol = (1e-5 * local.abs()).max(2e-13);
            integrate_oscillatory_tail(
                |y| {
                    let t = cosine_transform(b, x + y).expect("transform");
                    t * t
                },
                tail_frequency(b),
                cut,
                tol,
            )
            .map_err(|e| op_err(SymbolError::from(e)))?
        } else {
            0.0
        };
        Ok(head + tail)
    };

    let head = integrate(|x| inner(x).expect("inner integral"), 0.0, cut, &scheme)
        .map_err(|e| op_err(SymbolError::from(e)))?;
    let tail = if needs_tail {
        let outer_tol = (1e-5 * inner(cut)?.abs()).max(1e-15);
        integrate_oscillatory_tail(
            |x| inner(x).expect("inner integral"),
            tail_frequency(b),
            cut,
            outer_tol,
        )
            .map_err(|e| op_err(SymbolError::from(e)))?
    } else {
        0.0
    };
    Ok(0.5 * (head + tail))
}

/// Two-term trace asymptote `(tau/π) ∫_0^∞ b − (nu/2) b(0)`; the linear
/// coefficient equals `tau·b̂(0)` exactly.
pub fn trace_asymptote(order: BesselOrder, b: &Symbol, tau: f64) -> Result<f64, Error> {
    let integral = b.integral_on_halfline().map_err(op_err)?;
    Ok(tau / core::f64::consts::PI * integral - 0.5 * order.nu() * b.value(0.0))
}

/// `log det(I + B_tau(e^b − 1)) − trace B_tau(b)` at one `tau`, with the
/// determinant converged to `tol` and the exact truncated trace (not the
/// asymptote). Converges to `log E[b]` as `tau → ∞`.
pub fn ratio_diagnostic(
    order: BesselOrder,
    b: &Symbol,
    tau: f64,
    tol: f64,
) -> Result<f64, Error> {
    let a = exp_symbol(b);
    let det = converged_logdet(
        |n| assemble(order, &a, tau, n, 2.0).map_err(Error::from),
        tol,
        16,
        1024,
    )?;
    if !det.converged {
        return Err(Error::NotConverged {
            est_error: det.est_error,
            n_final: det.n_final,
        });
    }
    if det.sign < 0 {
        return Err(Error::NegativeDeterminant);
    }
    let tr = trace_truncated(order, b, tau)?;
    Ok(det.logdet - tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{build_symbol, SymbolFamily};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian(beta: f64) -> Symbol {
        build_symbol(&SymbolFamily::Gaussian { beta }).unwrap()
    }

    #[test]
    fn zero_symbol_prediction() {
        let z = gaussian(0.0);
        let p = predict(BesselOrder::new(1.5).unwrap(), &z).unwrap();
        assert_eq!(p.linear_coeff, 0.0);
        assert_eq!(p.order_term, 0.0);
        assert_eq!(p.e_term, 0.0);
        assert_eq!(p.log_value(7.0), 0.0);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn gaussian_prediction_values() {
        // b̂(x) = (beta / 2√π) e^{-x²/4}: linear = beta/(2√π),
        // e_term = beta²/(8π)
        let p = predict(BesselOrder::new(0.0).unwrap(), &gaussian(0.5)).unwrap();
        assert_relative_eq!(p.linear_coeff, 0.14104739588693907, max_relative = 1e-12);
        assert_eq!(p.order_term, 0.0);
        assert_relative_eq!(p.e_term, 0.009947183943243459, max_relative = 1e-9);
        assert_relative_eq!(p.log_value(10.0), 1.4204211428126342, max_relative = 1e-9);
    }

    #[test]
    fn lorentzian_prediction_values() {
        // b̂(x) = e^{-x}/2 for beta = 1: linear 1/2, e_term 1/32;
        // order term -(2/2)·1 = -1 at nu = 2
        let p = predict(BesselOrder::new(2.0).unwrap(), &build_symbol(&SymbolFamily::Lorentzian { beta: 1.0 }).unwrap()).unwrap();
        assert_relative_eq!(p.linear_coeff, 0.5, max_relative = 1e-12);
        assert_relative_eq!(p.order_term, -1.0, max_relative = 1e-14);
        assert_relative_eq!(p.e_term, 0.03125, max_relative = 1e-9);
    }

    #[test]
    fn e_constant_reference_values() {
        assert_relative_eq!(
            e_constant(&gaussian(1.0)).unwrap(),
            0.039788735772973834,
            max_relative = 1e-9
        );
        // hat beta=1: ½ ∫ x ((1-cos x)/(π x²))² dx = ln 2 / (2π²)
        // (reference value from 40-digit quadrature); 1e-9 absolute
        let hat = build_symbol(&SymbolFamily::Hat { beta: 1.0 }).unwrap();
        assert_abs_diff_eq!(
            e_constant(&hat).unwrap(),
            0.035115246386341438,
            epsilon = 1e-9
        );
    }

    #[test]
    fn hankel_trace_route_agrees() {
        for fam in [
            SymbolFamily::Gaussian { beta: 1.0 },
            SymbolFamily::Lorentzian { beta: 2.0 },
            SymbolFamily::Hat { beta: 1.0 },
        ] {
            let b = build_symbol(&fam).unwrap();
            let one_d = e_constant(&b).unwrap();
            let two_d = e_constant_via_hankel_trace(&b).unwrap();
            assert!(
                (one_d - two_d).abs() <= 1e-8,
                "{fam:?}: 1-D {one_d} vs 2-D {two_d}"
            );
        }
    }

    #[test]
    fn trace_asymptote_values() {
        let b = gaussian(0.5);
        let v = trace_asymptote(BesselOrder::new(1.0).unwrap(), &b, 10.0).unwrap();
        assert_relative_eq!(v, 1.1604739588693907, max_relative = 1e-12);

        // nu = 0: no dependence on b(0)
        let v0 = trace_asymptote(BesselOrder::new(0.0).unwrap(), &b, 10.0).unwrap();
        let integral = b.integral_on_halfline().unwrap();
        assert_abs_diff_eq!(v0, 10.0 / core::f64::consts::PI * integral, epsilon = 1e-15);
    }

    #[test]
    fn prediction_scaling_structure() {
        // b -> 2b doubles linear and order terms, quadruples e_term
        let o = BesselOrder::new(1.0).unwrap();
        let p1 = predict(o, &gaussian(0.3)).unwrap();
        let p2 = predict(o, &gaussian(0.6)).unwrap();
        assert_relative_eq!(p2.linear_coeff, 2.0 * p1.linear_coeff, max_relative = 1e-12);
        assert_relative_eq!(p2.order_term, 2.0 * p1.order_term, max_relative = 1e-12);
        assert_relative_eq!(p2.e_term, 4.0 * p1.e_term, max_relative = 1e-9);
    }

    #[test]
    fn linear_coeff_is_transform_at_zero() {
        let b = gaussian(0.8);
        let p = predict(BesselOrder::new(0.0).unwrap(), &b).unwrap();
        assert_eq!(p.linear_coeff, cosine_transform(&b, 0.0).unwrap());
        let integral = b.integral_on_halfline().unwrap();
        assert_abs_diff_eq!(
            p.linear_coeff,
            integral / core::f64::consts::PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ratio_diagnostic_zero_symbol() {
        let v = ratio_diagnostic(BesselOrder::new(0.5).unwrap(), &gaussian(0.0), 4.0, 1e-8).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn indicator_weighted_tail_diverges() {
        // b̂ ~ sin(x)/x is not in the weighted L², so the scan must reject
        let ind = build_symbol(&SymbolFamily::Indicator { beta: 1.0 }).unwrap();
        assert!(e_constant(&ind).is_err());
    }
}
