//! Symbol functions `b` (and `a = e^b - 1`) on `[0, ∞)`, with the implicit
//! even extension `b(-t) = b(t)`, their cosine transforms
//! `b̂(x) = (1/π) ∫_0^∞ cos(xt) b(t) dt`, and numerical validation of the
//! smoothness/decay hypotheses the asymptotic formula needs.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::{integrate, integrate_oscillatory_tail, PanelScheme, QuadratureError};

const PI: f64 = core::f64::consts::PI;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("unknown symbol family '{0}'")]
    UnknownFamily(String),
    #[error("bad symbol parameter: {0}")]
    BadParameter(String),
    #[error("table symbol: {0}")]
    Table(String),
    #[error("symbol is not absolutely integrable: {0}")]
    NotIntegrable(String),
    #[error("transform tail did not resolve: {0}")]
    Transform(#[from] QuadratureError),
    #[error("weighted transform tail diverges: {0}")]
    DivergentTail(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What remains of `|b|` beyond `numeric_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Nothing: either compact support or decayed below 1e-16 of scale.
    None,
    /// `|b(t)| ~ C t^{-p}` with `p > 1`; transforms use the accelerated
    /// oscillatory engine on the tail.
    PowerLaw { p: f64 },
}

/// Decay model of the cosine transform, used to bound the weighted-tail
/// integrals `∫ x b̂(x)^2 dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformDecay {
    /// `|b̂(x)|` negligible beyond `x_max` (relative 1e-16).
    RapidBeyond { x_max: f64 },
    /// `b̂(x) ~ x^{-2}`-type algebraic decay; weighted tails need the
    /// accelerated engine starting at `onset`.
    PowerLaw { onset: f64 },
    /// No model; callers scan numerically and may reject.
    Unknown,
}

/// A symbol function on `[0, ∞)`.
///
/// Immutable after construction; evaluation and transforms are pure, so
/// concurrent use is unrestricted.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    eval: Eval,
    d1: Option<Eval>,
    d2: Option<Eval>,
    breakpoints: Vec<f64>,
    support_cutoff: f64,
    numeric_cutoff: f64,
    tail: Tail,
    analytic_transform: Option<Eval>,
    transform_decay: TransformDecay,
    integral_on_halfline: Option<f64>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("breakpoints", &self.breakpoints)
            .field("support_cutoff", &self.support_cutoff)
            .field("tail", &self.tail)
            .finish()
    }
}

impl Symbol {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Value at `t`; the even extension makes negative arguments valid.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        if t > self.support_cutoff {
            0.0
        } else {
            (self.eval)(t)
        }
    }

    pub fn d1(&self, t: f64) -> Option<f64> {
        let t = t.abs();
        if t > self.support_cutoff {
            return Some(0.0);
        }
        self.d1.as_ref().map(|f| f(t))
    }

    pub fn d2(&self, t: f64) -> Option<f64> {
        let t = t.abs();
        if t > self.support_cutoff {
            return Some(0.0);
        }
        self.d2.as_ref().map(|f| f(t))
    }

    pub fn has_derivatives(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    /// Derivative-discontinuity points `0 = t_0 < t_1 < ... < t_N`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn support_cutoff(&self) -> f64 {
        self.support_cutoff
    }

    /// Finite `T` capturing everything except the modeled tail.
    pub fn numeric_cutoff(&self) -> f64 {
        self.numeric_cutoff
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn transform_decay(&self) -> TransformDecay {
        self.transform_decay
    }

    pub fn has_analytic_transform(&self) -> bool {
        self.analytic_transform.is_some()
    }

    /// `∫_0^∞ b(t) dt`, analytic when the family admits it, else by
    /// quadrature.
    pub fn integral_on_halfline(&self) -> Result<f64, SymbolError> {
        if let Some(v) = self.integral_on_halfline {
            return Ok(v);
        }
        halfline_integral(self)
    }

    /// Rough magnitude, used to scale validation tolerances.
    fn scale(&self) -> f64 {
        let mut s = 0.0_f64;
        let t_max = self.numeric_cutoff;
        for k in 0..=64 {
            s = s.max(self.value(t_max * k as f64 / 64.0).abs());
        }
        s
    }

    /// Linear combination `alpha * b1 + b2`.
    pub fn scaled_sum(alpha: f64, b1: &Symbol, b2: &Symbol) -> Result<Symbol, SymbolError> {
        if !alpha.is_finite() {
            return Err(SymbolError::BadParameter(format!("alpha = {alpha}")));
        }
        let mut breakpoints = b1.breakpoints.clone();
        for &b in &b2.breakpoints {
            if !breakpoints.iter().any(|&x| (x - b).abs() < 1e-12) {
                breakpoints.push(b);
            }
        }
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (e1, e2) = (b1.clone(), b2.clone());
        let eval: Eval = Arc::new(move |t| alpha * e1.value(t) + e2.value(t));
        let d1 = match (&b1.d1, &b2.d1) {
            (Some(_), Some(_)) => {
                let (c1, c2) = (b1.clone(), b2.clone());
                Some(Arc::new(move |t: f64| alpha * c1.d1(t).unwrap() + c2.d1(t).unwrap()) as Eval)
            }
            _ => None,
        };
        let d2 = match (&b1.d2, &b2.d2) {
            (Some(_), Some(_)) => {
                let (c1, c2) = (b1.clone(), b2.clone());
                Some(Arc::new(move |t: f64| alpha * c1.d2(t).unwrap() + c2.d2(t).unwrap()) as Eval)
            }
            _ => None,
        };
        let analytic_transform = match (&b1.analytic_transform, &b2.analytic_transform) {
            (Some(t1), Some(t2)) => {
                let (t1, t2) = (Arc::clone(t1), Arc::clone(t2));
                Some(Arc::new(move |x: f64| alpha * t1(x) + t2(x)) as Eval)
            }
            _ => None,
        };
        let integral_on_halfline = match (b1.integral_on_halfline, b2.integral_on_halfline) {
            (Some(i1), Some(i2)) => Some(alpha * i1 + i2),
            _ => None,
        };
        let tail = match (b1.tail, b2.tail) {
            (Tail::None, Tail::None) => Tail::None,
            (Tail::PowerLaw { p }, Tail::None) | (Tail::None, Tail::PowerLaw { p }) => {
                Tail::PowerLaw { p }
            }
            (Tail::PowerLaw { p: p1 }, Tail::PowerLaw { p: p2 }) => {
                Tail::PowerLaw { p: p1.min(p2) }
            }
        };
        let transform_decay = merge_transform_decay(b1.transform_decay, b2.transform_decay);
        Ok(Symbol {
            name: format!("{}*{} + {}", alpha, b1.name, b2.name),
            eval,
            d1,
            d2,
            breakpoints,
            support_cutoff: b1.support_cutoff.max(b2.support_cutoff),
            numeric_cutoff: b1.numeric_cutoff.max(b2.numeric_cutoff),
            tail,
            analytic_transform,
            transform_decay,
            integral_on_halfline,
        })
    }

    /// Table symbol from two-column numeric text `t  b(t)` with strictly
    /// increasing `t` starting at 0; lines starting with `#` are comments.
    pub fn from_table_text(text: &str) -> Result<Symbol, SymbolError> {
        let mut knots = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (t, v) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(SymbolError::Table(format!(
                        "line {}: expected two columns, got '{line}'",
                        lineno + 1
                    )))
                }
            };
            let t: f64 = t.parse().map_err(|_| {
                SymbolError::Table(format!("line {}: bad abscissa '{t}'", lineno + 1))
            })?;
            let v: f64 = v.parse().map_err(|_| {
                SymbolError::Table(format!("line {}: bad value '{v}'", lineno + 1))
            })?;
            knots.push((t, v));
        }
        build_symbol(&SymbolFamily::Table { knots })
    }

    pub fn from_table_path(path: &Path) -> Result<Symbol, SymbolError> {
        let text = std::fs::read_to_string(path)?;
        Symbol::from_table_text(&text)
    }
}

fn merge_transform_decay(a: TransformDecay, b: TransformDecay) -> TransformDecay {
    use TransformDecay::*;
    match (a, b) {
        (RapidBeyond { x_max: xa }, RapidBeyond { x_max: xb }) => RapidBeyond { x_max: xa.max(xb) },
        (RapidBeyond { .. }, PowerLaw { onset }) | (PowerLaw { onset }, RapidBeyond { .. }) => {
            PowerLaw { onset }
        }
        (PowerLaw { onset: oa }, PowerLaw { onset: ob }) => PowerLaw { onset: oa.max(ob) },
        _ => Unknown,
    }
}

/// Built-in symbol families.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolFamily {
    /// `b(t) = beta * exp(-t^2)`
    Gaussian { beta: f64 },
    /// `b(t) = beta / (1 + t^2)`
    Lorentzian { beta: f64 },
    /// `b(t) = beta * max(0, 1 - t)`
    Hat { beta: f64 },
    /// `b(t) = beta` on `[0, 1]`, else 0 (kernel tests only; discontinuous)
    Indicator { beta: f64 },
    /// Piecewise-cubic interpolant of sampled data
    Table { knots: Vec<(f64, f64)> },
}

impl SymbolFamily {
    /// Construct from a config-style family name and parameter list.
    pub fn from_config(
        name: &str,
        beta: Option<f64>,
        table: Option<Vec<(f64, f64)>>,
    ) -> Result<SymbolFamily, SymbolError> {
        let need_beta = || {
            beta.ok_or_else(|| SymbolError::BadParameter(format!("family '{name}' needs symbol.beta")))
        };
        match name {
            "gaussian" => Ok(SymbolFamily::Gaussian { beta: need_beta()? }),
            "lorentzian" => Ok(SymbolFamily::Lorentzian { beta: need_beta()? }),
            "hat" => Ok(SymbolFamily::Hat { beta: need_beta()? }),
            "indicator" => Ok(SymbolFamily::Indicator { beta: need_beta()? }),
            "table" => table
                .map(|knots| SymbolFamily::Table { knots })
                .ok_or_else(|| SymbolError::BadParameter("family 'table' needs symbol.path".into())),
            other => Err(SymbolError::UnknownFamily(other.to_string())),
        }
    }
}

/// Build a symbol from a named family.
pub fn build_symbol(family: &SymbolFamily) -> Result<Symbol, SymbolError> {
    match *family {
        SymbolFamily::Gaussian { beta } => {
            check_finite(beta)?;
            Ok(Symbol {
                name: format!("gaussian(beta={beta})"),
                eval: Arc::new(move |t| beta * (-t * t).exp()),
                d1: Some(Arc::new(move |t| -2.0 * beta * t * (-t * t).exp())),
                d2: Some(Arc::new(move |t| beta * (4.0 * t * t - 2.0) * (-t * t).exp())),
                breakpoints: vec![0.0],
                support_cutoff: f64::INFINITY,
                numeric_cutoff: 8.5,
                tail: Tail::None,
                analytic_transform: Some(Arc::new(move |x: f64| {
                    beta / (2.0 * PI.sqrt()) * (-x * x / 4.0).exp()
                })),
                transform_decay: TransformDecay::RapidBeyond { x_max: 16.0 },
                integral_on_halfline: Some(beta * PI.sqrt() / 2.0),
            })
        }
        SymbolFamily::Lorentzian { beta } => {
            check_finite(beta)?;
            Ok(Symbol {
                name: format!("lorentzian(beta={beta})"),
                eval: Arc::new(move |t| beta / (1.0 + t * t)),
                d1: Some(Arc::new(move |t| {
                    let d = 1.0 + t * t;
                    -2.0 * beta * t / (d * d)
                })),
                d2: Some(Arc::new(move |t| {
                    let d = 1.0 + t * t;
                    beta * (6.0 * t * t - 2.0) / (d * d * d)
                })),
                breakpoints: vec![0.0],
                support_cutoff: f64::INFINITY,
                numeric_cutoff: 50.0,
                tail: Tail::PowerLaw { p: 2.0 },
                analytic_transform: Some(Arc::new(move |x: f64| beta / 2.0 * (-x.abs()).exp())),
                transform_decay: TransformDecay::RapidBeyond { x_max: 25.0 },
                integral_on_halfline: Some(beta * PI / 2.0),
            })
        }
        SymbolFamily::Hat { beta } => {
            check_finite(beta)?;
            Ok(Symbol {
                name: format!("hat(beta={beta})"),
                eval: Arc::new(move |t| beta * (1.0 - t).max(0.0)),
                d1: Some(Arc::new(move |t| if t < 1.0 { -beta } else { 0.0 })),
                d2: Some(Arc::new(move |_| 0.0)),
                breakpoints: vec![0.0, 1.0],
                support_cutoff: 1.0,
                numeric_cutoff: 1.0,
                tail: Tail::None,
                analytic_transform: Some(Arc::new(move |x: f64| {
                    let x = x.abs();
                    if x < 1e-3 {
                        // (1 - cos x)/x^2 = 1/2 - x^2/24 + x^4/720 - ...
                        beta / PI * (0.5 - x * x / 24.0 + x.powi(4) / 720.0)
                    } else {
                        beta * (1.0 - x.cos()) / (PI * x * x)
                    }
                })),
                transform_decay: TransformDecay::PowerLaw { onset: 20.0 },
                integral_on_halfline: Some(beta / 2.0),
            })
        }
        SymbolFamily::Indicator { beta } => {
            check_finite(beta)?;
            Ok(Symbol {
                name: format!("indicator(beta={beta})"),
                eval: Arc::new(move |t| if t <= 1.0 { beta } else { 0.0 }),
                d1: Some(Arc::new(|_| 0.0)),
                d2: Some(Arc::new(|_| 0.0)),
                breakpoints: vec![0.0, 1.0],
                support_cutoff: 1.0,
                numeric_cutoff: 1.0,
                tail: Tail::None,
                analytic_transform: Some(Arc::new(move |x: f64| {
                    let x = x.abs();
                    if x < 1e-3 {
                        beta / PI * (1.0 - x * x / 6.0 + x.powi(4) / 120.0)
                    } else {
                        beta * x.sin() / (PI * x)
                    }
                })),
                transform_decay: TransformDecay::Unknown,
                integral_on_halfline: Some(beta),
            })
        }
        SymbolFamily::Table { ref knots } => table_symbol(knots),
    }
}

fn check_finite(beta: f64) -> Result<(), SymbolError> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(SymbolError::BadParameter(format!("beta = {beta}")))
    }
}

/// `a = e^b - 1`, inheriting breakpoints and decay structure from `b`.
pub fn exp_symbol(b: &Symbol) -> Symbol {
    let b0 = b.clone();
    let eval: Eval = Arc::new(move |t| b0.value(t).exp_m1());
    let d1 = b.d1.as_ref().map(|_| {
        let c = b.clone();
        Arc::new(move |t: f64| c.d1(t).unwrap() * c.value(t).exp()) as Eval
    });
    let d2 = b.d2.as_ref().and(b.d1.as_ref()).map(|_| {
        let c = b.clone();
        Arc::new(move |t: f64| {
            let b1 = c.d1(t).unwrap();
            (c.d2(t).unwrap() + b1 * b1) * c.value(t).exp()
        }) as Eval
    });
    Symbol {
        name: format!("exp({}) - 1", b.name),
        eval,
        d1,
        d2,
        breakpoints: b.breakpoints.clone(),
        support_cutoff: b.support_cutoff,
        numeric_cutoff: b.numeric_cutoff,
        tail: b.tail,
        analytic_transform: None,
        transform_decay: b.transform_decay,
        integral_on_halfline: None,
    }
}

/// Panel plan over `[0, numeric_cutoff]` honoring the symbol's breakpoints.
/// A width floor of ~pi/2 keeps non-oscillatory integrands resolved too.
fn head_scheme(sym: &Symbol, frequency: f64) -> Result<PanelScheme, SymbolError> {
    let interior: Vec<f64> = sym
        .breakpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < sym.numeric_cutoff)
        .collect();
    Ok(PanelScheme::new(interior, 16)?.with_oscillation_hint(frequency.max(2.0)))
}

/// `∫_0^∞ b(t) dt` by quadrature (head panels plus modeled tail).
fn halfline_integral(sym: &Symbol) -> Result<f64, SymbolError> {
    let scheme = head_scheme(sym, 0.0)?;
    let head = integrate(|t| sym.value(t), 0.0, sym.numeric_cutoff, &scheme)?;
    let tail = match sym.tail {
        Tail::None => 0.0,
        Tail::PowerLaw { .. } => compactified_tail(sym, sym.numeric_cutoff)?,
    };
    Ok(head + tail)
}

/// `∫_T^∞ b(t) dt` through the substitution `t = T + u/(1-u)`; the mapped
/// integrand is smooth up to `u = 1` for `p >= 2` decay.
fn compactified_tail(sym: &Symbol, t_from: f64) -> Result<f64, SymbolError> {
    // the mapped integrand varies on the 1/t_from scale near u = 0
    let scheme = PanelScheme::new(vec![], 24)?.with_oscillation_hint(8.0 * core::f64::consts::PI);
    Ok(integrate(
        |u| {
            let om = 1.0 - u;
            let t = t_from + u / om;
            sym.value(t) / (om * om)
        },
        0.0,
        1.0 - 1e-12,
        &scheme,
    )?)
}

/// Oscillatory transform tail `∫_T^∞ trig(x t) b(t) dt` for `x > 0`.
///
/// For very low frequencies the oscillation onset `1/x` is bridged with
/// log-spaced panels first, so every engine segment sees a slowly varying
/// envelope.
fn oscillatory_transform_tail(
    sym: &Symbol,
    x: f64,
    trig: impl Fn(f64) -> f64 + Copy,
    t_from: f64,
) -> Result<f64, SymbolError> {
    let mut start = t_from;
    let mut bridge = 0.0;
    if x * t_from < 1.0 {
        // phase below one radian: not yet oscillatory; cover [T, 1/x] with
        // log-spaced panels
        let t_to = 1.0 / x;
        let mut edges = Vec::new();
        let mut t = t_from;
        while t < t_to {
            edges.push(t);
            t *= 2.0;
        }
        edges.push(t_to);
        let scheme = PanelScheme::new(vec![], 16)?;
        for w in edges.windows(2) {
            bridge += integrate(|t| trig(x * t) * sym.value(t), w[0], w[1], &scheme)?;
        }
        start = t_to;
    }
    let tail = integrate_oscillatory_tail(|t| trig(x * t) * sym.value(t), x, start, 1e-13)?;
    Ok(bridge + tail)
}

/// Cosine transform `b̂(x) = (1/π) ∫_0^∞ cos(xt) b(t) dt`, using the
/// analytic form when the family carries one. Even in `x`.
pub fn cosine_transform(sym: &Symbol, x: f64) -> Result<f64, SymbolError> {
    if let Some(t) = &sym.analytic_transform {
        return Ok(t(x.abs()));
    }
    cosine_transform_numeric(sym, x)
}

/// Cosine transform by quadrature, regardless of any attached analytic
/// form (the independent path used by cross-checks).
pub fn cosine_transform_numeric(sym: &Symbol, x: f64) -> Result<f64, SymbolError> {
    let x = x.abs();
    let scheme = head_scheme(sym, x)?;
    let head = integrate(|t| (x * t).cos() * sym.value(t), 0.0, sym.numeric_cutoff, &scheme)?;
    let tail = match sym.tail {
        Tail::None => 0.0,
        Tail::PowerLaw { .. } => {
            if x == 0.0 {
                compactified_tail(sym, sym.numeric_cutoff)?
            } else {
                oscillatory_transform_tail(sym, x, f64::cos, sym.numeric_cutoff)?
            }
        }
    };
    Ok((head + tail) / PI)
}

/// Sine transform `(1/π) ∫_0^∞ sin(xt) b(t) dt` (numeric; odd in `x`).
pub fn sine_transform(sym: &Symbol, x: f64) -> Result<f64, SymbolError> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let sign = x.signum();
    let x = x.abs();
    let scheme = head_scheme(sym, x)?;
    let head = integrate(|t| (x * t).sin() * sym.value(t), 0.0, sym.numeric_cutoff, &scheme)?;
    let tail = match sym.tail {
        Tail::None => 0.0,
        Tail::PowerLaw { .. } => oscillatory_transform_tail(sym, x, f64::sin, sym.numeric_cutoff)?,
    };
    Ok(sign * (head + tail) / PI)
}

/// Outcome of checking the smoothness/decay hypotheses on a symbol.
/// `None` entries mean the check could not run (missing derivative
/// evaluators).
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub continuous: Option<bool>,
    pub piecewise_c2: Option<bool>,
    pub vanishes_at_infinity: Option<bool>,
    pub weighted_d1_integrable: Option<bool>,
    pub d2_integrable: Option<bool>,
}

impl HypothesisReport {
    /// True iff every check ran and passed.
    pub fn overall(&self) -> bool {
        [
            self.continuous,
            self.piecewise_c2,
            self.vanishes_at_infinity,
            self.weighted_d1_integrable,
            self.d2_integrable,
        ]
        .iter()
        .all(|f| *f == Some(true))
    }
}

/// Numerically check the hypotheses: continuity, piecewise C², decay at
/// infinity, `(1+t)^{-1/2} b' ∈ L¹`, `b'' ∈ L¹`. Failures are report
/// contents, not errors.
pub fn validate_hypotheses(sym: &Symbol) -> HypothesisReport {
    let scale = sym.scale().max(1e-300);
    let h = 1e-7 * sym.numeric_cutoff.max(1.0);

    // continuity across interior breakpoints and at a compact support edge
    let mut continuous = true;
    let mut probes: Vec<f64> = sym
        .breakpoints
        .iter()
        .copied()
        .filter(|&t| t > 0.0)
        .collect();
    if sym.support_cutoff.is_finite() {
        probes.push(sym.support_cutoff);
    }
    for t in probes {
        let jump = (sym.value(t + h) - sym.value(t - h)).abs();
        if jump > 1e-4 * scale + 20.0 * h * scale {
            continuous = false;
        }
    }

    // decay at infinity
    let vanishes = match sym.tail {
        Tail::None => true,
        Tail::PowerLaw { .. } => {
            let far = sym.numeric_cutoff * 1e4;
            sym.value(far).abs() <= 1e-4 * scale
        }
    };

    let (piecewise_c2, weighted_d1, d2_int) = if sym.has_derivatives() {
        let inner: Vec<f64> = sym
            .breakpoints
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < sym.numeric_cutoff)
            .collect();
        let scheme = PanelScheme::new(inner, 16)
            .expect("breakpoints are increasing")
            .with_oscillation_hint(2.0);
        let c2 = {
            // finite second derivative between breakpoints
            let mut ok = true;
            for k in 1..64 {
                let t = sym.numeric_cutoff * k as f64 / 64.0;
                if let Some(v) = sym.d2(t) {
                    if !v.is_finite() {
                        ok = false;
                    }
                }
            }
            Some(ok)
        };
        let wd1 = integrate(
            |t| sym.d1(t).unwrap().abs() / (1.0 + t).sqrt(),
            0.0,
            sym.numeric_cutoff,
            &scheme,
        )
        .ok()
        .map(|v| {
            let tail_ok = match sym.tail {
                Tail::None => true,
                // |b'| ~ p C / t^{p+1} beyond the cutoff: integrable
                Tail::PowerLaw { p } => p > 0.5,
            };
            v.is_finite() && v <= 1e6 * scale.max(1.0) && tail_ok
        });
        let d2i = integrate(
            |t| sym.d2(t).unwrap().abs(),
            0.0,
            sym.numeric_cutoff,
            &scheme,
        )
        .ok()
        .map(|v| v.is_finite() && v <= 1e7 * scale.max(1.0));
        (c2, wd1, d2i)
    } else {
        (None, None, None)
    };

    HypothesisReport {
        continuous: Some(continuous),
        piecewise_c2,
        vanishes_at_infinity: Some(vanishes),
        weighted_d1_integrable: weighted_d1,
        d2_integrable: d2_int,
    }
}

fn table_symbol(knots: &[(f64, f64)]) -> Result<Symbol, SymbolError> {
    if knots.len() < 3 {
        return Err(SymbolError::Table("need at least 3 knots".into()));
    }
    if knots[0].0 != 0.0 {
        return Err(SymbolError::Table(format!(
            "first abscissa must be 0, got {}",
            knots[0].0
        )));
    }
    if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(SymbolError::Table("abscissas must be strictly increasing".into()));
    }
    if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(SymbolError::Table("non-finite entry".into()));
    }
    let spline = Arc::new(NaturalSpline::fit(knots));
    let cutoff = knots.last().unwrap().0;
    let breakpoints: Vec<f64> = knots.iter().map(|&(t, _)| t).collect();
    let s1 = Arc::clone(&spline);
    let s2 = Arc::clone(&spline);
    let s3 = Arc::clone(&spline);
    Ok(Symbol {
        name: format!("table({} knots)", knots.len()),
        eval: Arc::new(move |t| s1.value(t)),
        d1: Some(Arc::new(move |t| s2.deriv1(t))),
        d2: Some(Arc::new(move |t| s3.deriv2(t))),
        breakpoints,
        support_cutoff: cutoff,
        numeric_cutoff: cutoff,
        tail: Tail::None,
        analytic_transform: None,
        // continuous piecewise-C² with a support edge: b̂ ~ x^{-2}
        transform_decay: TransformDecay::PowerLaw {
            onset: 20.0_f64.max(10.0 * cutoff),
        },
        integral_on_halfline: None,
    })
}

/// Natural cubic spline: second derivatives vanish at the end knots, so
/// the interpolant is C² inside and the knots are the only derivative
/// breakpoints.
struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>, // second derivatives at knots
}

impl NaturalSpline {
    fn fit(knots: &[(f64, f64)]) -> NaturalSpline {
        let n = knots.len();
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        // tridiagonal system for interior second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            sup[i] = h1;
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        // Thomas algorithm
        let mut m = vec![0.0; n];
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        NaturalSpline { xs, ys, m }
    }

    fn segment(&self, t: f64) -> usize {
        match self.xs.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    fn value(&self, t: f64) -> f64 {
        if t > *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(t);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - t) / h;
        let b = (t - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn deriv1(&self, t: f64) -> f64 {
        if t > *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(t);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - t) / h;
        let b = (t - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    fn deriv2(&self, t: f64) -> f64 {
        if t > *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = self.segment(t);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - t) / h;
        let b = (t - self.xs[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }
}
