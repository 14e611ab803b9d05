//! Gauss-Legendre rules, composite-panel integration on finite intervals,
//! and accelerated evaluation of conditionally convergent oscillatory
//! integrals on `[start, inf)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("rule size must be in 1..=10000, got {0}")]
    RuleSize(usize),
    #[error("integration bounds must satisfy a < b, got [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("invalid panel scheme: {0}")]
    BadScheme(String),
    #[error("oscillatory frequency must be positive and finite, got {0}")]
    BadFrequency(f64),
    #[error(
        "oscillatory tail failed to converge after {segments} segments: \
         partial value {partial}, estimated residual {residual}"
    )]
    TailNotConverged {
        segments: usize,
        partial: f64,
        residual: f64,
    },
}

/// A Gauss-Legendre rule on (-1, 1): nodes strictly increasing, symmetric
/// about 0, weights positive with sum 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply the rule to `f` on `[a, b]`.
    pub fn apply<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: &F) -> Result<f64, QuadratureError> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = mid + half * x;
            let v = f(t);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite(t));
            }
            acc += w * v;
        }
        Ok(acc * half)
    }
}

/// Legendre polynomial value and derivative at `x` via the three-term
/// recurrence.
fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn build_gauss_legendre(n: usize) -> QuadRule {
    if n == 1 {
        return QuadRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n / 2;
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pd(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_pd(n, 0.0);
        nodes[m] = 0.0;
        weights[m] = 2.0 / (d * d);
    }
    QuadRule { nodes, weights }
}

fn rule_cache() -> &'static RwLock<HashMap<usize, Arc<QuadRule>>> {
    static CACHE: std::sync::OnceLock<RwLock<HashMap<usize, Arc<QuadRule>>>> =
        std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Gauss-Legendre rule of size `n`, cached for reuse.
pub fn gauss_legendre(n: usize) -> Result<Arc<QuadRule>, QuadratureError> {
    if n == 0 || n > 10_000 {
        return Err(QuadratureError::RuleSize(n));
    }
    if let Some(r) = rule_cache().read().unwrap().get(&n) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(build_gauss_legendre(n));
    rule_cache()
        .write()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

/// Composite-panel plan: panel boundaries honor the listed breakpoints,
/// panel widths are capped at `pi / frequency` when an oscillation hint is
/// set, and an optional geometric grading refines toward the left endpoint
/// (for integrands with an algebraic singularity there).
#[derive(Debug, Clone)]
pub struct PanelScheme {
    breakpoints: Vec<f64>,
    points_per_panel: usize,
    oscillation_frequency_hint: f64,
    left_grading_levels: usize,
}

impl PanelScheme {
    pub fn new(breakpoints: Vec<f64>, points_per_panel: usize) -> Result<Self, QuadratureError> {
        if points_per_panel == 0 {
            return Err(QuadratureError::BadScheme(
                "points_per_panel must be positive".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(QuadratureError::BadScheme(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        Ok(PanelScheme {
            breakpoints,
            points_per_panel,
            oscillation_frequency_hint: 0.0,
            left_grading_levels: 0,
        })
    }

    pub fn with_oscillation_hint(mut self, frequency: f64) -> Self {
        self.oscillation_frequency_hint = frequency.max(0.0);
        self
    }

    /// Subdivide the leftmost panel geometrically (ratio 1/2, `levels`
    /// times). Needed when the integrand behaves like t^gamma, gamma > -1,
    /// at the left endpoint.
    pub fn with_left_grading(mut self, levels: usize) -> Self {
        self.left_grading_levels = levels.min(300);
        self
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    /// Panel edges covering [a, b].
    pub(crate) fn panel_edges(&self, a: f64, b: f64) -> Vec<f64> {
        let mut edges = vec![a];
        for &bp in &self.breakpoints {
            if bp > a && bp < b {
                edges.push(bp);
            }
        }
        edges.push(b);

        // grade the first panel toward a
        if self.left_grading_levels > 0 {
            let first_end = edges[1];
            let width = first_end - a;
            let mut graded = vec![a];
            for j in (0..self.left_grading_levels).rev() {
                graded.push(a + width * 0.5_f64.powi(j as i32 + 1));
            }
            graded.extend_from_slice(&edges[1..]);
            edges = graded;
        }

        // cap panel widths at ~pi/frequency
        if self.oscillation_frequency_hint > 0.0 {
            let cap = core::f64::consts::PI / self.oscillation_frequency_hint;
            let mut refined = vec![edges[0]];
            for w in edges.windows(2) {
                let width = w[1] - w[0];
                let parts = (width / cap).ceil().max(1.0) as usize;
                for p in 1..=parts {
                    refined.push(w[0] + width * p as f64 / parts as f64);
                }
            }
            edges = refined;
        }
        edges
    }
}

/// Composite Gauss-Legendre integral of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    scheme: &PanelScheme,
) -> Result<f64, QuadratureError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::BadInterval(a, b));
    }
    let rule = gauss_legendre(scheme.points_per_panel)?;
    let edges = scheme.panel_edges(a, b);
    let mut acc = 0.0;
    for w in edges.windows(2) {
        acc += rule.apply(w[0], w[1], &f)?;
    }
    Ok(acc)
}

/// Wynn epsilon extrapolation in the QUADPACK `dqelg` formulation: the two
/// lower diagonals of the epsilon table are updated in place as partial
/// sums arrive, and the error estimate compares the extrapolation against
/// the results of the three previous calls. Handles alternating segment
/// series as well as slowly decaying monotone components (the DC part of
/// an oscillation).
struct EpsilonTable {
    table: Vec<f64>,
    n: usize,
    res3la: [f64; 3],
    nres: usize,
    /// Set when three successive table entries agree to machine accuracy;
    /// the extrapolation is then final.
    exact: bool,
}

const EPS_TABLE_LIMIT: usize = 50;

impl EpsilonTable {
    fn new() -> Self {
        EpsilonTable {
            table: vec![0.0; EPS_TABLE_LIMIT + 3],
            n: 0,
            res3la: [0.0; 3],
            nres: 0,
            exact: false,
        }
    }

    fn append(&mut self, sum: f64) {
        self.table[self.n] = sum;
        self.n += 1;
    }

    /// Extrapolated limit and its error estimate. The estimate is only
    /// meaningful from the fourth call on; before that it is `f64::MAX`.
    ///
    /// `count` below follows the 1-based element count of the reference
    /// formulation; array accesses subtract one.
    fn extrapolate(&mut self) -> (f64, f64) {
        let eps = f64::EPSILON;
        self.nres += 1;
        let count = self.n;
        let mut result = self.table[count - 1];
        let mut abserr = f64::MAX;
        if count < 3 {
            return self.finish(result, abserr);
        }
        let num = count;
        let mut nfin = count;
        self.table[count + 1] = self.table[count - 1];
        let newelm = (count - 1) / 2;
        self.table[count - 1] = f64::MAX;
        let mut k1 = count;
        for i in 1..=newelm {
            let e2 = self.table[k1 + 1];
            let e0 = self.table[k1 - 3];
            let e1 = self.table[k1 - 2];
            let e1abs = e1.abs();
            let delta2 = e2 - e1;
            let err2 = delta2.abs();
            let tol2 = e2.abs().max(e1abs) * eps;
            let delta3 = e1 - e0;
            let err3 = delta3.abs();
            let tol3 = e1abs.max(e0.abs()) * eps;
            if err2 <= tol2 && err3 <= tol3 {
                // convergence to machine accuracy
                self.exact = true;
                let r = e2;
                return (r, (err2 + err3).max(5.0 * eps * r.abs()));
            }
            let e3 = self.table[k1 - 1];
            self.table[k1 - 1] = e1;
            let delta1 = e1 - e3;
            let err1 = delta1.abs();
            let tol1 = e1abs.max(e3.abs()) * eps;
            // degenerate differences or irregular growth: drop the tail
            // of the table and extrapolate with what remains
            if err1 <= tol1 || err2 <= tol2 || err3 <= tol3 {
                nfin = 2 * i - 1;
                break;
            }
            let ss = delta1.recip() + delta2.recip() - delta3.recip();
            if (ss * e1).abs() <= 1e-4 {
                nfin = 2 * i - 1;
                break;
            }
            let res = e1 + ss.recip();
            self.table[k1 - 1] = res;
            k1 -= 2;
            let error = err2 + (res - e2).abs() + err3;
            if error <= abserr {
                abserr = error;
                result = res;
            }
        }
        // shift the two stored diagonals for the next call
        if nfin == EPS_TABLE_LIMIT {
            nfin = 2 * (EPS_TABLE_LIMIT / 2) - 1;
        }
        let mut ib = if num % 2 == 0 { 1 } else { 0 };
        for _ in 0..=newelm {
            self.table[ib] = self.table[ib + 2];
            ib += 2;
        }
        if num != nfin {
            for j in 0..nfin {
                self.table[j] = self.table[num - nfin + j];
            }
        }
        self.n = nfin;
        self.finish(result, abserr)
    }

    fn finish(&mut self, result: f64, _abserr: f64) -> (f64, f64) {
        let eps = f64::EPSILON;
        let err;
        if self.nres >= 4 {
            err = (result - self.res3la[2]).abs()
                + (result - self.res3la[1]).abs()
                + (result - self.res3la[0]).abs();
            self.res3la[0] = self.res3la[1];
            self.res3la[1] = self.res3la[2];
            self.res3la[2] = result;
        } else {
            self.res3la[self.nres - 1] = result;
            err = f64::MAX;
        }
        (result, err.max(5.0 * eps * result.abs()))
    }
}

/// Polynomial extrapolation of boxcar-averaged partial sums in the
/// variable `1/s`. The averaging (window of four half-period segments)
/// cancels the alternating components, leaving the slowly decaying DC
/// tail, whose partial sums form an asymptotic series in `1/s` that
/// Neville extrapolation removes order by order. This is the channel the
/// epsilon algorithm cannot handle (logarithmic convergence).
struct TailRichardson {
    points: Vec<(f64, f64)>, // (1/s, averaged sum)
    next_checkpoint: usize,
}

const RICHARDSON_WINDOW: usize = 9;

impl TailRichardson {
    fn new(first_checkpoint: usize) -> Self {
        TailRichardson {
            points: Vec::new(),
            next_checkpoint: first_checkpoint,
        }
    }

    /// Offer the boxcar average at segment index `k` (endpoint `s_eff`);
    /// returns the current extrapolation when a checkpoint is reached.
    fn offer(&mut self, k: usize, s_eff: f64, averaged: f64) -> Option<(f64, f64)> {
        if k + 1 != self.next_checkpoint {
            return None;
        }
        self.next_checkpoint += (self.next_checkpoint * 7 / 20).max(4);
        self.points.push((1.0 / s_eff, averaged));
        if self.points.len() > RICHARDSON_WINDOW {
            self.points.remove(0);
        }
        if self.points.len() < 5 {
            return None;
        }
        let full = neville_at_zero(&self.points);
        let reduced = neville_at_zero(&self.points[..self.points.len() - 1]);
        let err = (full - reduced).abs() * 2.0 + 5.0 * f64::EPSILON * full.abs();
        Some((full, err))
    }
}

/// Value at 0 of the interpolating polynomial through `(v_i, y_i)`.
fn neville_at_zero(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len();
    let mut t: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for j in 1..m {
        for i in (j..m).rev() {
            let vi = pts[i].0;
            let vij = pts[i - j].0;
            t[i] = (vi * t[i - 1] - vij * t[i]) / (vi - vij);
        }
    }
    t[m - 1]
}

const TAIL_MAX_SEGMENTS: usize = 4200;
const TAIL_MIN_SEGMENTS: usize = 10;
const TAIL_RULE: usize = 15;

/// Evaluate `∫_start^∞ f(s) ds` for an integrand oscillating at the given
/// dominant frequency with an eventually decaying envelope.
///
/// The integral is summed over half-period segments
/// `[start + k·pi/frequency, start + (k+1)·pi/frequency]` and the segment
/// series is accelerated until the extrapolated tail estimate drops below
/// `tol` (absolute).
pub fn integrate_oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    frequency: f64,
    start: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    oscillatory_tail_impl(f, frequency, start, tol, 4)
}

/// Variant for integrands carrying a second, slower oscillation (beat
/// structure, e.g. frequencies `x + y` and `|x - y|`): the smoothing
/// window is widened to span one full period of the slow component.
pub fn integrate_oscillatory_tail_with_beat<F: Fn(f64) -> f64>(
    f: F,
    frequency: f64,
    slow_frequency: f64,
    start: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    let boxcar = if slow_frequency > 0.0 && slow_frequency < frequency {
        // full slow period = 2 pi / slow = (2 freq / slow) segments
        let w = (2.0 * frequency / slow_frequency).round() as usize;
        w.clamp(4, 32) & !1
    } else {
        4
    };
    oscillatory_tail_impl(f, frequency, start, tol, boxcar)
}

fn oscillatory_tail_impl<F: Fn(f64) -> f64>(
    f: F,
    frequency: f64,
    start: f64,
    tol: f64,
    boxcar: usize,
) -> Result<f64, QuadratureError> {
    if !(frequency > 0.0) || !frequency.is_finite() {
        return Err(QuadratureError::BadFrequency(frequency));
    }
    let h = core::f64::consts::PI / frequency;
    let rule = gauss_legendre(TAIL_RULE)?;
    let mut table = EpsilonTable::new();
    let mut richardson = TailRichardson::new(12.max(2 * boxcar + 4));
    // two boxcar passes = triangular window: exact zeros at the dominant
    // and slow frequencies, quadratic suppression of the envelope drift
    let mut window1 = vec![0.0_f64; boxcar];
    let mut window2 = vec![0.0_f64; boxcar];
    let mut acc = 0.0;
    let mut best = (0.0, f64::INFINITY);
    let mut chan_b: Option<(f64, f64)> = None;
    for k in 0..TAIL_MAX_SEGMENTS {
        let a = start + k as f64 * h;
        acc += rule.apply(a, a + h, &f)?;
        window1[k % boxcar] = acc;
        table.append(acc);
        let (val_a, err_a) = table.extrapolate();
        if table.exact && k + 1 >= TAIL_MIN_SEGMENTS {
            return Ok(val_a);
        }
        if k + 1 >= boxcar {
            window2[k % boxcar] = window1.iter().sum::<f64>() / boxcar as f64;
        }
        if k + 1 >= 2 * boxcar - 1 {
            let smoothed = window2.iter().sum::<f64>() / boxcar as f64;
            // mean endpoint of the doubly averaged sums
            let s_eff = start + (k as f64 + 2.0 - boxcar as f64) * h;
            if let Some(b) = richardson.offer(k, s_eff, smoothed) {
                chan_b = Some(b);
            }
        }
        // The epsilon estimate alone is over-optimistic on slowly creeping
        // (DC-tail) series; once the Richardson channel exists, bound the
        // epsilon error by the cross-channel disagreement. Epsilon may
        // never claim better than an eighth of the disagreement: its
        // estimate has transient dips on creeping series.
        let (val, err) = match chan_b {
            Some((vb, eb)) => {
                let diff = (val_a - vb).abs();
                let ea_eff = err_a.max((diff - eb).max(0.0)).max(diff / 8.0);
                if eb <= ea_eff {
                    (vb, eb)
                } else {
                    (val_a, ea_eff)
                }
            }
            None => (val_a, f64::MAX),
        };
        if err < best.1 {
            best = (val, err);
        }
        if k + 1 >= TAIL_MIN_SEGMENTS && err < tol {
            return Ok(val);
        }
    }
    Err(QuadratureError::TailNotConverged {
        segments: TAIL_MAX_SEGMENTS,
        partial: best.0,
        residual: best.1,
    })
}
