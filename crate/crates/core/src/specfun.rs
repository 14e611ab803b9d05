//! Special functions: the gamma function on the positive axis, Bessel
//! functions of the first kind `J_nu` for real order `nu > -1`, and the
//! oscillatory-envelope decomposition of `sqrt(z) J_nu(z)`.
//!
//! Evaluation strategy for `J_nu`: ascending power series up to
//! `x = max(12, 2|nu| + 2)`, Hankel large-argument expansion (full P/Q
//! series, truncated at its smallest term) beyond. The switchover was
//! validated against 50-digit reference values; both branches stay within
//! `1e-10` of the local envelope `sqrt(2/(pi x))` for `x <= 1e3`.

use thiserror::Error;

/// 2/pi, used by the large-argument envelope.
pub const TWO_OVER_PI: f64 = core::f64::consts::FRAC_2_PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("bessel order must satisfy nu > -1 and be finite, got {0}")]
    OrderOutOfRange(f64),
    #[error("gamma is only evaluated for x > 0, got {0}")]
    GammaDomain(f64),
    #[error("bessel argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("J_nu(x) -> +inf as x -> 0 for -1 < nu < 0 (nu = {0}); evaluate at interior nodes only")]
    DivergentAtZero(f64),
}

/// Bessel order `nu > -1` together with its derived large-argument phase
/// `alpha = (pi/2) nu + pi/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    nu: f64,
}

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self, SpecFunError> {
        if !nu.is_finite() || nu <= -1.0 {
            return Err(SpecFunError::OrderOutOfRange(nu));
        }
        Ok(BesselOrder { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Phase `alpha = (pi/2) nu + pi/4`, always recomputed from `nu`.
    pub fn alpha(&self) -> f64 {
        core::f64::consts::FRAC_PI_2 * self.nu + core::f64::consts::FRAC_PI_4
    }

    /// Order raised by one (used by recurrences and kernel closed forms).
    pub fn raised(&self) -> BesselOrder {
        BesselOrder { nu: self.nu + 1.0 }
    }
}

// Lanczos coefficients (Godfrey's set, g = 607/128, 15 terms). Relative
// error below 1e-14 on the positive real axis.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    3.3994649984811888699e-5,
    4.6523628927048575665e-5,
    -9.8374475304879564677e-5,
    1.5808870322491248884e-4,
    -2.1026444172410488319e-4,
    2.1743961811521264320e-4,
    -1.6431810653676389022e-4,
    8.4418223983852743293e-5,
    -2.6190838401581408670e-5,
    3.6899182659531622704e-6,
];

/// Gamma function for `x > 0`.
pub fn gamma_real(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecFunError::GammaDomain(x));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the series argument away from the pole side.
        return core::f64::consts::PI / ((core::f64::consts::PI * x).sin() * gamma_positive(1.0 - x));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let mut sum = LANCZOS_C[0];
    for (k, c) in LANCZOS_C.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    // exp-combined form avoids overflow of t^(z+1/2) for large x
    (2.0 * core::f64::consts::PI).sqrt() * sum * ((z + 0.5) * t.ln() - t).exp()
}

/// Where the power series hands over to the Hankel expansion.
fn series_cutoff(nu: f64) -> f64 {
    (2.0 * nu.abs() + 2.0).max(12.0)
}

/// Ascending power series for J_nu(x), order unrestricted as long as
/// `nu + 1 > 0` (the only gamma argument that occurs).
fn bessel_j_series(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let half = 0.5 * x;
    let q = half * half;
    // first term (x/2)^nu / Gamma(nu+1)
    let mut term = half.powf(nu) / gamma_positive(nu + 1.0);
    let mut sum = term;
    let k_min = (0.5 * x) as usize + 2;
    for k in 0..400usize {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (nu + kf + 1.0));
        sum += term;
        if k >= k_min && term.abs() < 1e-18 * sum.abs().max(1e-280) {
            break;
        }
    }
    sum
}

/// Coefficients of the Hankel expansion, c_k = a_k(nu) / x^k with
/// a_k = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (8 j), truncated at the
/// smallest term. Returns (P, Q, P - 1) evaluated at x.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut a = 1.0; // a_k / x^k, running
    let mut p_tail = 0.0; // P - 1
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    // P = Σ (-1)^m a_{2m}/x^{2m}, Q = Σ (-1)^m a_{2m+1}/x^{2m+1}:
    // the first P correction (k = 2) enters with a minus sign
    let mut sign = [-1.0_f64, 1.0];
    for k in 1..60usize {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (8.0 * kf * x);
        let mag = a.abs();
        if mag > prev {
            break; // smallest term reached; asymptotic optimum
        }
        prev = mag;
        if k % 2 == 1 {
            q += sign[1] * a;
            sign[1] = -sign[1];
        } else {
            p_tail += sign[0] * a;
            sign[0] = -sign[0];
        }
        if mag < 1e-19 {
            break;
        }
    }
    (1.0 + p_tail, q, p_tail)
}

fn bessel_j_asymptotic(order: BesselOrder, x: f64) -> f64 {
    let (p, q, _) = hankel_pq(order.nu(), x);
    let w = x - order.alpha();
    (TWO_OVER_PI / x).sqrt() * (p * w.cos() - q * w.sin())
}

/// Bessel function of the first kind, J_nu(x), for x >= 0.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64, SpecFunError> {
    let nu = order.nu();
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::NegativeArgument(x));
    }
    if x == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(SpecFunError::DivergentAtZero(nu))
        };
    }
    if x <= series_cutoff(nu) {
        Ok(bessel_j_series(nu, x))
    } else {
        Ok(bessel_j_asymptotic(order, x))
    }
}

/// `(J_nu(x), J_{nu+1}(x))` for x > 0, consistent with the three-term
/// recurrence `J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu`.
pub fn bessel_pair(order: BesselOrder, x: f64) -> Result<(f64, f64), SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::NegativeArgument(x));
    }
    let j0 = bessel_j(order, x)?;
    let j1 = bessel_j(order.raised(), x)?;
    Ok((j0, j1))
}

/// Deviation of `sqrt(z) J_nu(z)` from its leading envelope
/// `sqrt(2/pi) cos(z - alpha)`; decays like O(1/z).
///
/// Above the series cutoff the value comes from the (P-1, Q) tail of the
/// Hankel expansion, so no cancellation between O(1) quantities occurs.
pub fn envelope_deviation(order: BesselOrder, z: f64) -> Result<f64, SpecFunError> {
    if !(z > 0.0) {
        return Err(SpecFunError::NegativeArgument(z));
    }
    let w = z - order.alpha();
    if z <= series_cutoff(order.nu()) {
        let j = bessel_j_series(order.nu(), z);
        Ok(z.sqrt() * j - TWO_OVER_PI.sqrt() * w.cos())
    } else {
        let (_, q, p_tail) = hankel_pq(order.nu(), z);
        Ok(TWO_OVER_PI.sqrt() * (p_tail * w.cos() - q * w.sin()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn order_construction() {
        assert!(BesselOrder::new(-1.0).is_err());
        assert!(BesselOrder::new(-2.3).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        let o = BesselOrder::new(0.5).unwrap();
        assert_abs_diff_eq!(o.alpha(), core::f64::consts::FRAC_PI_2, epsilon = 1e-16);
        let o = BesselOrder::new(-0.5).unwrap();
        assert_abs_diff_eq!(o.alpha(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn gamma_basics() {
        assert_eq!(gamma_real(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma_real(4.0).unwrap(), 6.0, max_relative = 1e-14);
        assert_relative_eq!(
            gamma_real(0.5).unwrap(),
            1.7724538509055160273,
            max_relative = 1e-13
        );
        assert!(gamma_real(0.0).is_err());
        assert!(gamma_real(-3.0).is_err());
    }

    #[test]
    fn gamma_reference_values() {
        // 50-digit reference evaluations, rounded to f64
        let table = [
            (0.1, 9.51350769866873184),
            (1.5, 0.886226925452758014),
            (7.25, 1155.38101391998969),
            (10.3, 716430.689062375245),
            (25.0, 6.20448401733239439e23),
        ];
        for (x, want) in table {
            assert_relative_eq!(gamma_real(x).unwrap(), want, max_relative = 1e-13);
        }
        // near the overflow edge the exp(~700) rounding costs one digit
        assert_relative_eq!(
            gamma_real(170.0).unwrap(),
            4.26906800900470527e304,
            max_relative = 3e-13
        );
    }

    // 50-digit reference values for J_nu(x); spans both evaluation branches
    // and brackets the series/asymptotic switchover at 11.9 / 12.1.
    const J_TABLE: &[(f64, f64, f64)] = &[
        (-0.9, 0.05, 2.88929067410120235),
        (-0.9, 0.5, 0.143695097961180556),
        (-0.9, 1.0, -0.240666709076916112),
        (-0.9, 5.0, 0.296123922494439653),
        (-0.9, 10.0, -0.0841119545988807222),
        (-0.9, 11.9, 0.231497377525615046),
        (-0.9, 12.1, 0.22567486307672953),
        (-0.9, 14.0, -0.104380510467459708),
        (-0.9, 20.0, -0.0392881139366171701),
        (-0.9, 50.0, 0.105271494442299619),
        (-0.9, 100.0, 0.0793897338942952291),
        (-0.9, 500.0, -0.0156859136369163838),
        (-0.9, 1000.0, -0.000790579101770653142),
        (-0.5, 0.05, 3.56378885116903831),
        (-0.5, 0.5, 0.99024588024340488),
        (-0.5, 1.0, 0.43109886801837608),
        (-0.5, 5.0, 0.1012177091851084),
        (-0.5, 10.0, -0.211708866331398153),
        (-0.5, 11.9, 0.181814269910605891),
        (-0.5, 12.1, 0.20487976261966706),
        (-0.5, 14.0, 0.0291583392110706808),
        (-0.5, 20.0, 0.0728069047850618486),
        (-0.5, 50.0, 0.108884756350539543),
        (-0.5, 100.0, 0.0688030914687280837),
        (-0.5, 500.0, -0.0315379360754640909),
        (-0.5, 1000.0, 0.0141895693709272943),
        (0.0, 0.05, 0.99937509764946858088),
        (0.0, 0.5, 0.93846980724081290423),
        (0.0, 1.0, 0.76519768655796655145),
        (0.0, 5.0, -0.17759677131433830435),
        (0.0, 10.0, -0.2459357644513483352),
        (0.0, 11.9, 0.025049441699589563728),
        (0.0, 12.1, 0.069666773606807388498),
        (0.0, 14.0, 0.17107347611045865906),
        (0.0, 20.0, 0.16702466434058315473),
        (0.0, 50.0, 0.055812327669251815005),
        (0.0, 100.0, 0.019985850304223122424),
        (0.0, 500.0, -0.034100556880731998265),
        (0.0, 1000.0, 0.024786686152420174561),
        (0.5, 0.05, 0.17833808240219742295),
        (0.5, 0.5, 0.54097378993452809133),
        (0.5, 1.0, 0.67139670714180309042),
        (0.5, 5.0, -0.34216798479816180976),
        (0.5, 10.0, -0.13726373575505048121),
        (0.5, 11.9, -0.14297213406708074617),
        (0.5, 12.1, -0.10313819465555987942),
        (0.5, 14.0, 0.21124069716285923437),
        (0.5, 20.0, 0.16288076385502987091),
        (0.5, 50.0, -0.029605831888924612568),
        (0.5, 100.0, -0.040402132716252123744),
        (0.5, 500.0, -0.016691259174642976677),
        (0.5, 1000.0, 0.02086326660509382773),
        (1.0, 0.05, 0.024992188313759699133),
        (1.0, 0.5, 0.24226845767487388638),
        (1.0, 1.0, 0.44005058574493351596),
        (1.0, 5.0, -0.32757913759146522204),
        (1.0, 10.0, 0.04347274616886143667),
        (1.0, 11.9, -0.22898324966192407078),
        (1.0, 12.1, -0.21574897337692477718),
        (1.0, 14.0, 0.13337515469879325311),
        (1.0, 20.0, 0.066833124175850045579),
        (1.0, 50.0, -0.097511828125175137661),
        (1.0, 100.0, -0.077145352014112158033),
        (1.0, 500.0, 0.010472613470372292844),
        (1.0, 1000.0, 0.0047283119070895239176),
        (2.5, 0.05, 0.000029730092411405299291),
        (2.5, 0.5, 0.0092364078193797244999),
        (2.5, 1.0, 0.049496810228477942271),
        (2.5, 5.0, 0.24037720111131735285),
        (2.5, 10.0, 0.19665848358181841265),
        (2.5, 11.9, 0.094107747102813585977),
        (2.5, 12.1, 0.050228216053957571318),
        (2.5, 14.0, -0.21425563673110612667),
        (2.5, 20.0, -0.17258019384387642416),
        (2.5, 50.0, 0.023037219509625530445),
        (2.5, 100.0, 0.038325919332375405594),
        (2.5, 500.0, 0.016880286495985665507),
        (2.5, 1000.0, -0.020905772723406794331),
    ];

    #[test]
    fn bessel_reference_table() {
        for &(nu, x, want) in J_TABLE {
            let order = BesselOrder::new(nu).unwrap();
            let got = bessel_j(order, x).unwrap();
            // envelope-relative tolerance: near zeros of J the plain relative
            // error is not meaningful
            let scale = want.abs().max((TWO_OVER_PI / x).sqrt());
            assert!(
                (got - want).abs() <= 1e-10 * scale,
                "J_{nu}({x}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn bessel_spec_examples() {
        let nu0 = BesselOrder::new(0.0).unwrap();
        assert_eq!(bessel_j(nu0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            bessel_j(nu0, 1.0).unwrap(),
            0.7651976865579666,
            max_relative = 1e-10
        );
        let half = BesselOrder::new(0.5).unwrap();
        // J_{1/2}(pi) = sqrt(2/(pi*pi)) sin(pi) = 0
        assert_abs_diff_eq!(bessel_j(half, core::f64::consts::PI).unwrap(), 0.0, epsilon = 1e-12);
        // J at 0 for positive and negative fractional orders
        assert_eq!(bessel_j(BesselOrder::new(1.5).unwrap(), 0.0).unwrap(), 0.0);
        assert!(matches!(
            bessel_j(BesselOrder::new(-0.5).unwrap(), 0.0),
            Err(SpecFunError::DivergentAtZero(_))
        ));
        assert!(bessel_j(nu0, -1.0).is_err());
    }

    #[test]
    fn bessel_pair_examples() {
        let nu0 = BesselOrder::new(0.0).unwrap();
        let (j0, j1) = bessel_pair(nu0, 1.0).unwrap();
        assert_relative_eq!(j0, 0.7651976865579666, max_relative = 1e-10);
        assert_relative_eq!(j1, 0.4400505857449335, max_relative = 1e-10);

        // half-order closed forms: J_{1/2}(x) = sqrt(2/(pi x)) sin x,
        // J_{3/2}(x) = sqrt(2/(pi x)) (sin x / x - cos x)
        let half = BesselOrder::new(0.5).unwrap();
        let x = core::f64::consts::FRAC_PI_2;
        let (a, b) = bessel_pair(half, x).unwrap();
        let pref = (TWO_OVER_PI / x).sqrt();
        assert_relative_eq!(a, pref * x.sin(), max_relative = 1e-12);
        assert_relative_eq!(b, pref * (x.sin() / x - x.cos()), max_relative = 1e-12);
        assert_relative_eq!(a, 2.0 / core::f64::consts::PI, max_relative = 1e-12);
        assert_relative_eq!(b, 4.0 / (core::f64::consts::PI * core::f64::consts::PI), max_relative = 1e-12);
    }

    #[test]
    fn recurrence_residual() {
        // J_nu + J_{nu+2} = (2 (nu+1) / x) J_{nu+1}, the three-term
        // recurrence centered at nu+1 (stays within nu > -1)
        let nus = [-0.9, -0.5, 0.0, 0.5, 1.0, 2.5];
        for &nu in &nus {
            let o0 = BesselOrder::new(nu).unwrap();
            let o1 = o0.raised();
            let o2 = o1.raised();
            let mut x = 0.01;
            while x <= 500.0 {
                let j0 = bessel_j(o0, x).unwrap();
                let j1 = bessel_j(o1, x).unwrap();
                let j2 = bessel_j(o2, x).unwrap();
                let lhs = j0 + j2;
                let rhs = 2.0 * (nu + 1.0) / x * j1;
                let scale = [j0.abs(), j1.abs() * 2.0 * (nu + 1.0).abs() / x, j2.abs(), 1e-300]
                    .into_iter()
                    .fold(0.0_f64, f64::max);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * scale,
                    "recurrence residual at nu={nu}, x={x}: {} vs {}",
                    lhs,
                    rhs
                );
                x *= 1.9;
            }
        }
    }

    #[test]
    fn envelope_deviation_half_orders_vanish() {
        // nu = -1/2: sqrt(z) J = sqrt(2/pi) cos z and alpha = 0
        // nu = +1/2: sqrt(z) J = sqrt(2/pi) sin z = sqrt(2/pi) cos(z - pi/2)
        for nu in [-0.5, 0.5] {
            let o = BesselOrder::new(nu).unwrap();
            let mut z = 0.3;
            while z < 800.0 {
                let d = envelope_deviation(o, z).unwrap();
                assert!(d.abs() < 2e-13, "nu={nu}, z={z}: deviation {d}");
                z *= 2.3;
            }
        }
    }

    #[test]
    fn envelope_deviation_bounded() {
        // |deviation| * z stays bounded on a log grid in [1, 1e3]
        for nu in [-0.9, 0.0, 1.0, 2.5] {
            let o = BesselOrder::new(nu).unwrap();
            let mut worst: f64 = 0.0;
            let mut z = 1.0;
            while z <= 1000.0 {
                let d = envelope_deviation(o, z).unwrap();
                worst = worst.max(d.abs() * z);
                z *= 1.13;
            }
            // constant depends on nu; generous cap keeps the check meaningful
            let cap = 1.0 + nu * nu;
            assert!(worst <= cap, "nu={nu}: sup |d|*z = {worst} > {cap}");
        }
    }

    #[test]
    fn envelope_matches_direct_subtraction_across_switchover() {
        for nu in [-0.9, 0.0, 1.0, 2.5] {
            let o = BesselOrder::new(nu).unwrap();
            for z in [11.0, 12.5, 13.9, 25.0, 80.0] {
                let d = envelope_deviation(o, z).unwrap();
                let direct = z.sqrt() * bessel_j(o, z).unwrap()
                    - TWO_OVER_PI.sqrt() * (z - o.alpha()).cos();
                assert_abs_diff_eq!(d, direct, epsilon = 3e-12);
            }
        }
    }
}
