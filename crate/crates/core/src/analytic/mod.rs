//! Closed-form reference values: Gamma and Beta, the Hopf-link capacity and its profile,
//! and the capacity of a round ring.

mod quadrature;

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use thiserror::Error;

pub use quadrature::{gauss_legendre, CompositeGauss};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
    #[error("angle {0} outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("ring radii must satisfy 0 < a < b, got ({0}, {1})")]
    BadRing(f64, f64),
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    // split the power to keep t^(x+1/2) finite for large x
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * a
}

/// Γ(x) for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64, AnalyticError> {
    if x.is_nan() || x <= 0.0 {
        return Err(AnalyticError::NonPositive(x));
    }
    if x == x.floor() && x <= 21.0 {
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    Ok(gamma_unchecked(x))
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta_fn(a: f64, b: f64) -> Result<f64, AnalyticError> {
    Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?)
}

/// Γ(1/4).
pub fn gamma_quarter() -> f64 {
    static G: OnceLock<f64> = OnceLock::new();
    *G.get_or_init(|| gamma_unchecked(0.25))
}

/// `16π³/Γ(1/4)⁴`, the conformal capacity of the Hopf link.
pub fn hopf_capacity_exact() -> f64 {
    let g2 = gamma_quarter() * gamma_quarter();
    16.0 * PI.powi(3) / (g2 * g2)
}

/// Capacity `4π / log(b/a)²` of the ring `{a < |x| < b}` in ℝ³.
pub fn ring_capacity_exact(a: f64, b: f64) -> Result<f64, AnalyticError> {
    if !(a > 0.0 && b > a) {
        return Err(AnalyticError::BadRing(a, b));
    }
    Ok(4.0 * PI / (b / a).ln().powi(2))
}

/// The capacity function of the Hopf link in Hopf coordinates,
/// `u(η) = c ∫₀^η dθ / √(cos θ sin θ)` with `c = 2√π/Γ(1/4)²`.
#[derive(Clone, Debug)]
pub struct HopfClosedForm {
    pub c: f64,
    pub capacity: f64,
    beta: f64,
    rule: CompositeGauss,
}

impl Default for HopfClosedForm {
    fn default() -> Self {
        Self::new()
    }
}

impl HopfClosedForm {
    pub fn new() -> Self {
        let g = gamma_quarter();
        let c = 2.0 * PI.sqrt() / (g * g);
        HopfClosedForm { c, capacity: 4.0 * PI * PI * c * c, beta: g * g / PI.sqrt(), rule: CompositeGauss::new(20, 6) }
    }

    /// `∫₀^x t^{-3/4}(1-t)^{-3/4} dt` for `0 ≤ x ≤ 1/2`, after `t = s⁴`.
    fn lower_incomplete(&self, x: f64) -> f64 {
        let top = x.sqrt().sqrt();
        self.rule.integrate(0.0, top, |s| {
            let s2 = s * s;
            4.0 / (1.0 - s2 * s2).powf(0.75)
        })
    }

    pub fn profile(&self, eta: f64) -> Result<f64, AnalyticError> {
        if !(0.0..=FRAC_PI_2).contains(&eta) {
            return Err(AnalyticError::AngleOutOfRange(eta));
        }
        // measure the upper end from the double nearest π/2 so that u(FRAC_PI_2) = 1 exactly
        let s = eta.sin();
        let c = (FRAC_PI_2 - eta).sin();
        let (s2, c2) = (s * s, c * c);
        let half = 0.5 * self.c;
        Ok(if s2 <= 0.5 { half * self.lower_incomplete(s2) } else { 1.0 - half * self.lower_incomplete(c2) })
    }

    /// Complete integral `B(1/4, 1/4)` as used in the normalization `u(π/2) = 1`.
    pub fn beta_quarter(&self) -> f64 {
        self.beta
    }
}

/// Convenience wrapper for [`HopfClosedForm::profile`].
pub fn hopf_profile(eta: f64) -> Result<f64, AnalyticError> {
    static H: OnceLock<HopfClosedForm> = OnceLock::new();
    H.get_or_init(HopfClosedForm::new).profile(eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit reference evaluations
    const GAMMA_TABLE: [(f64, f64); 14] = [
        (0.001, 999.42377248459546611),
        (0.01, 99.432585119150603714),
        (0.1, 9.5135076986687318363),
        (0.25, 3.6256099082219083119),
        (0.5, 1.7724538509055160273),
        (0.75, 1.2254167024651776451),
        (1.0, 1.0),
        (1.5, 0.88622692545275801365),
        (2.5, 1.3293403881791370205),
        (3.3, 2.6834373819557687936),
        (7.7, 2769.8303623273136603),
        (12.5, 136843365.46556585726),
        (20.0, 121645100408832000.0),
        (29.9, 6.304174488373751511e30),
    ];

    #[test]
    fn gamma_matches_table() {
        for (x, g) in GAMMA_TABLE {
            let rel = (gamma_fn(x).unwrap() - g).abs() / g;
            assert!(rel < 1e-12, "x={x} rel={rel:e}");
        }
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_quarter_by_quadrature() {
        // Γ(1/4) = 4 ∫₀^∞ exp(-s⁴) ds; the tail beyond s = 6 is below 1e-500
        let q = CompositeGauss::new(20, 24);
        let v = 4.0 * q.integrate(0.0, 6.0, |s| (-s.powi(4)).exp());
        assert!((v - gamma_quarter()).abs() / v < 1e-13, "{v}");
    }

    #[test]
    fn beta_quarter() {
        let b = beta_fn(0.25, 0.25).unwrap();
        assert!((b - 7.41629870920548767).abs() < 1e-13);
        assert!((b - gamma_fn(0.25).unwrap().powi(2) / PI.sqrt()).abs() < 1e-13);
        let h = HopfClosedForm::new();
        assert!((2.0 * h.lower_incomplete(0.5) - h.beta_quarter()).abs() < 1e-13);
    }

    #[test]
    fn hopf_value() {
        let v = hopf_capacity_exact();
        assert!((v - 2.8710800441845200).abs() / v < 1e-14);
        let h = HopfClosedForm::new();
        assert!((h.c - 0.26967630059418968).abs() < 1e-15);
        assert!((v - 4.0 * PI * PI * h.c * h.c).abs() < 1e-12);
        assert!((h.capacity - v).abs() < 1e-13);
    }

    #[test]
    fn profile_values() {
        assert_eq!(hopf_profile(0.0).unwrap(), 0.0);
        assert!((hopf_profile(FRAC_PI_2).unwrap() - 1.0).abs() < 1e-14);
        assert!((hopf_profile(std::f64::consts::FRAC_PI_4).unwrap() - 0.5).abs() < 1e-14);
        for (eta, u) in [
            (0.1, 0.17067216361503569783),
            (0.3, 0.29721521472827102546),
            (0.7, 0.46735127763546843384),
            (1.2, 0.66849020965783277568),
            (1.5, 0.85644333748977307604),
        ] {
            assert!((hopf_profile(eta).unwrap() - u).abs() < 1e-12, "{eta}");
        }
        assert!(hopf_profile(-0.1).is_err());
        assert!(hopf_profile(1.6).is_err());
    }

    #[test]
    fn profile_solves_the_ode() {
        // cos η sin η u'(η)² = c²
        let h = HopfClosedForm::new();
        let d = 1e-5;
        let mut prev = 0.0;
        for k in 1..40 {
            let eta = FRAC_PI_2 * k as f64 / 40.0;
            let du = (h.profile(eta + d).unwrap() - h.profile(eta - d).unwrap()) / (2.0 * d);
            let lhs = eta.cos() * eta.sin() * du * du;
            assert!((lhs - h.c * h.c).abs() < 1e-8, "{eta}: {lhs}");
            let u = h.profile(eta).unwrap();
            assert!(u > prev);
            prev = u;
        }
    }

    #[test]
    fn ring_values() {
        use std::f64::consts::E;
        assert!((ring_capacity_exact(1.0, E).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((ring_capacity_exact(2.0, 2.0 * E).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((ring_capacity_exact(1.0, E * E).unwrap() - PI).abs() < 1e-13);
        assert!((ring_capacity_exact(0.5, 1.5).unwrap() - 10.411683527942082).abs() < 1e-12);
        assert!(ring_capacity_exact(1.0, 1.0).is_err());
        assert!(ring_capacity_exact(0.0, 1.0).is_err());
    }
}
