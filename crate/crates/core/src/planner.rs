//! Depth and shot planning from `(p, C_beta, delta)`.
//!
//! Everything here is closed-form arithmetic on the ratio parameter
//! `x = (p+1)^2 sin^2(delta/2) C_beta`. Certificates always use the analytic
//! off-peak bound so they are reproducible from their three inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fejer::{fejer_kernel, success_lower_bound};

/// Default half-width of the threshold band for regime classification.
pub const DEFAULT_ETA: f64 = 0.5;

/// Relative slack used when rounding the depth formula up to an integer.
const DEPTH_SNAP: f64 = 1e-12;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("target failure {epsilon} outside (0, 1)")))
    }
}

/// `x = (p+1)^2 sin^2(delta/2) C_beta`.
pub fn ratio_parameter(p: usize, delta: f64, c_beta: f64) -> f64 {
    let order = (p + 1) as f64;
    order * order * (delta / 2.0).sin().powi(2) * c_beta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    /// `x / ((1 - C) + x)`.
    pub tight: f64,
    /// `x / (1 + x)`.
    pub simple: f64,
}

pub fn ratio_bounds(x: f64, c_beta: f64) -> Result<RatioBounds> {
    if !(x >= 0.0) {
        return Err(Error::param(format!("ratio parameter {x} is negative")));
    }
    if !(0.0..=1.0).contains(&c_beta) {
        return Err(Error::param(format!("envelope mass {c_beta} outside [0, 1]")));
    }
    let off = 1.0 - c_beta;
    let tight = if off == 0.0 { 1.0 } else { x / (off + x) };
    Ok(RatioBounds { tight, simple: x / (1.0 + x) })
}

/// `S = (1 + 1/x) ln(1/epsilon)`; infinite when `x = 0`.
pub fn shot_budget(x: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if !(x >= 0.0) {
        return Err(Error::param(format!("ratio parameter {x} is negative")));
    }
    if x == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 + 1.0 / x) * (1.0 / epsilon).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Small product, `x < 1 - eta`.
    R1,
    /// Threshold band `x in [1 - eta, 1 + eta]`.
    R2,
    /// Large product, `x > 1 + eta`.
    R3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    /// In R2: `q0 >= (1 - eta) / (2 - eta)`.
    pub threshold_guarantee: Option<f64>,
}

pub fn classify_regime(x: f64, eta: f64) -> Result<RegimeClass> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param(format!("eta {eta} outside (0, 1)")));
    }
    let regime = if x < 1.0 - eta {
        Regime::R1
    } else if x <= 1.0 + eta {
        Regime::R2
    } else {
        Regime::R3
    };
    let threshold_guarantee = (regime == Regime::R2).then(|| (1.0 - eta) / (2.0 - eta));
    Ok(RegimeClass { regime, threshold_guarantee })
}

/// Smallest order the depth formula certifies for `q0 >= 1 - epsilon`:
/// `max(0, ceil(sqrt((1-eps)/eps * (1-C)/C) csc(delta/2)) - 1)`.
pub fn depth_for_target(epsilon: f64, c_beta: f64, delta: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if !(c_beta > 0.0 && c_beta <= 1.0) {
        return Err(Error::param(format!("envelope mass {c_beta} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta <= PI) {
        return Err(Error::param(format!("phase gap {delta} outside (0, pi]")));
    }
    let a = ((1.0 - epsilon) / epsilon * (1.0 - c_beta) / c_beta).sqrt() / (delta / 2.0).sin();
    // Values a hair above an integer k are rounding noise on an exact k.
    let peak = (a * (1.0 - DEPTH_SNAP)).ceil();
    Ok((peak - 1.0).max(0.0) as usize)
}

/// `C_min(delta) = 1 / (1 + (eps / (1 - eps)) (p+1)^2 sin^2(delta/2))`.
pub fn cmin(delta: f64, epsilon: f64, p: usize) -> f64 {
    let order = (p + 1) as f64;
    1.0 / (1.0 + epsilon / (1.0 - epsilon) * order * order * (delta / 2.0).sin().powi(2))
}

pub fn cmin_curve(delta_grid: &[f64], epsilon: f64, p: usize) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    if delta_grid.is_empty() {
        return Err(Error::param("empty delta grid"));
    }
    if let Some(d) = delta_grid.iter().find(|&&d| !(d > 0.0 && d <= PI)) {
        return Err(Error::param(format!("grid value {d} outside (0, pi]")));
    }
    Ok(delta_grid.iter().map(|&d| cmin(d, epsilon, p)).collect())
}

/// Wrap-safe base angle `pi / (p R_op)`; `p = 0` is treated as a single
/// application (`pi / R_op`).
pub fn gamma_safe(p: usize, r_op: f64) -> Result<f64> {
    if !(r_op > 0.0 && r_op.is_finite()) {
        return Err(Error::param(format!("range proxy {r_op} must be positive")));
    }
    Ok(PI / (p.max(1) as f64 * r_op))
}

/// `kappa_c = (sin(c/2) / (c/2))^2`: the fraction of the peak kept inside
/// the window `|Delta| <= c / (p'+1)`.
pub fn main_lobe_constant(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < PI) {
        return Err(Error::param(format!("lobe parameter {c} outside (0, pi)")));
    }
    let h = c / 2.0;
    Ok((h.sin() / h).powi(2))
}

/// Checks `F_{p'}(Delta) >= kappa_c (p'+1)` on `points` samples of
/// `|Delta| <= c / (p'+1)`, returning the smallest ratio `F / (p'+1)` seen.
pub fn main_lobe_min_ratio(p_prime: usize, c: f64, points: usize) -> f64 {
    let order = (p_prime + 1) as f64;
    let half = c / order;
    let points = points.max(2);
    (0..points)
        .map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64)
        .map(|d| fejer_kernel(p_prime, d) / order)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderReduction {
    /// Conservative `c' x0 ((p'+1)/(p+1))^2`.
    pub x_reduced: f64,
    pub shots: f64,
    pub epsilon: f64,
}

pub fn order_reduction(x0: f64, p: usize, p_prime: usize, c_prime: f64, epsilon: f64) -> Result<OrderReduction> {
    if !(x0 > 0.0) {
        return Err(Error::param("x0 must be positive"));
    }
    if p_prime < 1 || p_prime > p {
        return Err(Error::param(format!("reduced order {p_prime} outside [1, {p}]")));
    }
    if !(c_prime > 0.0 && c_prime <= 1.0) {
        return Err(Error::param(format!("c' = {c_prime} outside (0, 1]")));
    }
    let shrink = ((p_prime + 1) as f64 / (p + 1) as f64).powi(2);
    let x_reduced = c_prime * x0 * shrink;
    Ok(OrderReduction { x_reduced, shots: shot_budget(x_reduced, epsilon)?, epsilon })
}

/// Lipschitz constant `2 p' ||H_M||` of the reduced-order envelope in `beta`.
pub fn lipschitz_envelope_bound(p_prime: usize, h_m_norm: f64) -> f64 {
    2.0 * p_prime as f64 * h_m_norm
}

/// Report bundle for a `(p, C_beta, delta)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub p: usize,
    pub c_beta: f64,
    pub delta: f64,
    pub x: f64,
    pub q0_bound: f64,
    pub q0_ratio_tight: f64,
    pub q0_ratio_simple: f64,
    /// `None` when the budget is unbounded.
    pub shots: Option<f64>,
    pub regime: Regime,
    pub threshold_guarantee: Option<f64>,
    pub epsilon: f64,
    pub eta: f64,
    pub depth_for_target: usize,
}

impl Certificate {
    pub fn new(p: usize, c_beta: f64, delta: f64, epsilon: f64, eta: f64) -> Result<Self> {
        let x = ratio_parameter(p, delta, c_beta);
        let q0_bound = success_lower_bound(p, c_beta, delta)?;
        let ratio = ratio_bounds(x, c_beta)?;
        let shots = shot_budget(x, epsilon)?;
        let class = classify_regime(x, eta)?;
        Ok(Certificate {
            p,
            c_beta,
            delta,
            x,
            q0_bound,
            q0_ratio_tight: ratio.tight,
            q0_ratio_simple: ratio.simple,
            shots: shots.is_finite().then_some(shots),
            regime: class.regime,
            threshold_guarantee: class.threshold_guarantee,
            epsilon,
            eta,
            depth_for_target: depth_for_target(epsilon, c_beta, delta)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ratio_parameter_examples() {
        assert!(close(ratio_parameter(1, PI, 0.5), 2.0));
        assert_eq!(ratio_parameter(4, 1.0, 0.0), 0.0);
        assert!(close(ratio_parameter(0, PI, 1.0), 1.0));
    }

    #[test]
    fn ratio_bound_examples() {
        let r = ratio_bounds(2.0, 0.5).unwrap();
        assert!(close(r.tight, 0.8) && close(r.simple, 2.0 / 3.0));
        assert_eq!(ratio_bounds(0.7, 1.0).unwrap().tight, 1.0);
        let r = ratio_bounds(1.0, 0.25).unwrap();
        assert!(close(r.tight, 1.0 / 1.75) && close(r.simple, 0.5));
        let r = ratio_bounds(0.0, 0.4).unwrap();
        assert_eq!((r.tight, r.simple), (0.0, 0.0));
    }

    #[test]
    fn shot_examples() {
        assert!(close(shot_budget(1.0, (-1.0f64).exp()).unwrap(), 2.0));
        assert!(close(shot_budget(0.1, 0.01).unwrap(), 11.0 * 100f64.ln()));
        assert!((shot_budget(1e12, 0.05).unwrap() - 20f64.ln()).abs() < 1e-9);
        assert!(shot_budget(0.0, 0.1).unwrap().is_infinite());
        assert!(shot_budget(1.0, 1.0).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(0.01, DEFAULT_ETA).unwrap().regime, Regime::R1);
        let r2 = classify_regime(1.0, 0.5).unwrap();
        assert_eq!(r2.regime, Regime::R2);
        assert!(close(r2.threshold_guarantee.unwrap(), 1.0 / 3.0));
        assert_eq!(classify_regime(100.0, DEFAULT_ETA).unwrap().regime, Regime::R3);
        assert!(classify_regime(1.0, 1.0).is_err());
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth_for_target(0.1, 0.5, PI / 2.0).unwrap(), 4);
        // (4+1)^2 = 25 >= 9 * 1 * csc^2(pi/4) = 18
        assert!(25.0 >= 9.0 / (PI / 4.0).sin().powi(2));
        assert_eq!(depth_for_target(0.5, 0.5, PI).unwrap(), 0);
        assert_eq!(depth_for_target(0.01, 1.0, 0.2).unwrap(), 0);
        assert!(depth_for_target(0.0, 0.5, 1.0).is_err());
        assert!(depth_for_target(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn cmin_examples() {
        assert!(close(cmin(PI, 0.1, 2), 0.5));
        assert!(cmin(1e-9, 0.1, 2) > 1.0 - 1e-15);
        assert!(cmin(1.0, 0.1, 100_000) < 1e-6);
        assert!(cmin_curve(&[], 0.1, 2).is_err());
        let c = cmin_curve(&[0.5, 1.0, 2.0, PI], 0.1, 3).unwrap();
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gamma_safe_examples() {
        assert!(close(gamma_safe(1, 1.0).unwrap(), PI));
        assert!(close(gamma_safe(4, PI).unwrap(), 0.25));
        assert!(close(gamma_safe(3, 2.0).unwrap() * 2.0, gamma_safe(3, 1.0).unwrap()));
        assert!(close(gamma_safe(0, 2.0).unwrap(), PI / 2.0));
    }

    #[test]
    fn main_lobe_examples() {
        assert!(main_lobe_constant(1e-8).unwrap() > 1.0 - 1e-15);
        assert!((main_lobe_constant(PI - 1e-15).unwrap() - 4.0 / (PI * PI)).abs() < 1e-12);
        assert!(close(main_lobe_constant(PI / 2.0).unwrap(), 8.0 / (PI * PI)));
        assert!(main_lobe_constant(PI).is_err());
    }

    #[test]
    fn order_reduction_examples() {
        let r = order_reduction(4.0, 3, 1, 1.0, 0.1).unwrap();
        assert!(close(r.x_reduced, 1.0));
        assert!(close(r.shots, 2.0 * 10f64.ln()));
        assert!(close(order_reduction(2.5, 5, 5, 1.0, 0.1).unwrap().x_reduced, 2.5));
        assert!(order_reduction(1.0, 3, 0, 1.0, 0.1).is_err());
        assert!(order_reduction(1.0, 3, 4, 1.0, 0.1).is_err());
    }

    #[test]
    fn lipschitz_constant() {
        assert_eq!(lipschitz_envelope_bound(1, 1.0), 2.0);
        assert_eq!(lipschitz_envelope_bound(0, 7.0), 0.0);
    }

    #[test]
    fn certificate_degenerate_mass() {
        let c = Certificate::new(2, 1.0, PI, 0.1, DEFAULT_ETA).unwrap();
        assert_eq!(c.q0_bound, 1.0);
        assert_eq!(c.depth_for_target, 0);
    }
}
