//! Dithered Fejér filtering for costs without an exact phase lattice.
//!
//! Averaging the base angle over a window `w` turns the cross terms of the
//! squared Dirichlet sum into samples of the window's Fourier transform,
//! which decay with the energy offset. The off-peak level is then governed
//! by an ordinary energy gap `g` rather than a wrapped phase gap.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fejer::fejer_kernel;
use crate::instance::ProblemInstance;
use crate::mixer::Envelope;
use crate::oracle::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Uniform,
}

/// Uniform density on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherWindow {
    pub kind: WindowKind,
    pub half_width: f64,
}

impl DitherWindow {
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param(format!("window half-width {half_width} must be positive")));
        }
        Ok(DitherWindow { kind: WindowKind::Uniform, half_width })
    }

    pub fn density(&self, u: f64) -> f64 {
        if u.abs() <= self.half_width {
            0.5 / self.half_width
        } else {
            0.0
        }
    }

    /// Draws `u ~ w` from a uniform variate in `[0, 1)`.
    pub fn sample(&self, unit: f64) -> f64 {
        self.half_width * (2.0 * unit - 1.0)
    }
}

/// `w_hat(xi) = sin(Gamma xi) / (Gamma xi)`.
pub fn window_fourier(w: &DitherWindow, xi: f64) -> f64 {
    let x = w.half_width * xi;
    if x == 0.0 {
        1.0
    } else if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// Averaged Fejér weight `(1/(p+1)) sum_{r,s} e^{-i(r-s) gamma dE} w_hat((r-s) dE)`.
pub fn averaged_fejer(p: usize, gamma: f64, delta_e: f64, w: &DitherWindow) -> f64 {
    averaged_fejer_general(p, gamma, delta_e, |xi| window_fourier(w, xi))
}

/// Same as [`averaged_fejer`] for an arbitrary even window transform.
pub fn averaged_fejer_general<F: Fn(f64) -> f64>(p: usize, gamma: f64, delta_e: f64, w_hat: F) -> f64 {
    // pairs (r, s) grouped by k = r - s; there are p + 1 - |k| of each
    let mut acc = Complex64::new((p + 1) as f64, 0.0);
    for k in 1..=p as i64 {
        let mult = (p as i64 + 1 - k) as f64;
        let kf = k as f64;
        let plus = Complex64::from_polar(1.0, -kf * gamma * delta_e) * w_hat(kf * delta_e);
        let minus = Complex64::from_polar(1.0, kf * gamma * delta_e) * w_hat(-kf * delta_e);
        acc += (plus + minus) * mult;
    }
    acc.re / (p + 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedOffpeak {
    /// `1 + (2/(Gamma g)) sum_{k=1}^p (1 - k/(p+1)) / k`.
    pub exact_sum: f64,
    /// `1 + 2 ln(p+1) / (Gamma g)`.
    pub log_form: f64,
}

pub fn averaged_offpeak_bound(p: usize, half_width: f64, gap: f64) -> Result<AveragedOffpeak> {
    if !(half_width > 0.0 && gap > 0.0) {
        return Err(Error::param("window half-width and energy gap must be positive"));
    }
    let scale = 2.0 / (half_width * gap);
    let order = (p + 1) as f64;
    let sum: f64 = (1..=p).map(|k| (1.0 - k as f64 / order) / k as f64).sum();
    Ok(AveragedOffpeak { exact_sum: 1.0 + scale * sum, log_form: 1.0 + scale * order.ln() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlBound {
    pub bound: f64,
    /// `(p+1) C / Mbar`; `None` when `Mbar = 0`.
    pub x_rl: Option<f64>,
    pub tight: f64,
    pub simple: f64,
}

/// `(p+1) C / ((p+1) C + Mbar (1 - C))` and its ratio forms.
pub fn rl_success_bound(p: usize, c_beta: f64, mbar: f64) -> Result<RlBound> {
    if !(c_beta > 0.0 && c_beta <= 1.0) {
        return Err(Error::param(format!("envelope mass {c_beta} outside (0, 1]")));
    }
    if !(mbar >= 0.0) {
        return Err(Error::param(format!("off-peak level {mbar} is negative")));
    }
    let peak = (p + 1) as f64 * c_beta;
    let bound = peak / (peak + mbar * (1.0 - c_beta));
    if mbar == 0.0 {
        return Ok(RlBound { bound, x_rl: None, tight: 1.0, simple: 1.0 });
    }
    let x = peak / mbar;
    let tight = if c_beta == 1.0 { 1.0 } else { x / ((1.0 - c_beta) + x) };
    Ok(RlBound { bound, x_rl: Some(x), tight, simple: x / (1.0 + x) })
}

/// `g = min_{y not optimal} |E(y) - E*|` over all strings.
pub fn energy_gap(energies: &[f64], optimal: &[usize]) -> Result<f64> {
    if optimal.is_empty() {
        return Err(Error::EmptyOptimalSet);
    }
    let e_star = energies[optimal[0]];
    let mut is_opt = vec![false; energies.len()];
    for &i in optimal {
        is_opt[i] = true;
    }
    let gap = energies
        .iter()
        .zip(&is_opt)
        .filter(|(_, &o)| !o)
        .map(|(&e, _)| (e - e_star).abs())
        .fold(f64::INFINITY, f64::min);
    if gap == 0.0 {
        return Err(Error::ZeroEnergyGap);
    }
    Ok(gap)
}

/// How per-draw laws are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Normalize each draw, then average the laws.
    #[default]
    PerDraw,
    /// Average unnormalized weights, then normalize once.
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlLaw {
    pub probs: Vec<f64>,
    /// Per-string standard errors (per-draw averaging only; zero when pooled).
    pub std_errors: Vec<f64>,
    pub success_mass: f64,
    pub success_std_error: f64,
    pub samples: usize,
    pub averaging: Averaging,
}

/// Draws handled per work unit; summation order within and across chunks is
/// fixed so results do not depend on the thread count.
const CHUNK: usize = 32;

/// Monte Carlo estimate of the window-averaged filtered law.
#[allow(clippy::too_many_arguments)]
pub fn rl_filtered_distribution(
    env: &Envelope,
    inst: &ProblemInstance,
    gamma: f64,
    p: usize,
    w: &DitherWindow,
    samples: usize,
    seed: u64,
    averaging: Averaging,
) -> Result<RlLaw> {
    let energies: Vec<f64> = inst.energies().iter().map(|&e| e as f64).collect();
    let optimal = inst.optimal_set()?;
    rl_filtered_distribution_energies(Exec::default(), env, &energies, &optimal, gamma, p, w, samples, seed, averaging)
}

/// [`rl_filtered_distribution`] over an arbitrary real energy table.
#[allow(clippy::too_many_arguments)]
pub fn rl_filtered_distribution_energies(
    exec: Exec,
    env: &Envelope,
    energies: &[f64],
    optimal: &[usize],
    gamma: f64,
    p: usize,
    w: &DitherWindow,
    samples: usize,
    seed: u64,
    averaging: Averaging,
) -> Result<RlLaw> {
    if env.len() != energies.len() {
        return Err(Error::SizeMismatch { expected: energies.len(), found: env.len() });
    }
    if samples == 0 {
        return Err(Error::param("need at least one sample"));
    }
    energy_gap(energies, optimal)?;
    let e_star = energies[optimal[0]];
    let dim = energies.len();

    struct Partial {
        sum: Vec<f64>,
        sum_sq: Vec<f64>,
        succ: f64,
        succ_sq: f64,
    }

    let chunks = samples.div_ceil(CHUNK);
    let partials = exec.map_indexed(chunks, |c| -> Result<Partial> {
        let mut part = Partial { sum: vec![0.0; dim], sum_sq: vec![0.0; dim], succ: 0.0, succ_sq: 0.0 };
        let mut raw = vec![0.0; dim];
        for draw in c * CHUNK..((c + 1) * CHUNK).min(samples) {
            let u = w.sample(seeded_rng(seed, draw as u64).gen::<f64>());
            let g = gamma + u;
            for ((r, &pw), &e) in raw.iter_mut().zip(env.probs()).zip(energies) {
                *r = pw * fejer_kernel(p, g * (e - e_star));
            }
            match averaging {
                Averaging::Pooled => {
                    for (s, r) in part.sum.iter_mut().zip(&raw) {
                        *s += r;
                    }
                }
                Averaging::PerDraw => {
                    let denom: f64 = raw.iter().sum();
                    if !(denom > 0.0) {
                        return Err(Error::ZeroDenominator);
                    }
                    for ((s, sq), r) in part.sum.iter_mut().zip(part.sum_sq.iter_mut()).zip(&raw) {
                        let q = r / denom;
                        *s += q;
                        *sq += q * q;
                    }
                    let succ: f64 = optimal.iter().map(|&i| raw[i] / denom).sum();
                    part.succ += succ;
                    part.succ_sq += succ * succ;
                }
            }
        }
        Ok(part)
    });

    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    let (mut succ, mut succ_sq) = (0.0, 0.0);
    for part in partials {
        let part = part?;
        for i in 0..dim {
            sum[i] += part.sum[i];
            sum_sq[i] += part.sum_sq[i];
        }
        succ += part.succ;
        succ_sq += part.succ_sq;
    }

    let ns = samples as f64;
    let std_err = |s: f64, sq: f64| -> f64 {
        if samples < 2 {
            return 0.0;
        }
        let mean = s / ns;
        let var = ((sq - ns * mean * mean) / (ns - 1.0)).max(0.0);
        (var / ns).sqrt()
    };

    match averaging {
        Averaging::PerDraw => {
            let probs: Vec<f64> = sum.iter().map(|s| s / ns).collect();
            let std_errors = sum.iter().zip(&sum_sq).map(|(&s, &sq)| std_err(s, sq)).collect();
            Ok(RlLaw {
                probs,
                std_errors,
                success_mass: succ / ns,
                success_std_error: std_err(succ, succ_sq),
                samples,
                averaging,
            })
        }
        Averaging::Pooled => {
            let total: f64 = sum.iter().sum();
            if !(total > 0.0) {
                return Err(Error::ZeroDenominator);
            }
            let probs: Vec<f64> = sum.iter().map(|s| s / total).collect();
            let success_mass = optimal.iter().map(|&i| probs[i]).sum();
            Ok(RlLaw { probs, std_errors: vec![0.0; dim], success_mass, success_std_error: 0.0, samples, averaging })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_10, PI};

    #[test]
    fn window_transform_examples() {
        let w = DitherWindow::uniform(0.7).unwrap();
        assert_eq!(window_fourier(&w, 0.0), 1.0);
        assert!(window_fourier(&w, PI / 0.7).abs() < 1e-15);
        for i in 1..500 {
            let xi = i as f64 * 0.037;
            let v = window_fourier(&w, xi).abs();
            assert!(v <= 1.0 && v <= 1.0 / (0.7 * xi) + 1e-15);
        }
        let tiny = window_fourier(&w, 1e-6);
        assert!((tiny - (0.7e-6f64).sin() / 0.7e-6).abs() < 1e-15);
    }

    #[test]
    fn averaged_peak_is_exact() {
        let w = DitherWindow::uniform(0.3).unwrap();
        for p in 0..40 {
            assert_eq!(averaged_fejer(p, 0.9, 0.0, &w), (p + 1) as f64);
        }
    }

    #[test]
    fn narrow_window_recovers_kernel() {
        let w = DitherWindow::uniform(1e-9).unwrap();
        for &(p, g, de) in &[(3, 0.4, 1.0), (7, 1.3, 2.5), (5, 0.2, -3.0)] {
            assert!((averaged_fejer(p, g, de, &w) - fejer_kernel(p, g * de)).abs() < 1e-7);
        }
    }

    #[test]
    fn offpeak_examples() {
        let g = 1.5;
        let b = averaged_offpeak_bound(9, 2.0 * LN_10 / g, g).unwrap();
        assert!((b.log_form - 2.0).abs() < 1e-14);
        assert!(b.exact_sum <= b.log_form);
        let b = averaged_offpeak_bound(1, 2.0, 0.5).unwrap();
        assert!((b.exact_sum - (1.0 + 1.0 / (2.0 * 0.5))).abs() < 1e-15);
        let far = averaged_offpeak_bound(5, 1e12, 1.0).unwrap();
        assert!(far.exact_sum - 1.0 < 1e-11 && far.log_form - 1.0 < 1e-11);
    }

    #[test]
    fn exact_sum_below_log_form() {
        for p in (0..=10_000).step_by(37) {
            let b = averaged_offpeak_bound(p, 1.0, 1.0).unwrap();
            assert!(b.exact_sum <= b.log_form + 1e-12, "p = {p}");
        }
    }

    #[test]
    fn rl_bound_examples() {
        let r = rl_success_bound(9, 0.1, 2.0).unwrap();
        assert!((r.bound - 1.0 / 2.8).abs() < 1e-15);
        assert!(r.tight >= r.simple);
        assert_eq!(rl_success_bound(4, 1.0, 3.0).unwrap().bound, 1.0);
        assert!(rl_success_bound(4, 0.0, 3.0).is_err());
    }

    #[test]
    fn gap_detection() {
        assert_eq!(energy_gap(&[0.0, 2.0, 0.5], &[0]).unwrap(), 0.5);
        assert!(matches!(energy_gap(&[0.0, 0.0, 1.0], &[0]), Err(Error::ZeroEnergyGap)));
    }

    #[test]
    fn single_sample_is_reproducible() {
        let inst = ProblemInstance::with_default_penalty(2, 2, vec![0, 1, 2, 3], 4096).unwrap();
        let env = Envelope::uniform(4);
        let w = DitherWindow::uniform(0.2).unwrap();
        let a = rl_filtered_distribution(&env, &inst, 0.9, 3, &w, 1, 17, Averaging::PerDraw).unwrap();
        let b = rl_filtered_distribution(&env, &inst, 0.9, 3, &w, 1, 17, Averaging::PerDraw).unwrap();
        assert_eq!(a, b);
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn policies_match_bitwise() {
        let inst = ProblemInstance::with_default_penalty(3, 2, (0..9).collect(), 4096).unwrap();
        let env = Envelope::uniform(9);
        let w = DitherWindow::uniform(0.5).unwrap();
        let e: Vec<f64> = inst.energies().iter().map(|&x| x as f64).collect();
        let opt = inst.optimal_set().unwrap();
        for avg in [Averaging::PerDraw, Averaging::Pooled] {
            let a =
                rl_filtered_distribution_energies(Exec::Sequential, &env, &e, &opt, 0.8, 4, &w, 200, 5, avg).unwrap();
            let b = rl_filtered_distribution_energies(Exec::Parallel, &env, &e, &opt, 0.8, 4, &w, 200, 5, avg).unwrap();
            assert_eq!(a, b);
        }
    }
}
