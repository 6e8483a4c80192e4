//! Fejér kernel, the filtered measurement law and the dimension-free
//! success bound.
//!
//! `F_p(theta) = (1/(p+1)) |sum_{r=0}^{p} e^{i r theta}|^2` is nonnegative,
//! has mean one over a period, peaks at `p + 1` and is bounded away from the
//! peak by `1 / ((p+1) sin^2(delta/2))`. Reweighting an envelope by `F_p` at
//! the wrapped phase offsets gives the reference law whose optimal mass the
//! closed-form bounds control.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::instance::{BlockString, PhaseModel};
use crate::mixer::Envelope;

/// Below this `|sin(theta/2)|` the kernel is evaluated as a Dirichlet sum.
const SMALL_SINE: f64 = 1e-6;

/// Filtered denominators below this are roundoff on an exact zero (kernel
/// zeros evaluate to about `1e-32`).
pub const ZERO_DENOMINATOR: f64 = 1e-24;

pub fn fejer_kernel(p: usize, theta: f64) -> f64 {
    let half = theta / 2.0;
    let s = half.sin();
    let order = (p + 1) as f64;
    if s.abs() < SMALL_SINE {
        let (mut re, mut im) = (0.0, 0.0);
        for r in 0..=p {
            let (sn, cs) = (r as f64 * theta).sin_cos();
            re += cs;
            im += sn;
        }
        return (re * re + im * im) / order;
    }
    let ratio = (order * half).sin() / s;
    ratio * ratio / order
}

/// Fourier coefficient `a_k = (p + 1 - |k|) / (p + 1)`, zero for `|k| > p`.
pub fn fejer_coefficient(p: usize, k: i64) -> f64 {
    let k = k.unsigned_abs() as usize;
    if k > p {
        0.0
    } else {
        (p + 1 - k) as f64 / (p + 1) as f64
    }
}

/// `sum_{|k| <= p} a_k e^{i k theta}`, the Fourier-series form of the kernel.
pub fn fejer_fourier_sum(p: usize, theta: f64) -> f64 {
    1.0 + 2.0 * (1..=p).map(|k| fejer_coefficient(p, k as i64) * (k as f64 * theta).cos()).sum::<f64>()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= PI {
        Ok(())
    } else {
        Err(Error::param(format!("phase gap {delta} outside (0, pi]")))
    }
}

fn check_mass(c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("envelope mass {c} outside (0, 1]")))
    }
}

/// Analytic off-peak bound `M_p(delta) <= 1 / ((p+1) sin^2(delta/2))`.
pub fn offpeak_bound(p: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(1.0 / ((p + 1) as f64 * (delta / 2.0).sin().powi(2)))
}

/// The looser `pi^2 / ((p+1) delta^2)`.
pub fn offpeak_bound_loose(p: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(PI * PI / ((p + 1) as f64 * delta * delta))
}

/// Numeric maximum of `F_p` over `points` equally spaced `theta in [delta, pi]`
/// (the kernel is even, so this covers `|theta| >= delta`).
pub fn offpeak_grid_max(p: usize, delta: f64, points: usize) -> Result<f64> {
    check_delta(delta)?;
    let points = points.max(2);
    let step = (PI - delta) / (points - 1) as f64;
    Ok((0..points).map(|i| fejer_kernel(p, delta + step * i as f64)).fold(0.0, f64::max))
}

/// Normalized law `W(z) F_p(theta(z) - theta*) / D` together with `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredLaw {
    pub probs: Vec<f64>,
    pub weights: Vec<f64>,
    pub denominator: f64,
}

pub fn filtered_distribution(env: &Envelope, pm: &PhaseModel, p: usize) -> Result<FilteredLaw> {
    filtered_distribution_with(Exec::default(), env, pm, p)
}

pub fn filtered_distribution_with(exec: Exec, env: &Envelope, pm: &PhaseModel, p: usize) -> Result<FilteredLaw> {
    if env.len() != pm.offset.len() {
        return Err(Error::SizeMismatch { expected: pm.offset.len(), found: env.len() });
    }
    let weights = exec.map_slice(&pm.offset, |&d| fejer_kernel(p, d));
    let raw: Vec<f64> = env.probs().iter().zip(&weights).map(|(w, f)| w * f).collect();
    let denominator: f64 = raw.iter().sum();
    if !(denominator > ZERO_DENOMINATOR) {
        return Err(Error::ZeroDenominator);
    }
    Ok(FilteredLaw { probs: raw.iter().map(|x| x / denominator).collect(), weights, denominator })
}

impl FilteredLaw {
    /// CSV with header `string,phase,fejer_weight,probability`.
    pub fn to_csv(&self, pm: &PhaseModel, n: usize, m: usize) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(["string", "phase", "fejer_weight", "probability"])?;
        for i in 0..self.probs.len() {
            w.write_record([
                BlockString::from_index(i, n, m).label(),
                pm.theta[i].to_string(),
                self.weights[i].to_string(),
                self.probs[i].to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
    }
}

/// `q0 = sum_{x in subset} probs(x)`.
pub fn success_probability(law: &FilteredLaw, omega_star: &[usize]) -> Result<f64> {
    subset_mass(&law.probs, omega_star)
}

pub(crate) fn subset_mass(probs: &[f64], subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    subset
        .iter()
        .map(|&i| probs.get(i).copied().ok_or(Error::SizeMismatch { expected: probs.len(), found: i + 1 }))
        .sum()
}

/// `(p+1) C / ((p+1) C + M_p(delta) (1 - C))`.
pub fn success_lower_bound(p: usize, c_beta: f64, delta: f64) -> Result<f64> {
    check_mass(c_beta)?;
    let peak = (p + 1) as f64 * c_beta;
    Ok(peak / denominator_bound(p, c_beta, delta)?)
}

/// `(p+1) C + M_p(delta) (1 - C)`, an upper bound on the filtered denominator.
pub fn denominator_bound(p: usize, c_beta: f64, delta: f64) -> Result<f64> {
    check_mass(c_beta)?;
    let m = offpeak_bound(p, delta)?;
    Ok((p + 1) as f64 * c_beta + m * (1.0 - c_beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{phase_gap, GapScope, ProblemInstance};

    #[test]
    fn peak_is_exact() {
        for p in 0..200 {
            assert_eq!(fejer_kernel(p, 0.0), (p + 1) as f64);
        }
    }

    #[test]
    fn zeros() {
        assert!(fejer_kernel(1, PI).abs() < 1e-15);
        assert!(fejer_kernel(2, 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn p1_closed_form() {
        for i in 0..50 {
            let t = -PI + i as f64 * 0.13;
            assert!((fejer_kernel(1, t) - 2.0 * (t / 2.0).cos().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn near_singularity_is_continuous() {
        let p = 7;
        let a = fejer_kernel(p, 2.0 * SMALL_SINE * 0.999);
        let b = fejer_kernel(p, 2.0 * SMALL_SINE * 1.001);
        assert!((a - b).abs() < 1e-9);
        assert!((fejer_kernel(p, 2.0 * PI) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn offpeak_examples() {
        assert!((offpeak_bound(1, PI).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(offpeak_grid_max(1, PI, 10).unwrap(), fejer_kernel(1, PI));
        assert!((offpeak_bound(3, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(offpeak_bound(2, 0.0).is_err());
        assert!(offpeak_bound(2, 4.0).is_err());
    }

    #[test]
    fn analytic_below_loose() {
        for p in 0..20 {
            for k in 1..=40 {
                let d = PI * k as f64 / 40.0;
                assert!(offpeak_bound(p, d).unwrap() <= offpeak_bound_loose(p, d).unwrap() + 1e-15);
            }
        }
    }

    fn two_string() -> (Envelope, PhaseModel) {
        let inst = ProblemInstance::with_default_penalty(2, 1, vec![0, 1], 4096).unwrap();
        (Envelope::uniform(2), phase_gap(&inst, PI, GapScope::AllStrings).unwrap())
    }

    #[test]
    fn order_zero_is_flat() {
        let (_, pm) = two_string();
        let env = Envelope::external(vec![0.3, 0.7]).unwrap();
        let law = filtered_distribution(&env, &pm, 0).unwrap();
        assert_eq!(law.probs, vec![0.3, 0.7]);
    }

    #[test]
    fn two_string_filter_kills_antipode() {
        let (env, pm) = two_string();
        let law = filtered_distribution(&env, &pm, 1).unwrap();
        assert!((law.probs[0] - 1.0).abs() < 1e-15 && law.probs[1].abs() < 1e-15);
        assert!((success_probability(&law, &pm.optimal).unwrap() - 1.0).abs() < 1e-15);
        assert!(law.denominator <= denominator_bound(1, 0.5, PI).unwrap());
    }

    #[test]
    fn zero_denominator_detected() {
        let (_, pm) = two_string();
        let env = Envelope::point_mass(2, 1);
        assert!(matches!(filtered_distribution(&env, &pm, 1), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn bound_examples() {
        assert!((success_lower_bound(1, 0.5, PI).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(success_lower_bound(5, 1.0, 0.3).unwrap(), 1.0);
        assert!((success_lower_bound(0, 0.3, PI).unwrap() - 0.3).abs() < 1e-15);
        assert!((denominator_bound(1, 0.5, PI).unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(denominator_bound(4, 1.0, 1.0).unwrap(), 5.0);
        assert!(success_lower_bound(1, 0.0, 1.0).is_err());
        assert!(success_lower_bound(1, 1.2, 1.0).is_err());
    }

    #[test]
    fn all_optimal_success_is_one() {
        let law = FilteredLaw { probs: vec![0.25; 4], weights: vec![1.0; 4], denominator: 1.0 };
        assert_eq!(success_probability(&law, &[0, 1, 2, 3]).unwrap(), 1.0);
        assert!(success_probability(&law, &[]).is_err());
    }

    #[test]
    fn flat_filter_uniform_success() {
        let inst = ProblemInstance::with_default_penalty(3, 2, vec![2, 0, 5, 1, 0, 4, 3, 3, 2], 4096).unwrap();
        let pm = phase_gap(&inst, 0.4, GapScope::AllStrings).unwrap();
        let law = filtered_distribution(&Envelope::uniform(9), &pm, 0).unwrap();
        let q0 = success_probability(&law, &pm.optimal).unwrap();
        assert!((q0 - pm.optimal.len() as f64 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let (env, pm) = two_string();
        let law = filtered_distribution(&env, &pm, 1).unwrap();
        let text = law.to_csv(&pm, 2, 1).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("string,phase,fejer_weight,probability"));
        assert_eq!(lines.next(), Some("0,0,2,1"));
    }
}
