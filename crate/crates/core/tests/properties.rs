//! Property-based invariants across modules.

use std::f64::consts::PI;

use proptest::prelude::*;

use ceqaoa_core::fejer::{fejer_fourier_sum, fejer_kernel, offpeak_bound, success_lower_bound};
use ceqaoa_core::instance::{circular_distance, wrap_angle, BlockString};
use ceqaoa_core::mixer::{apply_block_kernel, single_block_kernel, single_block_kernel_with, Convention, Envelope};
use ceqaoa_core::planner::{
    cmin, cmin_curve, depth_for_target, ratio_bounds, ratio_parameter, shot_budget, Certificate, DEFAULT_ETA,
};
use ceqaoa_core::rl::{averaged_fejer, rl_success_bound, DitherWindow};

proptest! {
    #[test]
    fn index_round_trip(n in 2usize..7, m in 1usize..5, seed in any::<u64>()) {
        let dim = n.pow(m as u32);
        let i = (seed % dim as u64) as usize;
        let z = BlockString::from_index(i, n, m);
        prop_assert_eq!(z.index(n), i);
        prop_assert_eq!(z.counts(n).iter().sum::<usize>(), m);
    }

    #[test]
    fn wrap_stays_in_range(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!(circular_distance(x, 0.0) <= PI);
    }

    #[test]
    fn kernel_is_doubly_stochastic(n in 2usize..9, beta in -10.0f64..10.0, normalized in any::<bool>()) {
        let conv = if normalized { Convention::Normalized } else { Convention::Adjacency };
        let k = single_block_kernel_with(n, beta, conv);
        prop_assert!(k.stochasticity_error() < 1e-12);
        prop_assert!(k.diag >= -1e-15 && k.offdiag >= -1e-15);
    }

    #[test]
    fn kernel_preserves_mass(n in 2usize..5, m in 1usize..4, beta in -4.0f64..4.0, w in prop::collection::vec(0.01f64..1.0, 64)) {
        let dim = n.pow(m as u32);
        let total: f64 = w[..dim].iter().sum();
        let env = Envelope::external(w[..dim].iter().map(|x| x / total).collect()).unwrap();
        let out = apply_block_kernel(&single_block_kernel(n, beta), &env, m).unwrap();
        prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn fejer_forms_agree(p in 0usize..40, theta in -PI..PI) {
        let a = fejer_kernel(p, theta);
        prop_assert!(a >= -1e-12);
        prop_assert!((a - fejer_fourier_sum(p, theta)).abs() < 1e-9 * (p + 1) as f64);
    }

    #[test]
    fn bound_matches_ratio_form(p in 0usize..50, c in 0.001f64..1.0, delta in 0.01f64..PI) {
        // q0 bound equals the tight ratio form once M_p is the analytic tail
        let q = success_lower_bound(p, c, delta).unwrap();
        let r = ratio_bounds(ratio_parameter(p, delta, c), c).unwrap();
        prop_assert!((q - r.tight).abs() < 1e-12);
        prop_assert!(r.tight + 1e-15 >= r.simple);
        let via_rl = rl_success_bound(p, c, offpeak_bound(p, delta).unwrap()).unwrap().bound;
        prop_assert!((via_rl - q).abs() < 1e-12);
    }

    #[test]
    fn depth_meets_target(eps in 0.001f64..0.999, c in 0.001f64..1.0, delta in 0.01f64..PI) {
        let p = depth_for_target(eps, c, delta).unwrap();
        prop_assert!(success_lower_bound(p, c, delta).unwrap() >= 1.0 - eps - 1e-12);
        if p > 0 {
            prop_assert!(success_lower_bound(p - 1, c, delta).unwrap() < 1.0 - eps + 1e-9);
        }
    }

    #[test]
    fn cmin_inverts_depth(eps in 0.01f64..0.99, p in 0usize..30, delta in 0.01f64..PI) {
        let c = cmin(delta, eps, p);
        prop_assert!(success_lower_bound(p, c, delta).unwrap() >= 1.0 - eps - 1e-12);
        // 1 - c cancels badly when c is near 1, so allow one extra layer there
        let slack = usize::from(1.0 - c < 1e-4);
        prop_assert!(depth_for_target(eps, c, delta).unwrap() <= p + slack);
    }

    #[test]
    fn cmin_decreases_in_delta(eps in 0.01f64..0.99, p in 0usize..30) {
        let grid: Vec<f64> = (1..=50).map(|k| PI * k as f64 / 50.0).collect();
        let curve = cmin_curve(&grid, eps, p).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn shots_shrink_with_x(x in 0.01f64..100.0, eps in 0.001f64..0.5) {
        prop_assert!(shot_budget(2.0 * x, eps).unwrap() < shot_budget(x, eps).unwrap());
        prop_assert!(shot_budget(x, eps).unwrap() > (1.0 / eps).ln());
    }

    #[test]
    fn certificate_round_trips(p in 0usize..20, c in 0.01f64..1.0, delta in 0.01f64..PI, eps in 0.01f64..0.5) {
        let cert = Certificate::new(p, c, delta, eps, DEFAULT_ETA).unwrap();
        let back: Certificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        prop_assert_eq!(back, cert);
    }

    #[test]
    fn averaged_kernel_nonnegative(p in 0usize..30, gamma in -3.0f64..3.0, de in -6.0f64..6.0, hw in 0.01f64..3.0) {
        let w = DitherWindow::uniform(hw).unwrap();
        prop_assert!(averaged_fejer(p, gamma, de, &w) >= -1e-10);
    }
}
