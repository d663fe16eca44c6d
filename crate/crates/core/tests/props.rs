use nlcurv::curvature::sigma_to_one_limit;
use nlcurv::oracle::sphere_k;
use nlcurv::specfun::{beta, duplication_residual, gamma, reflection_residual};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.05f64..30.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-13);
    }

    #[test]
    fn duplication_holds(x in 0.01f64..20.0) {
        prop_assert!(duplication_residual(x).unwrap() < 1e-12);
    }

    // cos(πx) vanishes where Γ(½−x) has its poles, so stay on (−½, ½)
    #[test]
    fn reflection_holds(x in -0.49f64..0.49) {
        prop_assert!(reflection_residual(x).unwrap() < 1e-12);
    }

    #[test]
    fn beta_is_symmetric(x in 0.05f64..10.0, y in 0.05f64..10.0) {
        let (a, b) = (beta(x, y).unwrap(), beta(y, x).unwrap());
        prop_assert!(((a - b) / a).abs() < 1e-13);
    }

    #[test]
    fn sphere_k_scales_like_rho_to_minus_sigma(n in 2usize..4, rho in 0.1f64..10.0, sigma in 0.05f64..0.95) {
        let ratio = sphere_k(n, rho, sigma).unwrap() / sphere_k(n, 1.0, sigma).unwrap();
        prop_assert!((ratio - rho.powf(-sigma)).abs() < 1e-12 * ratio.abs().max(1.0));
    }

    #[test]
    fn limit_is_exact_for_polynomials(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        // (1−σ)·v(σ) = c0 + c1 (1−σ)  →  limit c0
        let s: Vec<(f64, f64)> = [0.9, 0.95, 0.99].iter().map(|&sg: &f64| (sg, (c0 + c1 * (1.0 - sg)) / (1.0 - sg))).collect();
        prop_assume!(c0.abs() > 1e-3);
        let lim = sigma_to_one_limit(&s).unwrap();
        prop_assert!((lim.estimate - c0).abs() < 1e-9);
    }
}
