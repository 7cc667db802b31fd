mod common;

use dgdmax::problem::{DualTerm, MinimaxProblem, PrimalRegularizer, QuadraticAgent, QuadraticMinimax};
use dgdmax::rng::SeedStream;
use dgdmax::subsolver::{apg_maximize, project_simplex, theoretical_budget_s_t, DualSubproblem, SubsolverError};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[test]
fn sort_threshold_matches_enumeration() {
    let mut rng = SeedStream::new(21);
    for _ in 0..1000 {
        let n = 3 + rng.below(4) as usize;
        let z: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let fast = project_simplex(&z).unwrap();
        let slow = common::brute_force_simplex(&z);
        assert!(common::diff_norm(&fast, &slow) <= 1e-10, "{z:?}: {fast:?} vs {slow:?}");
    }
}

#[test]
fn ties_at_threshold() {
    // z - tau hits zero exactly on the third coordinate.
    let p = project_simplex(&[1.0, 0.5, 0.25]).unwrap();
    let q = common::brute_force_simplex(&[1.0, 0.5, 0.25]);
    assert!(common::diff_norm(&p, &q) < 1e-15);
    assert_eq!(p[2], 0.0);
}

proptest! {
    #[test]
    fn projection_lands_on_simplex(z in prop::collection::vec(-1e3f64..1e3, 1..40)) {
        let p = project_simplex(&z).unwrap();
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent(z in prop::collection::vec(-10f64..10.0, 1..30)) {
        let p = project_simplex(&z).unwrap();
        let q = project_simplex(&p).unwrap();
        prop_assert!(common::diff_norm(&p, &q) <= 1e-12);
    }

    #[test]
    fn projection_is_shift_invariant(z in prop::collection::vec(-5f64..5.0, 1..20), c in -3f64..3.0) {
        let p = project_simplex(&z).unwrap();
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        prop_assert!(common::diff_norm(&p, &project_simplex(&shifted).unwrap()) <= 1e-12);
    }

    #[test]
    fn projection_satisfies_variational_inequality(
        z in prop::collection::vec(-5f64..5.0, 2..12),
        seed in any::<u64>(),
    ) {
        // <z - p, q - p> <= 0 for every q in the simplex.
        let p = project_simplex(&z).unwrap();
        let mut rng = SeedStream::new(seed);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..z.len()).map(|_| -rng.next_f64().max(1e-300).ln()).collect();
            let s: f64 = raw.iter().sum();
            let q: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let ip: f64 = z.iter().zip(&p).zip(&q).map(|((zi, pi), qi)| (zi - pi) * (qi - pi)).sum();
            prop_assert!(ip <= 1e-10);
        }
    }
}

fn diag_quadratic(spectrum: &[f64], h: DualTerm) -> QuadraticMinimax {
    let d = spectrum.len();
    let agent = QuadraticAgent {
        p: DMatrix::identity(2, 2),
        b: DMatrix::from_fn(2, d, |i, j| ((1 + i + 3 * j) as f64).cos()),
        c: DVector::from_fn(d, |j, _| 0.5 - 0.1 * j as f64),
        q: DMatrix::from_diagonal(&DVector::from_column_slice(spectrum)),
    };
    QuadraticMinimax::new(vec![agent], PrimalRegularizer::Zero, h).unwrap()
}

#[test]
fn certificate_bounds_true_gradient_norm_on_unconstrained_quadratic() {
    // With h = 0 the residual is exactly ||grad s(y)||; the certificate must
    // agree with it up to cancellation error in its three terms.
    let prob = diag_quadratic(&[0.1, 0.5, 1.0, 3.0, 8.0], DualTerm::Zero);
    let x = [0.3, -0.7];
    let lt = vec![0.0; 5];
    let sub = DualSubproblem::for_agent(&prob, 0, &x, &lt, 1.0);
    for delta in [1e-1, 1e-3, 1e-6, 1e-9] {
        let r = apg_maximize(&sub, &[0.0; 5], delta, 100_000).unwrap();
        assert!(r.converged);
        let true_res = common::norm(&sub.grad(&r.y));
        assert!(true_res <= r.certified_residual + 1e-12, "{true_res} > {}", r.certified_residual);
        assert!(r.certified_residual <= delta);
    }
}

#[test]
fn accepted_iterate_is_within_delta_over_mu() {
    let prob = diag_quadratic(&[0.2, 0.4, 1.6, 6.4], DualTerm::Zero);
    let mu = prob.constants().mu;
    let mut rng = SeedStream::new(5);
    for _ in 0..50 {
        let x = [rng.gaussian(), rng.gaussian()];
        let lt: Vec<f64> = (0..4).map(|_| 0.1 * rng.gaussian()).collect();
        let exact = prob.exact_dual(0, &x, &lt, 2.0).unwrap();
        let sub = DualSubproblem::for_agent(&prob, 0, &x, &lt, 2.0);
        let r = apg_maximize(&sub, &[0.0; 4], 1e-6, 100_000).unwrap();
        assert!(common::diff_norm(&r.y, &exact) <= 1e-6 / mu);
    }
}

#[test]
fn simplex_constrained_apg_matches_projection() {
    // Isotropic curvature: the maximizer is one projection of the scaled linear term.
    let prob = diag_quadratic(&[0.5; 6], DualTerm::Simplex);
    let x = [1.0, 2.0];
    let lt = vec![0.0; 6];
    let exact = prob.exact_dual(0, &x, &lt, 1.0).unwrap();
    let sub = DualSubproblem::for_agent(&prob, 0, &x, &lt, 1.0);
    let r = apg_maximize(&sub, &[1.0 / 6.0; 6], 1e-10, 1000).unwrap();
    assert!(common::diff_norm(&r.y, &exact) <= 1e-10 / 0.5);
    assert!(DualTerm::Simplex.contains(&r.y, 1e-12));
}

#[test]
fn budget_exhaustion_is_reported() {
    let prob = diag_quadratic(&[1e-3, 10.0], DualTerm::Zero);
    let sub = DualSubproblem::for_agent(&prob, 0, &[1.0, 1.0], &[0.0, 0.0], 1.0);
    let r = apg_maximize(&sub, &[0.0, 0.0], 1e-12, 5).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations_used, 5);
    assert!(r.certified_residual > 1e-12);
}

#[test]
fn invalid_tolerance_is_rejected() {
    let prob = diag_quadratic(&[1.0], DualTerm::Zero);
    let sub = DualSubproblem::for_agent(&prob, 0, &[0.0, 0.0], &[0.0], 1.0);
    assert!(matches!(apg_maximize(&sub, &[0.0], 0.0, 10), Err(SubsolverError::BadTolerance(_))));
    assert!(matches!(apg_maximize(&sub, &[0.0], -1.0, 10), Err(SubsolverError::BadTolerance(_))));
}

#[test]
fn iteration_budget_formula() {
    // ceil(sqrt(kappa_y) ln(16 L_y gap / delta^2)) evaluated by hand:
    // kappa_y = 4, L_y = 2, gap = 0.5, delta = 0.1 -> 2 ln(1600) = 14.755 -> 15.
    assert_eq!(theoretical_budget_s_t(2.0, 4.0, 0.5, 0.1).unwrap(), 15);
    // Gap already below the tolerance scale gives a non-positive log.
    assert_eq!(theoretical_budget_s_t(1.0, 1.0, 1e-6, 1.0).unwrap(), 0);
    assert!(theoretical_budget_s_t(1.0, 1.0, 1.0, 0.0).is_err());
}
