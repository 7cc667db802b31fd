mod common;

use dgdmax::graph::{laplacian_mixing, Graph};
use dgdmax::harness::{Experiment, RunConfig};
use dgdmax::metrics::tracking_residual;
use dgdmax::optim::{
    default_delta, default_stepsizes, iteration_budget_t, DGdMax, DeltaSchedule, DualSolver, Gda, GdMax, OptimError,
    Schedule,
};
use dgdmax::problem::{DualTerm, MinimaxProblem, PrimalRegularizer, QuadraticAgent, QuadraticMinimax};
use dgdmax::rng::SeedStream;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

#[test]
fn stepsizes_and_budgets_match_closed_forms() {
    let mut rng = SeedStream::new(36);
    for _ in 0..20 {
        let l = rng.uniform(0.1, 100.0);
        let kappa = rng.uniform(1.0, 1000.0);
        let rho = rng.uniform(0.0, 0.99);
        let eps = rng.uniform(1e-3, 1.0);
        let phi0 = rng.uniform(0.0, 10.0);
        let t = rng.below(10_000) as usize;
        let g = (1.0 - rho) * (1.0 - rho);

        let (ex, el) = default_stepsizes(l, kappa, rho).unwrap();
        assert!(close(ex, g / (5.0 * l * (1.0 + 6.0 * kappa * kappa).sqrt())));
        assert!(close(el, g / (l * (9.0 * kappa + 2.0))));

        assert!(close(default_delta(t, rho, kappa), g / (8.0 * kappa * (1.0 + t as f64))));

        let bound = [
            64.0 * (10.0 * l * kappa * (phi0 + 1.0) + 1.0) / g,
            4096.0 * l * kappa / (1.0 - rho),
            800.0,
        ]
        .into_iter()
        .fold(f64::MIN, f64::max);
        assert_eq!(iteration_budget_t(eps, l, kappa, rho, phi0).unwrap(), (bound / (eps * eps)).ceil() as u64);
    }
}

#[test]
fn schedule_rejects_bad_inputs() {
    assert!(default_stepsizes(1.0, 1.0, 1.0).is_err());
    assert!(default_stepsizes(1.0, 1.0, -0.1).is_err());
    assert!(default_stepsizes(0.0, 1.0, 0.5).is_err());
    assert!(iteration_budget_t(0.0, 1.0, 1.0, 0.5, 0.0).is_err());
}

/// Strongly convex-strongly concave quadratic agents with `h = 0`.
fn quadratic(m: usize, n: usize, d: usize, seed: u64) -> QuadraticMinimax {
    let base = QuadraticMinimax::random(m, n, d, 0.5, 2.0, 0.7, seed, DualTerm::Zero).unwrap();
    let agents = (0..m)
        .map(|i| {
            let mut a = base.agent(i).clone();
            a.p = DMatrix::identity(n, n) * (1.0 + 0.3 * i as f64);
            a
        })
        .collect();
    QuadraticMinimax::new(agents, PrimalRegularizer::Zero, DualTerm::Zero).unwrap()
}

/// One round written out with dense linear algebra, independent of the
/// library's agent-matrix plumbing.
fn reference_round(
    p: &QuadraticMinimax,
    w: &DMatrix<f64>,
    eta_x: f64,
    eta_l: f64,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lam: &DMatrix<f64>,
    v: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let m = x.nrows();
    let l = p.constants().l;
    let eye = DMatrix::identity(m, m);
    let x_new = w * x - v * eta_x;
    let lam_new = lam + (w - &eye) * y * (l * eta_l / (2.0 * (m as f64).sqrt()));
    let lt = w.transpose() * &lam_new - &lam_new;
    let mut y_new = DMatrix::zeros(m, y.ncols());
    let mut g_old = DMatrix::zeros(m, x.ncols());
    let mut g_new = DMatrix::zeros(m, x.ncols());
    for i in 0..m {
        let a = p.agent(i);
        let xi = x_new.row(i).transpose();
        let rhs = a.b.transpose() * &xi + &a.c - lt.row(i).transpose() * (0.5 * l * (m as f64).sqrt());
        let yi = a.q.clone().cholesky().unwrap().solve(&rhs);
        y_new.set_row(i, &yi.transpose());
        g_old.set_row(i, &(&a.p * x.row(i).transpose() + &a.b * y.row(i).transpose()).transpose());
        g_new.set_row(i, &(&a.p * &xi + &a.b * &yi).transpose());
    }
    let v_new = w * v + g_new - g_old;
    (x_new, y_new, lam_new, v_new)
}

fn to_dense(a: &dgdmax::linalg::AgentMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

#[test]
fn round_matches_reference_implementation() {
    let p = quadratic(4, 3, 2, 11);
    let mix = laplacian_mixing(&Graph::ring(4).unwrap(), 0.8).unwrap();
    let w = mix.weights().clone();
    let sched = Schedule { eta_x: 0.05, eta_lambda: 0.1, delta: DeltaSchedule::Constant(0.0) };
    let method = DGdMax::new(&p, &mix, sched).unwrap().with_solver(DualSolver::Exact);
    let (mut s, _) = method.init(&[0.5, -1.0, 2.0]).unwrap();
    let (mut x, mut y, mut lam, mut v) = (to_dense(&s.x), to_dense(&s.y), to_dense(&s.lambda), to_dense(&s.v));
    for _ in 0..25 {
        s = method.step(&s).unwrap().0;
        (x, y, lam, v) = reference_round(&p, &w, 0.05, 0.1, &x, &y, &lam, &v);
        for (got, want) in [(&s.x, &x), (&s.y, &y), (&s.lambda, &lam), (&s.v, &v)] {
            assert!((to_dense(got) - want).amax() <= 1e-10 * (1.0 + want.amax()));
        }
    }
}

#[test]
fn initial_state_layout() {
    let p = quadratic(3, 2, 2, 4);
    let mix = laplacian_mixing(&Graph::path(3).unwrap(), 0.8).unwrap();
    let method = DGdMax::new(&p, &mix, Schedule::defaults(&p.constants(), mix.rho()).unwrap()).unwrap();
    let (s, _) = method.init(&[1.0, 2.0]).unwrap();
    assert_eq!(s.t, 0);
    for i in 0..3 {
        assert_eq!(s.x.row(i), &[1.0, 2.0]);
    }
    assert_eq!(s.lambda.max_abs(), 0.0);
    assert_eq!(s.lambda_tilde.max_abs(), 0.0);
    assert_eq!(s.v, s.grads);
    assert!(tracking_residual(&p, &s.v, &s.x, &s.y) <= 1e-12);
    assert!(method.init(&[1.0]).is_err());
}

#[test]
fn conservation_laws_hold_on_reference_setup() {
    let exp = Experiment::build(&RunConfig::desk()).unwrap();
    let method = DGdMax::new(&exp.problem, &exp.mixing, exp.schedule).unwrap();
    let (mut s, _) = method.init(&exp.x0).unwrap();
    for _ in 0..100 {
        s = method.step(&s).unwrap().0;
        assert!(tracking_residual(&exp.problem, &s.v, &s.x, &s.y) <= 1e-10);
        assert!(s.multiplier_drift() <= 1e-10);
    }
}

#[test]
fn tracking_residual_sees_mean_shift() {
    let p = quadratic(3, 2, 2, 4);
    let mix = laplacian_mixing(&Graph::ring(3).unwrap(), 0.8).unwrap();
    let method = DGdMax::new(&p, &mix, Schedule::defaults(&p.constants(), mix.rho()).unwrap()).unwrap();
    let (s, _) = method.init(&[0.3, 0.1]).unwrap();
    // Adding (3, -6) to one row of three shifts the mean by (1, -2).
    let mut v = s.v.clone();
    v.row_mut(1)[0] += 3.0;
    v.row_mut(1)[1] -= 6.0;
    assert!((tracking_residual(&p, &v, &s.x, &s.y) - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn single_agent_matches_centralized_iterates() {
    let mut cfg = RunConfig::desk();
    cfg.agents = 1;
    let exp = Experiment::build(&cfg).unwrap();
    let sched = Schedule { eta_x: 0.01, ..exp.schedule };
    let net = DGdMax::new(&exp.problem, &exp.mixing, sched).unwrap();
    let central = GdMax::new(&exp.problem, 0.01);
    let (mut s, _) = net.init(&exp.x0).unwrap();
    let mut c = central.init(&exp.x0).unwrap();
    for _ in 0..200 {
        s = net.step(&s).unwrap().0;
        c = central.step(&c).unwrap();
        for (a, b) in s.x.row(0).iter().zip(&c.x) {
            assert!((a - b).abs() <= 1e-14);
        }
    }
}

#[test]
fn apg_path_tracks_exact_path() {
    let exp = Experiment::build(&RunConfig::desk()).unwrap();
    let sched = Schedule { eta_x: 1e-3, eta_lambda: 1e-3, delta: DeltaSchedule::Constant(1e-9) };
    let exact = DGdMax::new(&exp.problem, &exp.mixing, sched).unwrap().with_solver(DualSolver::Exact);
    let apg = DGdMax::new(&exp.problem, &exp.mixing, sched)
        .unwrap()
        .with_solver(DualSolver::Apg { max_iters: 10_000 });
    let (mut a, _) = exact.init(&exp.x0).unwrap();
    let (mut b, info) = apg.init(&exp.x0).unwrap();
    assert!(info.subsolver_iters > 0);
    for _ in 0..20 {
        a = exact.step(&a).unwrap().0;
        b = apg.step(&b).unwrap().0;
    }
    assert!(a.x.sub(&b.x).max_abs() <= 1e-6);
}

#[test]
fn exact_solver_without_closed_form_is_an_error() {
    let base = QuadraticMinimax::random(2, 2, 3, 0.5, 2.0, 0.5, 1, DualTerm::Simplex).unwrap();
    let mix = laplacian_mixing(&Graph::path(2).unwrap(), 0.8).unwrap();
    let sched = Schedule { eta_x: 0.01, eta_lambda: 0.01, delta: DeltaSchedule::Constant(1e-8) };
    let m = DGdMax::new(&base, &mix, sched).unwrap().with_solver(DualSolver::Exact);
    assert!(matches!(m.init(&[0.0, 0.0]), Err(OptimError::MissingOracle)));
    let auto = DGdMax::new(&base, &mix, sched).unwrap();
    let (s, info) = auto.init(&[0.0, 0.0]).unwrap();
    assert!(info.subsolver_iters > 0);
    for i in 0..2 {
        assert!(DualTerm::Simplex.contains(s.y.row(i), 1e-12));
    }
}

#[test]
fn subsolver_budget_is_reported() {
    let base = QuadraticMinimax::random(2, 2, 6, 1e-3, 10.0, 0.5, 1, DualTerm::Zero).unwrap();
    let mix = laplacian_mixing(&Graph::path(2).unwrap(), 0.8).unwrap();
    let sched = Schedule { eta_x: 0.01, eta_lambda: 0.01, delta: DeltaSchedule::Constant(1e-12) };
    let m = DGdMax::new(&base, &mix, sched).unwrap().with_solver(DualSolver::Apg { max_iters: 3 });
    assert!(matches!(m.init(&[1.0, 1.0]), Err(OptimError::SubsolverBudget { round: 0, .. })));
}

#[test]
fn divergence_is_detected() {
    let p = quadratic(2, 2, 2, 3);
    let mix = laplacian_mixing(&Graph::path(2).unwrap(), 0.8).unwrap();
    let sched = Schedule { eta_x: 50.0, eta_lambda: 0.1, delta: DeltaSchedule::Constant(0.0) };
    let method = DGdMax::new(&p, &mix, sched).unwrap().with_solver(DualSolver::Exact);
    let (mut s, _) = method.init(&[1.0, 1.0]).unwrap();
    let err = loop {
        match method.step(&s) {
            Ok((n, _)) => s = n,
            Err(e) => break e,
        }
    };
    assert!(matches!(err, OptimError::Diverged { .. }));
}

#[test]
fn mismatched_network_is_rejected() {
    let p = quadratic(3, 2, 2, 4);
    let mix = laplacian_mixing(&Graph::ring(4).unwrap(), 0.8).unwrap();
    let sched = Schedule::defaults(&p.constants(), mix.rho()).unwrap();
    assert!(matches!(DGdMax::new(&p, &mix, sched), Err(OptimError::DimensionMismatch { .. })));
}

#[test]
fn gda_updates_simultaneously() {
    // Scalar f = x^2/2 + 2xy - y^2: from (1, 1) both updates use the old point.
    let agent = QuadraticAgent {
        p: DMatrix::from_element(1, 1, 1.0),
        b: DMatrix::from_element(1, 1, 2.0),
        c: DVector::from_element(1, 0.0),
        q: DMatrix::from_element(1, 1, 2.0),
    };
    let p = QuadraticMinimax::new(vec![agent], PrimalRegularizer::Zero, DualTerm::Zero).unwrap();
    let gda = Gda::new(&p, 0.1, 0.2);
    let s = dgdmax::optim::CentralState { t: 0, x: vec![1.0], y: vec![1.0] };
    let n = gda.step(&s).unwrap();
    // grad_x = 1 + 2 = 3, grad_y = 2 - 2 = 0.
    assert!((n.x[0] - 0.7).abs() < 1e-15);
    assert!((n.y[0] - 1.0).abs() < 1e-15);
    assert_eq!(n.t, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservation_on_random_networks(m in 2usize..8, seed in any::<u64>(), eta in 1e-3f64..0.1) {
        let p = quadratic(m, 3, 2, seed);
        let g = Graph::erdos_renyi(m, 0.5, seed, 1000).unwrap();
        let mix = laplacian_mixing(&g, 0.8).unwrap();
        let sched = Schedule { eta_x: eta, eta_lambda: eta, delta: DeltaSchedule::Constant(0.0) };
        let method = DGdMax::new(&p, &mix, sched).unwrap().with_solver(DualSolver::Exact);
        let (mut s, _) = method.init(&[0.1, 0.2, 0.3]).unwrap();
        for _ in 0..30 {
            s = method.step(&s).unwrap().0;
            let scale = 1.0 + s.grads.max_abs();
            prop_assert!(tracking_residual(&p, &s.v, &s.x, &s.y) <= 1e-10 * scale);
            prop_assert!(s.multiplier_drift() <= 1e-10 * (1.0 + s.lambda.max_abs()));
        }
    }
}
