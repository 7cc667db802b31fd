mod common;

use std::io::Cursor;

use dgdmax::harness::gen_synthetic;
use dgdmax::metrics::grad_p;
use dgdmax::problem::{
    minty_operator, parse_libsvm, write_libsvm, Dataset, DrlrInstance, DrlrParams, LibsvmOptions, MinimaxProblem,
    Partition, ProblemError, ToyMinty,
};
use dgdmax::rng::SeedStream;
use proptest::prelude::*;

const TINY: &str = include_str!("fixtures/tiny.libsvm");
const PARTITION: &str = include_str!("fixtures/partition_n100_m20_seed7.txt");

fn parse(text: &str) -> Result<Dataset, ProblemError> {
    parse_libsvm(Cursor::new(text), LibsvmOptions::default())
}

fn random_point(rng: &mut SeedStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.gaussian()).collect()
}

fn random_simplex(rng: &mut SeedStream, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

fn instance(samples: usize, features: usize, agents: usize, beta_y: f64, seed: u64) -> DrlrInstance {
    let data = gen_synthetic(features, samples, 0.1, seed).unwrap();
    let part = Partition::random(samples, agents, seed + 1).unwrap();
    DrlrInstance::new(data, part, DrlrParams { beta_y, ..DrlrParams::default() }).unwrap()
}

#[test]
fn tiny_libsvm_fixture() {
    let d = parse(TINY).unwrap();
    assert_eq!((d.sample_count(), d.feature_dim()), (5, 4));
    assert_eq!(d.labels(), &[1.0, -1.0, 1.0, -1.0, 1.0]);
    assert_eq!(d.row(0), (&[0usize, 2][..], &[0.5, -1.25][..]));
    assert_eq!(d.row(2), (&[0usize, 1, 2, 3][..], &[-0.75, 0.5, 1.0, -2.0][..]));
    assert_eq!(d.dot_row(2, &[1.0, 1.0, 1.0, 1.0]), -1.25);
    assert!((d.row_norm_sq(1) - (4.0 + 0.015625)).abs() < 1e-15);

    let mut out = Vec::new();
    write_libsvm(&d, &mut out).unwrap();
    assert_eq!(parse(std::str::from_utf8(&out).unwrap()).unwrap(), d);
}

#[test]
fn libsvm_errors_carry_line_numbers() {
    let cases = [
        ("+1 1:1\n+1 3:1 2:1\n", 2),
        ("+1 1:1\n\n2 1:1\n", 3),
        ("+1 0:1\n", 1),
        ("+1 1:abc\n", 1),
        ("+1 1\n", 1),
    ];
    for (text, line) in cases {
        let e = parse(text).unwrap_err();
        assert!(e.to_string().starts_with(&format!("line {line}:")), "{text:?}: {e}");
    }
    assert!(matches!(parse(""), Err(ProblemError::EmptyDataset)));
    let opts = LibsvmOptions { feature_dim: Some(2), ..LibsvmOptions::default() };
    assert!(matches!(
        parse_libsvm(Cursor::new("+1 3:1\n"), opts),
        Err(ProblemError::IndexOutOfRange { line: 1, index: 3, dim: 2 })
    ));
}

#[test]
fn zero_one_labels_need_the_flag() {
    assert!(matches!(parse("0 1:1\n"), Err(ProblemError::BadLabel { .. })));
    let opts = LibsvmOptions { zero_one_labels: true, ..LibsvmOptions::default() };
    let d = parse_libsvm(Cursor::new("0 1:1\n1 1:2\n"), opts).unwrap();
    assert_eq!(d.labels(), &[-1.0, 1.0]);
}

#[test]
fn partition_matches_reference_generator() {
    let golden = Partition::read(Cursor::new(PARTITION), 100).unwrap();
    assert_eq!(Partition::random(100, 20, 7).unwrap().sets(), golden.sets());
}

#[test]
fn partition_rejects_bad_covers() {
    assert!(Partition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
    assert!(Partition::new(vec![vec![0, 1]], 3).is_err());
    // An agent without samples is a valid partition but not a valid instance.
    let empty = Partition::new(vec![vec![0, 1], vec![]], 2).unwrap();
    let data = gen_synthetic(3, 2, 0.0, 0).unwrap();
    assert!(DrlrInstance::new(data, empty, DrlrParams::default()).is_err());
    assert!(Partition::random(3, 4, 0).is_err());
}

proptest! {
    #[test]
    fn partition_is_balanced_disjoint_cover(n in 1usize..300, m in 1usize..40, seed in any::<u64>()) {
        prop_assume!(m <= n);
        let p = Partition::random(n, m, seed).unwrap();
        let mut seen = vec![0; n];
        for s in p.sets() {
            prop_assert!(s.len() == n / m || s.len() == n / m + 1);
            for &j in s { seen[j] += 1; }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }
}

#[test]
fn synthetic_data_is_deterministic_and_balanced() {
    let a = gen_synthetic(20, 200, 0.1, 42).unwrap();
    assert_eq!(a, gen_synthetic(20, 200, 0.1, 42).unwrap());
    assert_ne!(a, gen_synthetic(20, 200, 0.1, 43).unwrap());
    for seed in 0..10 {
        let d = gen_synthetic(20, 200, 0.1, seed).unwrap();
        let pos = d.labels().iter().filter(|&&b| b > 0.0).count() as f64 / 200.0;
        assert!((0.3..=0.7).contains(&pos), "seed {seed}: {pos}");
    }
}

#[test]
fn noiseless_synthetic_data_is_separable() {
    for seed in 0..5 {
        let d = gen_synthetic(10, 150, 0.0, seed).unwrap();
        assert!(common::perceptron(&d, 10_000).is_some(), "seed {seed}");
    }
}

#[test]
fn drlr_gradients_match_finite_differences() {
    let p = instance(60, 8, 3, 0.1, 5);
    let mut rng = SeedStream::new(77);
    for _ in 0..100 {
        let i = rng.below(3) as usize;
        let x = random_point(&mut rng, 8, 1.0);
        let y = random_simplex(&mut rng, 60);
        let gx = p.grad_x(i, &x, &y);
        let gy = p.grad_y(i, &x, &y);
        let nx = common::fd_gradient(|v| p.value(i, v, &y), &x);
        let ny = common::fd_gradient(|v| p.value(i, &x, v), &y);
        assert!(common::rel_err(&gx, &nx) <= 1e-6, "x: {}", common::rel_err(&gx, &nx));
        assert!(common::rel_err(&gy, &ny) <= 1e-6, "y: {}", common::rel_err(&gy, &ny));
    }
}

#[test]
fn agent_average_recovers_pooled_objective() {
    let p = instance(40, 5, 4, 0.3, 9);
    let prm = *p.params();
    let mut rng = SeedStream::new(3);
    for _ in 0..20 {
        let x = random_point(&mut rng, 5, 2.0);
        let y = random_simplex(&mut rng, 40);
        let avg: f64 = (0..4).map(|i| p.value(i, &x, &y)).sum::<f64>() / 4.0;
        let oracle = common::drlr_objective(p.dataset(), prm.alpha, prm.beta_x, prm.beta_y, &x, &y);
        assert!((avg - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()), "{avg} vs {oracle}");
    }
}

#[test]
fn dual_curvature_is_exactly_beta_y() {
    let p = instance(50, 6, 5, 0.37, 1);
    let mut rng = SeedStream::new(8);
    for _ in 0..100 {
        let i = rng.below(5) as usize;
        let x = random_point(&mut rng, 6, 3.0);
        let (y, z) = (random_simplex(&mut rng, 50), random_simplex(&mut rng, 50));
        let d: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
        let g: Vec<f64> = p.grad_y(i, &x, &y).iter().zip(p.grad_y(i, &x, &z)).map(|(a, b)| a - b).collect();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        let ip: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!((ip + 0.37 * dd).abs() <= 1e-12);
        assert!((common::norm(&g) - 0.37 * dd.sqrt()).abs() <= 1e-12);
    }
    let c = p.constants();
    assert_eq!((c.mu, c.l_y), (0.37, 0.37));
}

#[test]
fn smoothness_constant_bounds_gradient_differences() {
    let p = instance(80, 10, 4, 0.1, 2);
    let l = p.constants().l;
    let mut rng = SeedStream::new(4);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let i = rng.below(4) as usize;
        let r = if k % 2 == 0 { 1e-3 } else { 1.0 };
        let x = random_point(&mut rng, 10, 2.0);
        let xt: Vec<f64> = x.iter().map(|v| v + r * rng.gaussian()).collect();
        let y = random_simplex(&mut rng, 80);
        let yt = random_simplex(&mut rng, 80);
        let mut lhs = common::diff_norm(&p.grad_x(i, &x, &y), &p.grad_x(i, &xt, &yt)).powi(2);
        lhs += common::diff_norm(&p.grad_y(i, &x, &y), &p.grad_y(i, &xt, &yt)).powi(2);
        let rhs = common::diff_norm(&x, &xt).powi(2) + common::diff_norm(&y, &yt).powi(2);
        worst = worst.max((lhs / rhs).sqrt() / l);
    }
    assert!(worst <= 1.0, "ratio {worst}");
}

/// `p(x) = max_y` of the pooled objective, with the inner maximizer found by
/// the brute-force projection of `1/N + losses / beta_y`.
fn primal_value(data: &Dataset, prm: &DrlrParams, x: &[f64]) -> f64 {
    let n = data.sample_count();
    let z: Vec<f64> = (0..n)
        .map(|j| {
            let (idx, val) = data.row(j);
            let t: f64 = idx.iter().zip(val).map(|(&k, &v)| x[k] * v).sum();
            1.0 / n as f64 + common::softplus_neg(data.label(j) * t) / prm.beta_y
        })
        .collect();
    let y = common::brute_force_simplex(&z);
    common::drlr_objective(data, prm.alpha, prm.beta_x, prm.beta_y, x, &y)
}

#[test]
fn primal_gradient_matches_danskin_finite_differences() {
    let data = gen_synthetic(4, 8, 0.2, 12).unwrap();
    let p = DrlrInstance::new(data, Partition::random(8, 2, 1).unwrap(), DrlrParams::default()).unwrap();
    let prm = *p.params();
    let mut rng = SeedStream::new(19);
    for _ in 0..30 {
        let x = random_point(&mut rng, 4, 1.5);
        let g = grad_p(&p, &x).unwrap();
        let fd = common::fd_gradient(|v| primal_value(p.dataset(), &prm, v), &x);
        assert!(common::rel_err(&g, &fd) <= 1e-5, "{g:?} vs {fd:?}");
    }
}

#[test]
fn exact_dual_satisfies_optimality() {
    let p = instance(30, 4, 3, 0.2, 6);
    let l = p.constants().l;
    let k = 0.5 * l * 3f64.sqrt();
    let mut rng = SeedStream::new(2);
    for _ in 0..30 {
        let i = rng.below(3) as usize;
        let x = random_point(&mut rng, 4, 1.0);
        let lt = random_point(&mut rng, 30, 1e-3);
        let y = p.exact_dual(i, &x, &lt, l).unwrap();
        let g: Vec<f64> = p.grad_y(i, &x, &y).iter().zip(&lt).map(|(a, b)| a - k * b).collect();
        for _ in 0..20 {
            let q = random_simplex(&mut rng, 30);
            let ip: f64 = g.iter().zip(q.iter().zip(&y)).map(|(gi, (qi, yi))| gi * (qi - yi)).sum();
            assert!(ip <= 1e-10, "ascent direction {ip}");
        }
    }
}

#[test]
fn minty_operator_follows_printed_partials() {
    let t = ToyMinty;
    for (x, y) in [(0.5, 2.0), (-1.0, -3.0), (0.0, 1.0)] {
        let (a, b) = minty_operator(x, y);
        assert_eq!(a, -2.0 * x * y);
        assert_eq!(b, x * x - y);
        assert_eq!(t.grad_x(x, y), -2.0 * x * y);
        assert_eq!(t.grad_y(x, y), -x * x + y);
    }
}

#[test]
fn bad_parameters_rejected() {
    let data = gen_synthetic(3, 10, 0.0, 0).unwrap();
    let bad = DrlrParams { beta_y: 0.0, ..DrlrParams::default() };
    assert!(DrlrInstance::centralized(data, bad).is_err());
    assert!(gen_synthetic(3, 1, 0.0, 0).is_err());
}
