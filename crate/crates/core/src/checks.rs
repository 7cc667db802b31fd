//! Built-in property suites run by the `check` subcommand.
//!
//! `invariants` covers exact algebraic identities of the building blocks;
//! `paper-properties` covers the analytical bounds the method relies on.

use std::fmt;

use nalgebra::DMatrix;

use crate::graph::{laplacian_mixing, validate_mixing, Graph, DEFAULT_RETRY_CAP};
use crate::harness::{Experiment, HarnessError, RunConfig};
use crate::linalg::{distance, dot, norm2, AgentMatrix};
use crate::metrics::{grad_big_p, tracking_residual};
use crate::optim::{DGdMax, DualSolver, GdMax, Schedule};
use crate::problem::drlr::{random_ball_point, random_simplex_point};
use crate::problem::{minty_scan, MinimaxProblem, Partition};
use crate::rng::SeedStream;
use crate::subsolver::{apg_maximize, project_simplex, DualSubproblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Invariants,
    PaperProperties,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "invariants" => Ok(Self::Invariants),
            "paper-properties" => Ok(Self::PaperProperties),
            _ => Err(format!("unknown suite `{s}` (expected invariants or paper-properties)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

type CheckFn = fn() -> Result<(bool, String), HarnessError>;

pub fn run_suite(suite: Suite) -> Vec<CheckOutcome> {
    let list: &[(&'static str, CheckFn)] = match suite {
        Suite::Invariants => &[
            ("mixing_matrices", mixing_matrices),
            ("simplex_idempotent", simplex_idempotent),
            ("partition_cover", partition_cover),
            ("drlr_dual_curvature", drlr_dual_curvature),
            ("drlr_gradients", drlr_gradients),
            ("conservation", conservation),
            ("determinism", determinism),
        ],
        Suite::PaperProperties => &[
            ("inexact_dual_error", inexact_dual_error),
            ("dual_map_lipschitz", dual_map_lipschitz),
            ("reformulation_smoothness", reformulation_smoothness),
            ("single_agent_reduction", single_agent_reduction),
            ("minty_failure", minty_failure),
        ],
    };
    list.iter()
        .map(|&(name, f)| match f() {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn fixture() -> Result<Experiment, HarnessError> {
    Experiment::build(&RunConfig::desk())
}

fn mixing_matrices() -> Result<(bool, String), HarnessError> {
    let mut rng = SeedStream::new(0x3117);
    let mut worst_rho_gap: f64 = 0.0;
    let mut failures = 0;
    for k in 0..50 {
        let m = 2 + rng.below(29) as usize;
        let g = Graph::erdos_renyi(m, 0.3, 1000 + k, DEFAULT_RETRY_CAP)?;
        let w = laplacian_mixing(&g, 0.8)?;
        if !validate_mixing(&w, &g)?.all_passed() || !w.is_symmetric() {
            failures += 1;
        }
        let avg = DMatrix::from_element(m, m, 1.0 / m as f64);
        let sv = (w.weights() - avg).singular_values().max();
        worst_rho_gap = worst_rho_gap.max((sv - w.rho()).abs());
    }
    Ok((
        failures == 0 && worst_rho_gap <= 1e-8,
        format!("50 graphs, {failures} failing validation, max |rho - svd| = {worst_rho_gap:.2e}"),
    ))
}

fn simplex_idempotent() -> Result<(bool, String), HarnessError> {
    let mut rng = SeedStream::new(0x51);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = 1 + rng.below(12) as usize;
        let z: Vec<f64> = (0..n).map(|_| 3.0 * rng.gaussian()).collect();
        let p = project_simplex(&z).expect("finite input");
        let q = project_simplex(&p).expect("finite input");
        worst = worst.max(distance(&p, &q));
    }
    Ok((worst <= 1e-12, format!("max |P(P(z)) - P(z)| = {worst:.2e}")))
}

fn partition_cover() -> Result<(bool, String), HarnessError> {
    for (n, m, seed) in [(200, 5, 1), (101, 7, 2), (30, 30, 3), (9, 1, 4)] {
        let p = Partition::random(n, m, seed)?;
        let mut seen = vec![0usize; n];
        for s in p.sets() {
            for &j in s {
                seen[j] += 1;
            }
        }
        if seen.iter().any(|&c| c != 1) {
            return Ok((false, format!("N={n}, m={m}: not a disjoint cover")));
        }
    }
    Ok((true, "4 partitions are disjoint covers".into()))
}

fn drlr_dual_curvature() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let p = &e.problem;
    let beta = p.params().beta_y;
    let mut rng = SeedStream::new(0xc0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let i = rng.below(p.agents() as u64) as usize;
        let x = random_ball_point(&mut rng, p.primal_dim(), 10.0);
        let y = random_simplex_point(&mut rng, p.dual_dim());
        let z = random_simplex_point(&mut rng, p.dual_dim());
        let d: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
        let gd: Vec<f64> = p
            .grad_y(i, &x, &y)
            .iter()
            .zip(p.grad_y(i, &x, &z))
            .map(|(a, b)| a - b)
            .collect();
        let dd = dot(&d, &d);
        worst = worst
            .max((dot(&d, &gd) + beta * dd).abs())
            .max((norm2(&gd) - beta * dd.sqrt()).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation from beta_y curvature = {worst:.2e}")))
}

fn drlr_gradients() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let p = &e.problem;
    let mut rng = SeedStream::new(0xfd);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let i = rng.below(p.agents() as u64) as usize;
        let x = random_ball_point(&mut rng, p.primal_dim(), 3.0);
        let y = random_simplex_point(&mut rng, p.dual_dim());
        let fd = |v: &[f64], k: usize, primal: bool| {
            let h = 1e-5 * (1.0 + v[k].abs());
            let (mut a, mut b) = (v.to_vec(), v.to_vec());
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = if primal {
                (p.value(i, &a, &y), p.value(i, &b, &y))
            } else {
                (p.value(i, &x, &a), p.value(i, &x, &b))
            };
            (fa - fb) / (2.0 * h)
        };
        let gx = p.grad_x(i, &x, &y);
        let gy = p.grad_y(i, &x, &y);
        let nx: Vec<f64> = (0..x.len()).map(|k| fd(&x, k, true)).collect();
        let ny: Vec<f64> = (0..y.len()).map(|k| fd(&y, k, false)).collect();
        worst = worst
            .max(distance(&gx, &nx) / (1.0 + norm2(&gx)))
            .max(distance(&gy, &ny) / (1.0 + norm2(&gy)));
    }
    Ok((worst <= 1e-6, format!("max relative gradient error = {worst:.2e}")))
}

fn conservation() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let method = DGdMax::new(&e.problem, &e.mixing, e.schedule)?;
    let (mut s, _) = method.init(&e.x0)?;
    let (mut track, mut drift): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        track = track.max(tracking_residual(&e.problem, &s.v, &s.x, &s.y));
        drift = drift.max(s.multiplier_drift());
        s = method.step(&s)?.0;
    }
    Ok((
        track <= 1e-10 && drift <= 1e-10,
        format!("500 rounds: max tracking residual {track:.2e}, max multiplier drift {drift:.2e}"),
    ))
}

fn determinism() -> Result<(bool, String), HarnessError> {
    let mut cfg = RunConfig::desk();
    cfg.t_max = 50;
    let a = Experiment::build(&cfg)?.run_with(None::<std::io::Sink>, true)?;
    cfg.parallel = true;
    let b = Experiment::build(&cfg)?.run_with(None::<std::io::Sink>, true)?;
    let strip = |rows: &[crate::harness::TraceRow]| {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                r.wall_ms = 0.0;
                r
            })
            .collect::<Vec<_>>()
    };
    let same = strip(&a.rows) == strip(&b.rows);
    Ok((same, format!("sequential and parallel traces identical: {same}")))
}

fn random_lambda(rng: &mut SeedStream, m: usize, n: usize, scale: f64) -> AgentMatrix {
    AgentMatrix::from_rows(
        (0..m)
            .map(|_| (0..n).map(|_| scale * rng.gaussian()).collect())
            .collect(),
    )
}

fn inexact_dual_error() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let p = &e.problem;
    let c = p.constants();
    let delta = 1e-6;
    let mut rng = SeedStream::new(0x9a9);
    let (mut violations, mut worst) = (0, 0.0f64);
    for _ in 0..100 {
        let i = rng.below(p.agents() as u64) as usize;
        let x = random_ball_point(&mut rng, p.primal_dim(), 10.0);
        let lt: Vec<f64> = (0..p.dual_dim()).map(|_| 1e-3 * rng.gaussian()).collect();
        let y0 = random_simplex_point(&mut rng, p.dual_dim());
        let sub = DualSubproblem::for_agent(p, i, &x, &lt, c.l);
        let r = apg_maximize(&sub, &y0, delta, 100_000).map_err(|e| HarnessError::Config(e.to_string()))?;
        let exact = p.exact_dual(i, &x, &lt, c.l).expect("closed form");
        let err = distance(&r.y, &exact);
        worst = worst.max(err * c.mu / delta);
        if !r.converged || err > delta / c.mu {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("100 subproblems, {violations} violations, max error / (delta / mu) = {worst:.3}"),
    ))
}

fn consensus_duals_at(e: &Experiment, x: &[f64], lambda: &AgentMatrix) -> AgentMatrix {
    let p = &e.problem;
    let lt = lambda.mix_transpose(e.mixing.weights()).sub(lambda);
    let l = p.constants().l;
    AgentMatrix::from_rows(
        (0..p.agents())
            .map(|i| p.exact_dual(i, x, lt.row(i), l).expect("closed form"))
            .collect(),
    )
}

fn dual_map_lipschitz() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let p = &e.problem;
    let (m, kappa) = (p.agents(), p.constants().kappa());
    let mut rng = SeedStream::new(0x1b);
    let (mut violations, mut worst) = (0, 0.0f64);
    for k in 0..100 {
        let x = random_ball_point(&mut rng, p.primal_dim(), 5.0);
        let r = if k % 2 == 0 { 1e-2 } else { 1.0 };
        let xt: Vec<f64> = x.iter().map(|v| v + r * rng.gaussian()).collect();
        let lambda = random_lambda(&mut rng, m, p.dual_dim(), 1e-3);
        let a = consensus_duals_at(&e, &x, &lambda);
        let b = consensus_duals_at(&e, &xt, &lambda);
        let lhs = a.sub(&b).frobenius().powi(2);
        let rhs = kappa * kappa * m as f64 * distance(&x, &xt).powi(2);
        worst = worst.max(lhs / rhs);
        if lhs > rhs {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("100 pairs, {violations} violations, max ratio to bound = {worst:.3e}"),
    ))
}

fn reformulation_smoothness() -> Result<(bool, String), HarnessError> {
    let e = fixture()?;
    let p = &e.problem;
    let c = p.constants();
    let l_p = c.l * (4.0 * c.kappa() * c.kappa() + 1.0).sqrt();
    let w = e.mixing.weights();
    let mut rng = SeedStream::new(0x5300);
    let (mut violations, mut worst) = (0, 0.0f64);
    for k in 0..100 {
        let r = if k % 2 == 0 { 1e-2 } else { 1.0 };
        let x = random_ball_point(&mut rng, p.primal_dim(), 5.0);
        let xt: Vec<f64> = x.iter().map(|v| v + r * rng.gaussian()).collect();
        let la = random_lambda(&mut rng, p.agents(), p.dual_dim(), 1e-3);
        let lb = la.add_scaled(r * 1e-3, &random_lambda(&mut rng, p.agents(), p.dual_dim(), 1.0));
        let (gxa, gla) = grad_big_p(p, w, &x, &la).expect("closed form");
        let (gxb, glb) = grad_big_p(p, w, &xt, &lb).expect("closed form");
        let lhs = (distance(&gxa, &gxb).powi(2) + gla.sub(&glb).frobenius().powi(2)).sqrt();
        let rhs = l_p * (distance(&x, &xt).powi(2) + la.sub(&lb).frobenius().powi(2)).sqrt();
        worst = worst.max(lhs / rhs);
        if lhs > rhs {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("100 pairs, {violations} violations, max ratio to bound = {worst:.3e}"),
    ))
}

fn single_agent_reduction() -> Result<(bool, String), HarnessError> {
    let mut cfg = RunConfig::desk();
    cfg.agents = 1;
    let e = Experiment::build(&cfg)?;
    let p = &e.problem;
    let schedule = Schedule { eta_x: 1e-2, ..e.schedule };
    let net = DGdMax::new(p, &e.mixing, schedule)?.with_solver(DualSolver::Exact);
    let central = GdMax::new(p, schedule.eta_x);
    let (mut s, _) = net.init(&e.x0)?;
    let mut c = central.init(&e.x0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        s = net.step(&s)?.0;
        c = central.step(&c)?;
        for (a, b) in s.x.row(0).iter().zip(&c.x) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= 1e-14, format!("200 rounds, max |x_net - x_central| = {worst:.2e}")))
}

fn minty_failure() -> Result<(bool, String), HarnessError> {
    let scan = minty_scan((-1.0, 1.0), (-5.0, 5.0), 21, 21, &[(1.0, -1e3)]);
    Ok((
        scan.condition_fails(),
        format!(
            "{} candidates, {} survivors, worst min inner product {:.3e}",
            scan.candidates,
            scan.survivors.len(),
            scan.worst_case
        ),
    ))
}
