use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dgdmax::checks::{run_suite, Suite};
use dgdmax::graph::{laplacian_mixing, read_mixing_csv, validate_mixing, write_mixing_csv, Graph, DEFAULT_RETRY_CAP};
use dgdmax::harness::{gen_synthetic, grid_search, parse_grid, Experiment, HarnessError, RunConfig, RunStatus};
use dgdmax::problem::write_libsvm;

#[derive(Parser)]
#[command(name = "dgdmax", version, about = "Decentralized minimax experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set algorithm.t_max=200`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a stepsize grid and write a ranked summary.
    Grid {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2;key2=w1,w2` or `paper`.
        #[arg(long)]
        grid: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Gradient-mapping level used to rank by hitting round.
        #[arg(long)]
        target: Option<f64>,
        /// Summary CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
    /// Generate a connected Erdos-Renyi graph.
    GenGraph {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write its Laplacian mixing matrix.
        #[arg(long)]
        mixing: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        scale: f64,
    },
    /// Check a mixing matrix against a graph.
    ValidateMixing {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Write a synthetic classification dataset in LIBSVM format.
    GenData {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        features: usize,
        #[arg(long, default_value_t = 0.1)]
        flip_noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in property suite.
    Check {
        #[arg(long)]
        suite: Suite,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_BUDGET: u8 = 4;

fn load_config(path: &PathBuf, overrides: &[String]) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::from_file(path)?;
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("override `{o}` lacks `=`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn execute(cmd: Command) -> Result<u8, HarnessError> {
    match cmd {
        Command::Run { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let exp = Experiment::build(&cfg)?;
            for (k, v) in exp.derived() {
                eprintln!("{k} = {v}");
            }
            let out = exp.run()?;
            if let Some(r) = &out.last {
                eprintln!(
                    "round {}: prox_grad_P={:.3e} prox_grad_p={} consensus={:.3e} lambda_grad={:.3e}",
                    r.t,
                    r.prox_grad_big_p,
                    r.prox_grad_p.map_or("n/a".into(), |v| format!("{v:.3e}")),
                    r.consensus_x_scaled,
                    r.lambda_grad
                );
            }
            eprintln!("status: {}", out.status.label());
            Ok(match out.status {
                RunStatus::Completed | RunStatus::TargetReached { .. } => 0,
                RunStatus::Diverged { .. } => EXIT_DIVERGED,
                RunStatus::SubsolverBudget { .. } => EXIT_BUDGET,
            })
        }
        Command::Grid {
            config,
            grid,
            overrides,
            target,
            out,
            parallel,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let cells = parse_grid(&grid, cfg.algorithm)?;
            let summary = grid_search(&cfg, &cells, target, parallel)?;
            match out {
                Some(p) => summary.write_csv(create(&p)?)?,
                None => summary.write_csv(std::io::stdout().lock())?,
            }
            if let Some(best) = summary.best() {
                eprintln!("best cell {}: {:?}", best.index, best.overrides);
            }
            Ok(0)
        }
        Command::GenGraph {
            nodes,
            edge_prob,
            seed,
            out,
            mixing,
            scale,
        } => {
            let g = Graph::erdos_renyi(nodes, edge_prob, seed, DEFAULT_RETRY_CAP)?;
            g.write_edge_list(create(&out)?)?;
            eprintln!("{} nodes, {} edges", g.node_count(), g.edge_count());
            if let Some(p) = mixing {
                let w = laplacian_mixing(&g, scale)?;
                write_mixing_csv(&w, create(&p)?)?;
                eprintln!("rho = {}", w.rho());
            }
            Ok(0)
        }
        Command::ValidateMixing { matrix, graph } => {
            let w = read_mixing_csv(BufReader::new(File::open(matrix)?))?;
            let g = Graph::read_edge_list(BufReader::new(File::open(graph)?))?;
            let report = validate_mixing(&w, &g)?;
            print!("{report}");
            println!("rho = {}", w.rho());
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::GenData {
            samples,
            features,
            flip_noise,
            seed,
            out,
        } => {
            let ds = gen_synthetic(features, samples, flip_noise, seed)?;
            let mut w = create(&out)?;
            write_libsvm(&ds, &mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Check { suite } => {
            let results = run_suite(suite);
            for r in &results {
                println!("{r}");
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                HarnessError::Config(_) => EXIT_CONFIG,
                _ => 1,
            })
        }
    }
}
