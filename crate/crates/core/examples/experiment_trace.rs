//! Configure a run from text, write its trace and read it back.

use dgdmax::harness::{read_trace, Experiment, RunConfig};

const CONFIG: &str = "\
seed = 4
problem.samples = 120
problem.agents = 4
graph.kind = complete
algorithm.t_max = 30
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::parse_str(CONFIG)?;
    let exp = Experiment::build(&cfg)?;
    let mut buf = Vec::new();
    let out = exp.run_with(Some(&mut buf), false)?;
    println!("status {}, hash {}", out.status.label(), out.config_hash);

    let trace = read_trace(std::io::Cursor::new(&buf))?;
    println!("{} rows; recorded hash matches: {}", trace.rows.len(), trace.config_hash.as_deref() == Some(cfg.hash().as_str()));
    for (k, v) in trace.derived.iter().take(6) {
        println!("  {k} = {v}");
    }
    let text = String::from_utf8(buf)?;
    for line in text.lines().filter(|l| !l.starts_with('#')).take(3) {
        println!("{line}");
    }
    Ok(())
}
