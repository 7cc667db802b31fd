//! Build a gossip matrix for a random network and check it.

use dgdmax::graph::{laplacian_mixing, validate_mixing, write_mixing_csv, Graph, DEFAULT_RETRY_CAP};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = Graph::erdos_renyi(12, 0.3, 7, DEFAULT_RETRY_CAP)?;
    println!("{} nodes, {} edges, connected: {}", graph.node_count(), graph.edge_count(), graph.is_connected());

    let w = laplacian_mixing(&graph, 0.8)?;
    print!("{}", validate_mixing(&w, &graph)?);
    println!("rho = {:.6}, ||W - I|| = {:.6}", w.rho(), w.op_norm_w_minus_i());

    for m in [4, 8, 16, 32] {
        let ring = laplacian_mixing(&Graph::ring(m)?, 0.8)?;
        println!("ring of {m:>2}: rho = {:.6}", ring.rho());
    }

    let mut csv = Vec::new();
    write_mixing_csv(&laplacian_mixing(&Graph::ring(4)?, 0.8)?, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}
