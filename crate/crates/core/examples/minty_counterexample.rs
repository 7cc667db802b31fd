//! Scan for points satisfying the Minty condition on a scalar toy problem.

use dgdmax::problem::{minty_operator, minty_scan};

fn main() {
    let scan = minty_scan((-1.0, 1.0), (-5.0, 5.0), 21, 21, &[(1.0, -1e3)]);
    println!(
        "{} candidates, {} survive, largest min inner product {:.3e}",
        scan.candidates,
        scan.survivors.len(),
        scan.worst_case
    );
    println!("operator at the test point: {:?}", minty_operator(1.0, -1e3));
    println!("condition fails everywhere on the grid: {}", scan.condition_fails());
}
