//! Euclidean projection onto the probability simplex.

use dgdmax::subsolver::project_simplex;

fn main() {
    for z in [
        vec![0.2, 0.3, 0.5],
        vec![0.5, 0.5, 2.0],
        vec![-1.0, 0.4, 0.3, 1.2],
        vec![3.0, 3.0, 3.0],
    ] {
        let p = project_simplex(&z).expect("finite input");
        println!("{z:?} -> {p:?} (sum {:.15})", p.iter().sum::<f64>());
    }
}
