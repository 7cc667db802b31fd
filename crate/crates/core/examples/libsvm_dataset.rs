//! Parse a LIBSVM file and split it across agents.

use std::io::Cursor;

use dgdmax::problem::{parse_libsvm, LibsvmOptions, Partition};

const TEXT: &str = "\
+1 1:0.5 3:1.0
-1 2:0.25
+1 1:-1.5 2:2.0 3:0.5
-1 3:-0.75
+1 1:0.1
-1 2:1.0 3:1.0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = parse_libsvm(Cursor::new(TEXT), LibsvmOptions::default())?;
    println!("{} samples, {} features", data.sample_count(), data.feature_dim());
    for j in 0..data.sample_count() {
        println!("  label {:+} row {:?}", data.label(j), data.row(j));
    }

    let part = Partition::random(data.sample_count(), 3, 11)?;
    for (i, set) in part.sets().iter().enumerate() {
        println!("agent {i}: samples {set:?}");
    }

    let zero_one = "1 1:1\n0 2:1\n";
    let opts = LibsvmOptions { zero_one_labels: true, ..LibsvmOptions::default() };
    let d = parse_libsvm(Cursor::new(zero_one), opts)?;
    println!("0/1 labels map to {:?}", d.labels());

    match parse_libsvm(Cursor::new("+1 3:1 2:1\n"), LibsvmOptions::default()) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
