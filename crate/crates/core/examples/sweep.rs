//! A small sample-size sweep, summarized as Frobenius-error quartiles.
use std::path::Path;
use std::str::FromStr;

use htica::harness::{run_experiment, ConfigBuilder};

const CONFIG: &str = "
eta = 6*3, 2.1
N = 1000, 4000
trials = 5
seed = 1
methods = centroid, covariance, identity
contrasts = tanh
damping = both
";

fn main() -> htica::Result<()> {
    let config = ConfigBuilder::from_str(CONFIG)?.build(Path::new("."))?;
    let table = run_experiment(&config)?;
    println!(
        "{:>11} {:>8} {:>6} {:>8} {:>8} {:>8} {:>5}",
        "method", "damping", "N", "median", "q25", "q75", "fail"
    );
    for c in table.summarize() {
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>11} {:>8} {:>6} {:>8} {:>8} {:>8} {:>5}",
            c.method,
            if c.damping { "on" } else { "off" },
            c.n_samples,
            fmt(c.median),
            fmt(c.q25),
            fmt(c.q75),
            c.failures
        );
    }
    Ok(())
}
