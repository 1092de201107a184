//! Runs a shipped preset end to end and verifies the artifact directory.
//!
//! ```text
//! cargo run --release --example run_preset -- sphere-cap /tmp/sphere-cap
//! ```

use dampwave::harness::{preset, run_experiment, verify, ExperimentConfig, PRESETS};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "sphere-full".into());
    if preset(&name).is_none() {
        return Err(format!("unknown preset {name}; choose one of {PRESETS:?}").into());
    }
    let out = args.next().unwrap_or_else(|| format!("runs/{name}"));
    let cfg = ExperimentConfig::preset(&name, &[format!("run.output=\"{out}\"")])?;

    let start = Instant::now();
    let run = run_experiment(&cfg)?;
    println!("{name}: {:.1?}", start.elapsed());
    println!("lambda1 = {:.6}  T0 = {:.4}  dt = {}", run.lambda1, run.t0, run.dt);
    print!("{}", run.certification);
    print!("{}", verify(&run.dir)?);
    Ok(())
}
