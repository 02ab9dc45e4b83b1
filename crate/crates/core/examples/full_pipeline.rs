//! Full run on discretely self-similar data: split, background, cutoff,
//! Galerkin orbit, composition and diagnostics, written to a directory.

use std::path::PathBuf;

use lprf::config::RunConfig;
use lprf::pipeline::{cmd_solve, cmd_verify, files};

fn main() -> lprf::Result<()> {
    let out: PathBuf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("lprf-run"));
    let cfg = RunConfig::parse(
        "data.profile = swirl\ndata.amplitude = 0.2\ndata.modulation = 0.3\ndata.lambda = 2\nseed = 7\n",
    )?;
    let run = cmd_solve(&cfg, Some(&out))?;
    print!("{}", run.report.to_text());
    for (stage, seconds) in &run.timings.0 {
        eprintln!("{stage:<16} {seconds:.2} s");
    }
    let again = cmd_verify(&out)?;
    println!("\nwritten to {}", out.display());
    println!("verify reproduces {}: {}", files::REPORT, again.to_structured() == run.report.to_structured());
    Ok(())
}
