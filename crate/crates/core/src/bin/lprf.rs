use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lprf::config::RunConfig;
use lprf::pipeline::{self, SweepAxis};
use lprf::{Error, Result};

#[derive(Parser)]
#[command(name = "lprf", version, about = "Forward SS/DSS Navier-Stokes solutions and their diagnostics")]
struct Cli {
    /// Worker threads; falls back to LPRF_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Norms, symmetry defect and divergence of the initial data.
    Analyze(RunArgs),
    /// Full pipeline; writes a run directory.
    Solve(RunArgs),
    /// Recomputes the diagnostics of a run directory.
    Verify {
        dir: PathBuf,
    },
    /// Refinement study along one discretization axis.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = ["k", "eps_moll", "grid"])]
        axis: String,
    },
}

fn load(args: &RunArgs) -> Result<(RunConfig, Option<PathBuf>)> {
    let mut cfg = RunConfig::load(&args.config)?;
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().or_else(|| cfg.output.clone());
    Ok((cfg, out))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("LPRF_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Argument(format!("LPRF_THREADS = `{v}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Argument(e.to_string()))?;
    }
    match cli.command {
        Command::Analyze(args) => {
            let (cfg, out) = load(&args)?;
            print!("{}", pipeline::cmd_analyze(&cfg, out.as_deref())?.to_text());
        }
        Command::Solve(args) => {
            let (cfg, out) = load(&args)?;
            let out = out.ok_or_else(|| Error::Argument("solve needs --out or output.dir".into()))?;
            let outcome = pipeline::cmd_solve(&cfg, Some(&out))?;
            print!("{}", outcome.report.to_text());
            eprintln!("run directory: {}", out.display());
        }
        Command::Verify { dir } => {
            let report = pipeline::cmd_verify(&dir)?;
            print!("{}", report.to_text());
            let stored = std::fs::read_to_string(dir.join(pipeline::files::REPORT)).ok();
            let same = stored.as_deref() == Some(report.to_structured().as_str());
            eprintln!("matches solve-time report: {}", if same { "yes" } else { "no" });
        }
        Command::Sweep { run, axis } => {
            let (cfg, out) = load(&run)?;
            let axis = SweepAxis::parse(&axis).ok_or_else(|| Error::Argument(format!("unknown axis `{axis}`")))?;
            let table = pipeline::cmd_sweep(&cfg, axis, out.as_deref())?;
            print!("{}", table.to_table().to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lprf: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
