use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gle_cli::{parse_config, run};

/// Runs one GLE experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "gle", version)]
struct Args {
    /// Experiment config (key = value lines with [section] headers).
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "GLE_THREADS")]
    threads: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("gle: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gle: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("gle-out"));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("gle: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cfg, &dir)) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gle: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
