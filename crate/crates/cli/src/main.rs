use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dimer_cli::{output_dir, run, Command, RunConfig, OUT_DIR_ENV};

/// Multiple scattering and effective-medium runs for dimer clusters.
#[derive(Parser, Debug)]
#[command(name = "dimer", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the environment and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `geometry.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(seed) = args.seed {
            cfg.geometry.seed = seed;
        }
        let artifacts = run(args.command, &cfg)?;
        let env = std::env::var(OUT_DIR_ENV).ok();
        let dir = output_dir(args.out.as_deref(), env.as_deref(), &cfg);
        let paths = artifacts.write_to(&dir)?;
        Ok((artifacts.summary, paths))
    });
    match result {
        Ok((summary, paths)) => {
            if !args.quiet {
                println!("{summary}");
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
