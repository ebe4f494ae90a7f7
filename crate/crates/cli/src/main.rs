use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use itp_cli::{config, CliError, Subcommand};

/// Runs an experiment described by a configuration file.
#[derive(Parser, Debug)]
#[command(name = "itp", version)]
struct Args {
    /// algebra-check, bochner, excess, decompose or spectrum; must agree with `subcommand` in [run] when both are given.
    subcommand: Option<String>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> Result<config::RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = config::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;
    if let Some(s) = &args.subcommand {
        let sub: Subcommand = s.parse().map_err(CliError::Usage)?;
        match cfg.subcommand {
            Some(c) if c != sub => return Err(CliError::Usage(format!("subcommand `{sub}` disagrees with `{c}` in the configuration"))),
            _ => cfg.subcommand = Some(sub),
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(d) = args.depth {
        if d == 0 {
            return Err(CliError::Usage("--depth must be positive".into()));
        }
        cfg.depth = d;
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        cfg.tol = t;
    }
    if let Some(m) = args.samples {
        if m == 0 {
            return Err(CliError::Usage("--samples must be positive".into()));
        }
        cfg.samples = m;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| itp_cli::run(&cfg));
    match result {
        Ok((outcome, files)) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
