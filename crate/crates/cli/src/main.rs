use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use credit_contagion_cli::{parse_config_with, run};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Survival,
    Bond,
    Cds,
    Sweep,
    Validate,
}

/// Joint survival, contagion bond yields and basket CDS spreads for two correlated firms.
#[derive(Debug, Parser)]
#[command(name = "price", version)]
struct Cli {
    command: Cmd,
    /// Flat `key = value` file; `#` starts a comment.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination (default: the `output` key, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one key, e.g. `--set rho=0.6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = key_value)]
    set: Vec<(String, String)>,
}

fn key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let command = cli.command.to_possible_value().expect("no skipped variants");
    let mut overrides = vec![("command".to_string(), command.get_name().to_string())];
    overrides.extend(cli.set);
    let spec = match parse_config_with(&text, &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };

    let report = run(&spec);
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    match cli.out.or(spec.output.map(PathBuf::from)) {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &report.csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{}", report.csv),
    }
    if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
