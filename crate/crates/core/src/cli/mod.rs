//! Batch front end. `kdvlab <command> [--config FILE] [--key.path VALUE ...]`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::Parser;
use serde_json::Value;

pub use commands::{dispatch, initial_state, Command, Outcome};
pub use config::{RunConfig, OUT_DIR_ENV};
pub use output::{summary, write_outputs};

use crate::error::{LabError, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_FAILED_CHECKS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kdvlab", about = "Gauge-transform KdV laboratory", version)]
pub struct Cli {
    pub command: Command,
    /// JSON file merged over the command defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
    /// Dotted overrides: `--grid.n 1024 --equation.c1 0.5`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    pub overrides: Vec<String>,
}

/// `--a.b v` and `--a.b=v` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| LabError::Config(format!("expected `--key value`, got `{arg}`")))?;
        let (key, raw) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| LabError::Config(format!("`--{key}` needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        out.push((key, config::parse_value(&raw)));
    }
    Ok(out)
}

fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

/// Resolves, runs and writes; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match parse_overrides(&cli.overrides)
        .and_then(|o| RunConfig::resolve(cli.command, cli.config.as_deref(), &o))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kdvlab: {e}");
            return exit_code(&e);
        }
    };
    if cli.print_config {
        match serde_json::to_string_pretty(&cfg) {
            Ok(t) => println!("{t}"),
            Err(e) => {
                eprintln!("kdvlab: {e}");
                return EXIT_IO;
            }
        }
        return EXIT_PASS;
    }
    let outcome = match dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("kdvlab {}: {e}", cfg.command.name());
            return exit_code(&e);
        }
    };
    let dir = match write_outputs(&cfg, &outcome) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("kdvlab: cannot write results: {e}");
            return EXIT_IO;
        }
    };
    let mut failed = 0;
    for r in &outcome.reports {
        for c in &r.checks {
            println!(
                "{} {}/{} = {} in [{}, {}] ({:?})",
                if c.passed { "PASS" } else { "FAIL" },
                r.name,
                c.name,
                output::format_number(c.value),
                output::format_number(c.lower),
                output::format_number(c.upper),
                c.source
            );
            if !c.passed {
                failed += 1;
            }
        }
    }
    println!("results in {}", dir.display());
    if failed > 0 {
        EXIT_FAILED_CHECKS
    } else {
        EXIT_PASS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_accept_both_forms() {
        let args: Vec<String> = ["--grid.n", "64", "--equation.c1=0.5"].iter().map(|s| s.to_string()).collect();
        let o = parse_overrides(&args).unwrap();
        assert_eq!(o[0], ("grid.n".into(), serde_json::json!(64)));
        assert_eq!(o[1], ("equation.c1".into(), serde_json::json!(0.5)));
        assert!(parse_overrides(&["grid.n".to_string()]).is_err());
        assert!(parse_overrides(&["--grid.n".to_string()]).is_err());
    }

    #[test]
    fn clap_keeps_dotted_flags_as_overrides() {
        let cli = Cli::try_parse_from(["kdvlab", "simulate", "--config", "c.json", "--grid.n", "64"]).unwrap();
        assert_eq!(cli.command, Command::Simulate);
        assert_eq!(cli.config, Some(PathBuf::from("c.json")));
        assert_eq!(cli.overrides, vec!["--grid.n".to_string(), "64".to_string()]);
    }
}
