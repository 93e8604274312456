//! JSON summary and CSV series writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::commands::Outcome;
use super::config::RunConfig;
use crate::error::Result;
use crate::report::ExperimentReport;

/// Shortest round-trip text; scientific outside `[1e−4, 1e15)`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_name(index: usize, rep: &ExperimentReport) -> String {
    format!("{index:02}_{}.csv", rep.name)
}

fn write_csv(path: &Path, rep: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&rep.columns)?;
    for row in &rep.rows {
        w.write_record(row.iter().map(|v| format_number(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Summary document for a finished run.
pub fn summary(cfg: &RunConfig, outcome: &Outcome) -> Result<Value> {
    let mut config = serde_json::to_value(cfg)?;
    config["params"] = outcome.params.clone();
    let reports: Vec<Value> = outcome
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "name": r.name,
                "csv": if r.rows.is_empty() { Value::Null } else { Value::String(csv_name(i, r)) },
                "scalars": r.scalars,
                "fits": r.fits,
                "checks": r.checks,
                "notes": r.notes,
                "passed": r.passed(),
            })
        })
        .collect();
    let failed: Vec<String> = outcome
        .reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}/{}", r.name, c.name)))
        .collect();
    Ok(json!({
        "command": cfg.command.name(),
        "config": config,
        "diagnostics": outcome.diagnostics,
        "reports": reports,
        "failed_checks": failed,
        "passed": failed.is_empty(),
    }))
}

/// Writes `summary.json` and one CSV per report with rows into
/// `<output_dir>/<command>/`; returns that directory.
pub fn write_outputs(cfg: &RunConfig, outcome: &Outcome) -> Result<PathBuf> {
    let dir = Path::new(&cfg.output_dir).join(cfg.command.name());
    fs::create_dir_all(&dir)?;
    for (i, r) in outcome.reports.iter().enumerate() {
        if !r.rows.is_empty() {
            write_csv(&dir.join(csv_name(i, r)), r)?;
        }
    }
    let doc = summary(cfg, outcome)?;
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1e-300, -2.5e17, 3.0, 123456.789] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(3.0), "3");
    }
}
