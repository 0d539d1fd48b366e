use std::path::{Path, PathBuf};

use riesz_core::decay::{decay_report_with_window, DecayReport, Verdict, DEFAULT_TOLERANCE, DEFAULT_WINDOW};
use riesz_core::diagnostics::{NormRow, NormSeries, NORM_SERIES_HEADER};
use riesz_core::solver::SimConfig;
use serde_json::Value;

use crate::config::{read_json, typed};
use crate::error::{CliError, Status};
use crate::output::{fmt_f64, parse_f64, OutputDir};

pub const REPORT_HEADER: [&str; 9] =
    ["quantity", "l", "p", "predicted_physical", "predicted_rescaled", "fitted_rate", "r2", "sharpness", "verdict"];

/// Locates the norm table and the simulation config for `input`.
///
/// `input` is either a `simulate` output directory or a CSV file; without an
/// explicit config the `manifest.json` next to the data is used.
pub fn resolve_input(input: &Path, config: Option<Value>) -> Result<(PathBuf, Value), CliError> {
    let (csv, dir) = if input.is_dir() {
        (input.join("norms.csv"), input.to_path_buf())
    } else {
        (input.to_path_buf(), input.parent().map(Path::to_path_buf).unwrap_or_default())
    };
    let config = match config {
        Some(c) => c,
        None => {
            let manifest = read_json(&dir.join("manifest.json"))?;
            manifest
                .get("config")
                .cloned()
                .ok_or_else(|| CliError::Config("manifest has no config; pass --config".into()))?
        }
    };
    Ok((csv, config))
}

pub fn read_norms(path: &Path) -> Result<NormSeries, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != NORM_SERIES_HEADER {
        return Err(CliError::Config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut series = NormSeries::default();
    for record in reader.records() {
        let r = record?;
        series.push(NormRow {
            tau: parse_f64(&r[0])?,
            t: parse_f64(&r[1])?,
            quantity: r[2].to_string(),
            l: parse_f64(&r[3])?,
            p: parse_f64(&r[4])?,
            rescaled_value: parse_f64(&r[5])?,
            physical_value: parse_f64(&r[6])?,
        });
    }
    Ok(series)
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail => "fail".into(),
        Verdict::Degenerate(m) => format!("degenerate: {m}"),
        Verdict::NoPrediction(m) => format!("no prediction: {m}"),
        Verdict::FitError(m) => format!("fit error: {m}"),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn report_rows(report: &DecayReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.quantity.clone(),
                fmt_f64(r.l),
                fmt_f64(r.p),
                opt(r.predicted_physical),
                opt(r.predicted_rescaled),
                opt(r.fitted_rate),
                opt(r.r2),
                opt(r.sharpness),
                verdict_text(&r.verdict),
            ]
        })
        .collect()
}

fn print_table(report: &DecayReport) {
    println!(
        "{:<8} {:>5} {:>5} {:>10} {:>10} {:>10} {:>8}  verdict",
        "quantity", "l", "p", "predicted", "fitted", "sharpness", "r2"
    );
    let cell = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    for r in &report.rows {
        println!(
            "{:<8} {:>5} {:>5} {:>10} {:>10} {:>10} {:>8}  {}",
            r.quantity,
            fmt_f64(r.l),
            fmt_f64(r.p),
            cell(r.predicted_rescaled),
            cell(r.fitted_rate),
            cell(r.sharpness),
            cell(r.r2),
            verdict_text(&r.verdict)
        );
    }
    if report.near_boundary {
        println!("note: gamma lies within 0.05 of the end of its admissible range");
    }
}

pub fn run(
    input: &Path,
    config: Option<Value>,
    tol: Option<f64>,
    window: Option<f64>,
    out: &mut OutputDir,
) -> Result<(Value, Status), CliError> {
    let (csv, config_value) = resolve_input(input, config)?;
    let config: SimConfig = typed(&config_value, "simulation config")?;
    let series = read_norms(&csv)?;
    let tol = tol.unwrap_or(DEFAULT_TOLERANCE);
    let window = window.unwrap_or(DEFAULT_WINDOW);
    let report = decay_report_with_window(&series, &config, tol, window)?;
    out.write_table("decay_report", &REPORT_HEADER, &report_rows(&report))?;
    out.write_json("decay_report_full.json", &report)?;
    print_table(&report);
    let resolved = serde_json::json!({
        "input": csv.display().to_string(),
        "tolerance": tol,
        "window": window,
        "simulation": config_value,
    });
    let failed: Vec<String> = report
        .rows
        .iter()
        .filter(|r| matches!(r.verdict, Verdict::Fail | Verdict::FitError(_)))
        .map(|r| format!("{} l={} p={}", r.quantity, fmt_f64(r.l), fmt_f64(r.p)))
        .collect();
    let status = if failed.is_empty() { Status::Ok } else { Status::Failed(failed.join(", ")) };
    Ok((resolved, status))
}
