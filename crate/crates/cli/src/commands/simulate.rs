use riesz_core::diagnostics::{NormSeries, NORM_SERIES_HEADER};
use riesz_core::solver::{simulate, Outcome, SimConfig};
use serde_json::{json, Value};

use crate::config::typed;
use crate::error::{CliError, Status};
use crate::output::{fmt_f64, OutputDir};

pub fn norm_rows(series: &NormSeries) -> Vec<Vec<String>> {
    series
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.tau),
                fmt_f64(r.t),
                r.quantity.clone(),
                fmt_f64(r.l),
                fmt_f64(r.p),
                fmt_f64(r.rescaled_value),
                fmt_f64(r.physical_value),
            ]
        })
        .collect()
}

pub fn run(config: &Value, out: &mut OutputDir) -> Result<Status, CliError> {
    let config: SimConfig = typed(config, "simulation config")?;
    let result = simulate(&config)?;
    out.write_table("norms", &NORM_SERIES_HEADER, &norm_rows(&result.series))?;
    for (i, snap) in result.snapshots.iter().enumerate() {
        out.write_snapshot(i, snap, &config)?;
    }
    let summary = json!({
        "outcome": result.outcome,
        "steps_taken": result.steps_taken,
        "dtau": result.dtau,
        "max_clamped_fraction": result.max_clamped_fraction,
        "clamp_flagged": result.clamp_flagged,
        "snapshots": result.snapshots.len(),
    });
    out.write_json("summary.json", &summary)?;
    Ok(match result.outcome {
        Outcome::Completed => Status::Ok,
        Outcome::Blowup { tau, reason } => Status::Blowup(format!("at tau = {tau}: {reason}")),
    })
}
