use riesz_core::inequality::{resolution_study, EnsembleSpec, Inequality};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::typed;
use crate::error::{CliError, Status};
use crate::output::{fmt_f64, OutputDir};

fn default_limit() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IneqConfig {
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    /// Defaults to the standard battery for the ensemble dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<Vec<Inequality>>,
    /// Largest accepted relative change of the ensemble maximum under grid doubling.
    #[serde(default = "default_limit")]
    pub stability_limit: f64,
}

pub const SUMMARY_HEADER: [&str; 8] =
    ["inequality", "n", "max", "p95", "n_fine", "max_fine", "p95_fine", "resolution_delta"];

pub fn run(config: &Value, out: &mut OutputDir) -> Result<Status, CliError> {
    let config: IneqConfig = typed(config, "ineq config")?;
    let inequalities = config.inequalities.clone().unwrap_or_else(|| Inequality::battery(config.ensemble.dim));
    let study = resolution_study(&config.ensemble, &inequalities)?;
    let summaries = &study.summaries;
    let n = config.ensemble.n;
    for ((s, rc), rf) in summaries.iter().zip(&study.coarse).zip(&study.fine) {
        for (ratios, size) in [(rc, n), (rf, 2 * n)] {
            let rows: Vec<Vec<String>> =
                ratios.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt_f64(*r)]).collect();
            out.write_table(&format!("ratios/{}_n{size}", s.label), &["member", "ratio"], &rows)?;
        }
    }
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                n.to_string(),
                fmt_f64(s.coarse.max),
                fmt_f64(s.coarse.p95),
                (2 * n).to_string(),
                fmt_f64(s.fine.max),
                fmt_f64(s.fine.p95),
                fmt_f64(s.resolution_delta),
            ]
        })
        .collect();
    out.write_table("summary", &SUMMARY_HEADER, &rows)?;
    let unstable: Vec<String> = summaries
        .iter()
        .filter(|s| !s.stable(config.stability_limit))
        .map(|s| format!("{} (delta {:.3})", s.label, s.resolution_delta))
        .collect();
    Ok(if unstable.is_empty() { Status::Ok } else { Status::Failed(unstable.join(", ")) })
}
