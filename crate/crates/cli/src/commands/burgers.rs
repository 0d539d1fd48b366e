use riesz_core::flow::{check_dispersive_condition, verify_background_bounds, InitialFlow};
use riesz_core::spectral::Grid;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::typed;
use crate::error::{CliError, Status};
use crate::output::{fmt_f64, OutputDir};

fn default_flow() -> InitialFlow {
    InitialFlow::sine_1d(0.2)
}
fn default_n() -> usize {
    512
}
fn default_times() -> Vec<f64> {
    vec![0.0, 1.0, 10.0, 100.0]
}
fn default_ells() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersConfig {
    #[serde(default = "default_flow")]
    pub flow: InitialFlow,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_ells")]
    pub ells: Vec<f64>,
    /// Last-decade relative growth below which a quantity counts as bounded.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Margin for the spectral condition on `Dv₀`; defaults to the flow's `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersive_margin: Option<f64>,
}

impl Default for BurgersConfig {
    fn default() -> Self {
        typed(&json!({}), "burgers config").expect("defaults deserialize")
    }
}

pub fn run(config: &Value, out: &mut OutputDir) -> Result<Status, CliError> {
    let config: BurgersConfig = typed(config, "burgers config")?;
    config.flow.validate()?;
    let grid = Grid::new(config.flow.dim, config.n, config.flow.period())?;
    let margin = config.dispersive_margin.unwrap_or(config.flow.epsilon);
    let dispersive = check_dispersive_condition(&config.flow, &grid, margin)?;
    let report = verify_background_bounds(&config.flow, &grid, &config.times, &config.ells, config.threshold)?;

    let mut header: Vec<String> = ["t", "sup_k", "second_gradient_sup", "second_gradient_normalized"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for ell in &config.ells {
        header.push(format!("k_h{}", fmt_f64(*ell)));
        header.push(format!("k_h{}_normalized", fmt_f64(*ell)));
    }
    header.extend(["reconstruction_residual", "divergence_residual", "newton_residual"].map(String::from));
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt_f64(r.t),
                fmt_f64(r.sup_k),
                fmt_f64(r.second_gradient_sup),
                fmt_f64(r.second_gradient_normalized),
            ];
            for &(_, raw, normalized) in &r.k_seminorms {
                row.push(fmt_f64(raw));
                row.push(fmt_f64(normalized));
            }
            row.extend([r.reconstruction_residual, r.divergence_residual, r.newton_residual].map(fmt_f64));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_table("burgers", &header_refs, &rows)?;
    out.write_json("burgers_report.json", &json!({ "dispersive": {
        "ok": dispersive.ok, "min_margin": dispersive.min_margin, "required": margin }, "report": report }))?;

    let mut problems = Vec::new();
    if !dispersive.ok {
        problems.push(format!("dispersive margin {} below {margin}", dispersive.min_margin));
    }
    if !report.sup_k_bounded {
        problems.push(format!("sup|K| grows by {:.3e}", report.sup_k_growth));
    }
    if !report.second_gradient_bounded {
        problems.push(format!("(1+t)^3 sup|D^2 v| grows by {:.3e}", report.second_gradient_growth));
    }
    for &(ell, growth, ok) in &report.k_seminorm_verdicts {
        if !ok {
            problems.push(format!("K seminorm l = {ell} grows by {growth:.3e}"));
        }
    }
    Ok(if problems.is_empty() { Status::Ok } else { Status::Failed(problems.join("; ")) })
}
