use riesz_core::gronwall::{
    asymptotic_slope, bootstrap_constant, find_threshold_m, integrate_inequality, proof_threshold, GronwallParams,
    Trajectory, DEFAULT_HORIZON, DEFAULT_OUTPUT_POINTS, DEFAULT_RESOLUTION, ENVELOPE_SLACK,
};
use riesz_core::gronwall::{integrate_on, log_spaced};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::typed;
use crate::error::{CliError, Status};
use crate::output::{fmt_f64, OutputDir};

pub const HEADER: [&str; 4] = ["t", "Y", "envelope", "margin"];

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}
fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}
fn default_points() -> usize {
    DEFAULT_OUTPUT_POINTS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallRun {
    pub params: GronwallParams,
    /// Initial value; with `threshold` set it defaults to `0.999·M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default = "default_horizon")]
    pub t_end: f64,
    /// Bisect the smallness threshold `M`.
    #[serde(default)]
    pub threshold: bool,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_points")]
    pub output_points: usize,
}

fn trajectory_rows(traj: &Trajectory, params: &GronwallParams, y0: f64) -> Vec<Vec<String>> {
    traj.rows(params, y0).iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect()).collect()
}

pub fn run(config: &Value, out: &mut OutputDir) -> Result<Status, CliError> {
    let run: GronwallRun = typed(config, "gronwall config")?;
    run.params.validate()?;
    if run.output_points == 0 {
        return Err(CliError::Config("output_points must be positive".into()));
    }
    let mut summary = serde_json::Map::new();
    let threshold = if run.threshold {
        let th = find_threshold_m(&run.params, run.t_end, run.resolution)?;
        summary.insert("threshold".into(), json!(th));
        summary.insert("bootstrap_at_half_threshold".into(), json!(bootstrap_constant(&run.params, th.m / 2.0)));
        if run.params.c_star > 0.0 {
            summary.insert("analytic_threshold".into(), json!(proof_threshold(&run.params, 1e-9)?));
        }
        Some(th.m)
    } else {
        None
    };
    let y0 = match (run.y0, threshold) {
        (Some(y), _) => y,
        (None, Some(m)) => 0.999 * m,
        (None, None) => return Err(CliError::Config("y0 is required unless threshold is set".into())),
    };
    let traj = if run.output_points == DEFAULT_OUTPUT_POINTS {
        integrate_inequality(&run.params, y0, run.t_end)?
    } else {
        integrate_on(&run.params, y0, &log_spaced(run.t_end, run.output_points))?
    };
    out.write_table("gronwall", &HEADER, &trajectory_rows(&traj, &run.params, y0))?;

    let verified = traj.within_envelope();
    summary.insert("y0".into(), json!(y0));
    summary.insert("verified".into(), json!(verified));
    summary.insert("blowup_time".into(), json!(traj.blowup));
    summary.insert("max_excess".into(), json!(traj.max_excess));
    summary.insert("slack".into(), json!(ENVELOPE_SLACK));
    summary.insert("steps".into(), json!(traj.steps));
    if let Ok(slope) = asymptotic_slope(&traj) {
        summary.insert("asymptotic_slope".into(), json!(slope));
        summary.insert("asymptotic_slope_ok".into(), json!((slope + run.params.a).abs() <= 0.01 * run.params.a));
    }
    out.write_json("summary.json", &Value::Object(summary))?;

    Ok(match traj.blowup {
        Some(t) => Status::Blowup(format!("trajectory escaped at t = {t}")),
        None if !verified => Status::Failed(format!("envelope exceeded by {:.3e}", traj.max_excess)),
        None => Status::Ok,
    })
}
