use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    compute_w, compute_wk, compute_x, compute_z, k0, lp_scaling, mass, physical_seminorm,
    rescaled_lp, NormRow, NormSeries, Unknown,
};
use crate::spectral::{
    homogeneous_norm, spectral_tail_fraction, vector_homogeneous_norm, Grid, DEFAULT_POINT_BUDGET,
};
use crate::{Error, Result};

use super::rk4::{cfl_number, step_rk4_with_info, DEFAULT_CFL_LIMIT};
use super::{EulerRiesz, InitialData, ModelParams, State, System};

/// Lebesgue exponent that serialises `∞` as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(p) => Ok(Exponent(p)),
            Raw::Text(t) if t == "inf" || t == "infinity" => Ok(Exponent(f64::INFINITY)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

fn default_ells() -> Vec<f64> {
    vec![0.0, 1.0, 2.0]
}
fn default_ps() -> Vec<Exponent> {
    vec![Exponent(2.0)]
}
fn default_record_every() -> usize {
    10
}
fn default_energy_s() -> f64 {
    2.0
}
fn default_cfl() -> f64 {
    DEFAULT_CFL_LIMIT
}
fn default_tail() -> f64 {
    0.05
}
fn default_clamp() -> f64 {
    0.01
}

/// Complete simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ModelParams,
    pub dim: usize,
    /// Points per axis.
    pub n: usize,
    /// Box length of the rescaled domain.
    pub length: f64,
    /// Requested step; the run uses `τ_end / ceil(τ_end / dτ)`.
    pub dtau: f64,
    pub tau_end: f64,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub seed: u64,
    /// Record norms every this many steps (and at the final step).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default = "default_ells")]
    pub ells: Vec<f64>,
    #[serde(default = "default_ps")]
    pub ps: Vec<Exponent>,
    /// Regularity index of the energy functionals.
    #[serde(default = "default_energy_s")]
    pub energy_s: f64,
    #[serde(default = "default_cfl")]
    pub cfl_limit: f64,
    /// Spectral tail share above which a run counts as under-resolved.
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
    /// Clamped-point share above which a run is flagged.
    #[serde(default = "default_clamp")]
    pub clamp_tolerance: f64,
}

impl SimConfig {
    pub fn new(params: ModelParams, dim: usize, n: usize, length: f64, dtau: f64, tau_end: f64) -> Self {
        Self {
            params,
            dim,
            n,
            length,
            dtau,
            tau_end,
            initial: InitialData::default(),
            seed: 0,
            record_every: default_record_every(),
            snapshot_every: None,
            ells: default_ells(),
            ps: default_ps(),
            energy_s: default_energy_s(),
            cfl_limit: default_cfl(),
            tail_tolerance: default_tail(),
            clamp_tolerance: default_clamp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate(self.dim)?;
        Grid::with_budget(self.dim, self.n, self.length, DEFAULT_POINT_BUDGET)?;
        self.initial.validate()?;
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return Err(Error::Parameter(format!("dtau = {} must be positive", self.dtau)));
        }
        if !(self.tau_end > 0.0 && self.tau_end.is_finite()) {
            return Err(Error::Parameter(format!("tau_end = {} must be positive", self.tau_end)));
        }
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return Err(Error::Parameter("cadences must be at least one step".into()));
        }
        if self.ells.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Parameter("norm orders must be finite and >= 0".into()));
        }
        if self.ps.iter().any(|p| p.0.is_nan() || p.0 < 1.0) {
            return Err(Error::Parameter("Lebesgue exponents must be >= 1".into()));
        }
        if !(self.energy_s > 0.0) {
            return Err(Error::Parameter("energy_s must be positive".into()));
        }
        if !(self.cfl_limit > 0.0 && self.tail_tolerance > 0.0 && self.clamp_tolerance >= 0.0) {
            return Err(Error::Parameter("guard tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n, self.length)
    }

    /// Number of steps and the effective step size.
    pub fn schedule(&self) -> (usize, f64) {
        let steps = ((self.tau_end / self.dtau) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.tau_end / steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    Blowup { tau: f64, reason: String },
}

impl Outcome {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Outcome::Blowup { .. })
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub series: NormSeries,
    pub outcome: Outcome,
    pub final_state: State,
    pub snapshots: Vec<State>,
    pub steps_taken: usize,
    pub dtau: f64,
    pub max_clamped_fraction: f64,
    pub clamp_flagged: bool,
}

fn row(state: &State, quantity: &str, l: f64, p: f64, rescaled: f64, physical: f64) -> NormRow {
    NormRow {
        tau: state.tau,
        t: state.time(),
        quantity: quantity.to_string(),
        l,
        p,
        rescaled_value: rescaled,
        physical_value: physical,
    }
}

/// Appends every tracked norm and functional of `state` to `series`.
pub fn record_state(config: &SimConfig, state: &State, series: &mut NormSeries) -> Result<()> {
    let d = config.dim;
    for &l in &config.ells {
        let n_raw = homogeneous_norm(&state.n, l);
        let w_raw = vector_homogeneous_norm(&state.w, l);
        series.push(row(state, "n", l, 2.0, n_raw, physical_seminorm(state, Unknown::N, l)));
        series.push(row(state, "w", l, 2.0, w_raw, physical_seminorm(state, Unknown::W, l)));
    }
    for &Exponent(p) in &config.ps {
        if p == 2.0 && config.ells.contains(&0.0) {
            continue;
        }
        let scale = lp_scaling(d, p, state.tau);
        let n_raw = rescaled_lp(state, Unknown::N, p)?;
        let w_raw = rescaled_lp(state, Unknown::W, p)?;
        series.push(row(state, "n", 0.0, p, n_raw, n_raw * scale));
        series.push(row(state, "w", 0.0, p, w_raw, w_raw * scale));
    }
    let m = mass(state);
    series.push(row(state, "mass", 0.0, 2.0, homogeneous_norm(&state.n, 0.0), m));

    let s = config.energy_s;
    let params = &config.params;
    let x = compute_x(state, s, params)?;
    series.push(row(state, "X", s, 2.0, x, x));
    let z = compute_z(state, s, params)?;
    series.push(row(state, "Z", s, 2.0, z, z));
    if params.system == System::Pressured && params.gamma.is_some_and(|g| g <= 2.0) {
        let wf = compute_w(state, s, params)?;
        series.push(row(state, "Wfun", s, 2.0, wf, wf));
        if let Some(kmax) = k0(params.sigma, s) {
            for k in 1..=kmax {
                let wk = compute_wk(state, s, params, k)?;
                series.push(row(state, &format!("Wk{k}"), s, 2.0, wk, wk));
            }
        }
    }
    Ok(())
}

fn tail_fraction(state: &State) -> f64 {
    let mut worst = spectral_tail_fraction(&state.n);
    for c in state.w.components() {
        worst = worst.max(spectral_tail_fraction(c));
    }
    worst
}

/// Integrates from `τ = 0` to `τ_end` with fixed-step RK4.
///
/// A CFL violation at `τ = 0` is a configuration error. Later CFL
/// violations, non-finite values and under-resolved spectra end the run with
/// a [`Outcome::Blowup`] marker; the series up to that point is returned.
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let grid = config.grid()?;
    let rhs = EulerRiesz::new(config.params.clone(), config.dim)?;
    let (steps, dtau) = config.schedule();
    let mut state = config.initial.build(&grid, config.seed)?;

    let cfl = cfl_number(&state, dtau, &rhs);
    if cfl > config.cfl_limit {
        return Err(Error::Parameter(format!(
            "initial CFL number {cfl:.4} exceeds {}; reduce dtau",
            config.cfl_limit
        )));
    }

    let mut series = NormSeries::default();
    let mut snapshots = Vec::new();
    record_state(config, &state, &mut series)?;
    if config.snapshot_every.is_some() {
        snapshots.push(state.clone());
    }

    let mut outcome = Outcome::Completed;
    let mut max_clamped: f64 = 0.0;
    let mut steps_taken = 0;
    for step in 1..=steps {
        let next = match step_rk4_with_info(&state, dtau, &rhs, config.cfl_limit) {
            Ok((next, k1)) => {
                max_clamped = max_clamped.max(k1.clamped_fraction);
                next
            }
            Err(e @ (Error::Cfl { .. } | Error::NonFinite(_))) => {
                warn!("run stopped at tau = {}: {e}", state.tau);
                outcome = Outcome::Blowup { tau: state.tau, reason: e.to_string() };
                break;
            }
            Err(e) => return Err(e),
        };
        state = next;
        state.tau = step as f64 * dtau;
        steps_taken = step;

        let record = step % config.record_every == 0 || step == steps;
        if record {
            let tail = tail_fraction(&state);
            if tail > config.tail_tolerance {
                outcome = Outcome::Blowup {
                    tau: state.tau,
                    reason: format!("under-resolved: spectral tail share {tail:.3e}"),
                };
                break;
            }
            record_state(config, &state, &mut series)?;
            debug!("tau = {:.4}: recorded", state.tau);
        }
        if config.snapshot_every.is_some_and(|k| step % k == 0) {
            snapshots.push(state.clone());
        }
    }
    let clamp_flagged = max_clamped > config.clamp_tolerance;
    if clamp_flagged {
        warn!("up to {:.2}% of points were clamped", 100.0 * max_clamped);
    }
    Ok(SimOutput {
        series,
        outcome,
        final_state: state,
        snapshots,
        steps_taken,
        dtau,
        max_clamped_fraction: max_clamped,
        clamp_flagged,
    })
}
