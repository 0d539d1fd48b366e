//! Decay-exponent tables and least-squares rate fitting.
//!
//! Exponents are those of `(1+t)` in the physical bounds
//! `‖n(t)‖ ≤ C(1+t)^{e}`. In rescaled variables the same bound becomes an
//! exponential decay `e^{−rτ}` of the rescaled norm with
//! `r = (d/2 − ℓ) − e` for `Ḣ^ℓ` and `r = d/p − e` for `L^p`.

use serde::Serialize;

use crate::diagnostics::NormSeries;
use crate::solver::{SimConfig, System};
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 0.1;
pub const DEFAULT_WINDOW: f64 = 0.5;
/// Two-sided tolerance for the exact mass law row.
pub const MASS_TOLERANCE: f64 = 1e-3;
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    N,
    W,
}

/// Which decay theorem a prediction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// Pressureless, repulsive.
    Pressureless,
    /// Pressured, `σ ∈ [1, 2)`, either sign.
    SubManev,
    /// Pressured, `σ ∈ (0, 1)`, repulsive.
    SuperManevRepulsive,
    /// Pressured, `σ ∈ (0, 1)`, attractive.
    SuperManevAttractive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentQuery {
    pub system: System,
    pub lambda: f64,
    pub dim: usize,
    pub sigma: f64,
    pub gamma: Option<f64>,
    pub ell: f64,
    pub quantity: Quantity,
    /// `2` for `Ḣ^ℓ`; other values select the `L^p` bound (with `ℓ = 0`).
    pub p: f64,
    /// Regularity index, needed for the pressureless `L^p` bound of `n`.
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub physical: f64,
    pub rescaled: f64,
    pub theorem: Theorem,
    /// Distance of `γ` from the upper end of its admissible range, if any.
    pub gamma_margin: Option<f64>,
}

fn inadmissible(msg: impl Into<String>) -> Error {
    Error::Inadmissible(msg.into())
}

/// Selects the applicable theorem and checks its hypotheses.
fn classify(q: &ExponentQuery) -> Result<(Theorem, Option<f64>)> {
    let d = q.dim as f64;
    let sigma = q.sigma;
    if q.dim == 0 {
        return Err(inadmissible("dimension must be at least 1"));
    }
    if !(sigma > 0.0 && sigma < d.min(2.0)) {
        return Err(inadmissible(format!("sigma = {sigma} outside (0, min(d, 2))")));
    }
    if q.lambda != 1.0 && q.lambda != -1.0 {
        return Err(inadmissible("lambda must be +1 or -1"));
    }
    match q.system {
        System::Pressureless => {
            if q.lambda != -1.0 {
                return Err(inadmissible("the pressureless theorem covers only lambda = -1"));
            }
            Ok((Theorem::Pressureless, None))
        }
        System::Pressured => {
            let gamma = q.gamma.ok_or_else(|| inadmissible("pressured prediction needs gamma"))?;
            if !(gamma > 1.0) {
                return Err(inadmissible(format!("gamma = {gamma} must exceed 1")));
            }
            if let Some(s) = q.s {
                let power = 2.0 / (gamma - 1.0);
                if (power - power.round()).abs() > 1e-12 && !(s < power + sigma - 0.5) {
                    return Err(inadmissible(format!(
                        "2/(gamma-1) = {power} is not an integer and s = {s} >= 2/(gamma-1) + sigma - 1/2"
                    )));
                }
            }
            if sigma >= 1.0 {
                if q.dim < 2 {
                    return Err(inadmissible("sigma in [1, 2) needs d >= 2"));
                }
                Ok((Theorem::SubManev, None))
            } else if q.lambda == -1.0 {
                let mut upper: f64 = 2.0;
                if gamma > 2.0 {
                    return Err(inadmissible(format!("repulsive super-Manev case needs gamma <= 2, got {gamma}")));
                }
                if q.dim <= 2 {
                    let bound = 1.0 + 2.0 * (d - sigma) / (d + sigma);
                    if !(gamma < bound) {
                        return Err(inadmissible(format!(
                            "gamma < 1 + 2(d-sigma)/(d+sigma) = {bound} is required when d = 1, 2"
                        )));
                    }
                    upper = upper.min(bound);
                }
                Ok((Theorem::SuperManevRepulsive, Some(upper - gamma)))
            } else {
                let mut upper = 2.0 - sigma / d;
                if gamma > upper {
                    return Err(inadmissible(format!(
                        "attractive super-Manev case needs gamma <= 2 - sigma/d = {upper}"
                    )));
                }
                if q.dim >= 3 {
                    let bound = 1.0 + 2.0 / (sigma + 2.0);
                    if !(gamma < bound) {
                        return Err(inadmissible(format!(
                            "gamma < 1 + 2/(sigma+2) = {bound} is required when d >= 3"
                        )));
                    }
                    upper = upper.min(bound);
                }
                Ok((Theorem::SuperManevAttractive, Some(upper - gamma)))
            }
        }
    }
}

/// `m` in the bound `(1+t)^{d/2 − ℓ − m}` (pressured) or its pressureless analogue.
fn pressured_rate(theorem: Theorem, d: f64, sigma: f64, gamma: f64) -> f64 {
    let base = f64::min(1.0, d * (gamma - 1.0) / 2.0);
    match theorem {
        Theorem::SuperManevRepulsive => base.min((d - sigma) / 2.0),
        _ => base,
    }
}

/// Theorem exponent and the corresponding rescaled decay rate.
pub fn theorem_exponent(q: &ExponentQuery) -> Result<Prediction> {
    let (theorem, gamma_margin) = classify(q)?;
    let d = q.dim as f64;
    let sigma = q.sigma;
    if !(q.ell >= 0.0) {
        return Err(inadmissible(format!("order l = {} must be >= 0", q.ell)));
    }
    if let Some(s) = q.s {
        let top = match (q.system, q.quantity) {
            (System::Pressureless, Quantity::W) => s + sigma / 2.0,
            _ => s,
        };
        if q.ell > top {
            return Err(inadmissible(format!("order l = {} exceeds the regularity {top}", q.ell)));
        }
    }
    let lp = q.p != 2.0;
    if lp && q.ell != 0.0 {
        return Err(inadmissible("L^p bounds are stated for l = 0 only"));
    }
    if lp && !(q.p >= 2.0) {
        return Err(inadmissible(format!("p = {} below 2", q.p)));
    }
    let d_over_p = if q.p.is_infinite() { 0.0 } else { d / q.p };

    let physical = match theorem {
        Theorem::Pressureless => {
            let m = f64::min(1.0, (d - sigma) / 2.0);
            match (q.quantity, lp) {
                (Quantity::N, false) => d / 2.0 - q.ell - sigma / 2.0 - m,
                (Quantity::W, false) => d / 2.0 - q.ell - m,
                (Quantity::W, true) => d_over_p - m,
                (Quantity::N, true) => {
                    let s = q.s.ok_or_else(|| inadmissible("the L^p bound of n needs s"))?;
                    let gap = d / 2.0 - d_over_p;
                    -gap - f64::min(gap / s * (1.0 - (d - sigma) / 2.0), 0.0)
                }
            }
        }
        _ => {
            let gamma = q.gamma.expect("classified");
            let m = pressured_rate(theorem, d, sigma, gamma);
            if lp {
                let mut low = f64::max(d, 2.0 / (gamma - 1.0));
                if theorem == Theorem::SuperManevRepulsive {
                    low = low.max(2.0 * d / (d - sigma));
                }
                if q.p < low {
                    return Err(inadmissible(format!("L^p bound needs p >= {low}")));
                }
                d_over_p - m
            } else {
                d / 2.0 - q.ell - m
            }
        }
    };
    let rescaled = if lp { d_over_p - physical } else { d / 2.0 - q.ell - physical };
    Ok(Prediction { physical, rescaled, theorem, gamma_margin })
}

/// Interpolated pressureless exponent `−ℓ − min{(ℓ/s)(1 − (d−σ)/2), 0}`.
pub fn improved_exponent(dim: usize, sigma: f64, ell: f64, s: f64) -> f64 {
    let d = dim as f64;
    -ell - f64::min(ell / s * (1.0 - (d - sigma) / 2.0), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitMode {
    /// `−log value` against `τ`; returns the exponential rate.
    Tau,
    /// `log value` against `log(1+t)`; returns the power-law exponent.
    LogLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub rate: f64,
    pub r2: f64,
    pub samples: usize,
    pub window_start: f64,
    pub window_end: f64,
}

/// Least-squares fit over the trailing `window` fraction of the abscissa range.
///
/// `samples` are `(τ, value)` in [`FitMode::Tau`] and `(t, value)` in
/// [`FitMode::LogLog`].
pub fn fit_exponent(samples: &[(f64, f64)], mode: FitMode, window: f64) -> Result<Fit> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Parameter(format!("window {window} must lie in (0, 1]")));
    }
    let xs: Vec<f64> = samples
        .iter()
        .map(|&(x, _)| match mode {
            FitMode::Tau => x,
            FitMode::LogLog => x.ln_1p(),
        })
        .collect();
    let (Some(&first), Some(&last)) = (xs.first(), xs.last()) else {
        return Err(Error::Fit("empty series".into()));
    };
    let start = last - window * (last - first);
    let picked: Vec<(f64, f64)> = xs
        .iter()
        .zip(samples)
        .filter(|(x, _)| **x >= start - 1e-12 * start.abs().max(1.0))
        .map(|(&x, &(_, v))| (x, v))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in the window, need at least {MIN_FIT_SAMPLES}",
            picked.len()
        )));
    }
    if let Some(bad) = picked.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!("non-positive value {} at {}", bad.1, bad.0)));
    }
    let n = picked.len() as f64;
    let mx = picked.iter().map(|p| p.0).sum::<f64>() / n;
    let ys: Vec<f64> = picked.iter().map(|p| p.1.ln()).collect();
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = picked.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = picked.iter().zip(&ys).map(|(p, y)| (p.0 - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("window has no spread in the abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = picked.iter().zip(&ys).map(|(p, y)| (y - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let rate = match mode {
        FitMode::Tau => -slope,
        FitMode::LogLog => slope,
    };
    Ok(Fit { rate, r2, samples: picked.len(), window_start: picked[0].0, window_end: last })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate(String),
    NoPrediction(String),
    FitError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub quantity: String,
    pub l: f64,
    pub p: f64,
    pub predicted_physical: Option<f64>,
    pub predicted_rescaled: Option<f64>,
    pub fitted_rate: Option<f64>,
    pub r2: Option<f64>,
    /// `fitted − predicted`, informational only.
    pub sharpness: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub tolerance: f64,
    pub window: f64,
    /// `γ` lies within 0.05 of the end of its admissible range.
    pub near_boundary: bool,
    pub config: SimConfig,
}

impl DecayReport {
    /// True unless some row failed its check or could not be fitted.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !matches!(r.verdict, Verdict::Fail | Verdict::FitError(_)))
    }

    pub fn row(&self, quantity: &str, l: f64, p: f64) -> Option<&DecayRow> {
        self.rows.iter().find(|r| r.quantity == quantity && r.l == l && r.p == p)
    }
}

fn fit_row(
    quantity: &str,
    l: f64,
    p: f64,
    samples: &[(f64, f64)],
    predicted: std::result::Result<Prediction, String>,
    window: f64,
    check: impl Fn(f64, f64) -> bool,
) -> DecayRow {
    let (predicted_physical, predicted_rescaled) = match &predicted {
        Ok(pr) => (Some(pr.physical), Some(pr.rescaled)),
        Err(_) => (None, None),
    };
    let mut row = DecayRow {
        quantity: quantity.to_string(),
        l,
        p,
        predicted_physical,
        predicted_rescaled,
        fitted_rate: None,
        r2: None,
        sharpness: None,
        verdict: Verdict::Pass,
    };
    if samples.iter().all(|s| s.1 == 0.0) {
        row.verdict = Verdict::Degenerate("zero signal".into());
        return row;
    }
    match fit_exponent(samples, FitMode::Tau, window) {
        Err(e) => row.verdict = Verdict::FitError(e.to_string()),
        Ok(fit) => {
            row.fitted_rate = Some(fit.rate);
            row.r2 = Some(fit.r2);
            row.verdict = match predicted {
                Ok(pr) => {
                    row.sharpness = Some(fit.rate - pr.rescaled);
                    if check(fit.rate, pr.rescaled) {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
                Err(msg) => Verdict::NoPrediction(msg),
            };
        }
    }
    row
}

/// Compares fitted rescaled rates with the theorem predictions.
///
/// Rows cover every `(n|w, ℓ, p)` key of the series, plus the exact mass law
/// row for the pressureless system. The caller is responsible for passing a
/// completed (non-blowup) run.
pub fn decay_report(series: &NormSeries, config: &SimConfig, tol: f64) -> Result<DecayReport> {
    decay_report_with_window(series, config, tol, DEFAULT_WINDOW)
}

pub fn decay_report_with_window(
    series: &NormSeries,
    config: &SimConfig,
    tol: f64,
    window: f64,
) -> Result<DecayReport> {
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be >= 0")));
    }
    let params = &config.params;
    let mut rows = Vec::new();
    let mut near_boundary = false;
    for (quantity, l, p) in series.keys() {
        let which = match quantity.as_str() {
            "n" => Quantity::N,
            "w" => Quantity::W,
            _ => continue,
        };
        let query = ExponentQuery {
            system: params.system,
            lambda: params.lambda,
            dim: config.dim,
            sigma: params.sigma,
            gamma: params.gamma,
            ell: l,
            quantity: which,
            p,
            s: Some(config.energy_s),
        };
        let predicted = theorem_exponent(&query).map_err(|e| e.to_string());
        if let Ok(pr) = &predicted {
            near_boundary |= pr.gamma_margin.is_some_and(|m| m < 0.05);
        }
        let samples: Vec<(f64, f64)> =
            series.series(&quantity, l, p).into_iter().map(|(tau, r, _)| (tau, r)).collect();
        rows.push(fit_row(&quantity, l, p, &samples, predicted, window, |fit, pred| fit >= pred - tol));
    }
    if params.system == System::Pressureless {
        let samples: Vec<(f64, f64)> =
            series.series("mass", 0.0, 2.0).into_iter().map(|(tau, r, _)| (tau, r)).collect();
        if !samples.is_empty() {
            let d = config.dim as f64;
            let exact = Prediction {
                physical: 0.0,
                rescaled: d / 2.0,
                theorem: Theorem::Pressureless,
                gamma_margin: None,
            };
            rows.push(fit_row("mass", 0.0, 2.0, &samples, Ok(exact), window, |fit, pred| {
                (fit - pred).abs() <= MASS_TOLERANCE
            }));
        }
    }
    Ok(DecayReport { rows, tolerance: tol, window, near_boundary, config: config.clone() })
}
