//! Numerical certification of the Grönwall-type decay envelope.
//!
//! For `Y ≥ 0` with
//!
//! ```text
//! Y' + a Y/(1+t) ≤ C*(Y² + Y/(1+t)² + c_P Σ Y^{b_i+1}/(1+t)^{1−c_i})
//! ```
//!
//! and `Y(0)` small, `Y(t) ≤ 2 e^{C* t/(1+t)} (1+t)^{−a} Y(0)`. The inequality
//! is integrated as an equality, which dominates every admissible `Y`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const RELATIVE_TOLERANCE: f64 = 1e-10;
/// Absolute slack allowed between trajectory and envelope.
pub const ENVELOPE_SLACK: f64 = 1e-9;
pub const DEFAULT_HORIZON: f64 = 1e4;
pub const DEFAULT_RESOLUTION: f64 = 1e-3;
pub const DEFAULT_OUTPUT_POINTS: usize = 400;
const BLOWUP_FACTOR: f64 = 1e12;
const MAX_STEPS: usize = 2_000_000;
const MAX_DOUBLINGS: usize = 60;
const MAX_HALVINGS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallParams {
    pub a: f64,
    pub c_star: f64,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub c_p: u8,
}

impl GronwallParams {
    /// Only the quadratic and linear-in-`Y` terms.
    pub fn quadratic(a: f64, c_star: f64) -> Self {
        Self { a, c_star, b: Vec::new(), c: Vec::new(), c_p: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(Error::Parameter(format!("a = {} must exceed 1", self.a)));
        }
        if !(self.c_star >= 0.0 && self.c_star.is_finite()) {
            return Err(Error::Parameter(format!("C* = {} must be finite and >= 0", self.c_star)));
        }
        if self.c_p > 1 {
            return Err(Error::Parameter(format!("c_P = {} must be 0 or 1", self.c_p)));
        }
        if self.b.len() != self.c.len() {
            return Err(Error::Parameter(format!(
                "b has {} entries but c has {}",
                self.b.len(),
                self.c.len()
            )));
        }
        for (i, (&b, &c)) in self.b.iter().zip(&self.c).enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Parameter(format!("b[{i}] = {b} must be positive")));
            }
            if !(c < self.a * b) {
                return Err(Error::Parameter(format!("c[{i}] = {c} must be below a*b[{i}] = {}", self.a * b)));
            }
        }
        Ok(())
    }

    /// Right-hand side of the worst-case equation.
    pub fn rate(&self, t: f64, y: f64) -> f64 {
        let y = y.max(0.0);
        let s = 1.0 + t;
        let mut forcing = y * y + y / (s * s);
        if self.c_p == 1 {
            for (&b, &c) in self.b.iter().zip(&self.c) {
                forcing += y.powf(b + 1.0) / s.powf(1.0 - c);
            }
        }
        -self.a * y / s + self.c_star * forcing
    }

    /// Draws parameters satisfying the hypotheses.
    ///
    /// `a ∈ (1, 4]`, `C* ∈ (0, 3]`, `N ∈ {0,…,3}`, `b_i ∈ (0, 2]`,
    /// `c_i ∈ (−1, a b_i)`.
    pub fn random(rng: &mut impl Rng) -> Self {
        let upper_open = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| hi - (hi - lo) * rng.random::<f64>();
        let a = upper_open(rng, 1.0, 4.0);
        let c_star = upper_open(rng, 0.0, 3.0);
        let count = rng.random_range(0..=3usize);
        let mut b = Vec::with_capacity(count);
        let mut c = Vec::with_capacity(count);
        for _ in 0..count {
            let bi = upper_open(rng, 0.0, 2.0);
            let hi = a * bi;
            let mut ci = rng.random_range(-1.0..hi);
            if ci == -1.0 {
                ci = 0.5 * (hi - 1.0);
            }
            b.push(bi);
            c.push(ci);
        }
        let c_p = u8::from(count > 0);
        Self { a, c_star, b, c, c_p }
    }
}

/// `2 e^{C* t/(1+t)} (1+t)^{−a} Y0`.
pub fn envelope(params: &GronwallParams, y0: f64, t: f64) -> f64 {
    2.0 * (params.c_star * t / (1.0 + t)).exp() * (1.0 + t).powf(-params.a) * y0
}

/// Integrated worst-case trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Time at which the solution escaped, if it did.
    pub blowup: Option<f64>,
    /// Largest `Y − envelope` over every accepted step.
    pub max_excess: f64,
    pub steps: usize,
}

impl Trajectory {
    /// `(t, Y, envelope, envelope − Y)` rows.
    pub fn rows(&self, params: &GronwallParams, y0: f64) -> Vec<[f64; 4]> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(&t, &y)| {
                let env = envelope(params, y0, t);
                [t, y, env, env - y]
            })
            .collect()
    }

    pub fn within_envelope(&self) -> bool {
        self.blowup.is_none() && self.max_excess <= ENVELOPE_SLACK
    }
}

/// `0` followed by `count` log-spaced points ending at `t_end`.
pub fn log_spaced(t_end: f64, count: usize) -> Vec<f64> {
    let top = t_end.ln_1p();
    let mut times = vec![0.0];
    times.extend((1..=count).map(|k| (top * k as f64 / count as f64).exp_m1()));
    if let Some(last) = times.last_mut() {
        *last = t_end;
    }
    times
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince 5(4) step; returns the new value, the error estimate
/// and the derivative at the new point.
fn dopri_step(p: &GronwallParams, t: f64, y: f64, k1: f64, h: f64) -> (f64, f64, f64) {
    let k2 = p.rate(t + C2 * h, y + h * A21 * k1);
    let k3 = p.rate(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = p.rate(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = p.rate(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    let k6 = p.rate(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = p.rate(t + h, y_new);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y_new, err, k7)
}

fn run(
    params: &GronwallParams,
    y0: f64,
    outputs: &[f64],
    stop_on_excess: bool,
) -> Result<Trajectory> {
    params.validate()?;
    if !(y0 >= 0.0 && y0.is_finite()) {
        return Err(Error::Parameter(format!("Y0 = {y0} must be finite and >= 0")));
    }
    let t_end = *outputs.last().ok_or_else(|| Error::Parameter("no output times".into()))?;
    if !(t_end >= 0.0) || outputs.windows(2).any(|w| w[1] < w[0]) || outputs[0] < 0.0 {
        return Err(Error::Parameter("output times must be nondecreasing and >= 0".into()));
    }
    let mut traj = Trajectory {
        times: Vec::with_capacity(outputs.len()),
        values: Vec::with_capacity(outputs.len()),
        blowup: None,
        max_excess: f64::NEG_INFINITY,
        steps: 0,
    };
    if y0 == 0.0 {
        traj.times.extend_from_slice(outputs);
        traj.values.resize(outputs.len(), 0.0);
        traj.max_excess = 0.0;
        return Ok(traj);
    }
    let cap = BLOWUP_FACTOR * y0.max(1.0);
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = params.rate(t, y);
    let mut h = 1e-4;
    let mut next = 0;
    let record = |traj: &mut Trajectory, t: f64, y: f64| {
        traj.max_excess = traj.max_excess.max(y - envelope(params, y0, t));
    };
    record(&mut traj, t, y);
    while next < outputs.len() && outputs[next] <= t {
        traj.times.push(outputs[next]);
        traj.values.push(y);
        next += 1;
    }
    while next < outputs.len() {
        if traj.steps >= MAX_STEPS {
            return Err(Error::Numeric(format!("step budget exhausted at t = {t}")));
        }
        let target = outputs[next];
        let hit = t + h >= target;
        let step = if hit { target - t } else { h };
        let (y_new, err, k_new) = dopri_step(params, t, y, k1, step);
        if !y_new.is_finite() || y_new > cap {
            traj.blowup = Some(t);
            return Ok(traj);
        }
        let scale = RELATIVE_TOLERANCE * y.abs().max(y_new.abs()) + f64::MIN_POSITIVE;
        let ratio = (err / scale).abs();
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        if ratio <= 1.0 {
            t = if hit { target } else { t + step };
            y = y_new;
            k1 = k_new;
            traj.steps += 1;
            record(&mut traj, t, y);
            if stop_on_excess && traj.max_excess > ENVELOPE_SLACK {
                return Ok(traj);
            }
            while next < outputs.len() && outputs[next] <= t {
                traj.times.push(outputs[next]);
                traj.values.push(y);
                next += 1;
            }
            if !hit {
                h = step * factor;
            }
        } else {
            h = step * factor;
            if h < 1e-15 * (1.0 + t) {
                traj.blowup = Some(t);
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}

/// Integrates the worst-case equation on `[0, T]` with log-spaced output.
///
/// Escape to `10¹²·max(1, Y0)` or step-size collapse is reported through
/// [`Trajectory::blowup`].
pub fn integrate_inequality(params: &GronwallParams, y0: f64, t_end: f64) -> Result<Trajectory> {
    run(params, y0, &log_spaced(t_end, DEFAULT_OUTPUT_POINTS), false)
}

/// As [`integrate_inequality`] with explicit output times.
pub fn integrate_on(params: &GronwallParams, y0: f64, times: &[f64]) -> Result<Trajectory> {
    run(params, y0, times, false)
}

/// True iff the trajectory stays below the envelope (plus slack) on `[0, T]`.
pub fn verify_lemma(params: &GronwallParams, y0: f64, t_end: f64) -> Result<bool> {
    Ok(run(params, y0, &[0.0, t_end], true)?.within_envelope())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest certified `Y0`.
    pub m: f64,
    /// The envelope held at every bracket tested; `m` is the bracket top.
    pub unbounded: bool,
    pub evaluations: usize,
}

/// Bisects the largest `Y0` for which the envelope holds on `[0, T]`.
pub fn find_threshold_m(params: &GronwallParams, t_end: f64, resolution: f64) -> Result<Threshold> {
    params.validate()?;
    if !(resolution > 0.0) {
        return Err(Error::Parameter(format!("resolution {resolution} must be positive")));
    }
    let mut evaluations = 0;
    let mut holds = |y0: f64| -> Result<bool> {
        evaluations += 1;
        verify_lemma(params, y0, t_end)
    };
    let mut hi = 1.0;
    let mut lo;
    if holds(hi)? {
        lo = hi;
        let mut doublings = 0;
        loop {
            hi = 2.0 * lo;
            if !holds(hi)? {
                break;
            }
            lo = hi;
            doublings += 1;
            if doublings >= MAX_DOUBLINGS {
                return Ok(Threshold { m: lo, unbounded: true, evaluations });
            }
        }
    } else {
        lo = 0.5 * hi;
        let mut halvings = 0;
        while !holds(lo)? {
            hi = lo;
            lo *= 0.5;
            halvings += 1;
            if halvings >= MAX_HALVINGS {
                return Err(Error::Numeric("no certified Y0 found above 2^-200".into()));
            }
        }
    }
    while hi - lo > resolution * lo {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold { m: lo, unbounded: false, evaluations })
}

/// Smallness constant from the bootstrap argument, evaluated at `Z0`:
/// `4C*e^{C*}/(a−1)·Z0 + c_P Σ 2^{b_i+1}C*e^{C* b_i}/(a b_i − c_i)·Z0^{b_i}`.
pub fn bootstrap_constant(params: &GronwallParams, z0: f64) -> f64 {
    let cs = params.c_star;
    let mut total = 4.0 * cs * cs.exp() / (params.a - 1.0) * z0;
    if params.c_p == 1 {
        for (&b, &c) in params.b.iter().zip(&params.c) {
            total += 2f64.powf(b + 1.0) * cs * (cs * b).exp() / (params.a * b - c) * z0.powf(b);
        }
    }
    total
}

/// Largest `Z0` with [`bootstrap_constant`] below 1, to relative `resolution`.
pub fn proof_threshold(params: &GronwallParams, resolution: f64) -> Result<f64> {
    params.validate()?;
    if params.c_star == 0.0 {
        return Err(Error::Parameter("the bootstrap condition is vacuous for C* = 0".into()));
    }
    let mut hi = 1.0;
    while bootstrap_constant(params, hi) < 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > resolution * hi {
        let mid = 0.5 * (lo + hi);
        if bootstrap_constant(params, mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Log-slope `d ln Y / d ln(1+t)` over the last decade of the trajectory.
pub fn asymptotic_slope(traj: &Trajectory) -> Result<f64> {
    if traj.blowup.is_some() {
        return Err(Error::Numeric("trajectory blew up".into()));
    }
    let (&t_end, &y_end) = traj
        .times
        .last()
        .zip(traj.values.last())
        .ok_or_else(|| Error::Numeric("empty trajectory".into()))?;
    let idx = traj
        .times
        .iter()
        .rposition(|&t| t <= 0.1 * t_end)
        .ok_or_else(|| Error::Numeric("no sample in the last decade".into()))?;
    let (t0, y0) = (traj.times[idx], traj.values[idx]);
    if !(y0 > 0.0 && y_end > 0.0) || t0 == t_end {
        return Err(Error::Numeric("slope undefined for a vanishing trajectory".into()));
    }
    Ok((y_end / y0).ln() / (t_end.ln_1p() - t0.ln_1p()))
}
