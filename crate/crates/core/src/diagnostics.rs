//! Monitored functionals along trajectories.
//!
//! All functionals are evaluated in physical variables from the rescaled
//! state. With `t = e^τ − 1`, a physical field `n(x, t) = N(x/(1+t), τ)` has
//!
//! ```text
//! ‖n‖_{Ḣ^ℓ_x} = (1+t)^{d/2 − ℓ} ‖N‖_{Ḣ^ℓ_y},   ‖n‖_{L^p_x} = (1+t)^{d/p} ‖N‖_{L^p_y}
//! ```

use serde::{Deserialize, Serialize};

use crate::solver::{ModelParams, State, System};
use crate::spectral::{
    apply_fractional_laplacian, homogeneous_norm, lp_norm, vector_homogeneous_norm, vector_lp_norm,
    ScalarField,
};
use crate::{Error, Result};

/// Which unknown a norm refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unknown {
    N,
    W,
}

/// `‖n‖_{Ḣ^ℓ}` or `‖w‖_{Ḣ^ℓ}` in physical variables.
pub fn physical_seminorm(state: &State, which: Unknown, ell: f64) -> f64 {
    let d = state.grid().dim() as f64;
    let raw = match which {
        Unknown::N => homogeneous_norm(&state.n, ell),
        Unknown::W => vector_homogeneous_norm(&state.w, ell),
    };
    raw * ((d / 2.0 - ell) * state.tau).exp()
}

/// Rescaled `L^p` norm of `N` or `|W|`.
pub fn rescaled_lp(state: &State, which: Unknown, p: f64) -> Result<f64> {
    match which {
        Unknown::N => lp_norm(&state.n, p),
        Unknown::W => vector_lp_norm(&state.w, p),
    }
}

/// Scaling factor `(1+t)^{d/p}` from rescaled to physical `L^p` norms.
pub fn lp_scaling(dim: usize, p: f64, tau: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        (dim as f64 / p * tau).exp()
    }
}

/// Physical `‖n‖_{L²_x} = e^{dτ/2} ‖N‖_{L²_y}`.
pub fn mass(state: &State) -> f64 {
    let d = state.grid().dim() as f64;
    lp_norm(&state.n, 2.0).expect("p = 2 is valid") * (0.5 * d * state.tau).exp()
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("regularity s = {s} must be positive")))
    }
}

/// `X_{s,σ} = (‖w‖²_{Ḣ^{s+σ/2}} + 4‖n‖²_{Ḣ^s})^{1/2}` (pressureless) or
/// `X̃_s = (‖w‖²_{Ḣ^s} + ‖n‖²_{Ḣ^s})^{1/2}` (pressured).
pub fn compute_x(state: &State, s: f64, params: &ModelParams) -> Result<f64> {
    check_s(s)?;
    let n = physical_seminorm(state, Unknown::N, s);
    Ok(match params.system {
        System::Pressureless => {
            let w = physical_seminorm(state, Unknown::W, s + params.sigma / 2.0);
            (w * w + 4.0 * n * n).sqrt()
        }
        System::Pressured => {
            let w = physical_seminorm(state, Unknown::W, s);
            (w * w + n * n).sqrt()
        }
    })
}

/// Weighted norm `n_{ℓ,2}` (pressureless, with the extra `σ/2`) or `ñ_{ℓ,2}`.
pub fn weighted_n(state: &State, ell: f64, params: &ModelParams) -> f64 {
    let d = state.grid().dim() as f64;
    let shift = match params.system {
        System::Pressureless => params.sigma / 2.0,
        System::Pressured => 0.0,
    };
    ((ell + shift - d / 2.0 - 1.0) * state.tau).exp() * physical_seminorm(state, Unknown::N, ell)
}

/// Weighted norm `w_{ℓ,2} = (1+t)^{ℓ−d/2−1} ‖w‖_{Ḣ^ℓ}`.
pub fn weighted_w(state: &State, ell: f64) -> f64 {
    let d = state.grid().dim() as f64;
    ((ell - d / 2.0 - 1.0) * state.tau).exp() * physical_seminorm(state, Unknown::W, ell)
}

/// `Z = n₂ + w₂ + Y_{s,σ}` (pressureless) or `Z̃ = (ñ₂² + w̃₂² + Ỹ_s²)^{1/2}` (pressured).
pub fn compute_z(state: &State, s: f64, params: &ModelParams) -> Result<f64> {
    check_s(s)?;
    let n2 = weighted_n(state, 0.0, params);
    let w2 = weighted_w(state, 0.0);
    Ok(match params.system {
        System::Pressureless => {
            let y = (weighted_w(state, s + params.sigma / 2.0).powi(2)
                + 4.0 * weighted_n(state, s, params).powi(2))
            .sqrt();
            n2 + w2 + y
        }
        System::Pressured => {
            let y2 = weighted_w(state, s).powi(2) + weighted_n(state, s, params).powi(2);
            (n2 * n2 + w2 * w2 + y2).sqrt()
        }
    })
}

/// `C_{d,σ} = 1 + min{1, (d−σ)/2}`.
pub fn decay_constant(dim: usize, sigma: f64) -> f64 {
    1.0 + f64::min(1.0, (dim as f64 - sigma) / 2.0)
}

/// `∫_y N^q f²` with `N` clamped at zero; `q < 0` at a nonpositive point is a domain error.
fn weighted_integral(n: &ScalarField, q: f64, f: &ScalarField) -> Result<f64> {
    let mut sum = 0.0;
    for (&nv, &fv) in n.values().iter().zip(f.values()) {
        let base = nv.max(0.0);
        let weight = if q == 0.0 {
            1.0
        } else if base == 0.0 {
            if q < 0.0 {
                return Err(Error::Domain(format!(
                    "density weight with exponent {q} at a vacuum point"
                )));
            }
            0.0
        } else {
            base.powf(q)
        };
        sum += weight * fv * fv;
    }
    Ok(sum * n.grid().cell_volume())
}

fn gamma_tilde(params: &ModelParams) -> Result<f64> {
    params
        .gamma_tilde()
        .ok_or_else(|| Error::Parameter("density functionals need the pressured system".into()))
}

/// `W(t) = (1+t)^{2(s−d/2−1)}/γ̃² ∫ n^{1/γ̃−2} |Λ^{s−σ/2} n|² dx`.
pub fn compute_w(state: &State, s: f64, params: &ModelParams) -> Result<f64> {
    check_s(s)?;
    let gt = gamma_tilde(params)?;
    let d = state.grid().dim() as f64;
    let a = s - params.sigma / 2.0;
    let lam = apply_fractional_laplacian(&state.n, a)?;
    let integral = weighted_integral(&state.n, 1.0 / gt - 2.0, &lam)?;
    // ∫_x = (1+t)^{d−2a} ∫_y
    let scale = ((2.0 * (s - d / 2.0 - 1.0) + d - 2.0 * a) * state.tau).exp();
    Ok(scale * integral / (gt * gt))
}

/// Smallest integer `k` with `2(1−σ)/σ < k ≤ 2(s−2)/σ`, if any.
pub fn k0(sigma: f64, s: f64) -> Option<u32> {
    let lower = 2.0 * (1.0 - sigma) / sigma;
    let upper = 2.0 * (s - 2.0) / sigma;
    let k = (lower.floor() + 1.0).max(1.0);
    (k <= upper).then_some(k as u32)
}

/// `W̃_k(t) = (1+t)^{2(s−d/2−1)}/γ̃^{2k} ∫ n^{k(1/γ̃−2)} |Λ^{s−kσ/2} w|² dx`, `1 ≤ k ≤ k₀`.
pub fn compute_wk(state: &State, s: f64, params: &ModelParams, k: u32) -> Result<f64> {
    check_s(s)?;
    let gt = gamma_tilde(params)?;
    let kmax = k0(params.sigma, s).ok_or_else(|| {
        Error::Parameter(format!("no admissible k for sigma = {}, s = {s}", params.sigma))
    })?;
    if k == 0 || k > kmax {
        return Err(Error::Parameter(format!("k = {k} outside 1..={kmax}")));
    }
    let d = state.grid().dim() as f64;
    let kf = f64::from(k);
    let a = s - kf * params.sigma / 2.0;
    let q = kf * (1.0 / gt - 2.0);
    let mut integral = 0.0;
    for wj in state.w.components() {
        integral += weighted_integral(&state.n, q, &apply_fractional_laplacian(wj, a)?)?;
    }
    let scale = ((2.0 * (s - d / 2.0 - 1.0) + d - 2.0 * a) * state.tau).exp();
    Ok(scale * integral / gt.powi(2 * k as i32))
}

/// Label of a norm or functional in a [`NormSeries`].
pub type Quantity = String;

/// One recorded value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub tau: f64,
    pub t: f64,
    pub quantity: Quantity,
    pub l: f64,
    pub p: f64,
    pub rescaled_value: f64,
    pub physical_value: f64,
}

/// Per-(quantity, ℓ, p) time series, stored row-wise in recording order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormSeries {
    pub rows: Vec<NormRow>,
}

/// Header of the CSV form of a [`NormSeries`].
pub const NORM_SERIES_HEADER: [&str; 7] =
    ["tau", "t", "quantity", "l", "p", "rescaled_value", "physical_value"];

impl NormSeries {
    pub fn push(&mut self, row: NormRow) {
        self.rows.push(row);
    }

    /// Distinct `(quantity, ℓ, p)` keys in first-seen order.
    pub fn keys(&self) -> Vec<(String, f64, f64)> {
        let mut keys: Vec<(String, f64, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|k| k.0 == r.quantity && k.1 == r.l && k.2 == r.p) {
                keys.push((r.quantity.clone(), r.l, r.p));
            }
        }
        keys
    }

    /// Rows of one key, in time order.
    pub fn select(&self, quantity: &str, l: f64, p: f64) -> Vec<&NormRow> {
        self.rows.iter().filter(|r| r.quantity == quantity && r.l == l && r.p == p).collect()
    }

    /// `(τ, rescaled, physical)` triples of one key.
    pub fn series(&self, quantity: &str, l: f64, p: f64) -> Vec<(f64, f64, f64)> {
        self.select(quantity, l, p)
            .into_iter()
            .map(|r| (r.tau, r.rescaled_value, r.physical_value))
            .collect()
    }
}

/// `(dZ/dt + C Z/(1+t)) / (Z² + Z/(1+t)²)` by centred differences in `t`.
///
/// Takes `(t, Z)` samples; returns `(t, ratio)` at interior samples where the
/// denominator is positive.
pub fn residual_ratio_series(samples: &[(f64, f64)], c: f64) -> Vec<(f64, f64)> {
    samples
        .windows(3)
        .filter_map(|w| {
            let (t0, z0) = w[0];
            let (t1, z1) = w[1];
            let (t2, z2) = w[2];
            // non-uniform centred difference
            let h0 = t1 - t0;
            let h1 = t2 - t1;
            let dz = -h1 / (h0 * (h0 + h1)) * z0 + (h1 - h0) / (h0 * h1) * z1
                + h0 / (h1 * (h0 + h1)) * z2;
            let denom = z1 * z1 + z1 / (1.0 + t1).powi(2);
            (denom > 0.0).then(|| (t1, (dz + c * z1 / (1.0 + t1)) / denom))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, VectorField};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn single_mode_state(tau: f64) -> (State, f64, f64) {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let (a, k) = (0.3, 3.0);
        let n = ScalarField::from_fn(&grid, |x| a * (k * x[0]).sin());
        (State { n, w: VectorField::zeros(&grid), tau }, a, k)
    }

    #[test]
    fn zero_state_functionals_vanish() {
        let grid = Grid::new(2, 16, 3.0).unwrap();
        let mut state = State::zeros(&grid);
        state.tau = 0.7;
        let pl = ModelParams::pressureless(0.5);
        let pr = ModelParams::pressured(-1.0, 0.5, 1.5);
        assert_eq!(mass(&state), 0.0);
        assert_eq!(compute_x(&state, 2.0, &pl).unwrap(), 0.0);
        assert_eq!(compute_z(&state, 2.0, &pl).unwrap(), 0.0);
        assert_eq!(compute_z(&state, 2.0, &pr).unwrap(), 0.0);
        assert_eq!(compute_w(&state, 2.0, &pr).unwrap(), 0.0);
        assert_eq!(compute_wk(&state, 3.1, &pr, 1).unwrap(), 0.0);
    }

    #[test]
    fn x_single_mode() {
        let tau = 0.4;
        let (state, a, k) = single_mode_state(tau);
        let s = 1.5;
        let x = compute_x(&state, s, &ModelParams::pressureless(0.5)).unwrap();
        let expected = 2.0 * ((0.5 - s) * tau).exp() * k.powf(s) * a * PI.sqrt();
        assert_relative_eq!(x, expected, max_relative = 1e-12);
    }

    #[test]
    fn x_pressured_velocity_only() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let w = VectorField::from_fn(&grid, |x, _| (2.0 * x[0]).cos());
        let state = State { n: ScalarField::zeros(&grid), w, tau: 0.0 };
        let p = ModelParams::pressured(1.0, 0.5, 1.5);
        let x = compute_x(&state, 2.0, &p).unwrap();
        assert_relative_eq!(x, physical_seminorm(&state, Unknown::W, 2.0), max_relative = 1e-14);
    }

    #[test]
    fn z_at_initial_time_uses_raw_norms() {
        let (state, _, _) = single_mode_state(0.0);
        let p = ModelParams::pressureless(0.5);
        let s = 2.0;
        let raw = homogeneous_norm(&state.n, 0.0)
            + (4.0 * homogeneous_norm(&state.n, s).powi(2)).sqrt();
        assert_relative_eq!(compute_z(&state, s, &p).unwrap(), raw, max_relative = 1e-14);
    }

    #[test]
    fn mass_of_constant() {
        let grid = Grid::new(2, 8, 2.0).unwrap();
        let state = State { n: ScalarField::constant(&grid, 3.0), w: VectorField::zeros(&grid), tau: 0.5 };
        assert_relative_eq!(mass(&state), 3.0 * (0.5f64).exp() * 2.0, max_relative = 1e-14);
    }

    #[test]
    fn w_reduces_for_gamma_two() {
        let tau = 0.3;
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let n = ScalarField::from_fn(&grid, |x| 1.0 + 0.2 * (2.0 * x[0]).cos());
        let state = State { n, w: VectorField::zeros(&grid), tau };
        let p = ModelParams::pressured(-1.0, 0.5, 2.0);
        let s = 2.0;
        let expected = ((2.0 * (s - 0.5 - 1.0)) * tau).exp()
            * 4.0
            * physical_seminorm(&state, Unknown::N, s - 0.25).powi(2);
        assert_relative_eq!(compute_w(&state, s, &p).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn w_of_constant_density_is_zero() {
        let grid = Grid::new(1, 32, 1.0).unwrap();
        let state = State { n: ScalarField::constant(&grid, 0.7), w: VectorField::zeros(&grid), tau: 0.1 };
        let p = ModelParams::pressured(-1.0, 0.5, 1.5);
        assert!(compute_w(&state, 2.0, &p).unwrap().abs() < 1e-28);
    }

    #[test]
    fn k0_examples() {
        assert_eq!(k0(0.5, 3.1), Some(3));
        assert_eq!(k0(0.5, 2.5), None);
        assert_eq!(k0(1.2, 3.0), Some(1));
        let grid = Grid::new(1, 16, 1.0).unwrap();
        let state = State::zeros(&grid);
        let p = ModelParams::pressured(-1.0, 0.5, 1.5);
        assert!(compute_wk(&state, 3.1, &p, 4).is_err());
        assert!(compute_wk(&state, 3.1, &p, 0).is_err());
    }

    #[test]
    fn wk_reduces_for_gamma_two() {
        let tau = 0.2;
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let w = VectorField::from_fn(&grid, |x, _| (3.0 * x[0]).sin());
        let state = State { n: ScalarField::constant(&grid, 0.5), w, tau };
        let p = ModelParams::pressured(-1.0, 0.5, 2.0);
        let s = 3.1;
        let expected = ((2.0 * (s - 0.5 - 1.0)) * tau).exp()
            * 4.0
            * physical_seminorm(&state, Unknown::W, s - 0.25).powi(2);
        assert_relative_eq!(compute_wk(&state, s, &p, 1).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn negative_exponent_at_vacuum_is_domain_error() {
        let grid = Grid::new(1, 8, 1.0).unwrap();
        let n = ScalarField::zeros(&grid);
        let f = ScalarField::constant(&grid, 1.0);
        assert!(matches!(weighted_integral(&n, -0.5, &f), Err(Error::Domain(_))));
        assert_eq!(weighted_integral(&n, 0.0, &f).unwrap(), 1.0);
    }

    #[test]
    fn residual_ratio_of_exact_decay_is_zero() {
        let c = 1.5;
        let samples: Vec<(f64, f64)> =
            (0..50).map(|i| i as f64 * 0.01).map(|t| (t, (1.0 + t).powf(-c))).collect();
        for (_, r) in residual_ratio_series(&samples, c) {
            assert!(r.abs() < 1e-3);
        }
    }
}
