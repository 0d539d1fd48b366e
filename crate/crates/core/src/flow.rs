//! Burgers background velocity.
//!
//! Initial velocities are restricted to identity-plus-periodic perturbations
//! `v₀(α) = α + ε φ(α)`, where `φ` is a finite sum of sines. The Burgers flow
//! is then evaluated exactly by inverting the characteristic map
//! `α ↦ α + t v₀(α)` with a damped Newton iteration, and its gradient follows
//! from implicit differentiation:
//!
//! ```text
//! ∇v(x, t) = Dv₀(α) (I + t Dv₀(α))⁻¹ = I/(1+t) + K(x, t)/(1+t)²
//! ```
//!
//! For `t > 0` the flow is periodic modulo its affine part on the stretched
//! cell `[0, (1+t)P)^d`, where `P` is the period of `φ`; all grid sweeps
//! sample that cell so spectral derivatives and `Ḣ^ℓ` norms are well defined.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::{homogeneous_norm, partial, Grid, ScalarField, VectorField};
use crate::{Error, Result};

pub const NEWTON_TOLERANCE: f64 = 1e-12;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
const NEWTON_DAMPING: f64 = 0.5;
const MAX_HALVINGS: usize = 40;

/// Round-off level below which normalised diagnostics are treated as zero.
pub const GROWTH_NOISE_FLOOR: f64 = 1e-6;

/// Default growth threshold separating bounded from growing normalised sequences.
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 0.05;

/// One perturbation term `amplitude · sin(k·α + phase)` added to component `component`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub component: usize,
    pub amplitude: f64,
    /// Integer mode vector; the perturbation has period `2π` on every axis.
    pub modes: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
}

/// `v₀(α) = α + ε φ(α)` with `φ` a trigonometric sum of period `2π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFlow {
    pub dim: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl InitialFlow {
    pub fn identity(dim: usize) -> Self {
        Self { dim, epsilon: 0.0, terms: Vec::new() }
    }

    /// `v₀(α) = α + ε sin α` in one dimension.
    pub fn sine_1d(epsilon: f64) -> Self {
        Self {
            dim: 1,
            epsilon,
            terms: vec![TrigTerm { component: 0, amplitude: 1.0, modes: vec![1], phase: 0.0 }],
        }
    }

    /// `v₀(α) = α + ε (sin α₂, sin α₁)`.
    pub fn cross_sine_2d(epsilon: f64) -> Self {
        Self {
            dim: 2,
            epsilon,
            terms: vec![
                TrigTerm { component: 0, amplitude: 1.0, modes: vec![0, 1], phase: 0.0 },
                TrigTerm { component: 1, amplitude: 1.0, modes: vec![1, 0], phase: 0.0 },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Parameter(format!("flow dimension {} not in 1..=3", self.dim)));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::Parameter("flow amplitude must be finite".into()));
        }
        for term in &self.terms {
            if term.component >= self.dim || term.modes.len() != self.dim {
                return Err(Error::Parameter(format!(
                    "perturbation term {term:?} does not match dimension {}",
                    self.dim
                )));
            }
            if !(term.amplitude.is_finite() && term.phase.is_finite()) {
                return Err(Error::Parameter("perturbation terms must be finite".into()));
            }
        }
        Ok(())
    }

    /// Period of the perturbation on every axis.
    pub fn period(&self) -> f64 {
        2.0 * PI
    }

    fn argument(term: &TrigTerm, alpha: &[f64]) -> f64 {
        term.modes.iter().zip(alpha).map(|(&m, &a)| m as f64 * a).sum::<f64>() + term.phase
    }

    pub fn velocity(&self, alpha: &[f64]) -> Vec<f64> {
        let mut v = alpha[..self.dim].to_vec();
        for term in &self.terms {
            v[term.component] += self.epsilon * term.amplitude * Self::argument(term, alpha).sin();
        }
        v
    }

    pub fn jacobian(&self, alpha: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::identity(self.dim, self.dim);
        for term in &self.terms {
            let c = self.epsilon * term.amplitude * Self::argument(term, alpha).cos();
            for (i, &m) in term.modes.iter().enumerate() {
                jac[(term.component, i)] += c * m as f64;
            }
        }
        jac
    }

    /// Second derivatives `∂_i ∂_k v₀_j`, flattened as `[j][i][k]`.
    pub fn hessian(&self, alpha: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut h = vec![0.0; d * d * d];
        for term in &self.terms {
            let s = -self.epsilon * term.amplitude * Self::argument(term, alpha).sin();
            for i in 0..d {
                for k in 0..d {
                    h[(term.component * d + i) * d + k] +=
                        s * term.modes[i] as f64 * term.modes[k] as f64;
                }
            }
        }
        h
    }
}

/// `min_z dist(z, (-∞, 0])` over the eigenvalues `z` of `a`.
pub fn spectral_distance(a: &DMatrix<f64>) -> Result<f64> {
    if !a.is_square() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("spectral distance needs a finite square matrix".into()));
    }
    let eigenvalues = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("eigenvalue iteration did not converge".into()))?
        .complex_eigenvalues();
    Ok(eigenvalues
        .iter()
        .map(|z| if z.re <= 0.0 { z.im.abs() } else { z.norm() })
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveCheck {
    pub ok: bool,
    pub min_margin: f64,
}

/// Scans `spectral_distance(Dv₀)` over the lattice points of `grid`.
pub fn check_dispersive_condition(
    flow: &InitialFlow,
    grid: &Grid,
    epsilon: f64,
) -> Result<DispersiveCheck> {
    flow.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("margin {epsilon} must be positive")));
    }
    if grid.dim() != flow.dim {
        return Err(Error::Parameter("grid and flow dimensions differ".into()));
    }
    let margins: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let alpha = grid.coordinates(i);
            spectral_distance(&flow.jacobian(&alpha[..flow.dim]))
        })
        .collect::<Result<_>>()?;
    let min_margin = margins.into_iter().fold(f64::INFINITY, f64::min);
    Ok(DispersiveCheck { ok: min_margin >= epsilon, min_margin })
}

/// Burgers velocity and gradient at one point.
#[derive(Debug, Clone)]
pub struct FlowPoint {
    pub alpha: Vec<f64>,
    pub v: Vec<f64>,
    pub grad_v: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn characteristic_residual(flow: &InitialFlow, alpha: &[f64], x: &[f64], t: f64) -> Vec<f64> {
    let v0 = flow.velocity(alpha);
    (0..flow.dim).map(|j| alpha[j] + t * v0[j] - x[j]).collect()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Evaluates the Burgers solution at `(x, t)` by inverting `α + t v₀(α) = x`.
pub fn burgers_evaluate(flow: &InitialFlow, x: &[f64], t: f64) -> Result<FlowPoint> {
    let d = flow.dim;
    if x.len() < d || !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("bad evaluation point x = {x:?}, t = {t}")));
    }
    let x = &x[..d];
    // absolute tolerance, widened to the round-off floor of |α + t v₀(α)| ≈ |x|
    let tol = NEWTON_TOLERANCE.max(8.0 * f64::EPSILON * max_norm(x));
    let mut alpha: Vec<f64> = x.iter().map(|xi| xi / (1.0 + t)).collect();
    let mut residual = characteristic_residual(flow, &alpha, x, t);
    let mut res_norm = max_norm(&residual);
    let mut iterations = 0;
    while res_norm > tol {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::CharacteristicInversion {
                x: x.to_vec(),
                t,
                residual: res_norm,
                iterations,
            });
        }
        iterations += 1;
        let jac = DMatrix::identity(d, d) + flow.jacobian(&alpha) * t;
        let rhs = nalgebra::DVector::from_column_slice(&residual);
        let step = jac.lu().solve(&rhs).ok_or_else(|| Error::CharacteristicInversion {
            x: x.to_vec(),
            t,
            residual: res_norm,
            iterations,
        })?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = (0..d).map(|j| alpha[j] - scale * step[j]).collect();
            let trial_res = characteristic_residual(flow, &trial, x, t);
            let trial_norm = max_norm(&trial_res);
            if trial_norm < res_norm || trial_norm <= tol {
                alpha = trial;
                residual = trial_res;
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            scale *= NEWTON_DAMPING;
        }
        if !accepted {
            // stagnation at round-off level
            if res_norm <= 1e2 * tol {
                break;
            }
            return Err(Error::CharacteristicInversion {
                x: x.to_vec(),
                t,
                residual: res_norm,
                iterations,
            });
        }
    }
    let dv0 = flow.jacobian(&alpha);
    let inv = (DMatrix::identity(d, d) + &dv0 * t)
        .try_inverse()
        .ok_or_else(|| Error::Numeric("I + t Dv0 is singular".into()))?;
    Ok(FlowPoint { v: flow.velocity(&alpha), grad_v: dv0 * inv, alpha, residual: res_norm, iterations })
}

/// `d × d` matrix of scalar fields, row-major.
#[derive(Debug, Clone)]
pub struct MatrixField {
    dim: usize,
    entries: Vec<ScalarField>,
}

impl MatrixField {
    fn from_points(grid: &Grid, matrices: &[DMatrix<f64>]) -> Self {
        let d = grid.dim();
        let entries = (0..d * d)
            .map(|e| {
                let values = matrices.iter().map(|m| m[(e / d, e % d)]).collect();
                ScalarField::new(grid, values).expect("one matrix per lattice point")
            })
            .collect();
        Self { dim: d, entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> &ScalarField {
        &self.entries[row * self.dim + col]
    }

    pub fn at(&self, flat: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.entry(r, c).values()[flat])
    }

    /// Pointwise Frobenius norm, maximised over the lattice.
    pub fn sup_norm(&self) -> f64 {
        let len = self.entries[0].values().len();
        (0..len)
            .map(|i| self.entries.iter().map(|e| e.values()[i].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `(Σ_entries ‖·‖²_{Ḣ^ℓ})^{1/2}` on the sampling cell.
    pub fn seminorm(&self, ell: f64) -> f64 {
        self.entries.iter().map(|e| homogeneous_norm(e, ell).powi(2)).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> ScalarField {
        let mut out = self.entry(0, 0).clone();
        for j in 1..self.dim {
            out.axpy(1.0, self.entry(j, j));
        }
        out
    }
}

/// Flow sampled on the stretched period cell at time `t`.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub t: f64,
    /// Lattice covering `[0, (1+t)P)^d`.
    pub grid: Grid,
    pub v: VectorField,
    pub grad_v: MatrixField,
    pub k: MatrixField,
    pub max_residual: f64,
    perturbation: VectorField,
}

impl FlowSample {
    /// `max |∇v − I/(1+t) − K/(1+t)²|` over the lattice.
    pub fn reconstruction_residual(&self) -> f64 {
        let d = self.grid.dim();
        let a = 1.0 / (1.0 + self.t);
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            let g = self.grad_v.at(i);
            let k = self.k.at(i);
            let r = g - DMatrix::<f64>::identity(d, d) * a - k * (a * a);
            worst = worst.max(r.amax());
        }
        worst
    }

    /// Periodic part `v − x/(1+t) = (v₀(α) − α)/(1+t)`.
    pub fn periodic_velocity(&self) -> &VectorField {
        &self.perturbation
    }

    /// `max |∇·v − d/(1+t) − tr K/(1+t)²|`, with `∇·v` from spectral differentiation.
    pub fn divergence_residual(&self) -> f64 {
        let d = self.grid.dim() as f64;
        let a = 1.0 / (1.0 + self.t);
        let vp = self.periodic_velocity();
        let mut div = ScalarField::constant(&self.grid, d * a);
        for (j, comp) in vp.components().iter().enumerate() {
            div.axpy(1.0, &partial(comp, j));
        }
        let tr = self.k.trace();
        div.values()
            .iter()
            .zip(tr.values())
            .map(|(dv, trk)| (dv - d * a - trk * a * a).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_x |∇²v|` (Frobenius over the three indices) by spectral differentiation.
    pub fn second_gradient_sup(&self) -> f64 {
        let d = self.grid.dim();
        let vp = self.periodic_velocity();
        let mut sq = vec![0.0; self.grid.len()];
        for comp in vp.components() {
            for i in 0..d {
                let di = partial(comp, i);
                for k in 0..d {
                    let dik = partial(&di, k);
                    for (acc, v) in sq.iter_mut().zip(dik.values()) {
                        *acc += v * v;
                    }
                }
            }
        }
        sq.into_iter().fold(0.0, |m, v| m.max(v.sqrt()))
    }
}

/// Samples `v`, `∇v` and `K = (1+t)² (∇v − I/(1+t))` on the stretched cell.
///
/// `grid` fixes the dimension and points per axis; its length is ignored.
pub fn compute_k(flow: &InitialFlow, grid: &Grid, t: f64) -> Result<FlowSample> {
    flow.validate()?;
    if grid.dim() != flow.dim {
        return Err(Error::Parameter("grid and flow dimensions differ".into()));
    }
    let cell = grid.rescaled((1.0 + t) * flow.period())?;
    let d = flow.dim;
    let points: Vec<FlowPoint> = (0..cell.len())
        .into_par_iter()
        .map(|i| burgers_evaluate(flow, &cell.coordinates(i)[..d], t))
        .collect::<Result<_>>()?;
    let v = VectorField::new(
        (0..d)
            .map(|j| {
                ScalarField::new(&cell, points.iter().map(|p| p.v[j]).collect())
                    .expect("one value per point")
            })
            .collect(),
    )?;
    let a = 1.0 / (1.0 + t);
    let perturbation = VectorField::new(
        (0..d)
            .map(|j| {
                let values = points.iter().map(|p| (p.v[j] - p.alpha[j]) * a).collect();
                ScalarField::new(&cell, values).expect("one value per point")
            })
            .collect(),
    )?;
    let grads: Vec<DMatrix<f64>> = points.iter().map(|p| p.grad_v.clone()).collect();
    let a = 1.0 / (1.0 + t);
    let ks: Vec<DMatrix<f64>> = grads
        .iter()
        .map(|g| (g - DMatrix::<f64>::identity(d, d) * a) * ((1.0 + t) * (1.0 + t)))
        .collect();
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    Ok(FlowSample {
        t,
        v,
        grad_v: MatrixField::from_points(&cell, &grads),
        k: MatrixField::from_points(&cell, &ks),
        grid: cell,
        max_residual,
        perturbation,
    })
}

/// Relative growth of `values` over the last decade of `times`.
///
/// Compares the final value with the value at the latest sample time not
/// exceeding `t_last / 10` (the first sample if none qualifies). Sequences
/// whose endpoints are both below [`GROWTH_NOISE_FLOOR`] count as zero.
pub fn last_decade_growth(times: &[f64], values: &[f64]) -> f64 {
    let (Some(&t_last), Some(&v_last)) = (times.last(), values.last()) else {
        return 0.0;
    };
    let reference = times
        .iter()
        .zip(values)
        .rev()
        .find(|(t, _)| **t <= t_last / 10.0)
        .map(|(_, v)| *v)
        .unwrap_or(values[0]);
    if reference.abs().max(v_last.abs()) <= GROWTH_NOISE_FLOOR {
        return 0.0;
    }
    if reference == 0.0 {
        if v_last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (v_last - reference) / reference.abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub t: f64,
    pub sup_k: f64,
    /// `(ℓ, ‖K‖_{Ḣ^ℓ}, ‖K‖_{Ḣ^ℓ}(1+t)^{ℓ−d/2})`
    pub k_seminorms: Vec<(f64, f64, f64)>,
    pub second_gradient_sup: f64,
    /// `‖∇²v‖_{L∞}(1+t)³`
    pub second_gradient_normalized: f64,
    pub reconstruction_residual: f64,
    pub divergence_residual: f64,
    pub newton_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub threshold: f64,
    pub sup_k_growth: f64,
    pub sup_k_bounded: bool,
    /// `(ℓ, growth, bounded)`
    pub k_seminorm_verdicts: Vec<(f64, f64, bool)>,
    pub second_gradient_growth: f64,
    pub second_gradient_bounded: bool,
}

impl BoundsReport {
    pub fn all_bounded(&self) -> bool {
        self.sup_k_bounded
            && self.second_gradient_bounded
            && self.k_seminorm_verdicts.iter().all(|v| v.2)
    }
}

/// Records `K` and `∇²v` diagnostics at each time and judges boundedness.
pub fn verify_background_bounds(
    flow: &InitialFlow,
    grid: &Grid,
    times: &[f64],
    ells: &[f64],
    threshold: f64,
) -> Result<BoundsReport> {
    if times.len() < 4 {
        return Err(Error::Parameter("need at least four sample times".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < 0.0 {
        return Err(Error::Parameter("sample times must be nonnegative and increasing".into()));
    }
    let half_d = flow.dim as f64 / 2.0;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let sample = compute_k(flow, grid, t)?;
        let k_seminorms = ells
            .iter()
            .map(|&ell| {
                let raw = sample.k.seminorm(ell);
                (ell, raw, raw * (1.0 + t).powf(ell - half_d))
            })
            .collect();
        let hess = sample.second_gradient_sup();
        rows.push(BoundsRow {
            t,
            sup_k: sample.k.sup_norm(),
            k_seminorms,
            second_gradient_sup: hess,
            second_gradient_normalized: hess * (1.0 + t).powi(3),
            reconstruction_residual: sample.reconstruction_residual(),
            divergence_residual: sample.divergence_residual(),
            newton_residual: sample.max_residual,
        });
    }
    let verdict = |values: Vec<f64>| {
        let g = last_decade_growth(times, &values);
        (g, g < threshold)
    };
    let (sup_k_growth, sup_k_bounded) = verdict(rows.iter().map(|r| r.sup_k).collect());
    let (second_gradient_growth, second_gradient_bounded) =
        verdict(rows.iter().map(|r| r.second_gradient_normalized).collect());
    let k_seminorm_verdicts = ells
        .iter()
        .enumerate()
        .map(|(j, &ell)| {
            let (g, ok) = verdict(rows.iter().map(|r| r.k_seminorms[j].2).collect());
            (ell, g, ok)
        })
        .collect();
    Ok(BoundsReport {
        rows,
        threshold,
        sup_k_growth,
        sup_k_bounded,
        k_seminorm_verdicts,
        second_gradient_growth,
        second_gradient_bounded,
    })
}
