use crate::spectral::{dealias, gradient, riesz_force, ScalarField, VectorField};
use crate::{Error, Result};

use super::{Derivative, ModelParams, State, System};

/// Right-hand side of an autonomous-in-form evolution for [`State`].
pub trait RightHandSide {
    fn eval(&self, state: &State) -> Result<Derivative>;

    /// Largest characteristic speed, used by the CFL guard.
    fn signal_speed(&self, state: &State) -> f64 {
        state.w.max_abs()
    }
}

/// Rescaled Euler–Riesz right-hand side around the background `x/(1+t)`.
#[derive(Debug, Clone)]
pub struct EulerRiesz {
    params: ModelParams,
    force_scale: f64,
}

impl EulerRiesz {
    pub fn new(params: ModelParams, dim: usize) -> Result<Self> {
        params.validate(dim)?;
        Ok(Self { params, force_scale: 1.0 })
    }

    /// Multiplies the interaction force; `0` switches it off (testing hook).
    pub fn with_force_scale(mut self, scale: f64) -> Self {
        self.force_scale = scale;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

fn product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    dealias(&(a * b))
}

/// Pointwise source `N^q` with `N` clamped at zero unless `q` is an integer.
fn source_power(n: &ScalarField, q: f64) -> (ScalarField, f64) {
    if q == 2.0 {
        return (product(n, n), 0.0);
    }
    let integer = (q - q.round()).abs() < 1e-12;
    if integer {
        let m = q.round() as i32;
        return (dealias(&n.map(|v| v.powi(m))), 0.0);
    }
    let clamped = n.values().iter().filter(|v| **v < 0.0).count();
    let fraction = clamped as f64 / n.values().len() as f64;
    (dealias(&n.map(|v| v.max(0.0).powf(q))), fraction)
}

impl RightHandSide for EulerRiesz {
    fn eval(&self, state: &State) -> Result<Derivative> {
        if !state.is_finite() {
            return Err(Error::NonFinite(format!("state at tau = {}", state.tau)));
        }
        let grid = state.grid();
        let d = grid.dim() as f64;
        let n = &state.n;
        let w = &state.w;
        // c multiplies N∇·W and the volume damping d·c·N
        let (c, gamma_tilde) = match self.params.system {
            System::Pressureless => (0.5, 0.0),
            System::Pressured => {
                let gt = self.params.gamma_tilde().expect("validated");
                (gt, gt)
            }
        };

        let grad_n = gradient(n);
        let grad_w: Vec<VectorField> = w.components().iter().map(gradient).collect();
        let mut div_w = ScalarField::zeros(grid);
        for (j, g) in grad_w.iter().enumerate() {
            div_w.axpy(1.0, g.component(j));
        }

        let mut dn = (&w.dot(&grad_n) + &(n * &div_w).scale(c)).scale(-1.0);
        dn = dealias(&dn);
        dn.axpy(-c * d, n);

        let (source, clamped_fraction) = source_power(n, self.params.source_power());
        let coefficient = self.params.lambda * self.force_scale * (self.params.sigma * state.tau).exp();
        let force = if coefficient == 0.0 {
            VectorField::zeros(grid)
        } else {
            riesz_force(&source, self.params.sigma)?
        };

        let mut components = Vec::with_capacity(grid.dim());
        for (j, wj) in w.components().iter().enumerate() {
            let mut nonlinear = w.dot(&grad_w[j]);
            if gamma_tilde > 0.0 {
                nonlinear.axpy(gamma_tilde, &(n * grad_n.component(j)));
            }
            let mut dwj = dealias(&nonlinear).scale(-1.0);
            dwj.axpy(-1.0, wj);
            dwj.axpy(coefficient, force.component(j));
            components.push(dwj);
        }
        let dw = VectorField::new(components)?;
        if !(dn.is_finite() && dw.is_finite()) {
            return Err(Error::NonFinite(format!("right-hand side at tau = {}", state.tau)));
        }
        Ok(Derivative { dn, dw, clamped_fraction })
    }

    fn signal_speed(&self, state: &State) -> f64 {
        let sound = self.params.gamma_tilde().map_or(0.0, |gt| gt * state.n.max_abs());
        state.w.max_abs() + sound
    }
}

pub fn rhs_pressureless(state: &State, params: &ModelParams) -> Result<Derivative> {
    if params.system != System::Pressureless {
        return Err(Error::Parameter("expected the pressureless system".into()));
    }
    EulerRiesz::new(params.clone(), state.grid().dim())?.eval(state)
}

pub fn rhs_pressured(state: &State, params: &ModelParams) -> Result<Derivative> {
    if params.system != System::Pressured {
        return Err(Error::Parameter("expected the pressured system".into()));
    }
    EulerRiesz::new(params.clone(), state.grid().dim())?.eval(state)
}
