use crate::spectral::{Grid, ScalarField, VectorField};

/// Rescaled unknowns `(N, W)` at logarithmic time `τ = ln(1+t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub n: ScalarField,
    pub w: VectorField,
    pub tau: f64,
}

/// Time derivative `(∂_τ N, ∂_τ W)`.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub dn: ScalarField,
    pub dw: VectorField,
    /// Share of lattice points where `N < 0` was clamped for the source power.
    pub clamped_fraction: f64,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        Self { n: ScalarField::zeros(grid), w: VectorField::zeros(grid), tau: 0.0 }
    }

    pub fn grid(&self) -> &Grid {
        self.n.grid()
    }

    /// Physical time `t = e^τ − 1`.
    pub fn time(&self) -> f64 {
        self.tau.exp_m1()
    }

    pub fn is_finite(&self) -> bool {
        self.n.is_finite() && self.w.is_finite()
    }

    /// `self + h · deriv`, with `τ` advanced by `h`.
    pub fn advanced(&self, h: f64, deriv: &Derivative) -> Self {
        let mut out = self.clone();
        out.n.axpy(h, &deriv.dn);
        out.w.axpy(h, &deriv.dw);
        out.tau += h;
        out
    }
}

impl Derivative {
    pub fn zeros(grid: &Grid) -> Self {
        Self { dn: ScalarField::zeros(grid), dw: VectorField::zeros(grid), clamped_fraction: 0.0 }
    }
}
