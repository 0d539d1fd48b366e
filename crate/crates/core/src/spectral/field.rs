use std::ops::{Add, Mul, Sub};

use rustfft::num_complex::Complex64;

use super::Grid;
use crate::{Error, Result};

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f` at every lattice point; the closure receives `d` coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coordinates(i);
                f(&x[..d])
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Box average `(1/V) ∫ f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Forward DFT (unnormalised).
    pub fn spectrum(&self) -> Spectrum {
        let mut data: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.transform(&mut data, false);
        Spectrum { grid: self.grid.clone(), coefficients: data }
    }

    /// Translation by lattice offsets (periodic shift of sample indices).
    pub fn shifted(&self, offset: &[usize]) -> Self {
        let grid = &self.grid;
        let n = grid.n();
        let mut values = vec![0.0; self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let mut idx = grid.unravel(flat);
            for (axis, i) in idx.iter_mut().enumerate().take(grid.dim()) {
                *i = (*i + offset.get(axis).copied().unwrap_or(0)) % n;
            }
            values[grid.ravel(&idx)] = *v;
        }
        Self { grid: grid.clone(), values }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

/// Fourier coefficients of a real field, in FFT order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub(crate) fn from_parts(grid: Grid, coefficients: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), coefficients.len());
        Self { grid, coefficients }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Multiplies each coefficient by `symbol(flat_index)`.
    pub fn apply(mut self, symbol: impl Fn(usize) -> Complex64) -> Self {
        for (i, c) in self.coefficients.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        self
    }

    /// Inverse DFT, keeping the real part.
    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coefficients.clone();
        self.grid.transform(&mut data, true);
        ScalarField { grid: self.grid.clone(), values: data.iter().map(|c| c.re).collect() }
    }
}

/// `d` scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Grid("vector field needs at least one component".into()))?;
        let grid = first.grid().clone();
        if components.len() != grid.dim() {
            return Err(Error::Grid(format!(
                "{} components on a {}-d grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| c.grid() != &grid) {
            return Err(Error::Grid("components live on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|j| ScalarField::from_fn(grid, |x| f(x, j)))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.components
    }

    pub fn component(&self, j: usize) -> &ScalarField {
        &self.components[j]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let grid = self.grid();
        let mut values = vec![0.0; grid.len()];
        for c in &self.components {
            for (acc, v) in values.iter_mut().zip(c.values()) {
                *acc += v * v;
            }
        }
        values.iter_mut().for_each(|v| *v = v.sqrt());
        ScalarField { grid: grid.clone(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { components: self.components.iter().map(f).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(c, b);
        }
    }

    /// `Σ_j self_j * other_j`
    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid());
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, x), y) in out.values.iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y;
            }
        }
        out
    }

    pub fn shifted(&self, offset: &[usize]) -> Self {
        self.map_components(|c| c.shifted(offset))
    }
}
