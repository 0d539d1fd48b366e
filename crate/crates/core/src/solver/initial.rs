use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{dealias, dealias_vector, Grid, ScalarField, VectorField};
use crate::{Error, Result};

use super::State;

/// Optional seeded band-limited perturbation added to `N₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    /// Maximum absolute value of the perturbation.
    pub amplitude: f64,
    /// Largest mode number per axis.
    pub kmax: usize,
}

/// Smooth plateau data centred in the box.
///
/// `N₀ = n_amplitude · P(y)` and `W₀ = w_amplitude · (y − c)/R · P(y)`, where
/// `P` is a product of one-dimensional mollified plateaus that drop below
/// `1e-12` at distance `R = support_fraction · L/2` from the centre. The data
/// are even/odd under `y ↦ −y` about the centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub n_amplitude: f64,
    pub w_amplitude: f64,
    pub support_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { n_amplitude: 0.1, w_amplitude: 0.05, support_fraction: 0.5, perturbation: None }
    }
}

impl InitialData {
    pub fn zero() -> Self {
        Self { n_amplitude: 0.0, w_amplitude: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_fraction > 0.0 && self.support_fraction <= 1.0) {
            return Err(Error::Parameter(format!(
                "support fraction {} must lie in (0, 1]",
                self.support_fraction
            )));
        }
        if !(self.n_amplitude.is_finite() && self.w_amplitude.is_finite()) {
            return Err(Error::Parameter("initial amplitudes must be finite".into()));
        }
        if let Some(p) = &self.perturbation {
            if !p.amplitude.is_finite() || p.kmax == 0 {
                return Err(Error::Parameter("perturbation needs finite amplitude and kmax >= 1".into()));
            }
        }
        Ok(())
    }

    /// Builds the state on `grid`, projected onto the dealiasing band.
    pub fn build(&self, grid: &Grid, seed: u64) -> Result<State> {
        self.validate()?;
        let length = grid.length();
        let center = length / 2.0;
        let radius = self.support_fraction * length / 2.0;
        let plateau = |x: &[f64]| x.iter().map(|&xi| plateau_1d(xi - center, radius)).product::<f64>();

        let mut n = ScalarField::from_fn(grid, |x| self.n_amplitude * plateau(x));
        if let Some(p) = &self.perturbation {
            n.axpy(1.0, &band_limited(grid, p.kmax, p.amplitude, seed));
        }
        let w = VectorField::from_fn(grid, |x, j| {
            self.w_amplitude * (x[j] - center) / radius * plateau(x)
        });
        Ok(State { n: dealias(&n), w: dealias_vector(&w), tau: 0.0 })
    }
}

/// `½[erf((u+a)/h) − erf((u−a)/h)]` with `a = R/2`, `h = R/10`.
fn plateau_1d(u: f64, radius: f64) -> f64 {
    let a = 0.5 * radius;
    let h = 0.1 * radius;
    0.5 * (libm::erf((u + a) / h) - libm::erf((u - a) / h))
}

/// Random trigonometric field with `1 ≤ max_j |m_j| ≤ kmax`, scaled to the given maximum.
pub fn band_limited(grid: &Grid, kmax: usize, amplitude: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let k = kmax as i64;
    let side = (2 * k + 1) as usize;
    let mut terms = Vec::new();
    for flat in 0..side.pow(d as u32) {
        let mut m = [0i64; 3];
        let mut rest = flat;
        for mj in m.iter_mut().take(d) {
            *mj = (rest % side) as i64 - k;
            rest /= side;
        }
        if m.iter().all(|&v| v == 0) {
            continue;
        }
        let a: f64 = rng.random_range(-1.0..1.0);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        terms.push((m, a, phase));
    }
    let length = grid.length();
    let field = ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(m, a, phase)| {
                let arg: f64 = (0..d).map(|j| 2.0 * PI * m[j] as f64 * x[j] / length).sum();
                a * (arg + phase).cos()
            })
            .sum()
    });
    let peak = field.max_abs();
    if peak == 0.0 {
        field
    } else {
        field.scale(amplitude / peak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_compact_and_flat() {
        let r = 1.0;
        assert!((plateau_1d(0.0, r) - 1.0).abs() < 1e-11);
        assert!(plateau_1d(r, r) < 1e-12);
        assert!((plateau_1d(0.3, r) - plateau_1d(-0.3, r)).abs() < 1e-15);
    }

    #[test]
    fn data_symmetry() {
        let grid = Grid::new(2, 32, 6.0).unwrap();
        let s = InitialData::default().build(&grid, 0).unwrap();
        for i in 0..grid.len() {
            let r = grid.reflect(i);
            assert!((s.n.values()[i] - s.n.values()[r]).abs() < 1e-14);
            for j in 0..2 {
                let wj = s.w.component(j).values();
                assert!((wj[i] + wj[r]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn perturbation_is_seeded() {
        let grid = Grid::new(1, 64, 1.0).unwrap();
        let a = band_limited(&grid, 4, 0.01, 7);
        let b = band_limited(&grid, 4, 0.01, 7);
        let c = band_limited(&grid, 4, 0.01, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.max_abs() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_support() {
        let data = InitialData { support_fraction: 1.5, ..InitialData::default() };
        assert!(data.build(&Grid::new(1, 16, 1.0).unwrap(), 0).is_err());
    }
}
