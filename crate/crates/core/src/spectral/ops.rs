use rustfft::num_complex::Complex64;

use super::{Grid, ScalarField, Spectrum, VectorField};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn wavevector_norm(grid: &Grid, flat: usize) -> f64 {
    let k = grid.wavevector(flat);
    k.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Symbol `|k|^s` with the zero-mode convention: kept for `s = 0`, zeroed otherwise.
fn riesz_symbol(grid: &Grid, flat: usize, s: f64) -> Complex64 {
    if s == 0.0 {
        return ONE;
    }
    let kmag = wavevector_norm(grid, flat);
    if kmag == 0.0 {
        ZERO
    } else {
        Complex64::new(kmag.powf(s), 0.0)
    }
}

/// Symbol `i k_j`, zero on the Nyquist plane of axis `j`.
fn derivative_symbol(grid: &Grid, flat: usize, axis: usize) -> Complex64 {
    let idx = grid.unravel(flat);
    if grid.is_nyquist(idx[axis]) {
        ZERO
    } else {
        Complex64::new(0.0, grid.wavenumbers()[idx[axis]])
    }
}

/// `Λ^s f = (−Δ)^{s/2} f`.
///
/// The mean of `f` is kept for `s = 0` and removed for any `s ≠ 0`.
pub fn apply_fractional_laplacian(f: &ScalarField, s: f64) -> Result<ScalarField> {
    f.ensure_finite("fractional Laplacian input")?;
    if !s.is_finite() {
        return Err(Error::Parameter(format!("order s = {s} is not finite")));
    }
    let grid = f.grid().clone();
    Ok(f.spectrum().apply(|i| riesz_symbol(&grid, i, s)).to_field())
}

pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid().clone();
    f.spectrum().apply(|i| derivative_symbol(&grid, i, axis)).to_field()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid().clone();
    let spectrum = f.spectrum();
    let components = (0..grid.dim())
        .map(|j| spectrum.clone().apply(|i| derivative_symbol(&grid, i, j)).to_field())
        .collect();
    VectorField::new(components).expect("gradient components share the grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid().clone();
    let mut total: Option<Spectrum> = None;
    for (j, comp) in v.components().iter().enumerate() {
        let term = comp.spectrum().apply(|i| derivative_symbol(&grid, i, j));
        total = Some(match total {
            None => term,
            Some(mut acc) => {
                for (a, b) in acc.coefficients_mut().iter_mut().zip(term.coefficients()) {
                    *a += b;
                }
                acc
            }
        });
    }
    total.expect("vector fields have at least one component").to_field()
}

/// Checks `σ ∈ (0, min(d, 2))`.
pub fn check_riesz_order(dim: usize, sigma: f64) -> Result<()> {
    let upper = (dim as f64).min(2.0);
    if sigma > 0.0 && sigma < upper {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sigma = {sigma} outside (0, {upper}) for d = {dim}")))
    }
}

/// Interaction force `∇Λ^{-σ} f`, with symbol `i k_j |k|^{-σ}` and zero mean.
pub fn riesz_force(f: &ScalarField, sigma: f64) -> Result<VectorField> {
    let grid = f.grid().clone();
    check_riesz_order(grid.dim(), sigma)?;
    f.ensure_finite("Riesz force input")?;
    let potential = f.spectrum().apply(|i| riesz_symbol(&grid, i, -sigma));
    let components = (0..grid.dim())
        .map(|j| potential.clone().apply(|i| derivative_symbol(&grid, i, j)).to_field())
        .collect();
    VectorField::new(components)
}

/// `(Σ_k |k|^{2ℓ} |f̂(k)|² · V/N²)^{1/2}` for a precomputed spectrum; any real `ℓ`.
///
/// The zero mode contributes only when `ℓ = 0`.
pub fn seminorm_from_spectrum(spectrum: &Spectrum, ell: f64) -> f64 {
    let grid = spectrum.grid();
    let total = grid.len() as f64;
    let weight = grid.volume() / (total * total);
    let sum: f64 = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let kmag = wavevector_norm(grid, i);
            let factor = if ell == 0.0 {
                1.0
            } else if kmag == 0.0 {
                0.0
            } else {
                kmag.powf(2.0 * ell)
            };
            factor * c.norm_sqr()
        })
        .sum();
    (sum * weight).sqrt()
}

/// Homogeneous `Ḣ^ℓ` seminorm `‖Λ^ℓ f‖_{L²}`, `ℓ ≥ 0`.
pub fn sobolev_seminorm(f: &ScalarField, ell: f64) -> Result<f64> {
    if !(ell >= 0.0 && ell.is_finite()) {
        return Err(Error::Parameter(format!("seminorm order {ell} must be >= 0")));
    }
    f.ensure_finite("seminorm input")?;
    Ok(seminorm_from_spectrum(&f.spectrum(), ell))
}

/// `Ḣ^ℓ` seminorm allowing negative orders (zero mode excluded for `ℓ ≠ 0`).
pub fn homogeneous_norm(f: &ScalarField, ell: f64) -> f64 {
    seminorm_from_spectrum(&f.spectrum(), ell)
}

pub fn vector_homogeneous_norm(v: &VectorField, ell: f64) -> f64 {
    v.components()
        .iter()
        .map(|c| homogeneous_norm(c, ell).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Discrete `L^p` norm with uniform cell weight; `p = f64::INFINITY` gives the grid maximum.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("Lebesgue exponent {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let w = f.grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        f.values().iter().map(|v| v * v).sum()
    } else if p == 1.0 {
        f.values().iter().map(|v| v.abs()).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((w * sum).powf(1.0 / p))
}

pub fn vector_lp_norm(v: &VectorField, p: f64) -> Result<f64> {
    lp_norm(&v.magnitude(), p)
}

/// True when every `|m_j| ≤ n/3`.
pub fn in_dealias_band(grid: &Grid, flat: usize) -> bool {
    let n = grid.n() as i64;
    grid.modes(flat).iter().all(|m| 3 * m.abs() <= n)
}

/// 2/3-rule truncation: zeroes modes with any `|m_j| > n/3`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    f.spectrum()
        .apply(|i| if in_dealias_band(&grid, i) { ONE } else { ZERO })
        .to_field()
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    v.map_components(dealias)
}

/// Alias-free product `P(f·g)`: both factors are zero-padded to `2n` per axis,
/// multiplied exactly, and the result is truncated to the 2/3 band.
pub fn dealiased_product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    let fine = Grid::new(grid.dim(), 2 * grid.n(), grid.length())?;
    let fp = pad(f, &fine);
    let gp = pad(g, &fine);
    let product = &fp * &gp;
    let spectrum = product.spectrum();
    let scale = (grid.len() as f64) / (fine.len() as f64);
    let mut coarse = f.spectrum();
    let n = grid.n();
    for (i, c) in coarse.coefficients_mut().iter_mut().enumerate() {
        if !in_dealias_band(grid, i) {
            *c = ZERO;
            continue;
        }
        let idx = grid.unravel(i);
        let mut fine_idx = [0usize; 3];
        for axis in 0..grid.dim() {
            let m = super::mode_index(idx[axis], n);
            fine_idx[axis] = m.rem_euclid(2 * n as i64) as usize;
        }
        *c = spectrum.coefficients()[fine.ravel(&fine_idx)] * scale;
    }
    Ok(coarse.to_field())
}

fn pad(f: &ScalarField, fine: &Grid) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let spectrum = f.spectrum();
    let mut data = vec![ZERO; fine.len()];
    let scale = (fine.len() as f64) / (grid.len() as f64);
    for (i, c) in spectrum.coefficients().iter().enumerate() {
        let idx = grid.unravel(i);
        let mut fine_idx = [0usize; 3];
        let mut nyquist = false;
        for axis in 0..grid.dim() {
            nyquist |= grid.is_nyquist(idx[axis]);
            let m = super::mode_index(idx[axis], n);
            fine_idx[axis] = m.rem_euclid(2 * n as i64) as usize;
        }
        // the unpaired Nyquist mode is dropped so the padded field stays real
        if !nyquist {
            data[fine.ravel(&fine_idx)] = c * scale;
        }
    }
    Spectrum::from_parts(fine.clone(), data).to_field()
}

/// Fraction of the non-mean spectral energy carried by modes with some `|m_j| > n/6`.
pub fn spectral_tail_fraction(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let n = grid.n() as i64;
    let spectrum = f.spectrum();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (i, c) in spectrum.coefficients().iter().enumerate() {
        let m = grid.modes(i);
        if m.iter().all(|&v| v == 0) {
            continue;
        }
        let e = c.norm_sqr();
        total += e;
        if m.iter().any(|v| 6 * v.abs() > n) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}
