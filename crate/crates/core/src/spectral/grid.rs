use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Default cap on the number of lattice points (`n^d`).
pub const DEFAULT_POINT_BUDGET: usize = 1 << 24;

/// Uniform periodic lattice on `[0, L)^d`.
///
/// Samples are stored row-major with axis 0 varying slowest. The FFT plans
/// are immutable and shared between clones; scratch buffers are allocated
/// per call.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    wavenumbers: Arc<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::with_budget(dim, n, length, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(dim: usize, n: usize, length: f64, budget: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("points per axis {n} must be a power of two >= 8")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!("box length {length} must be positive")));
        }
        let total = n
            .checked_pow(dim as u32)
            .filter(|&t| t <= budget)
            .ok_or_else(|| Error::Grid(format!("{n}^{dim} points exceed the budget of {budget}")))?;
        debug_assert!(total > 0);

        let wavenumbers = (0..n)
            .map(|i| 2.0 * PI * mode_index(i, n) as f64 / length)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            length,
            wavenumbers: Arc::new(wavenumbers),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Quadrature weight `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Per-axis wavenumbers `2π m / L`, in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Same grid shape with a different box length.
    pub fn rescaled(&self, length: f64) -> Result<Self> {
        Self::new(self.dim, self.n, length)
    }

    /// Splits a flat index into per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of lattice point `flat`.
    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }

    /// Signed integer modes `m` of lattice point `flat` in FFT order.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let idx = self.unravel(flat);
        let mut m = [0i64; 3];
        for axis in 0..self.dim {
            m[axis] = mode_index(idx[axis], self.n);
        }
        m
    }

    /// Wavevector of lattice point `flat`.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut k = [0.0; 3];
        for axis in 0..self.dim {
            k[axis] = self.wavenumbers[idx[axis]];
        }
        k
    }

    /// True when the axis index sits on the unpaired Nyquist mode.
    pub fn is_nyquist(&self, axis_index: usize) -> bool {
        axis_index == self.n / 2
    }

    /// Index of the reflected point `y ↦ -y` (mod L).
    pub fn reflect(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let mut r = [0usize; 3];
        for axis in 0..self.dim {
            r[axis] = (self.n - idx[axis]) % self.n;
        }
        self.ravel(&r)
    }

    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        let plan = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        let total = data.len();
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / total as f64;
            data.iter_mut().for_each(|c| *c *= scale);
        }
    }
}

/// Signed mode number for FFT position `i`, in `[-n/2, n/2)`.
pub fn mode_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
