//! Periodic lattices, Fourier multipliers and norms.
//!
//! Every operator here is a pure function of its input fields. Transforms use
//! the unnormalised forward DFT; inverse transforms divide by `n^d`.

mod field;
mod grid;
mod ops;

pub use field::{ScalarField, Spectrum, VectorField};
pub use grid::{mode_index, Grid, DEFAULT_POINT_BUDGET};
pub use ops::{
    apply_fractional_laplacian, check_riesz_order, dealias, dealias_vector, dealiased_product, divergence, gradient,
    homogeneous_norm, in_dealias_band, lp_norm, partial, riesz_force, seminorm_from_spectrum,
    sobolev_seminorm, spectral_tail_fraction, vector_homogeneous_norm, vector_lp_norm,
};
