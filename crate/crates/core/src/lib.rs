//! Pseudo-spectral simulator and verification workbench for the
//! multi-dimensional Euler–Riesz equations.
//!
//! The crate is organised by subsystem:
//!
//! * [`spectral`]: periodic grids, Fourier multipliers (`Λ^s`, `∇Λ^{-σ}`),
//!   dealiasing and Sobolev/Lebesgue norms.
//! * [`flow`]: the Burgers background velocity obtained by characteristics
//!   and its `K`-matrix decomposition.
//! * [`solver`]: self-similar pressureless / pressured Euler–Riesz
//!   integration with fixed-step RK4.
//! * [`diagnostics`]: weighted energy functionals monitored along runs.
//! * [`decay`]: decay-exponent tables and least-squares rate fitting.
//! * [`gronwall`]: certification of the Grönwall-type envelope.
//! * [`inequality`]: commutator and interpolation ratio experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod gronwall;
pub mod inequality;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
