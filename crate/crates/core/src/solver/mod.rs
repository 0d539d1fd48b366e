//! Self-similar Euler–Riesz integration around the background `v = x/(1+t)`.
//!
//! With `y = x/(1+t)`, `τ = ln(1+t)`, `n(x,t) = N(y,τ)` and `w(x,t) = W(y,τ)`,
//! the pressureless system reads
//!
//! ```text
//! ∂_τ N = −W·∇N − ½ N ∇·W − (d/2) N
//! ∂_τ W = −W·∇W − W + λ e^{στ} ∇Λ^{−σ}(N²),          λ = −1
//! ```
//!
//! and the pressured one
//!
//! ```text
//! ∂_τ N = −W·∇N − γ̃ N ∇·W − γ̃ d N
//! ∂_τ W = −W·∇W − W − γ̃ N ∇N + λ e^{στ} ∇Λ^{−σ}(N₊^{1/γ̃})
//! ```
//!
//! Products are formed pointwise on band-limited fields and truncated with
//! the 2/3 rule, which makes them exact on the retained modes.

mod initial;
mod params;
mod rhs;
mod rk4;
mod simulate;
mod state;

pub use initial::{band_limited, InitialData, Perturbation};
pub use params::{ModelParams, System};
pub use rhs::{rhs_pressured, rhs_pressureless, EulerRiesz, RightHandSide};
pub use rk4::{cfl_number, step_rk4, step_rk4_with_info, DEFAULT_CFL_LIMIT};
pub use simulate::{record_state, simulate, Exponent, Outcome, SimConfig, SimOutput};
pub use state::{Derivative, State};
