use crate::{Error, Result};

use super::{Derivative, RightHandSide, State};

/// Default bound on `dτ · speed / Δy`.
pub const DEFAULT_CFL_LIMIT: f64 = 0.5;

pub fn cfl_number(state: &State, dtau: f64, rhs: &impl RightHandSide) -> f64 {
    dtau * rhs.signal_speed(state) / state.grid().spacing()
}

/// One classical RK4 step. The CFL number is checked on the input state.
pub fn step_rk4(state: &State, dtau: f64, rhs: &impl RightHandSide, cfl_limit: f64) -> Result<State> {
    Ok(step_rk4_with_info(state, dtau, rhs, cfl_limit)?.0)
}

/// As [`step_rk4`], also returning the first-stage derivative.
pub fn step_rk4_with_info(
    state: &State,
    dtau: f64,
    rhs: &impl RightHandSide,
    cfl_limit: f64,
) -> Result<(State, Derivative)> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(Error::Parameter(format!("time step {dtau} must be positive")));
    }
    let cfl = cfl_number(state, dtau, rhs);
    if !(cfl <= cfl_limit) {
        return Err(Error::Cfl { cfl, limit: cfl_limit, tau: state.tau });
    }
    let k1 = rhs.eval(state)?;
    let k2 = rhs.eval(&state.advanced(0.5 * dtau, &k1))?;
    let k3 = rhs.eval(&state.advanced(0.5 * dtau, &k2))?;
    let k4 = rhs.eval(&state.advanced(dtau, &k3))?;

    let mut next = state.clone();
    let h6 = dtau / 6.0;
    for (k, weight) in [(&k1, h6), (&k2, 2.0 * h6), (&k3, 2.0 * h6), (&k4, h6)] {
        next.n.axpy(weight, &k.dn);
        next.w.axpy(weight, &k.dw);
    }
    next.tau = state.tau + dtau;
    if !next.is_finite() {
        return Err(Error::NonFinite(format!("state after step to tau = {}", next.tau)));
    }
    Ok((next, k1))
}
