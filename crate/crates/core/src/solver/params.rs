use serde::{Deserialize, Serialize};

use crate::spectral::check_riesz_order;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Pressureless,
    Pressured,
}

/// Model selector and coefficients.
///
/// `lambda = -1` is repulsive, `+1` attractive. `gamma` is required for the
/// pressured system and ignored otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub system: System,
    pub lambda: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ModelParams {
    pub fn pressureless(sigma: f64) -> Self {
        Self { system: System::Pressureless, lambda: -1.0, sigma, gamma: None }
    }

    pub fn pressured(lambda: f64, sigma: f64, gamma: f64) -> Self {
        Self { system: System::Pressured, lambda, sigma, gamma: Some(gamma) }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.lambda != 1.0 && self.lambda != -1.0 {
            return Err(Error::Parameter(format!("lambda = {} must be +1 or -1", self.lambda)));
        }
        check_riesz_order(dim, self.sigma)?;
        match self.system {
            System::Pressureless => {
                if self.lambda != -1.0 {
                    return Err(Error::Parameter(
                        "the pressureless system is only posed in the repulsive case lambda = -1"
                            .into(),
                    ));
                }
            }
            System::Pressured => match self.gamma {
                Some(g) if g > 1.0 && g.is_finite() => {}
                Some(g) => {
                    return Err(Error::Parameter(format!("gamma = {g} must exceed 1")));
                }
                None => return Err(Error::Parameter("pressured system needs gamma".into())),
            },
        }
        Ok(())
    }

    /// Pressure switch `c_P`.
    pub fn c_p(&self) -> u8 {
        match self.system {
            System::Pressureless => 0,
            System::Pressured => 1,
        }
    }

    /// `γ̃ = (γ − 1)/2` for the pressured system.
    pub fn gamma_tilde(&self) -> Option<f64> {
        match self.system {
            System::Pressured => self.gamma.map(|g| (g - 1.0) / 2.0),
            System::Pressureless => None,
        }
    }

    /// `κ = 2√γ/(γ − 1)`.
    pub fn kappa(&self) -> Option<f64> {
        self.gamma_tilde().and_then(|gt| self.gamma.map(|g| g.sqrt() / gt))
    }

    /// Exponent of the interaction source: `2` (pressureless) or `1/γ̃`.
    pub fn source_power(&self) -> f64 {
        self.gamma_tilde().map_or(2.0, |gt| 1.0 / gt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::pressureless(0.5).validate(1).is_ok());
        assert!(ModelParams::pressureless(1.0).validate(1).is_err());
        let mut attractive = ModelParams::pressureless(0.5);
        attractive.lambda = 1.0;
        assert!(attractive.validate(2).is_err());
        assert!(ModelParams::pressured(1.0, 1.2, 1.5).validate(2).is_ok());
        assert!(ModelParams::pressured(0.5, 1.2, 1.5).validate(2).is_err());
        assert!(ModelParams::pressured(1.0, 1.2, 1.0).validate(2).is_err());
        let mut missing = ModelParams::pressured(1.0, 1.2, 1.5);
        missing.gamma = None;
        assert!(missing.validate(2).is_err());
    }

    #[test]
    fn derived_constants() {
        let p = ModelParams::pressured(-1.0, 0.5, 3.0);
        assert_eq!(p.gamma_tilde(), Some(1.0));
        assert_eq!(p.kappa(), Some(3f64.sqrt()));
        assert_eq!(p.source_power(), 1.0);
        assert_eq!(p.c_p(), 1);
        assert_eq!(ModelParams::pressureless(0.5).source_power(), 2.0);
    }
}
