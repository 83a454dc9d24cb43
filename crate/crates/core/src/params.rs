use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material and coupling constants of the plate/membrane system.
///
/// `alpha` couples bending and temperature, `beta` is the heat conductivity,
/// `beta1`/`beta2` are the plate and membrane stiffnesses, `rho0..rho2` the
/// thermal capacity and the two mass densities, `sigma` a zeroth-order heat
/// loss, `m` the Kelvin-Voigt damping of the membrane, `kappa` the Robin
/// cooling coefficient and `mu` the Poisson ratio of the plate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma: f64,
    pub m: f64,
    pub kappa: f64,
    pub mu: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            rho0: 1.0,
            rho1: 1.0,
            rho2: 1.0,
            sigma: 1.0,
            m: 0.0,
            kappa: 1.0,
            mu: 0.3,
        }
    }
}

impl PhysicalParams {
    /// Unit constants with the given membrane damping.
    pub fn unit(m: f64) -> Self {
        Self {
            m,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("rho0", self.rho0),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("kappa", self.kappa),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::param(
                    field,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        for (field, value) in [("sigma", self.sigma), ("m", self.m)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::param(
                    field,
                    format!("must be nonnegative, got {value}"),
                ));
            }
        }
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(Error::param(
                "mu",
                format!("Poisson ratio must lie in (0, 1/2), got {}", self.mu),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PhysicalParams::default().validate().unwrap();
        PhysicalParams::unit(1.0).validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range_poisson_ratio() {
        let p = PhysicalParams {
            mu: 0.7,
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("(0, 1/2)"), "{err}");
    }

    #[test]
    fn rejects_nonpositive_and_negative_constants() {
        let p = PhysicalParams {
            beta2: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::Parameter { field: "beta2", .. })
        ));
        let p = PhysicalParams {
            m: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            p.validate(),
            Err(Error::Parameter { field: "m", .. })
        ));
        // sigma and m may vanish
        let p = PhysicalParams {
            sigma: 0.0,
            m: 0.0,
            ..Default::default()
        };
        p.validate().unwrap();
    }
}
