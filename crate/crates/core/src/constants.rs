//! Physical constants and ambient air properties (SI throughout).

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};

/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// Elementary charge, C (exact in SI 2019).
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// 1 m³ expressed in µm³.
pub const CUBIC_METRE_IN_CUBIC_MICRON: f64 = 1e18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    /// F/m
    pub vacuum_permittivity: f64,
    /// Pa·s
    pub air_dynamic_viscosity: f64,
    /// kg/m³
    pub air_density: f64,
    /// m/s², magnitude; acts along -z when enabled.
    pub gravity: f64,
    pub gravity_enabled: bool,
    /// Mean free path of air, m. Only used by the Cunningham slip correction.
    pub air_mean_free_path: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            air_dynamic_viscosity: 1.81e-5,
            air_density: 1.204,
            gravity: 9.81,
            gravity_enabled: true,
            air_mean_free_path: 6.8e-8,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("constants.vacuum_permittivity", self.vacuum_permittivity)?;
        ensure_positive("constants.air_dynamic_viscosity", self.air_dynamic_viscosity)?;
        ensure_positive("constants.air_density", self.air_density)?;
        ensure_positive("constants.gravity", self.gravity)?;
        ensure_positive("constants.air_mean_free_path", self.air_mean_free_path)?;
        Ok(())
    }

    /// Gravitational acceleration vector, zero when gravity is toggled off.
    pub fn gravity_vector(&self) -> Vector3<f64> {
        if self.gravity_enabled {
            Vector3::new(0.0, 0.0, -self.gravity)
        } else {
            Vector3::zeros()
        }
    }

    /// Coulomb constant 1/(4πε₀).
    pub fn coulomb_constant(&self) -> f64 {
        1.0 / (4.0 * std::f64::consts::PI * self.vacuum_permittivity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PhysicalConstants::default().validate().unwrap();
    }

    #[test]
    fn gravity_toggle() {
        let mut c = PhysicalConstants::default();
        assert_eq!(c.gravity_vector().z, -9.81);
        c.gravity_enabled = false;
        assert_eq!(c.gravity_vector(), Vector3::zeros());
    }

    #[test]
    fn rejects_non_positive() {
        let c = PhysicalConstants {
            air_density: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
