//! Unit systems and physical constants.
//!
//! Time is carried as a length (`λ = c·t`), so velocities are dimensionless
//! fractions of `c`. The Compton length `λ_c = ħ/(m c)` is the only length
//! scale that the quantum formulas need from the unit system.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J·s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Newtonian gravitational constant (m³ kg⁻¹ s⁻²), CODATA 2018.
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
/// Unified atomic mass unit (kg), CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// A consistent set of units for one particle species of mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Particle mass (kg).
    pub mass_kg: f64,
    /// Compton length `ħ/(m c)` (m in SI mode, one in natural mode).
    pub compton_length: f64,
    /// Speed of light (m/s in SI mode, one in natural mode).
    pub speed_of_light: f64,
    /// Reduced Planck constant (J·s in SI mode, one in natural mode).
    pub hbar: f64,
}

impl UnitSystem {
    /// Builds a unit system from mass, speed of light and `ħ`, deriving the
    /// Compton length from them.
    pub fn new(mass_kg: f64, speed_of_light: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass_kg),
            ("speed of light", speed_of_light),
            ("hbar", hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self {
            mass_kg,
            compton_length: hbar / (mass_kg * speed_of_light),
            speed_of_light,
            hbar,
        })
    }

    /// Natural units: `m = c = ħ = 1`, so that `λ_c = 1`.
    pub fn natural() -> Self {
        Self {
            mass_kg: 1.0,
            compton_length: 1.0,
            speed_of_light: 1.0,
            hbar: 1.0,
        }
    }

    /// SI units for a particle of the given mass.
    pub fn si(mass_kg: f64) -> Result<Self> {
        Self::new(mass_kg, SPEED_OF_LIGHT, HBAR)
    }

    /// True when the stored Compton length equals `ħ/(m c)` to rounding and
    /// all fields are positive.
    pub fn is_consistent(&self) -> bool {
        let fields = [
            self.mass_kg,
            self.compton_length,
            self.speed_of_light,
            self.hbar,
        ];
        if !fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            return false;
        }
        let expected = self.hbar / (self.mass_kg * self.speed_of_light);
        ((self.compton_length - expected) / expected).abs() <= 4.0 * f64::EPSILON
    }

    /// `α = 1/(2λ_c²)`, the coefficient of the wave-like likelihood exponent.
    pub fn alpha(&self) -> f64 {
        0.5 / (self.compton_length * self.compton_length)
    }
}

/// Gravitational length `g = G m / c²` (m) for a particle of mass `mass_kg`.
pub fn gravity_length(mass_kg: f64) -> f64 {
    GRAVITATIONAL_CONSTANT * mass_kg / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_units_have_unit_compton_length() {
        let u = UnitSystem::natural();
        assert_eq!(u.compton_length, 1.0);
        assert!(u.is_consistent());
        assert_eq!(u.alpha(), 0.5);
    }

    #[test]
    fn si_compton_length_matches_definition() {
        let u = UnitSystem::si(1e-8).unwrap();
        assert_eq!(u.compton_length, HBAR / (1e-8 * SPEED_OF_LIGHT));
        assert!((u.compton_length - 3.5e-35).abs() / 3.5e-35 < 0.01);
        assert!(u.is_consistent());
    }

    #[test]
    fn rejects_non_positive_fields() {
        assert!(UnitSystem::new(0.0, 1.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn tampered_compton_length_is_inconsistent() {
        let mut u = UnitSystem::si(ATOMIC_MASS_UNIT).unwrap();
        u.compton_length *= 1.0 + 1e-9;
        assert!(!u.is_consistent());
    }

    #[test]
    fn gravity_length_for_one_atomic_mass_unit() {
        let g = gravity_length(ATOMIC_MASS_UNIT);
        assert!((g - 1.2331e-54).abs() / 1.2331e-54 < 1e-3);
    }
}
