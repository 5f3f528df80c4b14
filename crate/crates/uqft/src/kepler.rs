//! Analytic two-body orbits under `Φ = −g/r`.
//!
//! The relative coordinate `x = ξ_1 − ξ_2` obeys `ẍ = −2g x/r³`, so its
//! orbit is a conic `r(θ) = (L²/2g)/(1 − ε_r cos θ)` with periapsis at
//! `θ = π`, where `L = |x × ẋ|` and `ε_r = √(1 + e_C L²/g²)`.

use std::f64::consts::PI;

use crate::quadrature::{integrate_real, Options};
use crate::trajectory::{ClassicalQuantities, PairPotential, Snapshot};
use crate::{Error, Result, Vec3};

/// A two-body Kepler orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerOrbit {
    /// Relative angular momentum `L` (length).
    pub l: f64,
    /// Total energy `e_C`.
    pub e_c: f64,
    /// Potential strength `g` (length).
    pub g: f64,
    /// Eccentricity `ε_r`.
    pub eps_r: f64,
    /// Admissible open interval of the polar angle.
    pub theta_range: (f64, f64),
}

impl KeplerOrbit {
    /// Orbit with angular momentum `l`, energy `e_c` and strength `g`.
    pub fn new(l: f64, e_c: f64, g: f64) -> Result<Self> {
        if !(l > 0.0 && g > 0.0 && l.is_finite() && g.is_finite() && e_c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Kepler orbit needs L > 0, g > 0 (L = {l}, g = {g})"
            )));
        }
        let floor = -g * g / (l * l);
        if e_c < floor * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "e_C = {e_c} below the circular-orbit minimum {floor}"
            )));
        }
        let eps_r = (1.0 + e_c * l * l / (g * g)).max(0.0).sqrt();
        let theta_range = if eps_r > 1.0 {
            let beta = (1.0 / eps_r).acos();
            (beta, 2.0 * PI - beta)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        Ok(Self {
            l,
            e_c,
            g,
            eps_r,
            theta_range,
        })
    }

    /// Orbit with the given eccentricity and semi-latus rectum `p = L²/2g`.
    pub fn from_eccentricity(eps_r: f64, p: f64, g: f64) -> Result<Self> {
        if !(eps_r >= 0.0 && p > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need ε_r ≥ 0 and p > 0 (ε_r = {eps_r}, p = {p})"
            )));
        }
        let l = (2.0 * g * p).sqrt();
        let e_c = (eps_r * eps_r - 1.0) * g * g / (l * l);
        let mut orbit = Self::new(l, e_c, g)?;
        orbit.eps_r = eps_r;
        Ok(orbit)
    }

    /// Orbit of a two-body snapshot under `Φ = −g/r`.
    pub fn from_snapshot(s: &Snapshot, g: f64) -> Result<Self> {
        if s.n() != 2 {
            return Err(Error::InvalidInput(format!(
                "Kepler orbit needs two bodies, got {}",
                s.n()
            )));
        }
        let q = ClassicalQuantities::of(s, &PairPotential::InverseR(g))?;
        Self::new(q.l.unwrap_or(0.0), q.e_c, g)
    }

    /// Semi-latus rectum `L²/2g`.
    pub fn semi_latus(&self) -> f64 {
        self.l * self.l / (2.0 * self.g)
    }

    /// True for the circular orbit `e_C = −g²/L²`.
    pub fn is_circular(&self) -> bool {
        self.eps_r < 1e-12
    }

    /// `β = arccos(1/ε_r)` for unbound orbits.
    pub fn beta(&self) -> Option<f64> {
        (self.eps_r > 1.0).then(|| (1.0 / self.eps_r).acos())
    }

    /// Radial period in `λ` for bound orbits (`2π` in `θ`).
    pub fn period(&self) -> Option<f64> {
        if self.eps_r >= 1.0 {
            return None;
        }
        let a = self.semi_latus() / (1.0 - self.eps_r * self.eps_r);
        Some(2.0 * PI * (a * a * a / (2.0 * self.g)).sqrt())
    }

    fn check_angle(&self, theta: f64) -> Result<f64> {
        let d = 1.0 - self.eps_r * theta.cos();
        let (lo, hi) = self.theta_range;
        if !(d > 0.0) || (self.eps_r >= 1.0 && !(theta > lo && theta < hi)) {
            return Err(Error::OutOfRange(format!(
                "θ = {theta} outside the admissible range ({lo}, {hi})"
            )));
        }
        Ok(d)
    }

    /// Two-body snapshot at polar angle `θ` in the xy-plane.
    pub fn snapshot(&self, theta: f64) -> Result<Snapshot> {
        let r = kepler_radius(self, theta)?;
        let p = self.semi_latus();
        let theta_dot = self.l / (r * r);
        let dr = -self.eps_r * theta.sin() * r * r / p;
        let (s, c) = theta.sin_cos();
        let x = Vec3::new(c, s, 0.0) * r;
        let xd = Vec3::new(c, s, 0.0) * (dr * theta_dot) + Vec3::new(-s, c, 0.0) * (r * theta_dot);
        Snapshot::new(vec![x * 0.5, -x * 0.5], vec![xd * 0.5, -xd * 0.5])
    }
}

/// Separation `r(θ) = (L²/2g)/(1 − ε_r cos θ)`.
pub fn kepler_radius(orbit: &KeplerOrbit, theta: f64) -> Result<f64> {
    let d = orbit.check_angle(theta)?;
    Ok(orbit.semi_latus() / d)
}

/// Elapsed `λ` between polar angles `θ0` and `θ`: `∫ r(φ)²/L dφ`.
pub fn kepler_time(orbit: &KeplerOrbit, theta0: f64, theta: f64) -> Result<f64> {
    kepler_radius(orbit, theta0)?;
    kepler_radius(orbit, theta)?;
    if theta == theta0 {
        return Ok(0.0);
    }
    let (v, _) = integrate_real(
        |phi| {
            let r = orbit.semi_latus() / (1.0 - orbit.eps_r * phi.cos());
            r * r / orbit.l
        },
        theta0,
        theta,
        Options::rel(1e-13).with_max_subdivisions(4000),
    )?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circular_orbit_has_constant_radius() {
        let g = 1e-3;
        let l = (2.0 * g * 1.0f64).sqrt();
        let orbit = KeplerOrbit::new(l, -g * g / (l * l), g).unwrap();
        assert!(orbit.is_circular());
        for th in [0.0, 1.0, 3.0, 5.5] {
            assert_relative_eq!(
                kepler_radius(&orbit, th).unwrap(),
                1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn periapsis_radius() {
        let orbit = KeplerOrbit::from_eccentricity(0.5, 2.0, 1e-3).unwrap();
        assert_relative_eq!(
            kepler_radius(&orbit, PI).unwrap(),
            2.0 / 1.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn circular_time_matches_closed_form() {
        let (r, g) = (1.0f64, 1e-3f64);
        let l = (2.0 * g * r).sqrt();
        let orbit = KeplerOrbit::new(l, -g * g / (l * l), g).unwrap();
        let t = kepler_time(&orbit, 0.0, 2.0 * PI).unwrap();
        assert_relative_eq!(t, 2.0 * PI / (2e-3f64).sqrt(), max_relative = 1e-12);
        assert_eq!(kepler_time(&orbit, 0.7, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_radius_diverges_toward_beta() {
        let orbit = KeplerOrbit::from_eccentricity(1.5, 1.0, 1e-3).unwrap();
        let beta = orbit.beta().unwrap();
        let mut prev = 0.0;
        for k in 1..=8 {
            let th = beta + 10f64.powi(-k);
            let r = kepler_radius(&orbit, th).unwrap();
            assert!(r > prev);
            prev = r;
        }
        assert!(matches!(
            kepler_radius(&orbit, beta),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            kepler_radius(&orbit, 0.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn snapshot_reproduces_orbit_constants() {
        let g = 1e-3;
        let orbit = KeplerOrbit::from_eccentricity(0.3, 1.0, g).unwrap();
        let s = orbit.snapshot(2.0).unwrap();
        let back = KeplerOrbit::from_snapshot(&s, g).unwrap();
        assert_relative_eq!(back.l, orbit.l, max_relative = 1e-12);
        assert_relative_eq!(back.e_c, orbit.e_c, max_relative = 1e-12);
        assert_relative_eq!(back.eps_r, 0.3, max_relative = 1e-10);
    }

    #[test]
    fn rejects_energy_below_circular_minimum() {
        assert!(KeplerOrbit::new(1.0, -2.0, 1.0).is_err());
    }
}
