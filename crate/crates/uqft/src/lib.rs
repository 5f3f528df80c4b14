//! Closed-form scalar products of Gaussian minimum-packet states that follow
//! classical n-body trajectories, the transition likelihoods built from them,
//! and brute-force quadrature oracles for every closed form.
//!
//! Lengths are carried in the units of the chosen [`units::UnitSystem`]; time
//! is measured as a length (`λ = c·t`) and velocities are fractions of `c`.
//! In natural units the Compton length `λ_c` equals one.
//!
//! Module map:
//!
//! * [`units`], [`trajectory`], [`kepler`]: constants, classical n-body
//!   trajectories, conserved quantities and analytic two-body orbits.
//! * [`packets`]: minimum-packet functions, moments, classical-particle bounds
//!   and the short-time translation check.
//! * [`scalar_products`]: forward and connected contributions, norms.
//! * [`likelihood`]: transition amplitudes and the coplanar propagation bound.
//! * [`coupling`]: the cubic optimization of `g` and the `L0(r)` selection rule.
//! * [`l0_model`]: the dynamic momentum-spread model and its stationarity check.
//! * [`scattering`]: plane-wave limits and the elastic cross section.
//! * [`oracles`]: independent quadrature evaluations of the defining integrals.
//! * [`checks`]: the acceptance checks, shared by tests and the command line.

pub mod checks;
pub mod coupling;
pub mod error;
pub mod integrator;
pub mod kepler;
pub mod l0_model;
pub mod likelihood;
pub mod oracles;
pub mod packets;
pub mod quadrature;
pub mod roots;
pub mod scalar_products;
pub mod scattering;
pub mod trajectory;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Three-vector used for positions, velocities and momenta.
pub type Vec3 = nalgebra::Vector3<f64>;
