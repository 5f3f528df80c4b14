//! Born-rule transition amplitudes between time-translated states, their
//! two-body circular-orbit specialization, and the coplanar propagation
//! bound.

use crate::scalar_products::{scalar_product, ScalarProductParts};
use crate::trajectory::TrajectorySet;
use crate::units::UnitSystem;
use crate::{Error, Result};

/// Which contributions dominate the norms entering an amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Connected contribution dominates both norms.
    ParticleLike,
    /// Forward contribution dominates the norm at `λ`, connected at `τ`.
    Transition,
    /// Forward contribution dominates both norms.
    WaveLike,
    /// No approximation: full `F + c C` everywhere.
    Full,
    /// Classify each norm by the dominance factor.
    Auto,
}

/// Default factor by which one contribution must exceed the other to
/// dominate a norm.
pub const DEFAULT_DOMINANCE: f64 = 100.0;

/// Ratio `|F| / (c|C|)` below which a forward numerator counts as
/// negligible.
pub const NEGLIGIBLE_FORWARD: f64 = 1e-6;

/// Raw values entering an amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeComponents {
    /// `|F(λ,τ)|`.
    pub f_num: f64,
    /// `c_{2n} |C(λ,τ)|`.
    pub c_num: f64,
    /// Norm term used at `λ`.
    pub norm_lambda: f64,
    /// Norm term used at `τ`.
    pub norm_tau: f64,
}

/// A transition amplitude and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeResult {
    /// Amplitude `I(λ,τ)` in `[0, 1]`.
    pub amplitude: f64,
    /// Regime actually used (never `Auto`).
    pub regime: Regime,
    /// Numerator and norms.
    pub components: AmplitudeComponents,
    /// Ambiguities and neglected terms.
    pub warnings: Vec<String>,
}

/// Dominant part of a diagonal scalar product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dominant {
    Forward,
    Connected,
    Neither,
}

fn dominant(parts: &ScalarProductParts, factor: f64) -> Dominant {
    let f = parts.forward.re.abs();
    let c = (parts.c2n * parts.connected.re).abs();
    if f >= factor * c {
        Dominant::Forward
    } else if c >= factor * f {
        Dominant::Connected
    } else {
        Dominant::Neither
    }
}

/// Amplitude from precomputed off-diagonal and diagonal parts.
pub fn amplitude_from_parts(
    off: &ScalarProductParts,
    diag_lambda: &ScalarProductParts,
    diag_tau: &ScalarProductParts,
    regime: Regime,
    dominance: f64,
) -> Result<AmplitudeResult> {
    let mut warnings = Vec::new();
    let c = off.c2n;
    let f_num = off.forward.norm();
    let c_num = (off.connected * c).norm();
    let (use_lambda, use_tau, regime) = match regime {
        Regime::ParticleLike => (Dominant::Connected, Dominant::Connected, regime),
        Regime::Transition => (Dominant::Forward, Dominant::Connected, regime),
        Regime::WaveLike => (Dominant::Forward, Dominant::Forward, regime),
        Regime::Full => (Dominant::Neither, Dominant::Neither, regime),
        Regime::Auto => {
            let (dl, dt) = (
                dominant(diag_lambda, dominance),
                dominant(diag_tau, dominance),
            );
            if dl == Dominant::Neither || dt == Dominant::Neither {
                warnings.push(format!(
                    "ambiguous regime: F/cC = {:.3e} at λ and {:.3e} at τ; using full expressions",
                    diag_lambda.forward.re / (c * diag_lambda.connected.re),
                    diag_tau.forward.re / (c * diag_tau.connected.re)
                ));
                (Dominant::Neither, Dominant::Neither, Regime::Full)
            } else {
                let r = match (dl, dt) {
                    (Dominant::Connected, Dominant::Connected) => Regime::ParticleLike,
                    (Dominant::Forward, Dominant::Forward) => Regime::WaveLike,
                    _ => Regime::Transition,
                };
                (dl, dt, r)
            }
        }
    };
    let norm_term = |p: &ScalarProductParts, d: Dominant| match d {
        Dominant::Forward => p.forward.re,
        Dominant::Connected => c * p.connected.re,
        Dominant::Neither => p.forward.re + c * p.connected.re,
    };
    let norm_lambda = norm_term(diag_lambda, use_lambda);
    let norm_tau = norm_term(diag_tau, use_tau);
    if !(norm_lambda > 0.0 && norm_tau > 0.0) {
        return Err(Error::Degenerate(format!(
            "vanishing norm terms {norm_lambda} and {norm_tau}"
        )));
    }
    let numerator = if regime == Regime::Full {
        off.total().norm()
    } else {
        if f_num > NEGLIGIBLE_FORWARD * c_num {
            warnings.push(format!(
                "forward numerator |F| = {f_num:.3e} is not negligible against c|C| = {c_num:.3e}"
            ));
        }
        c_num
    };
    let amplitude = numerator / (norm_lambda.sqrt() * norm_tau.sqrt());
    if amplitude > 1.0 + 1e-9 {
        return Err(Error::Domain(format!(
            "amplitude {amplitude} exceeds one; the inputs are outside the {regime:?} regime"
        )));
    }
    Ok(AmplitudeResult {
        amplitude: amplitude.min(1.0),
        regime,
        components: AmplitudeComponents {
            f_num,
            c_num,
            norm_lambda,
            norm_tau,
        },
        warnings,
    })
}

/// Transition amplitude `I(λ,τ)` between the states on `traj` at `λ` and `τ`.
#[allow(clippy::too_many_arguments)]
pub fn amplitude(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    c2n: f64,
    regime: Regime,
    units: &UnitSystem,
) -> Result<AmplitudeResult> {
    let off = scalar_product(traj, lambda, tau, l0_lambda, l0_tau, c2n, units)?;
    let dl = scalar_product(traj, lambda, lambda, l0_lambda, l0_lambda, c2n, units)?;
    let dt = scalar_product(traj, tau, tau, l0_tau, l0_tau, c2n, units)?;
    let mut res = amplitude_from_parts(&off, &dl, &dt, regime, DEFAULT_DOMINANCE)?;
    for w in off.warnings {
        res.warnings.push(w);
    }
    Ok(res)
}

/// Constants of the two-body circular orbit with equal spreads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularOrbitCase {
    /// Separation `r`.
    pub r: f64,
    /// Potential strength `g`.
    pub g: f64,
    /// Spread `L0`.
    pub l0: f64,
    /// Four-point strength `c4`.
    pub c4: f64,
    /// `a0 = r²/8L0²`.
    pub a0: f64,
    /// `a1 = L0² g/(λ_c² r)`.
    pub a1: f64,
    /// `k_R = π c4 λ_c/(32√2 L0)`.
    pub k_r: f64,
    /// `c_R = k_R/√a1`.
    pub c_r: f64,
}

impl CircularOrbitCase {
    /// Constants from the physical parameters.
    pub fn new(r: f64, g: f64, l0: f64, c4: f64, units: &UnitSystem) -> Result<Self> {
        if !(r > 0.0 && g > 0.0 && l0 > 0.0 && c4 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "need r, g, L0 > 0 and c4 ≥ 0, got {r}, {g}, {l0}, {c4}"
            )));
        }
        let lc = units.compton_length;
        let a0 = r * r / (8.0 * l0 * l0);
        let a1 = l0 * l0 * g / (lc * lc * r);
        let k_r = std::f64::consts::PI * c4 * lc / (32.0 * 2f64.sqrt() * l0);
        Ok(Self {
            r,
            g,
            l0,
            c4,
            a0,
            a1,
            k_r,
            c_r: k_r / a1.sqrt(),
        })
    }

    /// A case given directly by its dimensionless constants.
    pub fn from_constants(a0: f64, a1: f64, c_r: f64) -> Self {
        Self {
            r: f64::NAN,
            g: f64::NAN,
            l0: f64::NAN,
            c4: f64::NAN,
            a0,
            a1,
            k_r: c_r * a1.sqrt(),
            c_r,
        }
    }

    /// Orbit angle `θ = λ √(2g/r³)` reached after `λ`.
    pub fn angle(&self, lambda: f64) -> f64 {
        lambda * (2.0 * self.g / self.r.powi(3)).sqrt()
    }
}

/// Circular-orbit transition likelihood `I(θ)`, evaluated with the common
/// factor `e^{a0}` divided out of numerator and denominator.
pub fn circular_orbit_amplitude(case: &CircularOrbitCase, theta: f64) -> f64 {
    let (a0, a1, cr) = (case.a0, case.a1, case.c_r);
    let (c, s) = (theta.cos(), theta.sin());
    let h = theta * theta / 2.0;
    let num = (-a0 * (1.0 + h - c - theta * s) - a1 * (1.0 - c)).exp()
        + (-a0 * (1.0 + h + c + theta * s) - a1 * (1.0 + c)).exp()
        + cr * (-a0 * (2.0 + h)).exp();
    num / (1.0 + (-2.0 * a0 - 2.0 * a1).exp() + cr * (-2.0 * a0).exp())
}

/// Coefficient `κ` of the small-angle form `I ≈ 1 − κ θ²`.
pub fn circular_small_angle_coefficient(case: &CircularOrbitCase) -> f64 {
    let (a0, a1, cr) = (case.a0, case.a1, case.c_r);
    let e1 = (-2.0 * a0 - 2.0 * a1).exp();
    let e2 = (-2.0 * a0).exp();
    (a1 / 2.0 + (a0 - a1 / 2.0) * e1 + cr * a0 / 2.0 * e2) / (1.0 + e1 + cr * e2)
}

/// Both sides of the coplanar propagation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoplanarCheck {
    /// Whether `lhs ≤ rhs` (with a relative slack of `1e-12`).
    pub holds: bool,
    /// `|I(0, λ1+λ2)|`.
    pub lhs: f64,
    /// `|I(λ1, λ1+λ2)| · |I(0, λ1)|`.
    pub rhs: f64,
}

/// Coplanar bound for an amplitude `amp(a, b)` between the states at `a`
/// and `b`.
pub fn coplanar_bound_segments<F>(mut amp: F, lambda1: f64, lambda2: f64) -> Result<CoplanarCheck>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if lambda1 < 0.0 || lambda2 < 0.0 {
        return Err(Error::InvalidInput("λ1 and λ2 must be non-negative".into()));
    }
    let lhs = amp(0.0, lambda1 + lambda2)?.abs();
    let rhs = amp(lambda1, lambda1 + lambda2)?.abs() * amp(0.0, lambda1)?.abs();
    Ok(CoplanarCheck {
        holds: lhs <= rhs * (1.0 + 1e-12),
        lhs,
        rhs,
    })
}

/// Coplanar bound for a time-translation covariant amplitude `amp(λ)`
/// between the states at `0` and `λ`, so that the amplitude over
/// `(λ1, λ1+λ2)` equals `amp(λ2)`.
pub fn coplanar_bound_check<F>(mut amp: F, lambda1: f64, lambda2: f64) -> Result<CoplanarCheck>
where
    F: FnMut(f64) -> f64,
{
    coplanar_bound_segments(|a, b| Ok(amp(b - a)), lambda1, lambda2)
}

/// Angle geometry of three unit rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoplanarAngles {
    /// Angle of the intermediate ray out of the plane of the outer two
    /// (only when `θ1 = θ2`).
    pub beta: Option<f64>,
    /// Whether `cos θ ≤ cos θ1 cos θ2`.
    pub bound_ok: bool,
}

/// `β` from `cos²β = 2cos²θ1/(1 + cos θ)` for `θ1 = θ2`, and the bound.
pub fn coplanar_angles(cos_theta1: f64, cos_theta2: f64, cos_theta: f64) -> Result<CoplanarAngles> {
    for c in [cos_theta1, cos_theta2, cos_theta] {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInput(format!(
                "cosines must lie in [0, 1], got {c}"
            )));
        }
    }
    let bound_ok = cos_theta1 * cos_theta2 >= cos_theta * (1.0 - 1e-15);
    let beta = if (cos_theta1 - cos_theta2).abs() <= 1e-14 {
        let cb2 = 2.0 * cos_theta1 * cos_theta1 / (1.0 + cos_theta);
        if cb2 > 1.0 + 1e-12 {
            return Err(Error::Geometry(format!("cos²β = {cb2} exceeds one")));
        }
        Some(cb2.min(1.0).sqrt().acos())
    } else {
        None
    };
    Ok(CoplanarAngles { beta, bound_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use approx::assert_relative_eq;

    #[test]
    fn circular_amplitude_is_one_at_zero() {
        for (a0, a1, cr) in [(5.0, 1.0, 0.0), (30.0, 29.0, 0.9), (0.2, 3.0, 5.0)] {
            let case = CircularOrbitCase::from_constants(a0, a1, cr);
            assert_eq!(circular_orbit_amplitude(&case, 0.0), 1.0);
        }
    }

    #[test]
    fn small_angle_coefficient_by_richardson() {
        for (a0, a1, cr) in [(0.3, 0.2, 0.5), (2.0, 0.7, 0.1), (8.0, 5.0, 0.9)] {
            let case = CircularOrbitCase::from_constants(a0, a1, cr);
            let d2 = |h: f64| {
                (circular_orbit_amplitude(&case, h) - 2.0 + circular_orbit_amplitude(&case, -h))
                    / (h * h)
            };
            let h = 2e-3;
            let rich = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
            assert_relative_eq!(
                -rich / 2.0,
                circular_small_angle_coefficient(&case),
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn circular_amplitude_vanishes_at_four_radians() {
        let case = CircularOrbitCase::from_constants(3.0, 2.0, 0.5);
        assert!(circular_orbit_amplitude(&case, 4.0) < 1e-3);
    }

    #[test]
    fn constants_from_physics() {
        let u = UnitSystem::natural();
        let case = CircularOrbitCase::new(1e4, 2e-2, 100.0, 3.0, &u).unwrap();
        assert_relative_eq!(case.a0, 1e8 / 8e4, max_relative = 1e-15);
        assert_relative_eq!(case.a1, 1e4 * 2e-2 / 1e4, max_relative = 1e-15);
        assert_relative_eq!(case.c_r, case.k_r / case.a1.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(
            case.angle(1.0),
            (4e-2 / 1e12f64).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn gaussian_family_satisfies_coplanar_bound() {
        for a in [0.1, 1.0, 7.0] {
            for (l1, l2) in [(0.1, 0.3), (1.0, 2.0), (0.5, 0.0)] {
                let chk = coplanar_bound_check(|l| (-a * l * l).exp(), l1, l2).unwrap();
                assert!(chk.holds);
                if l2 == 0.0 {
                    assert_eq!(chk.lhs, chk.rhs);
                }
            }
        }
    }

    #[test]
    fn coplanar_angles_match_vector_geometry() {
        let (th, beta) = (0.8f64, 0.3f64);
        let psi0 = Vec3::new((th / 2.0).cos(), -(th / 2.0).sin(), 0.0);
        let psi2 = Vec3::new((th / 2.0).cos(), (th / 2.0).sin(), 0.0);
        let psi1 = Vec3::new(beta.cos(), 0.0, beta.sin());
        let got = coplanar_angles(psi1.dot(&psi0), psi1.dot(&psi2), psi0.dot(&psi2)).unwrap();
        assert!((got.beta.unwrap() - beta).abs() < 1e-12);
        let flat = coplanar_angles((th / 2.0).cos(), (th / 2.0).cos(), th.cos()).unwrap();
        assert!(flat.beta.unwrap() < 1e-7);
        assert!(flat.bound_ok);
        assert!(matches!(
            coplanar_angles(1.0, 1.0, 0.2),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn particle_like_circular_amplitude() {
        let (r, g, l0) = (60.0, 1e-3, 20.0);
        let traj = TrajectorySet::circular(r, g, 0.0).unwrap();
        let u = UnitSystem::natural();
        let lambda = 2000.0;
        let res = amplitude(&traj, lambda, 0.0, l0, l0, 1e12, Regime::ParticleLike, &u).unwrap();
        assert_relative_eq!(
            res.amplitude,
            (-g * lambda * lambda / (8.0 * l0 * l0 * r)).exp(),
            max_relative = 1e-10
        );
        let auto = amplitude(&traj, lambda, lambda, l0, l0, 1e12, Regime::Auto, &u).unwrap();
        assert_eq!(auto.regime, Regime::ParticleLike);
        assert_relative_eq!(auto.amplitude, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn transition_and_particle_formulas_differ_by_dominance_ratio() {
        let traj = TrajectorySet::circular(60.0, 1e-3, 0.0).unwrap();
        let u = UnitSystem::natural();
        let c = 1e4;
        let (pl, tr) = (
            amplitude(&traj, 500.0, 0.0, 20.0, 20.0, c, Regime::ParticleLike, &u).unwrap(),
            amplitude(&traj, 500.0, 0.0, 20.0, 20.0, c, Regime::Transition, &u),
        );
        let diag = scalar_product(&traj, 500.0, 500.0, 20.0, 20.0, c, &u).unwrap();
        let ratio = (c * diag.connected.re / diag.forward.re).sqrt();
        match tr {
            Ok(tr) => assert_relative_eq!(tr.amplitude / pl.amplitude, ratio, max_relative = 1e-12),
            Err(Error::Domain(_)) => assert!(pl.amplitude * ratio > 1.0),
            Err(e) => panic!("{e}"),
        }
    }
}
