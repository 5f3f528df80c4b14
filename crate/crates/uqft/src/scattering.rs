//! Plane-wave limits of minimum-packet states: the forward overlap as a
//! delta sequence, idempotence of the plane-wave projection, the connected
//! contribution concentrating on energy-momentum conservation, and the
//! nonrelativistic elastic differential cross section.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::{composite_gauss_legendre, integrate_fallible, Options};
use crate::scalar_products::{connected_general_fold, forward_fold, moments_of_fold, Fold};
use crate::units::UnitSystem;
use crate::{Error, Result, Vec3};

/// Largest `λ_c|q|` accepted as nonrelativistic.
pub const NONRELATIVISTIC_LIMIT: f64 = 0.1;

/// Two-body elastic scattering in the center-of-mass frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveScenario {
    /// Incoming momenta `q3, q4` (inverse length).
    pub q_in: [Vec3; 2],
    /// Outgoing momenta `q1, q2` (inverse length).
    pub q_out: [Vec3; 2],
    /// Four-point interaction strength `c4`.
    pub c4: f64,
    /// Units.
    pub units: UnitSystem,
}

impl PlaneWaveScenario {
    /// Validated scenario: nonrelativistic momenta and a non-forward
    /// selection.
    pub fn new(q_in: [Vec3; 2], q_out: [Vec3; 2], c4: f64, units: UnitSystem) -> Result<Self> {
        let scen = Self {
            q_in,
            q_out,
            c4,
            units,
        };
        for q in q_in.iter().chain(&q_out) {
            let beta = units.compton_length * q.norm();
            if beta > NONRELATIVISTIC_LIMIT {
                return Err(Error::OutOfRange(format!(
                    "λ_c|q| = {beta} exceeds the nonrelativistic limit {NONRELATIVISTIC_LIMIT}"
                )));
            }
        }
        if scen.is_forward() {
            return Err(Error::InvalidInput(
                "outgoing momenta are a permutation of the incoming ones; use the forward overlap"
                    .into(),
            ));
        }
        Ok(scen)
    }

    /// Elastic scattering of `±q` along `z` into `±q` at polar angle `θ` in
    /// the `x–z` plane.
    pub fn elastic(q: f64, theta: f64, c4: f64, units: UnitSystem) -> Result<Self> {
        let q3 = Vec3::new(0.0, 0.0, q);
        let q1 = Vec3::new(q * theta.sin(), 0.0, q * theta.cos());
        Self::new([q3, -q3], [q1, -q1], c4, units)
    }

    fn is_forward(&self) -> bool {
        let scale = self
            .q_in
            .iter()
            .map(|q| q.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let close = |a: &Vec3, b: &Vec3| (a - b).norm() <= 1e-12 * scale;
        (close(&self.q_out[0], &self.q_in[0]) && close(&self.q_out[1], &self.q_in[1]))
            || (close(&self.q_out[0], &self.q_in[1]) && close(&self.q_out[1], &self.q_in[0]))
    }

    /// `|q3|`.
    pub fn q_mag(&self) -> f64 {
        self.q_in[0].norm()
    }

    /// `ω(q) = √(1/λ_c² + q²)` (inverse length).
    pub fn omega(&self, q: f64) -> f64 {
        (self.units.compton_length.powi(-2) + q * q).sqrt()
    }

    /// Flux factor `u_α = 2|q3|/ω(q3)` for equal masses.
    pub fn flux(&self) -> f64 {
        2.0 * self.q_mag() / self.omega(self.q_mag())
    }

    /// Box volume `V = L0³ (π/2)^{3/2}`.
    pub fn box_volume(l0: f64) -> f64 {
        l0.powi(3) * (PI / 2.0).powf(1.5)
    }

    /// Box duration `T = √(π/(2 v̂(a²)))` of the fold between the given
    /// outgoing momenta at `λ` and the incoming momenta at `−λ`.
    pub fn box_duration(&self, q_out: &[Vec3; 2], lambda: f64, l0: f64) -> Result<f64> {
        let fold = Fold::from_momenta(q_out, &self.q_in, lambda, -lambda, l0, l0, &self.units)?;
        let va = moments_of_fold(&fold).v_a_sq();
        if !(va > 0.0) {
            return Err(Error::Degenerate(format!("v̂(a²) = {va} must be positive")));
        }
        Ok((PI / (2.0 * va)).sqrt())
    }
}

/// Forward overlap `⟨s(λ;q′)|s(λ;q)⟩` of straight-line packets through the
/// origin with common spread `L0`, evaluated at `λ = τ = 0`.
pub fn plane_wave_overlap(
    q: &[Vec3],
    q_prime: &[Vec3],
    l0: f64,
    units: &UnitSystem,
) -> Result<Complex64> {
    forward_fold(&Fold::from_momenta(q_prime, q, 0.0, 0.0, l0, l0, units)?)
}

/// `L1` defect `∫_W |P²φ − Pφ| / ∫_W |φ|` of the plane-wave projection
/// restricted to one momentum component, for `φ = 1` on the window `W`.
/// The kernel is `(λ_c/2)⟨s_q|s_q′⟩` for a single particle divided by the
/// transverse delta-sequence peaks, which integrate to one. Trapezoidal
/// weights on `points` nodes; the spacing must resolve `1/L0`.
pub fn idempotence_defect(
    l0: f64,
    window: (f64, f64),
    points: usize,
    units: &UnitSystem,
) -> Result<f64> {
    let (a, b) = window;
    if !(b > a) || points < 3 {
        return Err(Error::InvalidInput(format!(
            "need a proper window and at least 3 points, got {window:?} and {points}"
        )));
    }
    let h = (b - a) / (points - 1) as f64;
    if h > 0.2 / l0 {
        return Err(Error::Resolution(format!(
            "grid spacing {h:e} does not resolve the packet width 1/L0 = {:e}",
            1.0 / l0
        )));
    }
    let grid: Vec<f64> = (0..points).map(|i| a + h * i as f64).collect();
    let mut w = vec![h; points];
    w[0] *= 0.5;
    w[points - 1] *= 0.5;
    let transverse = (l0 / (2.0 * PI).sqrt()).powi(2);
    let reach = 12.0 / l0;
    let mut kernel = vec![Complex64::new(0.0, 0.0); points * points];
    for i in 0..points {
        for j in 0..points {
            if (grid[i] - grid[j]).abs() > reach {
                continue;
            }
            let o = plane_wave_overlap(
                &[Vec3::new(grid[j], 0.0, 0.0)],
                &[Vec3::new(grid[i], 0.0, 0.0)],
                l0,
                units,
            )?;
            kernel[i * points + j] = o * (0.5 * units.compton_length / transverse) * w[j];
        }
    }
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        (0..points)
            .map(|i| (0..points).map(|j| kernel[i * points + j] * v[j]).sum())
            .collect()
    };
    let phi = vec![Complex64::new(1.0, 0.0); points];
    let p1 = apply(&phi);
    let p2 = apply(&p1);
    let num: f64 = (0..points).map(|i| w[i] * (p2[i] - p1[i]).norm()).sum();
    Ok(num / (b - a))
}

/// Connected contributions `c4 C(λ, −λ)` along a sequence of spreads.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveLimit {
    /// Spreads `L0`.
    pub l0: Vec<f64>,
    /// `c4 C(λ, −λ)` at each spread.
    pub values: Vec<Complex64>,
}

/// `c4 C(λ, −λ)` for outgoing momenta at `λ` and incoming momenta at `−λ`,
/// both with spread `L0`, for each `L0` of the sequence.
pub fn connected_plane_wave_limit(
    scen: &PlaneWaveScenario,
    lambda: f64,
    l0_sequence: &[f64],
) -> Result<PlaneWaveLimit> {
    let values = l0_sequence
        .iter()
        .map(|&l0| {
            let fold = Fold::from_momenta(
                &scen.q_out,
                &scen.q_in,
                lambda,
                -lambda,
                l0,
                l0,
                &scen.units,
            )?;
            Ok(connected_general_fold(&fold)? * scen.c4)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlaneWaveLimit {
        l0: l0_sequence.to_vec(),
        values,
    })
}

/// `F(λ,λ)/C(λ,λ)` of the incoming state, which grows as `L0^{3n−4}`.
pub fn forward_to_connected_ratio(scen: &PlaneWaveScenario, l0: f64) -> Result<f64> {
    let fold = Fold::from_momenta(&scen.q_in, &scen.q_in, 0.0, 0.0, l0, l0, &scen.units)?;
    Ok(forward_fold(&fold)?.re / connected_general_fold(&fold)?.re)
}

/// Closed-form elastic cross section and the factors entering it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    /// `dσ/dΩ = (c4²/8π)(λ_c/2)²(π/2)³` (length²).
    pub value: f64,
    /// Flux factor `u_α`.
    pub flux: f64,
}

/// Nonrelativistic elastic differential cross section.
pub fn differential_cross_section(scen: &PlaneWaveScenario) -> CrossSection {
    let lc = scen.units.compton_length;
    let value = scen.c4 * scen.c4 / (8.0 * PI) * (lc / 2.0).powi(2) * (PI / 2.0).powi(3);
    CrossSection {
        value,
        flux: scen.flux(),
    }
}

/// Settings of the numeric cross-section pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// Time parameter `λ` of the outgoing state (the incoming one is at `−λ`).
    pub lambda: f64,
    /// Half-width of the `q2` window per component, in units of `1/L0`.
    pub q2_halfwidth: f64,
    /// Half-width of the `|q1|` window, in units of `1/L0`.
    pub q1_halfwidth: f64,
    /// Gauss–Legendre panels per `q2` component.
    pub panels: usize,
    /// Nodes per panel.
    pub order: usize,
    /// Relative tolerance of the adaptive `|q1|` integral.
    pub rel: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            q2_halfwidth: 10.0,
            q1_halfwidth: 40.0,
            panels: 2,
            order: 16,
            rel: 1e-6,
        }
    }
}

/// Numeric cross section at finite `L0`:
/// `(λ_c/2)² ∫d³q2 ∫d|q1| |q1|² (V/(u_α T)) |c4 C(λ,−λ)|² / ‖s(−λ)‖²`
/// with `q1` along the outgoing direction of the scenario, the norm
/// `F + c4 C` of the incoming state, and `V`, `T` the box factors of the
/// on-shell outgoing configuration.
pub fn numeric_cross_section(
    scen: &PlaneWaveScenario,
    l0: f64,
    opts: PipelineOptions,
) -> Result<f64> {
    let units = scen.units;
    let lc = units.compton_length;
    let q = scen.q_mag();
    let dir = scen.q_out[0].normalize();
    let q_sum = scen.q_in[0] + scen.q_in[1];
    let norm_fold = Fold::from_momenta(
        &scen.q_in,
        &scen.q_in,
        -opts.lambda,
        -opts.lambda,
        l0,
        l0,
        &units,
    )?;
    let norm = forward_fold(&norm_fold)?.re + scen.c4 * connected_general_fold(&norm_fold)?.re;
    let on_shell = [dir * q, q_sum - dir * q];
    let duration = scen.box_duration(&on_shell, opts.lambda, l0)?;
    let pref = (lc / 2.0).powi(2) * PlaneWaveScenario::box_volume(l0) / (scen.flux() * duration)
        * scen.c4
        * scen.c4
        / norm;

    let hw = opts.q2_halfwidth / l0;
    let (nodes, weights) = composite_gauss_legendre(-hw, hw, opts.panels, opts.order);
    let inner = |k: f64| -> Result<f64> {
        let q1 = dir * k;
        let centre = q_sum - q1;
        let mut acc = 0.0;
        for (x, wx) in nodes.iter().zip(&weights) {
            for (y, wy) in nodes.iter().zip(&weights) {
                for (z, wz) in nodes.iter().zip(&weights) {
                    let q2 = centre + Vec3::new(*x, *y, *z);
                    let fold = Fold::from_momenta(
                        &[q1, q2],
                        &scen.q_in,
                        opts.lambda,
                        -opts.lambda,
                        l0,
                        l0,
                        &units,
                    )?;
                    acc += wx * wy * wz * connected_general_fold(&fold)?.norm_sqr();
                }
            }
        }
        Ok(k * k * acc)
    };
    let w1 = opts.q1_halfwidth / l0;
    let est = integrate_fallible(
        |k: f64| inner(k).map(|v| Complex64::new(v, 0.0)),
        (q - w1).max(0.0),
        q + w1,
        Options::rel(opts.rel),
    )?;
    Ok(pref * est.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn units() -> UnitSystem {
        UnitSystem::natural()
    }

    #[test]
    fn overlap_peak_and_suppression() {
        let u = units();
        let l0 = 50.0;
        let q = [Vec3::new(0.01, 0.0, 0.0), Vec3::new(-0.01, 0.003, 0.0)];
        let kf = (2.0f64 / u.compton_length).powi(2) * (l0 / (2.0 * PI).sqrt()).powi(6);
        let peak = plane_wave_overlap(&q, &q, l0, &u).unwrap();
        let cross = (-(l0 * l0) * (q[0] - q[1]).norm_squared()).exp();
        assert_relative_eq!(peak.re, kf * (1.0 + cross), max_relative = 1e-12);
        let shift = Vec3::new(10.0 / l0, 0.0, 0.0);
        let shifted = [q[0] + shift, q[1]];
        let o = plane_wave_overlap(&q, &shifted, l0, &u).unwrap();
        assert_relative_eq!(
            o.norm() / peak.norm(),
            (-50.0f64).exp(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn idempotence_defect_halves_with_doubling() {
        let u = units();
        let d1 = idempotence_defect(50.0, (-0.5, 0.5), 801, &u).unwrap();
        let d2 = idempotence_defect(100.0, (-0.5, 0.5), 1601, &u).unwrap();
        assert!(d1 < 0.05, "{d1}");
        assert_relative_eq!(d2 / d1, 0.5, max_relative = 0.02);
    }

    #[test]
    fn idempotence_needs_resolution() {
        assert!(matches!(
            idempotence_defect(100.0, (-0.5, 0.5), 101, &units()),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn constant_is_angle_independent_and_vanishes_without_coupling() {
        let u = units();
        let vals: Vec<f64> = [0.3, 0.7, 1.1, 1.9, 2.8]
            .iter()
            .map(|&t| {
                differential_cross_section(&PlaneWaveScenario::elastic(0.01, t, 2.0, u).unwrap())
                    .value
            })
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() <= 1e-12 * vals[0]);
        }
        assert_eq!(
            differential_cross_section(&PlaneWaveScenario::elastic(0.01, 1.0, 0.0, u).unwrap())
                .value,
            0.0
        );
    }

    #[test]
    fn rejects_forward_and_relativistic() {
        let u = units();
        assert!(PlaneWaveScenario::elastic(0.01, 0.0, 1.0, u).is_err());
        assert!(PlaneWaveScenario::elastic(0.01, PI, 1.0, u).is_err());
        assert!(matches!(
            PlaneWaveScenario::elastic(0.5, 1.0, 1.0, u),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn flux_is_twice_velocity() {
        let s = PlaneWaveScenario::elastic(0.01, 1.0, 1.0, units()).unwrap();
        assert_relative_eq!(
            s.flux(),
            2.0 * 0.01 / (1.0f64 + 1e-4).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn forward_dominance_exponent() {
        let s = PlaneWaveScenario::elastic(0.01, 1.0, 1.0, units()).unwrap();
        let r1 = forward_to_connected_ratio(&s, 1e3).unwrap();
        let r2 = forward_to_connected_ratio(&s, 2e3).unwrap();
        assert_relative_eq!((r2 / r1).log2(), 2.0, max_relative = 1e-6);
    }

    #[test]
    fn nonconserving_limit_suppression_factorizes() {
        let u = units();
        let q3 = Vec3::new(0.0, 0.0, 0.01);
        let q1 = Vec3::new(0.004, 0.0, 0.009);
        let q2 = -q1 + Vec3::new(0.0, 0.001, 0.0);
        let s = PlaneWaveScenario::new([q3, -q3], [q1, q2], 1.0, u).unwrap();
        let lim = connected_plane_wave_limit(&s, 1.0, &[100.0, 200.0]).unwrap();
        let ratio = lim.values[1].norm() / lim.values[0].norm();
        // Without the momentum mismatch the same folds scale as L0⁴ with an
        // energy factor that depends on L0 only through v̂(a²) ∝ 1/L0².
        let mom = |l0: f64| {
            let f = Fold::from_momenta(&[q1, q2], &[q3, -q3], 1.0, -1.0, l0, l0, &u).unwrap();
            moments_of_fold(&f)
        };
        let (m1, m2) = (mom(100.0), mom(200.0));
        let d = |m: &crate::scalar_products::HattedMoments| {
            m.delta_t + m.l_e * m.l_e * m.delta_q.dot(&m.a_mean)
        };
        let energy = |m: &crate::scalar_products::HattedMoments| {
            (-d(m).powi(2) / (4.0 * m.v_a_sq())).exp() / m.v_a_sq().sqrt()
        };
        let dq2 = (q1 + q2 - q3 + q3).norm_squared();
        let expected = 8.0 * energy(&m2) / energy(&m1)
            * (-(200.0f64.powi(2) - 100.0f64.powi(2)) * dq2 / 4.0).exp();
        assert_relative_eq!(ratio, expected, max_relative = 1e-6);
    }
}
