//! Gaussian minimum-packet functions, their moments, the nonrelativistic
//! classical-particle bounds and the short-time translation check.
//!
//! The Fourier convention is `φ(x) = ∫ dp (2π)^{-3/2} e^{-ip·x} φ̃(p)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::trajectory::{relativistic_momentum, ClassicalQuantities, TrajectorySet};
use crate::units::UnitSystem;
use crate::{Error, Result, Vec3};

/// One Gaussian minimum packet centered on a classical phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimumPacket {
    /// Position center ξ (length).
    pub xi: Vec3,
    /// Momentum center q (inverse length).
    pub q: Vec3,
    /// Momentum spread length L0 (length).
    pub l0: f64,
    /// Trajectory parameter λ (length).
    pub lambda: f64,
    /// `ℓ₀² = L0² − i(λ_c/2)λ` (length²).
    pub ell0_sq: Complex64,
}

impl MinimumPacket {
    /// Packet with the given centers, spread and parameter.
    pub fn new(xi: Vec3, q: Vec3, l0: f64, lambda: f64, units: &UnitSystem) -> Result<Self> {
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "L0 must be positive and finite, got {l0}"
            )));
        }
        Ok(Self {
            xi,
            q,
            l0,
            lambda,
            ell0_sq: Complex64::new(l0 * l0, -0.5 * units.compton_length * lambda),
        })
    }

    /// `∫ |φ̃(p)|² dp = L0³/(2√2 π^{3/2})`.
    pub fn fourier_norm_sq(&self) -> f64 {
        self.l0.powi(3) / (2.0 * 2f64.sqrt() * PI.powf(1.5))
    }
}

/// Momentum-space packet `(L0³/π^{3/2}) exp(−ℓ₀²(p−q)² + i(p−q)·ξ)`.
pub fn packet_fourier(p: &Vec3, pkt: &MinimumPacket) -> Complex64 {
    let d = p - pkt.q;
    let expo = -pkt.ell0_sq * d.norm_squared() + Complex64::new(0.0, d.dot(&pkt.xi));
    expo.exp() * (pkt.l0.powi(3) / PI.powf(1.5))
}

/// Position-space packet `(2π)^{-3/2}(L0³/ℓ₀³) exp(−(x−ξ)²/4ℓ₀² − iq·x)`.
pub fn packet_position(x: &Vec3, pkt: &MinimumPacket) -> Complex64 {
    let ell3 = pkt.ell0_sq.powf(1.5);
    let expo =
        -(x - pkt.xi).norm_squared() / (4.0 * pkt.ell0_sq) - Complex64::new(0.0, pkt.q.dot(x));
    expo.exp() * (pkt.l0.powi(3) / ell3) * (2.0 * PI).powf(-1.5)
}

/// Closed-form moments of a packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketMoments {
    /// `⟨X⟩`.
    pub mean_x: Vec3,
    /// `⟨P⟩`.
    pub mean_p: Vec3,
    /// Per-component position variance `σ_X²`.
    pub var_x: f64,
    /// Per-component momentum variance `σ_P²`.
    pub var_p: f64,
    /// `σ_X σ_P`.
    pub heisenberg_product: f64,
}

/// Moments of `|φ(x)|²` and `|φ̃(p)|²`.
pub fn packet_moments(pkt: &MinimumPacket, units: &UnitSystem) -> PacketMoments {
    let l2 = pkt.l0 * pkt.l0;
    let s = units.compton_length * pkt.lambda;
    let var_x = l2 + s * s / (4.0 * l2);
    let var_p = 1.0 / (4.0 * l2);
    PacketMoments {
        mean_x: pkt.xi,
        mean_p: pkt.q,
        var_x,
        var_p,
        heisenberg_product: 0.5 * (1.0 + s * s / (4.0 * l2 * l2)).sqrt(),
    }
}

/// Labels of an n-particle minimum-packet state.
#[derive(Debug, Clone, PartialEq)]
pub struct NParticleState {
    /// One packet per particle.
    pub packets: Vec<MinimumPacket>,
    /// Normalization `K_s`, once known.
    pub normalization: Option<f64>,
    /// Units of the packets.
    pub units: UnitSystem,
}

impl NParticleState {
    /// Packets following `traj` at `λ` with spread `L0` and relativistic momenta.
    pub fn from_trajectory(
        traj: &TrajectorySet,
        lambda: f64,
        l0: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        let snap = traj.snapshot(lambda)?;
        let packets = snap
            .positions
            .iter()
            .zip(&snap.velocities)
            .map(|(x, v)| {
                MinimumPacket::new(*x, relativistic_momentum(v, units)?, l0, lambda, units)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            packets,
            normalization: None,
            units: *units,
        })
    }

    /// Sets `K_s = 1/√(norm²)` from the squared semi-norm of the state.
    pub fn normalize(&mut self, norm_sq: f64) -> Result<f64> {
        if !(norm_sq > 0.0 && norm_sq.is_finite()) {
            return Err(Error::Degenerate(format!(
                "cannot normalize a state of squared norm {norm_sq}"
            )));
        }
        let k = norm_sq.sqrt().recip();
        self.normalization = Some(k);
        Ok(k)
    }
}

/// Nonrelativistic classical-particle bound report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrcpReport {
    /// `max_k |ξ̇_k| ≤ 1/margin`.
    pub velocity_ok: bool,
    /// `λ_c/L0 ≤ 1/margin`.
    pub compton_ok: bool,
    /// `σ_X²/r_a² ≤ 1/margin`; `None` for a single particle.
    pub spread_ok: Option<bool>,
    /// The three ratios `[max|ξ̇|, λ_c/L0, σ_X²/r_a²]` (the last is NaN when undefined).
    pub margins: [f64; 3],
}

impl NrcpReport {
    /// True when every applicable bound holds.
    pub fn passes(&self) -> bool {
        self.velocity_ok && self.compton_ok && self.spread_ok.unwrap_or(true)
    }
}

/// Default margin that makes `a ≪ b` mean `a/b ≤ 1/10`.
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Evaluates the classical-particle bounds at `λ` for spread `L0`.
pub fn check_nrcp(
    traj: &TrajectorySet,
    l0: f64,
    lambda: f64,
    margin: f64,
    units: &UnitSystem,
) -> Result<NrcpReport> {
    if !(margin > 0.0 && l0 > 0.0) {
        return Err(Error::InvalidInput("margin and L0 must be positive".into()));
    }
    let snap = traj.snapshot(lambda)?;
    let vmax = snap.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let compton = units.compton_length / l0;
    let s = units.compton_length * lambda;
    let var_x = l0 * l0 + s * s / (4.0 * l0 * l0);
    let ra = snap.min_separation();
    let spread = if snap.n() >= 2 {
        var_x / (ra * ra)
    } else {
        f64::NAN
    };
    let limit = 1.0 / margin;
    Ok(NrcpReport {
        velocity_ok: vmax <= limit,
        compton_ok: compton <= limit,
        spread_ok: (snap.n() >= 2).then_some(spread <= limit),
        margins: [vmax, compton, spread],
    })
}

/// Parameter `λ` beyond which the nonrelativistic treatment of `e^{-iωλ}`
/// becomes unreliable, evaluated with the velocities at `λ = 0`.
pub fn nonrel_duration_bound(traj: &TrajectorySet, l0: f64, units: &UnitSystem) -> Result<f64> {
    let snap = traj.snapshot(0.0)?;
    let vmax2 = snap
        .velocities
        .iter()
        .map(|v| v.norm_squared())
        .fold(0.0, f64::max);
    let lc = units.compton_length;
    Ok(PI / (2.0 * lc) * l0 * l0 / (lc * lc / (4.0 * l0 * l0) + vmax2))
}

/// `ω(p) = √(p² + 1/λ_c²)` for `p² = |p|²`.
pub fn omega(p_sq: f64, units: &UnitSystem) -> f64 {
    (p_sq + 1.0 / (units.compton_length * units.compton_length)).sqrt()
}

/// `ω(p) − 1/λ_c` without cancellation.
pub fn omega_minus_rest(p_sq: f64, units: &UnitSystem) -> f64 {
    let lc = units.compton_length;
    lc * p_sq / (1.0 + (1.0 + lc * lc * p_sq).sqrt())
}

/// Quadratic expansion `ω(q) + q·(p−q)/ω(q) + (p−q)²/2ω(q)` of `ω(p)`.
pub fn omega_quadratic(p: &Vec3, q: &Vec3, units: &UnitSystem) -> f64 {
    let wq = omega(q.norm_squared(), units);
    let d = p - q;
    wq + q.dot(&d) / wq + d.norm_squared() / (2.0 * wq)
}

/// Error bound `(λ_c³/4)(p² − q²)²` for [`omega_quadratic`].
pub fn omega_taylor_bound(p: &Vec3, q: &Vec3, units: &UnitSystem) -> f64 {
    let u = p.norm_squared() - q.norm_squared();
    units.compton_length.powi(3) / 4.0 * u * u
}

/// `∫ exp(−α s² + β s) ds = √π e^{β²/4α}/√α` for `Re α > 0`.
pub fn gauss_sum(alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    if !(alpha.re > 0.0) {
        return Err(Error::Domain(format!(
            "Gaussian sum needs Re α > 0, got {alpha}"
        )));
    }
    Ok((beta * beta / (4.0 * alpha)).exp() * PI.sqrt() / alpha.sqrt())
}

/// Delta sequence `δ_{L0}(s) = (L0/√π) e^{−L0² s²}`.
pub fn delta_sequence(s: f64, l0: f64) -> f64 {
    l0 / PI.sqrt() * (-l0 * l0 * s * s).exp()
}

/// Grid for the short-time translation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeGrid {
    /// Points per axis (the grid is cubic).
    pub points: usize,
    /// Grid points per `L0`.
    pub points_per_l0: f64,
    /// Support multiplier `k0`: the half-width must exceed `k0 σ_X`.
    pub k0: f64,
}

impl Default for ShortTimeGrid {
    fn default() -> Self {
        Self {
            points: 128,
            points_per_l0: 8.0,
            k0: 5.0,
        }
    }
}

/// Short-time translation check for every packet of `traj`.
///
/// For each particle the momentum-space packet built at `λ` is multiplied by
/// `e^{−iω(p)λ} e^{iφ_k(λ)}` with `φ_k = (1 + e_C/n)λ/λ_c`, transformed to
/// position space on the grid by FFT and compared with the packet at `λ = 0`.
/// The returned value is the largest phase-aligned squared relative distance
/// `2(1 − |⟨a,b⟩|/(‖a‖‖b‖))` over the particles.
pub fn shorttime_translation_check(
    traj: &TrajectorySet,
    l0: f64,
    lambda_small: f64,
    grid: &ShortTimeGrid,
    units: &UnitSystem,
) -> Result<f64> {
    let lc = units.compton_length;
    let n = grid.points;
    if n < 8 || grid.points_per_l0 < 8.0 {
        return Err(Error::Resolution(format!(
            "grid of {n} points at {} points per L0 is too coarse (need ≥ 8 per L0)",
            grid.points_per_l0
        )));
    }
    let dx = l0 / grid.points_per_l0;
    let half_width = 0.5 * n as f64 * dx;
    let s = lc * lambda_small;
    let sigma_x = (l0 * l0 + s * s / (4.0 * l0 * l0)).sqrt();
    let snap0 = traj.snapshot(0.0)?;
    let snap = traj.snapshot(lambda_small)?;
    let cq = ClassicalQuantities::of(&snap0, traj.potential())?;
    let phase_k = (1.0 + cq.e_c / traj.n() as f64) * lambda_small / lc;
    let mut worst: f64 = 0.0;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let dk = 2.0 * PI / (n as f64 * dx);
    let idx = |m: usize| {
        if m < n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        }
    };
    for k in 0..traj.n() {
        let x0 = snap0.positions[k];
        let q0 = relativistic_momentum(&snap0.velocities[k], units)?;
        let xl = snap.positions[k];
        let ql = relativistic_momentum(&snap.velocities[k], units)?;
        let shift = (xl - snap.velocities[k] * lambda_small - x0).norm();
        if half_width < grid.k0 * sigma_x + shift {
            return Err(Error::Resolution(format!(
                "grid half-width {half_width:e} below k0·σ_X + drift = {:e}",
                grid.k0 * sigma_x + shift
            )));
        }
        let pkt = MinimumPacket::new(xl, ql, l0, lambda_small, units)?;
        let dq = ql - q0;
        let dxi = xl - x0;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let kappa = Vec3::new(idx(a), idx(b), idx(c)) * dk;
                    let p = q0 + kappa;
                    let d = kappa - dq;
                    let expo = -pkt.ell0_sq * d.norm_squared()
                        + Complex64::new(0.0, d.dot(&xl) - kappa.dot(&xl) + kappa.dot(&dxi))
                        + Complex64::new(
                            0.0,
                            -omega_minus_rest(p.norm_squared(), units) * lambda_small,
                        );
                    data[(a * n + b) * n + c] = expo.exp();
                }
            }
        }
        fft3(&mut data, n, &*fft);
        let mut ab = Complex64::new(0.0, 0.0);
        let (mut aa, mut bb) = (0.0, 0.0);
        let global = Complex64::from_polar(1.0, phase_k - lambda_small / lc);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let y = Vec3::new(idx(a), idx(b), idx(c)) * dx;
                    let reference = (-y.norm_squared() / (4.0 * l0 * l0)).exp();
                    let val = data[(a * n + b) * n + c] * global;
                    ab += val.conj() * reference;
                    aa += val.norm_sqr();
                    bb += reference * reference;
                }
            }
        }
        let dev = 2.0 * (1.0 - ab.norm() / (aa * bb).sqrt());
        worst = worst.max(dev.max(0.0));
    }
    Ok(worst)
}

fn fft3(data: &mut [Complex64], n: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..n {
        for c in 0..n {
            for b in 0..n {
                line[b] = data[(a * n + b) * n + c];
            }
            fft.process(&mut line);
            for b in 0..n {
                data[(a * n + b) * n + c] = line[b];
            }
        }
    }
    for b in 0..n {
        for c in 0..n {
            for a in 0..n {
                line[a] = data[(a * n + b) * n + c];
            }
            fft.process(&mut line);
            for a in 0..n {
                data[(a * n + b) * n + c] = line[a];
            }
        }
    }
}
