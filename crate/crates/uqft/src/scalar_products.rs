//! Forward and connected contributions to scalar products of time-translated
//! n-particle minimum-packet states, and the state norms built from them.
//!
//! A scalar product `⟨U(λ)s(λ)|U(τ)s(τ)⟩` is assembled from `2n` rows, one
//! per packet: the first `n` rows describe the packets at `λ` (sign
//! `s = −1`), the last `n` the packets at `τ` (sign `s = +1`). Each row
//! carries `a = ξ̇`, `b = ξ − ξ̇ τ_k`, the spread `L` and the nonrelativistic
//! momentum `q = ξ̇/λ_c`. Energies use `ω ≈ (1 + ξ̇²/2)/λ_c` throughout.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::packets::{check_nrcp, DEFAULT_MARGIN};
use crate::trajectory::{ClassicalQuantities, TrajectorySet};
use crate::units::UnitSystem;
use crate::{Error, Result, Vec3};

/// One packet entering a scalar product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldRow {
    /// `−1` for packets at `λ`, `+1` for packets at `τ`.
    pub s: f64,
    /// Parameter value of the packet (`λ` or `τ`).
    pub tau: f64,
    /// Momentum spread length.
    pub l: f64,
    /// Velocity `a = ξ̇`.
    pub a: Vec3,
    /// Straight-line intercept `b = ξ − ξ̇ τ_k`.
    pub b: Vec3,
    /// Momentum `q` (inverse length).
    pub q: Vec3,
}

/// The `2n` packets of a scalar product together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    /// Particle number.
    pub n: usize,
    /// Parameter of the bra state.
    pub lambda: f64,
    /// Parameter of the ket state.
    pub tau: f64,
    /// `L0(λ)`.
    pub l0_lambda: f64,
    /// `L0(τ)`.
    pub l0_tau: f64,
    /// Rows `0..n` at `λ`, rows `n..2n` at `τ`.
    pub rows: Vec<FoldRow>,
    /// Units.
    pub units: UnitSystem,
}

impl Fold {
    /// Rows built from the trajectories at `λ` and `τ`.
    pub fn from_trajectory(
        traj: &TrajectorySet,
        lambda: f64,
        tau: f64,
        l0_lambda: f64,
        l0_tau: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        check_spreads(l0_lambda, l0_tau)?;
        let n = traj.n();
        let lc = units.compton_length;
        let mut rows = Vec::with_capacity(2 * n);
        for (s, t, l) in [(-1.0, lambda, l0_lambda), (1.0, tau, l0_tau)] {
            let snap = traj.snapshot(t)?;
            for (x, v) in snap.positions.iter().zip(&snap.velocities) {
                rows.push(FoldRow {
                    s,
                    tau: t,
                    l,
                    a: *v,
                    b: x - v * t,
                    q: v / lc,
                });
            }
        }
        Ok(Self {
            n,
            lambda,
            tau,
            l0_lambda,
            l0_tau,
            rows,
            units: *units,
        })
    }

    /// Rows for straight-line packets through the origin with prescribed
    /// momenta: `q_bra` at `λ` and `q_ket` at `τ`.
    pub fn from_momenta(
        q_bra: &[Vec3],
        q_ket: &[Vec3],
        lambda: f64,
        tau: f64,
        l0_lambda: f64,
        l0_tau: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        check_spreads(l0_lambda, l0_tau)?;
        if q_bra.len() != q_ket.len() || q_bra.is_empty() {
            return Err(Error::InvalidInput(
                "bra and ket need the same positive number of momenta".into(),
            ));
        }
        let lc = units.compton_length;
        let mut rows = Vec::with_capacity(2 * q_bra.len());
        for (s, t, l, qs) in [(-1.0, lambda, l0_lambda, q_bra), (1.0, tau, l0_tau, q_ket)] {
            for q in qs {
                let a = q * lc;
                if a.norm() >= 1.0 {
                    return Err(Error::Superluminal {
                        particle: 0,
                        speed: a.norm(),
                    });
                }
                rows.push(FoldRow {
                    s,
                    tau: t,
                    l,
                    a,
                    b: Vec3::zeros(),
                    q: *q,
                });
            }
        }
        Ok(Self {
            n: q_bra.len(),
            lambda,
            tau,
            l0_lambda,
            l0_tau,
            rows,
            units: *units,
        })
    }

    /// Same fold with `λ` and `τ` exchanged.
    pub fn swapped(&self) -> Self {
        let mut rows: Vec<FoldRow> = self.rows[self.n..]
            .iter()
            .chain(&self.rows[..self.n])
            .copied()
            .collect();
        for r in &mut rows {
            r.s = -r.s;
        }
        Self {
            n: self.n,
            lambda: self.tau,
            tau: self.lambda,
            l0_lambda: self.l0_tau,
            l0_tau: self.l0_lambda,
            rows,
            units: self.units,
        }
    }

    /// `ω − 1/λ_c ≈ λ_c q²/2` of a row.
    fn kinetic(&self, row: &FoldRow) -> f64 {
        0.5 * self.units.compton_length * row.q.norm_squared()
    }
}

fn check_spreads(l0_lambda: f64, l0_tau: f64) -> Result<()> {
    if !(l0_lambda > 0.0 && l0_tau > 0.0 && l0_lambda.is_finite() && l0_tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "spreads must be positive, got {l0_lambda} and {l0_tau}"
        )));
    }
    Ok(())
}

/// Weighted moments of a fold: `ŷ = (1/2n) Σ y_k / L_k²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HattedMoments {
    /// Particle number.
    pub n: usize,
    /// `â²` (inverse length²).
    pub a_sq: f64,
    /// `b̂²` (dimensionless).
    pub b_sq: f64,
    /// `a·b̂` (inverse length).
    pub a_dot_b: f64,
    /// Vector mean `â` (inverse length²).
    pub a_mean: Vec3,
    /// Vector mean `b̂` (inverse length).
    pub b_mean: Vec3,
    /// `L_e` with `1/L_e² = 1/2L0(λ)² + 1/2L0(τ)²`.
    pub l_e: f64,
    /// `L_s` with `L_s² = L0(λ)² + L0(τ)²`.
    pub l_s: f64,
    /// `δT = Σ s_k ω(q_k) ≈ (T(τ) − T(λ))/λ_c` (inverse length).
    pub delta_t: f64,
    /// `δq = Σ s_k q_k` (inverse length).
    pub delta_q: Vec3,
    /// Overall phase `θ_F = −Σ s_k ω(q_k) τ_k`.
    pub theta_f: f64,
}

impl HattedMoments {
    /// `v̂(a²) = â² − L_e² |â|²`.
    pub fn v_a_sq(&self) -> f64 {
        self.a_sq - self.l_e * self.l_e * self.a_mean.norm_squared()
    }

    /// `v̂(b²) = b̂² − L_e² |b̂|²`.
    pub fn v_b_sq(&self) -> f64 {
        self.b_sq - self.l_e * self.l_e * self.b_mean.norm_squared()
    }

    /// `v̂(a·b) = a·b̂ − L_e² â·b̂`.
    pub fn v_a_dot_b(&self) -> f64 {
        self.a_dot_b - self.l_e * self.l_e * self.a_mean.dot(&self.b_mean)
    }

    /// `â² b̂² − (a·b̂)²`.
    pub fn gram(&self) -> f64 {
        self.a_sq * self.b_sq - self.a_dot_b * self.a_dot_b
    }

    /// Phase `θ_C = θ_F − δT (a·b̂)/â²` of the connected contribution.
    pub fn theta_c(&self) -> f64 {
        self.theta_f - self.delta_t * self.a_dot_b / self.a_sq
    }
}

/// Moments of a fold.
pub fn moments_of_fold(fold: &Fold) -> HattedMoments {
    let two_n = fold.rows.len() as f64;
    let mut m = HattedMoments {
        n: fold.n,
        a_sq: 0.0,
        b_sq: 0.0,
        a_dot_b: 0.0,
        a_mean: Vec3::zeros(),
        b_mean: Vec3::zeros(),
        l_e: 0.0,
        l_s: (fold.l0_lambda.powi(2) + fold.l0_tau.powi(2)).sqrt(),
        delta_t: 0.0,
        delta_q: Vec3::zeros(),
        theta_f: 0.0,
    };
    let mut inv_le2 = 0.0;
    let lc = fold.units.compton_length;
    for row in &fold.rows {
        let w = 1.0 / (row.l * row.l * two_n);
        inv_le2 += w;
        m.a_sq += w * row.a.norm_squared();
        m.b_sq += w * row.b.norm_squared();
        m.a_dot_b += w * row.a.dot(&row.b);
        m.a_mean += row.a * w;
        m.b_mean += row.b * w;
        let kin = fold.kinetic(row);
        m.delta_t += row.s * kin;
        m.delta_q += row.q * row.s;
        m.theta_f -= row.s * (1.0 / lc + kin) * row.tau;
    }
    m.l_e = inv_le2.sqrt().recip();
    m
}

/// Moments of the trajectories at `λ` and `τ`.
pub fn hatted_moments(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    units: &UnitSystem,
) -> Result<HattedMoments> {
    Ok(moments_of_fold(&Fold::from_trajectory(
        traj, lambda, tau, l0_lambda, l0_tau, units,
    )?))
}

/// `(â², b̂², a·b̂)` expressed through `T, I, İ` at `λ` and `τ`; valid in the
/// center-of-mass frame.
pub fn moments_from_quantities(
    q_lambda: &ClassicalQuantities,
    q_tau: &ClassicalQuantities,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    n: usize,
) -> (f64, f64, f64) {
    let n = n as f64;
    let (wl, wt) = (
        1.0 / (n * l0_lambda * l0_lambda),
        1.0 / (n * l0_tau * l0_tau),
    );
    let a_sq = wl * q_lambda.t + wt * q_tau.t;
    let b_sq = wl * (q_lambda.i - lambda * q_lambda.i_dot + lambda * lambda * q_lambda.t)
        + wt * (q_tau.i - tau * q_tau.i_dot + tau * tau * q_tau.t);
    let a_dot_b = wl * (0.5 * q_lambda.i_dot - lambda * q_lambda.t)
        + wt * (0.5 * q_tau.i_dot - tau * q_tau.t);
    (a_sq, b_sq, a_dot_b)
}

/// Right-hand side of the translation identity for `â² b̂² − (a·b̂)²`, in
/// which the parameters enter only through `λ − τ`.
pub fn translation_identity_rhs(
    q_lambda: &ClassicalQuantities,
    q_tau: &ClassicalQuantities,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    n: usize,
) -> f64 {
    let n = n as f64;
    let (wl, wt) = (
        1.0 / (n * l0_lambda * l0_lambda),
        1.0 / (n * l0_tau * l0_tau),
    );
    let (tl, tt) = (wl * q_lambda.t, wt * q_tau.t);
    let (il, it) = (wl * q_lambda.i, wt * q_tau.i);
    let (dl, dt) = (wl * q_lambda.i_dot, wt * q_tau.i_dot);
    let d = lambda - tau;
    (tl + tt) * (il + it) - 0.25 * (dl + dt) * (dl + dt) + d * tl * dt - d * tt * dl
        + d * d * tl * tt
}

/// Connected contribution in the center-of-mass frame of momentum-conserving
/// trajectories:
/// `C = L_e³ e^{iθ_C}/((2πn)²√â²) · e^{−n(â²b̂² − (a·b̂)²)/2â²} · e^{−δT²/2nâ²}`.
pub fn connected_contribution(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    units: &UnitSystem,
) -> Result<Complex64> {
    let m = hatted_moments(traj, lambda, tau, l0_lambda, l0_tau, units)?;
    connected_from_moments(&m)
}

/// Connected contribution from precomputed moments, assuming `â = b̂ = 0`
/// and `δq = 0`.
pub fn connected_from_moments(m: &HattedMoments) -> Result<Complex64> {
    if !(m.a_sq > 0.0) {
        return Err(Error::Degenerate(format!(
            "â² = {} vanishes; the connected closed form needs motion",
            m.a_sq
        )));
    }
    let n = m.n as f64;
    let modulus = m.l_e.powi(3) / ((2.0 * PI * n).powi(2) * m.a_sq.sqrt())
        * (-n * m.gram() / (2.0 * m.a_sq) - m.delta_t * m.delta_t / (2.0 * n * m.a_sq)).exp();
    Ok(Complex64::from_polar(modulus, m.theta_c()))
}

/// Connected contribution for general rows (non-zero `δq`, `â`, `b̂`).
pub fn connected_general_fold(fold: &Fold) -> Result<Complex64> {
    let m = moments_of_fold(fold);
    let n = m.n as f64;
    let le2 = m.l_e * m.l_e;
    let va = m.v_a_sq();
    if !(va > 0.0) {
        return Err(Error::Degenerate(format!("v̂(a²) = {va} must be positive")));
    }
    let vb = m.v_b_sq();
    let vab = m.v_a_dot_b();
    let d = m.delta_t + le2 * m.delta_q.dot(&m.a_mean);
    let log_mod = 1.5 * (2.0 * PI * le2 / n).ln() + 0.5 * (2.0 * PI / (n * va)).ln()
        - 4.0 * (2.0 * PI).ln()
        - n * (va * vb - vab * vab) / (2.0 * va)
        - d * d / (2.0 * n * va)
        - le2 * m.delta_q.norm_squared() / (2.0 * n);
    let phase = m.theta_f - d * vab / va + le2 * m.delta_q.dot(&m.b_mean);
    Ok(Complex64::from_polar(log_mod.exp(), phase))
}

/// Connected contribution for the trajectories, optionally with the
/// momenta replaced by straight lines through the origin (`q_override =
/// (bra momenta, ket momenta)`).
pub fn connected_general(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    units: &UnitSystem,
    q_override: Option<(&[Vec3], &[Vec3])>,
) -> Result<Complex64> {
    let fold = match q_override {
        Some((bra, ket)) => Fold::from_momenta(bra, ket, lambda, tau, l0_lambda, l0_tau, units)?,
        None => Fold::from_trajectory(traj, lambda, tau, l0_lambda, l0_tau, units)?,
    };
    connected_general_fold(&fold)
}

/// Gaussian overlap of a bra packet `k` and a ket packet `j`:
/// `L_k³L_j³ ∫dp g_k(p) conj(g_j(p))` with `g(p) = e^{−L²(p−q)² + i(p−q)·h}`,
/// equal to `(πL_e²/2)^{3/2} e^{−L_e²(q_k−q_j)²/2 − (h_k−h_j)²/4L_s²} e^{iθ_kj}`.
pub fn pair_overlap(lk: f64, qk: &Vec3, hk: &Vec3, lj: f64, qj: &Vec3, hj: &Vec3) -> Complex64 {
    let (lk2, lj2) = (lk * lk, lj * lj);
    let ls2 = lk2 + lj2;
    let le2 = 2.0 * lk2 * lj2 / ls2;
    let theta = (qj - qk).dot(&((hj * lk2 + hk * lj2) / ls2));
    let modulus = (PI * le2 / 2.0).powf(1.5)
        * (-le2 * (qk - qj).norm_squared() / 2.0 - (hk - hj).norm_squared() / (4.0 * ls2)).exp();
    Complex64::from_polar(modulus, theta)
}

/// All permutations of `0..n` in Heap's order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Per-pairing terms `e^{iθ_F}(2/λ_c)ⁿ π^{−3n} Π_k P_{k,i_k}` of the forward
/// contribution, in the order of [`permutations`].
pub fn forward_terms_fold(fold: &Fold) -> Result<Vec<Complex64>> {
    let n = fold.n;
    if n > 10 {
        return Err(Error::InvalidInput(format!(
            "{n}! pairings are too many to enumerate"
        )));
    }
    let m = moments_of_fold(fold);
    let lc = fold.units.compton_length;
    let log_pref = n as f64 * ((2.0 / lc).ln() - 3.0 * PI.ln());
    let mut overlaps = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        for j in 0..n {
            let (rk, rj) = (&fold.rows[k], &fold.rows[n + j]);
            overlaps[k * n + j] = pair_overlap(rk.l, &rk.q, &rk.b, rj.l, &rj.q, &rj.b);
        }
    }
    let pref = Complex64::from_polar(log_pref.exp(), m.theta_f);
    Ok(permutations(n)
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(k, &j)| overlaps[k * n + j])
                .product::<Complex64>()
                * pref
        })
        .collect())
}

/// Forward contribution `F` of a fold: the sum over all `n!` pairings.
pub fn forward_fold(fold: &Fold) -> Result<Complex64> {
    Ok(pairwise_sum(&forward_terms_fold(fold)?))
}

/// Forward contribution for the trajectories at `λ` and `τ`.
pub fn forward_contribution(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    units: &UnitSystem,
) -> Result<Complex64> {
    forward_fold(&Fold::from_trajectory(
        traj, lambda, tau, l0_lambda, l0_tau, units,
    )?)
}

/// `k_F = (2/λ_c)ⁿ (L0/√(2π))^{3n}`, the identity-pairing forward norm.
pub fn k_forward(n: usize, l0: f64, units: &UnitSystem) -> f64 {
    let n = n as f64;
    (n * ((2.0 / units.compton_length).ln() + 3.0 * (l0 / (2.0 * PI).sqrt()).ln())).exp()
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        len => pairwise_sum(&v[..len / 2]) + pairwise_sum(&v[len / 2..]),
    }
}

/// Forward and connected parts of one scalar product.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProductParts {
    /// Forward contribution `F(λ,τ)`.
    pub forward: Complex64,
    /// Connected contribution `C(λ,τ)`.
    pub connected: Complex64,
    /// Interaction strength `c_{2n}` (length^{2n−4}).
    pub c2n: f64,
    /// Overall phase `θ_F`.
    pub theta_f: f64,
    /// Connected phase `θ_C`.
    pub theta_c: f64,
    /// Diagnostics such as violated classical-particle bounds.
    pub warnings: Vec<String>,
}

impl ScalarProductParts {
    /// `F + c_{2n} C`.
    pub fn total(&self) -> Complex64 {
        self.forward + self.connected * self.c2n
    }
}

/// Scalar product parts for the trajectories at `λ` and `τ`.
///
/// The connected part uses the general closed form, which reduces to the
/// center-of-mass form when momentum is conserved.
pub fn scalar_product(
    traj: &TrajectorySet,
    lambda: f64,
    tau: f64,
    l0_lambda: f64,
    l0_tau: f64,
    c2n: f64,
    units: &UnitSystem,
) -> Result<ScalarProductParts> {
    let fold = Fold::from_trajectory(traj, lambda, tau, l0_lambda, l0_tau, units)?;
    let mut parts = scalar_product_fold(&fold, c2n)?;
    for (t, l0) in [(lambda, l0_lambda), (tau, l0_tau)] {
        let rep = check_nrcp(traj, l0, t, DEFAULT_MARGIN, units)?;
        if !rep.passes() {
            parts.warnings.push(format!(
                "classical-particle bounds violated at λ = {t}: ratios {:?}",
                rep.margins
            ));
        }
    }
    Ok(parts)
}

/// Scalar product parts of an arbitrary fold.
pub fn scalar_product_fold(fold: &Fold, c2n: f64) -> Result<ScalarProductParts> {
    let m = moments_of_fold(fold);
    let mut warnings = Vec::new();
    if fold.n > 8 {
        warnings.push(format!("forward sum enumerates {}! pairings", fold.n));
    }
    let forward = forward_fold(fold)?;
    let connected = connected_general_fold(fold)?;
    let va = m.v_a_sq();
    let theta_c = m.theta_f
        - (m.delta_t + m.l_e * m.l_e * m.delta_q.dot(&m.a_mean)) * m.v_a_dot_b() / va
        + m.l_e * m.l_e * m.delta_q.dot(&m.b_mean);
    Ok(ScalarProductParts {
        forward,
        connected,
        c2n,
        theta_f: m.theta_f,
        theta_c,
        warnings,
    })
}

/// Squared semi-norm `F(λ,λ) + c_{2n} C(λ,λ)` of the state at `λ`.
pub fn state_norm_sq(
    traj: &TrajectorySet,
    lambda: f64,
    l0: f64,
    c2n: f64,
    units: &UnitSystem,
) -> Result<f64> {
    let parts = scalar_product(traj, lambda, lambda, l0, l0, c2n, units)?;
    norm_from_parts(&parts)
}

/// Real squared norm from diagonal parts, checking reality and sign.
pub fn norm_from_parts(parts: &ScalarProductParts) -> Result<f64> {
    let f = parts.forward;
    let c = parts.connected;
    if f.im.abs() > 1e-10 * f.norm().max(f64::MIN_POSITIVE)
        || c.im.abs() > 1e-10 * c.norm().max(f64::MIN_POSITIVE)
    {
        return Err(Error::Internal(format!(
            "diagonal scalar product is not real: F = {f}, C = {c}"
        )));
    }
    let v = f.re + parts.c2n * c.re;
    if !(v >= 0.0) {
        return Err(Error::Internal(format!("negative squared norm {v}")));
    }
    Ok(v)
}
