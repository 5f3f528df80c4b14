//! Brute-force quadrature oracles for the closed forms of the library.
//!
//! Every oracle evaluates a defining integral directly, with adaptive
//! Gauss–Kronrod quadrature or a self-checked tensor Gauss–Legendre sum. None of them calls the closed form it is meant
//! to check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::packets::{packet_fourier, packet_position, MinimumPacket, PacketMoments};
use crate::quadrature::{composite_gauss_legendre, integrate, integrate_fallible, Options};
use crate::scalar_products::{Fold, FoldRow};
use crate::{Error, Result, Vec3};

/// Nested 3-d adaptive quadrature over the box `[lo, hi]`.
pub fn integrate_3d<F>(
    mut f: F,
    lo: Vec3,
    hi: Vec3,
    inner: Options,
    outer: Options,
) -> Result<Complex64>
where
    F: FnMut(&Vec3) -> Complex64,
{
    let est = integrate_fallible(
        |x| {
            integrate_fallible(
                |y| Ok(integrate(|z| f(&Vec3::new(x, y, z)), lo.z, hi.z, inner)?.value),
                lo.y,
                hi.y,
                inner,
            )
            .map(|e| e.value)
        },
        lo.x,
        hi.x,
        outer,
    )?;
    Ok(est.value)
}

/// `∫ exp(−α s² + β s) ds` over the real line by 1-d adaptive quadrature on
/// a window around the envelope maximum.
pub fn gauss_sum_quadrature(alpha: Complex64, beta: Complex64, opts: Options) -> Result<Complex64> {
    if !(alpha.re > 0.0) {
        return Err(Error::Domain(format!(
            "Re α = {} must be positive",
            alpha.re
        )));
    }
    let centre = beta.re / (2.0 * alpha.re);
    let half = (120.0 / alpha.re).sqrt();
    Ok(integrate(
        |s| (-alpha * s * s + beta * s).exp(),
        centre - half,
        centre + half,
        opts,
    )?
    .value)
}

/// `L_k³ L_j³ ∫ dp g_k(p) conj(g_j(p))` with `g(p) = e^{−L²(p−q)² + i(p−q)·h}`
/// by nested 3-d quadrature.
pub fn pair_overlap_quadrature(
    lk: f64,
    qk: &Vec3,
    hk: &Vec3,
    lj: f64,
    qj: &Vec3,
    hj: &Vec3,
    rel: f64,
) -> Result<Complex64> {
    let lmin = lk.min(lj);
    let reach = 9.0 / lmin;
    let lo = qk.inf(qj).add_scalar(-reach);
    let hi = qk.sup(qj).add_scalar(reach);
    let pref = (lk * lj).powi(3);
    let f = |p: &Vec3| {
        let (dk, dj) = (p - qk, p - qj);
        let re = -lk * lk * dk.norm_squared() - lj * lj * dj.norm_squared();
        Complex64::from_polar(pref * re.exp(), dk.dot(hk) - dj.dot(hj))
    };
    integrate_3d(f, lo, hi, Options::rel(rel * 1e-2), Options::rel(rel))
}

/// `(L³/π^{3/2}) ∫ dp e^{−L²p² + i s p·β}` by nested 3-d quadrature.
pub fn p_reduction_quadrature(l: f64, s: f64, beta: &Vec3, rel: f64) -> Result<Complex64> {
    let reach = 9.0 / l;
    let lo = Vec3::repeat(-reach);
    let hi = Vec3::repeat(reach);
    let pref = l.powi(3) / PI.powf(1.5);
    let f =
        |p: &Vec3| Complex64::from_polar(pref * (-l * l * p.norm_squared()).exp(), s * p.dot(beta));
    integrate_3d(
        f,
        lo,
        hi,
        Options::rel(rel * 1e-2).with_abs(1e-16),
        Options::rel(rel).with_abs(1e-15),
    )
}

/// `β_k = a_k u0 − u + b_k` for every row of a fold.
pub fn fold_betas(fold: &Fold, u0: f64, u: &Vec3) -> Vec<Vec3> {
    fold.rows.iter().map(|r| r.a * u0 - u + r.b).collect()
}

/// Energy, momentum and phase bookkeeping of a fold taken directly from the
/// packet energies `ω ≈ (1 + λ_c² q²/2)/λ_c`.
fn fold_phases(fold: &Fold) -> (f64, Vec3, f64) {
    let lc = fold.units.compton_length;
    let mut dt = 0.0;
    let mut dq = Vec3::zeros();
    let mut phi = 0.0;
    for r in &fold.rows {
        let w = 1.0 / lc + 0.5 * lc * r.q.norm_squared();
        dt += r.s * w;
        dq += r.q * r.s;
        phi -= r.s * w * r.tau;
    }
    (dt, dq, phi)
}

/// Pair-envelope window for `u0`: outside it some bra/ket pair of row
/// Gaussians bounds the integrand by `e^{−tail}` whatever `u` is.
pub fn u0_window(fold: &Fold, tail: f64) -> Result<(f64, f64)> {
    let n = fold.n;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for rk in &fold.rows[..n] {
        for rj in &fold.rows[n..] {
            let da = rk.a - rj.a;
            let na = da.norm();
            if na < 1e-300 {
                continue;
            }
            let db = rk.b - rj.b;
            let centre = -da.dot(&db) / (na * na);
            let half = (4.0 * (rk.l * rk.l + rj.l * rj.l) * tail).sqrt() / na;
            lo = lo.max(centre - half);
            hi = hi.min(centre + half);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::Degenerate("no bra/ket pair confines u0".into()));
    }
    Ok((lo, hi))
}

/// Settings of the connected-contribution quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectedQuadrature {
    /// Relative tolerance of the outer `u0` quadrature.
    pub outer_rel: f64,
    /// Relative tolerance of the inner spatial quadratures.
    pub inner_rel: f64,
    /// Exponent at which Gaussian tails are truncated.
    pub tail: f64,
}

impl Default for ConnectedQuadrature {
    fn default() -> Self {
        Self {
            outer_rel: 1e-9,
            inner_rel: 1e-12,
            tail: 100.0,
        }
    }
}

/// The reduced connected integral
/// `e^{iφ_T}/(2π)⁴ ∫d⁴u e^{iδT u0 + iδq·u} Π_k e^{−(a_k u0 − u + b_k)²/4L_k²}`
/// by adaptive quadrature in `u0` around a product of three 1-d adaptive
/// quadratures in the Cartesian components of `u`.
pub fn connected_quadrature(fold: &Fold, cfg: ConnectedQuadrature) -> Result<Complex64> {
    let (dt, dq, phi) = fold_phases(fold);
    let (lo, hi) = u0_window(fold, cfg.tail)?;
    let lmax = fold.rows.iter().map(|r| r.l).fold(0.0, f64::max);
    let reach = 2.0 * lmax * cfg.tail.sqrt();
    let rows: &[FoldRow] = &fold.rows;
    let inner = Options::rel(cfg.inner_rel).with_abs(1e-300);
    let spatial = |u0: f64| -> Result<Complex64> {
        let mut prod = Complex64::new(1.0, 0.0);
        for c in 0..3 {
            let centres: Vec<f64> = rows.iter().map(|r| r.a[c] * u0 + r.b[c]).collect();
            let cmin = centres.iter().copied().fold(f64::INFINITY, f64::min);
            let cmax = centres.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let est = integrate(
                |x| {
                    let e: f64 = rows
                        .iter()
                        .zip(&centres)
                        .map(|(r, ck)| (ck - x).powi(2) / (4.0 * r.l * r.l))
                        .sum();
                    Complex64::from_polar((-e).exp(), dq[c] * x)
                },
                cmin - reach,
                cmax + reach,
                inner,
            )?;
            prod *= est.value;
        }
        Ok(prod * Complex64::from_polar(1.0, dt * u0))
    };
    let est = integrate_fallible(
        spatial,
        lo,
        hi,
        Options::rel(cfg.outer_rel).with_max_subdivisions(20_000),
    )?;
    Ok(est.value * Complex64::from_polar((2.0 * PI).powi(4).recip(), phi))
}

/// Sample points `(u0, u)` inside the dominant region of the reduced
/// connected integrand, used to check the analytic momentum reduction.
pub fn connected_sample_points(fold: &Fold, count: usize, tail: f64) -> Result<Vec<(f64, Vec3)>> {
    let (lo, hi) = u0_window(fold, tail)?;
    let mid = 0.5 * (lo + hi);
    let width = 0.05 * (hi - lo);
    let lmin = fold.rows.iter().map(|r| r.l).fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / count.max(1) as f64;
        let u0 = mid + width * (2.0 * t - 1.0);
        let centroid =
            fold.rows.iter().map(|r| r.a * u0 + r.b).sum::<Vec3>() / fold.rows.len() as f64;
        let phase = 2.0 * PI * t;
        let offset = Vec3::new(phase.cos(), phase.sin(), (2.0 * phase).cos()) * (0.5 * lmin);
        out.push((u0, centroid + offset));
    }
    Ok(out)
}

/// Norm, mean and first-axis variance of a density on the cube of half-width
/// `reach` around `center`, by a tensor composite Gauss–Legendre sum.
fn tensor_moments<F>(
    dens: &F,
    center: &Vec3,
    reach: f64,
    panels: usize,
    order: usize,
) -> (f64, Vec3, f64)
where
    F: Fn(&Vec3) -> f64,
{
    let (nodes, weights) = composite_gauss_legendre(-reach, reach, panels, order);
    let (mut norm, mut first, mut second) = (0.0, Vec3::zeros(), 0.0);
    for (dx, wx) in nodes.iter().zip(&weights) {
        for (dy, wy) in nodes.iter().zip(&weights) {
            for (dz, wz) in nodes.iter().zip(&weights) {
                let d = Vec3::new(*dx, *dy, *dz);
                let w = wx * wy * wz * dens(&(center + d));
                norm += w;
                first += d * w;
                second += dx * dx * w;
            }
        }
    }
    let shift = first / norm;
    (norm, center + shift, second / norm - shift.x * shift.x)
}

/// Moments by a fine tensor rule, checked against a coarser one to `rel`.
fn converged_moments<F>(dens: F, center: &Vec3, reach: f64, rel: f64) -> Result<(f64, Vec3, f64)>
where
    F: Fn(&Vec3) -> f64,
{
    let fine = tensor_moments(&dens, center, reach, 3, 20);
    let coarse = tensor_moments(&dens, center, reach, 2, 20);
    let scale = fine.2.sqrt();
    let gap = ((fine.0 - coarse.0).abs() / fine.0)
        .max((fine.1 - coarse.1).norm() / scale)
        .max((fine.2 - coarse.2).abs() / fine.2);
    if !(gap <= rel) {
        return Err(Error::Tolerance(format!(
            "moment rules disagree by {gap:e} (tolerance {rel:e})"
        )));
    }
    Ok(fine)
}

/// Position moments of a packet by 3-d quadrature of `|φ(x)|²`.
pub fn position_moments_quadrature(pkt: &MinimumPacket, rel: f64) -> Result<(f64, Vec3, f64)> {
    let var_guess = pkt.ell0_sq.norm_sqr() / (pkt.l0 * pkt.l0);
    converged_moments(
        |x| packet_position(x, pkt).norm_sqr(),
        &pkt.xi,
        9.0 * var_guess.sqrt(),
        rel,
    )
}

/// Momentum moments of a packet by 3-d quadrature of `|φ̃(p)|²`.
pub fn momentum_moments_quadrature(pkt: &MinimumPacket, rel: f64) -> Result<(f64, Vec3, f64)> {
    converged_moments(
        |p| packet_fourier(p, pkt).norm_sqr(),
        &pkt.q,
        9.0 / (2.0 * pkt.l0),
        rel,
    )
}

/// All packet moments by quadrature, in the layout of the closed forms.
pub fn packet_moments_quadrature(pkt: &MinimumPacket, rel: f64) -> Result<PacketMoments> {
    let (_, mean_x, var_x) = position_moments_quadrature(pkt, rel)?;
    let (_, mean_p, var_p) = momentum_moments_quadrature(pkt, rel)?;
    Ok(PacketMoments {
        mean_x,
        mean_p,
        var_x,
        var_p,
        heisenberg_product: (var_x * var_p).sqrt(),
    })
}

/// `(2π)^{−3/2} ∫ dp φ̃(p) e^{−ip·x}` by 3-d quadrature.
pub fn inverse_transform_quadrature(pkt: &MinimumPacket, x: &Vec3, rel: f64) -> Result<Complex64> {
    let reach = 10.0 / pkt.l0;
    let (lo, hi) = (pkt.q.add_scalar(-reach), pkt.q.add_scalar(reach));
    let v = integrate_3d(
        |p| packet_fourier(p, pkt) * Complex64::from_polar(1.0, -p.dot(x)),
        lo,
        hi,
        Options::rel(rel * 1e-2).with_abs(1e-18),
        Options::rel(rel).with_abs(1e-16),
    )?;
    Ok(v / (2.0 * PI).powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{gauss_sum, packet_moments};
    use crate::scalar_products::{connected_general_fold, pair_overlap};
    use crate::trajectory::{integrate_newton, PairPotential, Snapshot, TrajectorySet};
    use crate::units::UnitSystem;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_sum_matches_quadrature() {
        for (a, b) in [
            ((1.0, 0.5), (0.3, -1.0)),
            ((0.7, -1.5), (-1.2, 0.4)),
            ((2.0, 0.0), (0.0, 2.0)),
        ] {
            let (alpha, beta) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
            let q = gauss_sum_quadrature(alpha, beta, Options::rel(1e-13)).unwrap();
            let c = gauss_sum(alpha, beta).unwrap();
            assert!((q - c).norm() < 1e-11 * c.norm(), "{q} vs {c}");
        }
    }

    #[test]
    fn pair_overlap_oracle() {
        let (qk, qj) = (Vec3::new(0.1, -0.05, 0.0), Vec3::new(0.02, 0.0, 0.08));
        let (hk, hj) = (Vec3::new(3.0, 1.0, -2.0), Vec3::new(-1.0, 2.5, 0.5));
        let (lk, lj) = (4.0, 5.5);
        let q = pair_overlap_quadrature(lk, &qk, &hk, lj, &qj, &hj, 1e-10).unwrap();
        let c = pair_overlap(lk, &qk, &hk, lj, &qj, &hj);
        assert!((q - c).norm() < 1e-8 * c.norm(), "{q} vs {c}");
    }

    #[test]
    fn p_reduction_is_gaussian_in_beta() {
        let beta = Vec3::new(2.0, -1.0, 0.5);
        for s in [-1.0, 1.0] {
            let q = p_reduction_quadrature(3.0, s, &beta, 1e-10).unwrap();
            let expect = (-beta.norm_squared() / 36.0).exp();
            assert!((q - expect).norm() < 1e-8, "{q}");
        }
    }

    #[test]
    fn connected_oracle_for_uncentered_free_particles() {
        let s = Snapshot::new(
            vec![Vec3::new(6.0, 0.0, 1.0), Vec3::new(-4.0, 2.0, 0.0)],
            vec![Vec3::new(1e-3, 3e-3, 0.0), Vec3::new(-2e-3, 0.5e-3, 1e-3)],
        )
        .unwrap();
        let traj = TrajectorySet::free_uncentered(s).unwrap();
        let fold =
            Fold::from_trajectory(&traj, 400.0, -300.0, 4.0, 5.0, &UnitSystem::natural()).unwrap();
        let q = connected_quadrature(
            &fold,
            ConnectedQuadrature {
                outer_rel: 1e-8,
                inner_rel: 1e-11,
                tail: 80.0,
            },
        )
        .unwrap();
        let c = connected_general_fold(&fold).unwrap();
        assert!((q - c).norm() < 1e-6 * c.norm(), "{q} vs {c}");
    }

    #[test]
    fn connected_oracle_for_bound_pair() {
        let s = Snapshot::new(
            vec![Vec3::new(5.0, 0.0, 0.0), Vec3::new(-5.0, 0.0, 0.0)],
            vec![Vec3::new(0.0, 5e-3, 0.0), Vec3::new(0.0, -5e-3, 0.0)],
        )
        .unwrap();
        let traj =
            integrate_newton(&s, &PairPotential::InverseR(1e-3), (-500.0, 2000.0), 1e-12).unwrap();
        let fold =
            Fold::from_trajectory(&traj, 1500.0, -200.0, 3.0, 3.5, &UnitSystem::natural()).unwrap();
        let q = connected_quadrature(&fold, ConnectedQuadrature::default()).unwrap();
        let c = connected_general_fold(&fold).unwrap();
        assert!((q - c).norm() < 1e-6 * c.norm(), "{q} vs {c}");
    }

    #[test]
    fn moments_match_closed_forms() {
        let u = UnitSystem::natural();
        let pkt = MinimumPacket::new(
            Vec3::new(1.0, -2.0, 0.5),
            Vec3::new(0.1, 0.0, -0.2),
            2.0,
            3.0,
            &u,
        )
        .unwrap();
        let q = packet_moments_quadrature(&pkt, 1e-10).unwrap();
        let c = packet_moments(&pkt, &u);
        assert_relative_eq!(q.var_x, c.var_x, max_relative = 1e-8);
        assert_relative_eq!(q.var_p, c.var_p, max_relative = 1e-8);
        assert!((q.mean_x - c.mean_x).norm() < 1e-8);
        assert!((q.mean_p - c.mean_p).norm() < 1e-8);
    }

    #[test]
    fn inverse_transform_matches_position_form() {
        let u = UnitSystem::natural();
        let pkt = MinimumPacket::new(
            Vec3::new(0.5, 0.0, -0.5),
            Vec3::new(0.3, -0.1, 0.0),
            1.5,
            2.0,
            &u,
        )
        .unwrap();
        for x in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 2.0, -1.0)] {
            let q = inverse_transform_quadrature(&pkt, &x, 1e-10).unwrap();
            let c = packet_position(&x, &pkt);
            assert!(
                (q - c).norm() < 1e-8 * packet_position(&pkt.xi, &pkt).norm(),
                "{q} vs {c}"
            );
        }
    }
}
