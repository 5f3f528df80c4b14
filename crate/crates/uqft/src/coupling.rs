//! The classical potential strength `g` implied by the four-point strength
//! `c4`: maximizing the persistence of circular-orbit likelihoods, the cubic
//! for `x = 1/√a1`, and the orbit-dependent selection of `L0`.

use std::f64::consts::{E, PI};

use crate::likelihood::{circular_small_angle_coefficient, CircularOrbitCase};
use crate::roots::brent;
use crate::units::UnitSystem;
use crate::{Error, Result};

/// `d²I/dθ²` at `θ = 0` for the circular orbit.
pub fn second_derivative_at_zero(case: &CircularOrbitCase) -> f64 {
    -2.0 * circular_small_angle_coefficient(case)
}

/// `d²I/dθ²` at `θ = 0` with `e^{−2a0−2a1}` neglected against one in the
/// denominator.
pub fn second_derivative_simplified(case: &CircularOrbitCase) -> f64 {
    let (a0, a1, cr) = (case.a0, case.a1, case.c_r);
    let e2 = (-2.0 * a0).exp();
    (-a1 - 2.0 * a0 * (-2.0 * a0 - 2.0 * a1).exp() - cr * a0 * e2) / (1.0 + cr * e2)
}

/// `d²I/dθ²` at `θ = 0` as a function of `a1` at fixed `a0` and `k_R`,
/// with every `e^{−2a0−2a1}` term dropped. Its stationary point in `a1` is
/// the root of the cubic.
pub fn second_derivative_reduced(a0: f64, a1: f64, k_r: f64) -> f64 {
    let eps = k_r * (-2.0 * a0).exp() / a1.sqrt();
    (-a1 - eps * a0) / (1.0 + eps)
}

/// `x³ + a x + b = 0` for `x = 1/√a1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicProblem {
    /// `a0 = r²/8L0²`.
    pub a0: f64,
    /// `k_R`.
    pub k_r: f64,
    /// `a = −3/a0`.
    pub a: f64,
    /// `b = −2/(k_R a0 e^{−2a0})`.
    pub b: f64,
}

impl CubicProblem {
    /// Cubic coefficients from `a0` and `k_R`.
    pub fn new(a0: f64, k_r: f64) -> Result<Self> {
        if !(a0 > 0.0) {
            return Err(Error::InvalidInput(format!("a0 = {a0} must be positive")));
        }
        if !(k_r > 0.0) {
            return Err(Error::NoSolution(format!(
                "the cubic has no solution for k_R = {k_r}"
            )));
        }
        Ok(Self {
            a0,
            k_r,
            a: -3.0 / a0,
            b: -2.0 / (k_r * a0 * (-2.0 * a0).exp()),
        })
    }

    /// `ln(−b)`, finite even when `b` overflows.
    pub fn ln_minus_b(&self) -> f64 {
        2f64.ln() + 2.0 * self.a0 - (self.k_r * self.a0).ln()
    }

    /// Residual `|x³ + ax + b|` relative to the largest term.
    pub fn relative_residual(&self, x: f64) -> f64 {
        let terms = [x.powi(3), self.a * x, self.b];
        let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
        terms.iter().sum::<f64>().abs() / scale
    }
}

/// Weak-coupling root `x ≈ (2e^{2a0}/(k_R a0))^{1/3}`.
pub fn weak_coupling_root(prob: &CubicProblem) -> f64 {
    (prob.ln_minus_b() / 3.0).exp()
}

/// Largest real root of the cubic by Cardano's formula, written for the
/// scaled variable `y = x/s` with `s³ = −b` so that `y³ + p y − 1 = 0`.
pub fn solve_cubic(prob: &CubicProblem) -> Result<f64> {
    let s = weak_coupling_root(prob);
    if !s.is_finite() {
        return Err(Error::OutOfRange(format!(
            "root scale overflows for a0 = {}",
            prob.a0
        )));
    }
    let p = prob.a / (s * s);
    let disc = 0.25 + p.powi(3) / 27.0;
    let y = if disc >= 0.0 {
        let a = (0.5 + disc.sqrt()).cbrt();
        a - p / (3.0 * a)
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let phi = (-3.0 / (p * m)).acos() / 3.0;
        m * phi.cos()
    };
    // One Newton step removes the rounding left by the closed form.
    let y = y - (y * y * y + p * y - 1.0) / (3.0 * y * y + p);
    Ok(s * y)
}

/// Estimate of `g` with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEstimate {
    /// Potential strength `g` (length).
    pub g: f64,
    /// Violated assumptions.
    pub warnings: Vec<String>,
}

fn nrcp_warnings(r: f64, l0: f64, units: &UnitSystem) -> Vec<String> {
    let mut w = Vec::new();
    if r < 10.0 * l0 {
        w.push(format!("r/L0 = {:.3} is not large", r / l0));
    }
    if l0 < 10.0 * units.compton_length {
        w.push(format!(
            "L0/λ_c = {:.3} is not large",
            l0 / units.compton_length
        ));
    }
    w
}

/// `g = (π c4 λ_c⁴ r^{7/2} e^{−r²/4L0²}/(512√2 L0⁶))^{2/3}` from the
/// weak-coupling root.
pub fn g_from_c4(r: f64, l0: f64, c4: f64, units: &UnitSystem) -> Result<CouplingEstimate> {
    if !(r > 0.0 && l0 > 0.0 && c4 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need r, L0 > 0 and c4 ≥ 0, got {r}, {l0}, {c4}"
        )));
    }
    let lc = units.compton_length;
    let ln_inner = (PI * c4).ln() + 4.0 * lc.ln() + 3.5 * r.ln()
        - r * r / (4.0 * l0 * l0)
        - (512.0 * 2f64.sqrt()).ln()
        - 6.0 * l0.ln();
    let g = if c4 == 0.0 {
        0.0
    } else {
        (2.0 / 3.0 * ln_inner).exp()
    };
    Ok(CouplingEstimate {
        g,
        warnings: nrcp_warnings(r, l0, units),
    })
}

/// `g = a1 λ_c² r/L0²` from the full root of the cubic.
pub fn g_from_cubic(r: f64, l0: f64, c4: f64, units: &UnitSystem) -> Result<CouplingEstimate> {
    let lc = units.compton_length;
    let a0 = r * r / (8.0 * l0 * l0);
    let k_r = PI * c4 * lc / (32.0 * 2f64.sqrt() * l0);
    let x = solve_cubic(&CubicProblem::new(a0, k_r)?)?;
    Ok(CouplingEstimate {
        g: lc * lc * r / (l0 * l0 * x * x),
        warnings: nrcp_warnings(r, l0, units),
    })
}

/// `L0⁶ = β0 r^{7/2} e^{−r²/4L0²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L0SelectionRule {
    /// `β0` (length^{5/2}).
    pub beta0: f64,
}

impl L0SelectionRule {
    /// Largest `r` with a solution: `(12/e)^{6/5} β0^{2/5}`.
    pub fn existence_bound(&self) -> f64 {
        (12.0 / E).powf(1.2) * self.beta0.powf(0.4)
    }

    /// Log-residual `6 ln L0 + r²/4L0² − ln β0 − (7/2) ln r`.
    pub fn log_residual(&self, r: f64, l0: f64) -> f64 {
        6.0 * l0.ln() + r * r / (4.0 * l0 * l0) - self.beta0.ln() - 3.5 * r.ln()
    }

    /// Potential strength implied by the rule: `(π λ_c⁴ c4/(512√2 β0))^{2/3}`.
    pub fn g(&self, c4: f64, units: &UnitSystem) -> f64 {
        (PI * units.compton_length.powi(4) * c4 / (512.0 * 2f64.sqrt() * self.beta0))
            .powf(2.0 / 3.0)
    }
}

/// All positive roots `L0` of the selection rule, ascending. The
/// log-residual has a single minimum at `L0 = r/√12`, so there are zero,
/// one or two roots.
pub fn solve_l0_selection(rule: &L0SelectionRule, r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0 && rule.beta0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need r > 0 and β0 > 0, got {r} and {}",
            rule.beta0
        )));
    }
    let f = |t: f64| rule.log_residual(r, t.exp());
    let t_min = (r / 12f64.sqrt()).ln();
    let f_min = f(t_min);
    if f_min > 0.0 {
        return Ok(Vec::new());
    }
    if f_min == 0.0 {
        return Ok(vec![t_min.exp()]);
    }
    let mut roots = Vec::with_capacity(2);
    for dir in [-1.0, 1.0] {
        let mut step = 1.0;
        while f(t_min + dir * step) <= 0.0 {
            step *= 2.0;
            if step > 1e4 {
                return Err(Error::Internal(
                    "selection rule bracket search diverged".into(),
                ));
            }
        }
        let t = brent(f, t_min, t_min + dir * step, 1e-15, 200)?;
        roots.push(t.exp());
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}
