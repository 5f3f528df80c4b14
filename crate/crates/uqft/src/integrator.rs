//! Dormand–Prince 5(4) embedded Runge–Kutta integration with step-size
//! control and retained step data for dense output.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Relative local error tolerance.
    pub rtol: f64,
    /// Absolute local error tolerance.
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    /// Largest allowed step magnitude.
    pub max_step: f64,
    /// Maximum number of attempted steps.
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl StepControl {
    /// Control with equal relative and absolute tolerance `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

/// Accepted steps of an integration: times, states and derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Step times, monotone in the direction of integration.
    pub t: Vec<f64>,
    /// States at the step times.
    pub y: Vec<Vec<f64>>,
    /// Right-hand side evaluated at the step times.
    pub dy: Vec<Vec<f64>>,
    /// Sum of the accepted local error estimates (max norm).
    pub global_error: f64,
    /// Number of rejected steps.
    pub rejected: usize,
}

impl Solution {
    /// Index `i` of the step interval `[t_i, t_{i+1}]` containing `t`.
    pub fn locate(&self, t: f64) -> Result<usize> {
        let n = self.t.len();
        let (lo, hi) = (self.t[0].min(self.t[n - 1]), self.t[0].max(self.t[n - 1]));
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfRange(format!(
                "λ = {t} outside integrated span [{lo}, {hi}]"
            )));
        }
        if n == 1 {
            return Ok(0);
        }
        let forward = self.t[n - 1] >= self.t[0];
        let idx = if forward {
            self.t.partition_point(|&s| s <= t)
        } else {
            self.t.partition_point(|&s| s >= t)
        };
        Ok(idx.saturating_sub(1).min(n - 2))
    }

    /// Cubic Hermite interpolation of the state at `t`.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        if self.t.len() == 1 {
            return Ok(self.y[0].clone());
        }
        let i = self.locate(t)?;
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok((0..self.y[i].len())
            .map(|j| {
                h00 * self.y[i][j]
                    + h10 * h * self.dy[i][j]
                    + h01 * self.y[i + 1][j]
                    + h11 * h * self.dy[i + 1][j]
            })
            .collect())
    }

    /// Final state.
    pub fn last(&self) -> &[f64] {
        self.y.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], ctl: &StepControl) -> f64 {
    let mut acc: f64 = 0.0;
    for j in 0..y.len() {
        let scale = ctl.atol + ctl.rtol * y[j].abs().max(y_new[j].abs());
        acc = acc.max((err[j] / scale).abs());
    }
    acc
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with the Dormand–Prince pair.
///
/// `f` writes the derivative into its third argument and may fail, which
/// aborts the integration with that error. Integration backwards in time is
/// allowed (`t1 < t0`).
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, ctl: StepControl) -> Result<Solution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidInput(
            "integration limits must be finite".into(),
        ));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    if !(ctl.rtol > 0.0 && ctl.atol >= 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    let dim = y0.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y = y0.to_vec();
    f(t0, &y, &mut k[0])?;
    let mut sol = Solution {
        t: vec![t0],
        y: vec![y.clone()],
        dy: vec![k[0].clone()],
        global_error: 0.0,
        rejected: 0,
    };
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut h = match ctl.initial_step {
        Some(h) => h.abs(),
        None => {
            let d0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let d1 = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
            let guess = if d0 < 1e-5 || d1 < 1e-5 {
                1e-6 * span
            } else {
                0.01 * d0 / d1
            };
            guess.min(span)
        }
    }
    .min(ctl.max_step);
    let mut t = t0;
    let mut steps = 0usize;
    let mut err_vec = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(Error::Tolerance(format!(
                "step limit {} reached at t = {t}",
                ctl.max_steps
            )));
        }
        let last = h >= (t1 - t).abs();
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;
        let stages: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        let mut failed = None;
        for (s, a) in stages.iter().enumerate() {
            for j in 0..dim {
                let mut acc = 0.0;
                for (m, am) in a.iter().enumerate() {
                    acc += am * k[m][j];
                }
                tmp[j] = y[j] + hs * acc;
            }
            let (_, tail) = k.split_at_mut(s + 1);
            if let Err(e) = f(t + C[s + 1] * hs, &tmp, &mut tail[0]) {
                failed = Some(e);
                break;
            }
        }
        if let Some(e) = failed {
            return Err(e);
        }
        for j in 0..dim {
            let mut acc = 0.0;
            for m in 0..6 {
                acc += B5[m] * k[m][j];
            }
            y_new[j] = y[j] + hs * acc;
        }
        f(t + hs, &y_new, &mut k[6])?;
        for j in 0..dim {
            let mut acc = 0.0;
            for m in 0..7 {
                acc += (B5[m] - B4[m]) * k[m][j];
            }
            err_vec[j] = hs * acc;
        }
        let err = error_norm(&y, &y_new, &err_vec, &ctl);
        if !err.is_finite() {
            return Err(Error::Tolerance(format!(
                "non-finite error estimate at t = {t}"
            )));
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            sol.global_error += err_vec.iter().map(|e| e.abs()).fold(0.0, f64::max);
            sol.t.push(t);
            sol.y.push(y.clone());
            sol.dy.push(k[0].clone());
            h = (h * factor).min(ctl.max_step);
        } else {
            sol.rejected += 1;
            h *= factor.min(1.0);
            if h < 1e-15 * t.abs().max(span) {
                return Err(Error::Tolerance(format!("step size underflow at t = {t}")));
            }
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let sol = dopri5(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            5.0,
            StepControl::with_tolerance(1e-12),
        )
        .unwrap();
        assert_relative_eq!(sol.last()[0], (-5.0f64).exp(), max_relative = 1e-10);
        let mid = sol.interpolate(2.345).unwrap();
        assert_relative_eq!(mid[0], (-2.345f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let sol = dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            -3.0,
            StepControl::with_tolerance(1e-12),
        )
        .unwrap();
        assert_relative_eq!(sol.last()[0], 3.0f64.cos(), max_relative = 1e-9);
        assert_relative_eq!(sol.last()[1], 3.0f64.sin(), max_relative = 1e-9);
        assert!(sol.interpolate(1.0).is_err());
        let v = sol.interpolate(-1.5).unwrap();
        assert_relative_eq!(v[0], 1.5f64.cos(), max_relative = 1e-8);
    }

    #[test]
    fn fifth_order_convergence_with_fixed_steps() {
        let run = |h: f64| {
            let sol = dopri5(
                |t, _, dy| {
                    dy[0] = t.cos();
                    Ok(())
                },
                0.0,
                &[0.0],
                1.0,
                StepControl {
                    rtol: 1.0,
                    atol: 1.0,
                    initial_step: Some(h),
                    max_step: h,
                    ..StepControl::default()
                },
            )
            .unwrap();
            (sol.last()[0] - 1f64.sin()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 20.0, "ratio {ratio}");
    }

    #[test]
    fn propagates_rhs_errors() {
        let r = dopri5(
            |_, _, _| Err(Error::Domain("boom".into())),
            0.0,
            &[1.0],
            1.0,
            StepControl::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
