//! Classical n-body trajectories of equal-mass particles, their conserved
//! quantities and Newtonian integration.
//!
//! Positions are lengths and velocities are fractions of `c`; the trajectory
//! parameter `λ` is a time measured as a length. Trajectories are evaluated
//! through [`TrajectorySet::snapshot`], which is O(1) for every
//! representation (dense interpolants locate the step by bisection).

use std::fmt;
use std::sync::Arc;

use crate::integrator::{dopri5, Solution, StepControl};
use crate::units::UnitSystem;
use crate::{Error, Result, Vec3};

/// Positions and velocities of all particles at one value of `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Particle positions ξ_k (length).
    pub positions: Vec<Vec3>,
    /// Particle velocities ξ̇_k (fraction of c).
    pub velocities: Vec<Vec3>,
}

impl Snapshot {
    /// Builds a snapshot, checking that both lists have the same length.
    pub fn new(positions: Vec<Vec3>, velocities: Vec<Vec3>) -> Result<Self> {
        if positions.len() != velocities.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} positions but {} velocities",
                positions.len(),
                velocities.len()
            )));
        }
        Ok(Self {
            positions,
            velocities,
        })
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Fails when any coordinate is non-finite or any speed reaches 1.
    pub fn validate(&self) -> Result<()> {
        for (k, (x, v)) in self.positions.iter().zip(&self.velocities).enumerate() {
            if !(x.iter().all(|c| c.is_finite()) && v.iter().all(|c| c.is_finite())) {
                return Err(Error::InvalidTrajectory(format!(
                    "non-finite state for particle {k}"
                )));
            }
            let speed = v.norm();
            if speed >= 1.0 {
                return Err(Error::Superluminal { particle: k, speed });
            }
        }
        Ok(())
    }

    /// Sum of positions and sum of velocities.
    pub fn centroid_sums(&self) -> (Vec3, Vec3) {
        (self.positions.iter().sum(), self.velocities.iter().sum())
    }

    /// Copy shifted into the center-of-mass frame.
    pub fn recentered(&self) -> Self {
        let n = self.n().max(1) as f64;
        let (sx, sv) = self.centroid_sums();
        Self {
            positions: self.positions.iter().map(|x| x - sx / n).collect(),
            velocities: self.velocities.iter().map(|v| v - sv / n).collect(),
        }
    }

    /// Smallest pairwise separation, or infinity for fewer than two particles.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..self.n() {
            for k in (j + 1)..self.n() {
                best = best.min((self.positions[j] - self.positions[k]).norm());
            }
        }
        best
    }
}

type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Pair potential `Φ(r)` shared by every pair of particles.
#[derive(Clone)]
pub enum PairPotential {
    /// `Φ(r) = −g/r` with strength `g` (length).
    InverseR(f64),
    /// User-supplied `Φ(r)` with an optional derivative `Φ'(r)`; a central
    /// difference is used when the derivative is absent.
    Custom {
        /// Potential value.
        value: PotentialFn,
        /// Radial derivative.
        derivative: Option<PotentialFn>,
    },
}

impl fmt::Debug for PairPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InverseR(g) => write!(f, "InverseR({g})"),
            Self::Custom { derivative, .. } => {
                write!(
                    f,
                    "Custom {{ analytic_derivative: {} }}",
                    derivative.is_some()
                )
            }
        }
    }
}

impl PairPotential {
    /// Free particles.
    pub fn free() -> Self {
        Self::InverseR(0.0)
    }

    /// `Φ(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::InverseR(g) => -g / r,
            Self::Custom { value, .. } => value(r),
        }
    }

    /// `dΦ/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Self::InverseR(g) => g / (r * r),
            Self::Custom {
                derivative: Some(d),
                ..
            } => d(r),
            Self::Custom {
                value,
                derivative: None,
            } => {
                let h = 1e-5 * r.abs().max(f64::MIN_POSITIVE);
                (value(r + h) - value(r - h)) / (2.0 * h)
            }
        }
    }

    /// Strength `g` for the inverse-distance potential.
    pub fn strength(&self) -> Option<f64> {
        match self {
            Self::InverseR(g) => Some(*g),
            Self::Custom { .. } => None,
        }
    }

    /// Total potential `V = Σ_{j<k} Φ(|ξ_j − ξ_k|)`.
    pub fn total(&self, positions: &[Vec3]) -> f64 {
        let mut v = 0.0;
        for j in 0..positions.len() {
            for k in (j + 1)..positions.len() {
                v += self.value((positions[j] - positions[k]).norm());
            }
        }
        v
    }

    /// Accelerations `ξ̈_k = −∂V/∂ξ_k` for unit masses.
    pub fn accelerations(&self, positions: &[Vec3]) -> Vec<Vec3> {
        let n = positions.len();
        let mut acc = vec![Vec3::zeros(); n];
        for j in 0..n {
            for k in (j + 1)..n {
                let d = positions[j] - positions[k];
                let r = d.norm();
                let f = d * (self.derivative(r) / r);
                acc[j] -= f;
                acc[k] += f;
            }
        }
        acc
    }
}

/// Classical quantities of a trajectory set at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalQuantities {
    /// Scalar moment of inertia `I = ½ Σ ξ_k²` (length²).
    pub i: f64,
    /// `İ = Σ ξ_k·ξ̇_k` (length).
    pub i_dot: f64,
    /// Kinetic term `T = ½ Σ ξ̇_k²`.
    pub t: f64,
    /// Potential `V`.
    pub v: f64,
    /// Total energy `e_C = T + V`.
    pub e_c: f64,
    /// Relative angular momentum `|x × ẋ|` with `x = ξ_1 − ξ_2` (two bodies only).
    pub l: Option<f64>,
}

impl ClassicalQuantities {
    /// Quantities of a snapshot under the given potential.
    pub fn of(snapshot: &Snapshot, potential: &PairPotential) -> Result<Self> {
        snapshot.validate()?;
        let i = 0.5
            * snapshot
                .positions
                .iter()
                .map(|x| x.norm_squared())
                .sum::<f64>();
        let i_dot = snapshot
            .positions
            .iter()
            .zip(&snapshot.velocities)
            .map(|(x, v)| x.dot(v))
            .sum();
        let t = 0.5
            * snapshot
                .velocities
                .iter()
                .map(|v| v.norm_squared())
                .sum::<f64>();
        let v = potential.total(&snapshot.positions);
        let l = (snapshot.n() == 2).then(|| {
            let x = snapshot.positions[0] - snapshot.positions[1];
            let xd = snapshot.velocities[0] - snapshot.velocities[1];
            x.cross(&xd).norm()
        });
        Ok(Self {
            i,
            i_dot,
            t,
            v,
            e_c: t + v,
            l,
        })
    }
}

/// Dense-output data of an integrated Newtonian trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    n: usize,
    solution: Solution,
}

impl DenseTrajectory {
    /// Integration span `(start, end)` in the direction of integration.
    pub fn span(&self) -> (f64, f64) {
        (
            self.solution.t[0],
            *self.solution.t.last().unwrap_or(&self.solution.t[0]),
        )
    }

    /// Accepted step times.
    pub fn nodes(&self) -> &[f64] {
        &self.solution.t
    }

    /// Accumulated local error estimate.
    pub fn global_error(&self) -> f64 {
        self.solution.global_error
    }

    fn evaluate(&self, lambda: f64) -> Result<Snapshot> {
        let sol = &self.solution;
        let n3 = 3 * self.n;
        let unpack = |y: &[f64]| -> Snapshot {
            let positions = (0..self.n)
                .map(|k| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]))
                .collect();
            let velocities = (0..self.n)
                .map(|k| Vec3::new(y[n3 + 3 * k], y[n3 + 3 * k + 1], y[n3 + 3 * k + 2]))
                .collect();
            Snapshot {
                positions,
                velocities,
            }
        };
        if sol.t.len() == 1 {
            sol.locate(lambda)?;
            return Ok(unpack(&sol.y[0]));
        }
        let i = sol.locate(lambda)?;
        let h = sol.t[i + 1] - sol.t[i];
        let s = (lambda - sol.t[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let hq = [
            1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
            s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
            0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
            0.5 * (s3 - 2.0 * s4 + s5),
            -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
            10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        ];
        let dq = [
            -30.0 * s2 + 60.0 * s3 - 30.0 * s4,
            1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4,
            0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4),
            0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4),
            -12.0 * s2 + 28.0 * s3 - 15.0 * s4,
            30.0 * s2 - 60.0 * s3 + 30.0 * s4,
        ];
        let (y0, y1, f0, f1) = (&sol.y[i], &sol.y[i + 1], &sol.dy[i], &sol.dy[i + 1]);
        let mut y = vec![0.0; 2 * n3];
        for j in 0..n3 {
            let (p0, v0, a0) = (y0[j], f0[j], f0[n3 + j]);
            let (p1, v1, a1) = (y1[j], f1[j], f1[n3 + j]);
            let terms = [p0, h * v0, h * h * a0, h * h * a1, h * v1, p1];
            y[j] = hq.iter().zip(&terms).map(|(b, t)| b * t).sum();
            y[n3 + j] = dq.iter().zip(&terms).map(|(b, t)| b * t).sum::<f64>() / h;
        }
        Ok(unpack(&y))
    }
}

type SnapshotFn = Arc<dyn Fn(f64) -> Result<Snapshot> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Dense(Arc<DenseTrajectory>),
    Circular {
        r: f64,
        omega: f64,
        phase: f64,
    },
    Free {
        positions: Vec<Vec3>,
        velocities: Vec<Vec3>,
    },
    Shifted {
        inner: Box<TrajectorySet>,
        shift: f64,
    },
    Custom(SnapshotFn),
}

/// A set of `n` classical trajectories `ξ_k(λ)` with their pair potential.
#[derive(Clone)]
pub struct TrajectorySet {
    n: usize,
    potential: PairPotential,
    recentered: bool,
    repr: Repr,
}

impl fmt::Debug for TrajectorySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Dense(d) => format!("Dense({} steps)", d.solution.t.len()),
            Repr::Circular { r, omega, .. } => format!("Circular(r = {r}, ω = {omega})"),
            Repr::Free { .. } => "Free".to_string(),
            Repr::Shifted { shift, .. } => format!("Shifted({shift})"),
            Repr::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("TrajectorySet")
            .field("n", &self.n)
            .field("potential", &self.potential)
            .field("recentered", &self.recentered)
            .field("repr", &kind)
            .finish()
    }
}

impl TrajectorySet {
    /// Two-body circular orbit of separation `r` under `Φ = −g/r`, in the
    /// xy-plane with particle 1 at angle `phase` when `λ = 0`.
    pub fn circular(r: f64, g: f64, phase: f64) -> Result<Self> {
        if !(r > 0.0 && g >= 0.0 && r.is_finite() && g.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "circular orbit needs r > 0, g ≥ 0 (r = {r}, g = {g})"
            )));
        }
        let omega = (2.0 * g / (r * r * r)).sqrt();
        if 0.5 * r * omega >= 1.0 {
            return Err(Error::Superluminal {
                particle: 0,
                speed: 0.5 * r * omega,
            });
        }
        Ok(Self {
            n: 2,
            potential: PairPotential::InverseR(g),
            recentered: false,
            repr: Repr::Circular { r, omega, phase },
        })
    }

    /// Straight lines `ξ_k(λ) = ξ_k(0) + λ ξ̇_k` with no interaction. Inputs
    /// are moved into the center-of-mass frame when necessary.
    pub fn free(initial: Snapshot) -> Result<Self> {
        initial.validate()?;
        let (centered, moved) = recenter(&initial);
        Ok(Self {
            n: initial.n(),
            potential: PairPotential::free(),
            recentered: moved,
            repr: Repr::Free {
                positions: centered.positions,
                velocities: centered.velocities,
            },
        })
    }

    /// Straight lines without re-centering; used for scattering states whose
    /// momenta are prescribed and need not sum to zero.
    pub fn free_uncentered(initial: Snapshot) -> Result<Self> {
        initial.validate()?;
        Ok(Self {
            n: initial.n(),
            potential: PairPotential::free(),
            recentered: false,
            repr: Repr::Free {
                positions: initial.positions,
                velocities: initial.velocities,
            },
        })
    }

    /// Trajectories given by an arbitrary function of `λ`.
    pub fn custom<F>(n: usize, potential: PairPotential, f: F) -> Self
    where
        F: Fn(f64) -> Result<Snapshot> + Send + Sync + 'static,
    {
        Self {
            n,
            potential,
            recentered: false,
            repr: Repr::Custom(Arc::new(f)),
        }
    }

    /// Time-translated copy: `ξ_k(λ) ↦ ξ_k(λ + shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            n: self.n,
            potential: self.potential.clone(),
            recentered: self.recentered,
            repr: Repr::Shifted {
                inner: Box::new(self.clone()),
                shift,
            },
        }
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Pair potential.
    pub fn potential(&self) -> &PairPotential {
        &self.potential
    }

    /// True when the inputs were moved into the center-of-mass frame.
    pub fn was_recentered(&self) -> bool {
        self.recentered
    }

    /// Dense integration data when the set came from [`integrate_newton`].
    pub fn dense(&self) -> Option<&DenseTrajectory> {
        match &self.repr {
            Repr::Dense(d) => Some(d),
            Repr::Shifted { inner, .. } => inner.dense(),
            _ => None,
        }
    }

    /// Range of `λ` over which the set is defined, if bounded.
    pub fn span(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Dense(d) => {
                let (a, b) = d.span();
                Some((a.min(b), a.max(b)))
            }
            Repr::Shifted { inner, shift } => inner.span().map(|(a, b)| (a - shift, b - shift)),
            _ => None,
        }
    }

    /// Positions and velocities at `λ`.
    pub fn snapshot(&self, lambda: f64) -> Result<Snapshot> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "λ must be finite, got {lambda}"
            )));
        }
        let snap = match &self.repr {
            Repr::Dense(d) => d.evaluate(lambda)?,
            Repr::Circular { r, omega, phase } => {
                let th = omega * lambda + phase;
                let (s, c) = th.sin_cos();
                let x = Vec3::new(c, s, 0.0) * (0.5 * r);
                let v = Vec3::new(-s, c, 0.0) * (0.5 * r * omega);
                Snapshot {
                    positions: vec![x, -x],
                    velocities: vec![v, -v],
                }
            }
            Repr::Free {
                positions,
                velocities,
            } => Snapshot {
                positions: positions
                    .iter()
                    .zip(velocities)
                    .map(|(x, v)| x + v * lambda)
                    .collect(),
                velocities: velocities.clone(),
            },
            Repr::Shifted { inner, shift } => inner.snapshot(lambda + shift)?,
            Repr::Custom(f) => f(lambda)?,
        };
        if snap.n() != self.n {
            return Err(Error::InvalidTrajectory(format!(
                "expected {} particles, got {}",
                self.n,
                snap.n()
            )));
        }
        snap.validate()?;
        Ok(snap)
    }

    /// Largest deviation from the center-of-mass frame at `λ`:
    /// `max(|Σ ξ_k|, |Σ ξ̇_k|)`.
    pub fn frame_violation(&self, lambda: f64) -> Result<f64> {
        let (sx, sv) = self.snapshot(lambda)?.centroid_sums();
        Ok(sx.norm().max(sv.norm()))
    }
}

fn recenter(s: &Snapshot) -> (Snapshot, bool) {
    let (sx, sv) = s.centroid_sums();
    let scale = s
        .positions
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let moved = sx.norm() > 1e-14 * scale * s.n() as f64 || sv.norm() > 1e-15 * s.n() as f64;
    if moved {
        (s.recentered(), true)
    } else {
        (s.clone(), false)
    }
}

/// Classical quantities `I, İ, T, V, e_C` (and `L` for two bodies) at `λ`.
pub fn classical_quantities(traj: &TrajectorySet, lambda: f64) -> Result<ClassicalQuantities> {
    ClassicalQuantities::of(&traj.snapshot(lambda)?, traj.potential())
}

/// Relativistic momentum `q_k = γ_k ξ̇_k / λ_c` of particle `k` at `λ`.
pub fn momentum_of(
    traj: &TrajectorySet,
    k: usize,
    lambda: f64,
    units: &UnitSystem,
) -> Result<Vec3> {
    let v = particle_velocity(traj, k, lambda)?;
    relativistic_momentum(&v, units).map_err(|e| match e {
        Error::Superluminal { speed, .. } => Error::Superluminal { particle: k, speed },
        other => other,
    })
}

/// Nonrelativistic momentum `ξ̇_k / λ_c` of particle `k` at `λ`.
pub fn momentum_nonrel(
    traj: &TrajectorySet,
    k: usize,
    lambda: f64,
    units: &UnitSystem,
) -> Result<Vec3> {
    Ok(particle_velocity(traj, k, lambda)? / units.compton_length)
}

fn particle_velocity(traj: &TrajectorySet, k: usize, lambda: f64) -> Result<Vec3> {
    if k >= traj.n() {
        return Err(Error::InvalidInput(format!(
            "particle index {k} out of range for n = {}",
            traj.n()
        )));
    }
    Ok(traj.snapshot(lambda)?.velocities[k])
}

/// `γ v / λ_c` for a velocity `v` in units of `c`.
pub fn relativistic_momentum(v: &Vec3, units: &UnitSystem) -> Result<Vec3> {
    let s2 = v.norm_squared();
    if s2 >= 1.0 {
        return Err(Error::Superluminal {
            particle: 0,
            speed: s2.sqrt(),
        });
    }
    Ok(v * ((1.0 - s2).sqrt().recip() / units.compton_length))
}

/// Settings for [`integrate_newton_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Local error tolerance (relative and absolute).
    pub tol: f64,
    /// Close-approach guard as a fraction of the initial minimum separation.
    pub guard_fraction: f64,
    /// Largest step, as a length of `λ`.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            guard_fraction: 1e-6,
            max_step: f64::INFINITY,
        }
    }
}

/// Integrates Newton's equations `ξ̈_k = −∂V/∂ξ_k` from `span.0` to `span.1`
/// starting from `initial` (given at `span.0`) with local tolerance `tol`.
pub fn integrate_newton(
    initial: &Snapshot,
    potential: &PairPotential,
    span: (f64, f64),
    tol: f64,
) -> Result<TrajectorySet> {
    integrate_newton_with(
        initial,
        potential,
        span,
        NewtonOptions {
            tol,
            ..NewtonOptions::default()
        },
    )
}

/// [`integrate_newton`] with explicit options.
pub fn integrate_newton_with(
    initial: &Snapshot,
    potential: &PairPotential,
    span: (f64, f64),
    opts: NewtonOptions,
) -> Result<TrajectorySet> {
    initial.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let (start, moved) = recenter(initial);
    let n = start.n();
    let guard = opts.guard_fraction * start.min_separation();
    let n3 = 3 * n;
    let mut y0 = vec![0.0; 2 * n3];
    for k in 0..n {
        for c in 0..3 {
            y0[3 * k + c] = start.positions[k][c];
            y0[n3 + 3 * k + c] = start.velocities[k][c];
        }
    }
    let pot = potential.clone();
    let mut positions = vec![Vec3::zeros(); n];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        for k in 0..n {
            positions[k] = Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
        }
        for j in 0..n {
            for k in (j + 1)..n {
                let r = (positions[j] - positions[k]).norm();
                if r < guard {
                    return Err(Error::Singularity {
                        lambda: t,
                        separation: r,
                        guard,
                    });
                }
            }
        }
        let acc = pot.accelerations(&positions);
        dy[..n3].copy_from_slice(&y[n3..]);
        for k in 0..n {
            for c in 0..3 {
                dy[n3 + 3 * k + c] = acc[k][c];
            }
        }
        Ok(())
    };
    let ctl = StepControl {
        rtol: opts.tol,
        atol: opts.tol * 1e-3,
        max_step: opts.max_step,
        ..StepControl::default()
    };
    let mut ctl = ctl;
    let scale = start.positions.iter().map(|x| x.norm()).fold(0.0, f64::max);
    ctl.atol = opts.tol * scale.max(1e-300) * 1e-3;
    let solution = dopri5(rhs, span.0, &y0, span.1, ctl)?;
    for (t, y) in solution.t.iter().zip(&solution.y) {
        for k in 0..n {
            let v = Vec3::new(y[n3 + 3 * k], y[n3 + 3 * k + 1], y[n3 + 3 * k + 2]);
            if v.norm() >= 1.0 {
                return Err(Error::Superluminal {
                    particle: k,
                    speed: v.norm(),
                });
            }
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidTrajectory(format!(
                    "non-finite velocity at λ = {t}"
                )));
            }
        }
    }
    Ok(TrajectorySet {
        n,
        potential: potential.clone(),
        recentered: moved,
        repr: Repr::Dense(Arc::new(DenseTrajectory { n, solution })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn circular_initial(r: f64, g: f64) -> Snapshot {
        let v = (g / (2.0 * r)).sqrt();
        Snapshot::new(
            vec![Vec3::new(0.5 * r, 0.0, 0.0), Vec3::new(-0.5 * r, 0.0, 0.0)],
            vec![Vec3::new(0.0, v, 0.0), Vec3::new(0.0, -v, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn circular_orbit_quantities() {
        let (r, g) = (2.0, 1e-3);
        let traj = TrajectorySet::circular(r, g, 0.3).unwrap();
        for lambda in [0.0, 10.0, 1234.5] {
            let q = classical_quantities(&traj, lambda).unwrap();
            assert_relative_eq!(q.i, r * r / 4.0, max_relative = 1e-14);
            assert!(q.i_dot.abs() < 1e-15);
            assert_relative_eq!(q.t, g / (2.0 * r), max_relative = 1e-13);
            assert_relative_eq!(q.e_c, -g / (2.0 * r), max_relative = 1e-13);
            assert!(traj.frame_violation(lambda).unwrap() < 1e-15);
        }
    }

    #[test]
    fn particles_at_rest_have_zero_kinetic_terms() {
        let s = Snapshot::new(
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
            vec![Vec3::zeros(); 2],
        )
        .unwrap();
        let q = ClassicalQuantities::of(&s, &PairPotential::InverseR(1e-3)).unwrap();
        assert_eq!(q.t, 0.0);
        assert_eq!(q.i_dot, 0.0);
    }

    #[test]
    fn momentum_accessors() {
        let units = UnitSystem::natural();
        let s = Snapshot::new(vec![Vec3::zeros()], vec![Vec3::new(0.5, 0.0, 0.0)]).unwrap();
        let traj = TrajectorySet::free_uncentered(s).unwrap();
        let q = momentum_of(&traj, 0, 0.0, &units).unwrap();
        assert_relative_eq!(q.x, 0.5 / 0.75f64.sqrt(), max_relative = 1e-15);
        let qn = momentum_nonrel(&traj, 0, 0.0, &units).unwrap();
        assert_eq!(qn.x, 0.5);
        assert!(momentum_of(&traj, 1, 0.0, &units).is_err());
        let fast = Snapshot::new(vec![Vec3::zeros()], vec![Vec3::new(1.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            TrajectorySet::free_uncentered(fast),
            Err(Error::Superluminal { .. })
        ));
    }

    #[test]
    fn si_momentum_gamma_correction_is_small() {
        let units = UnitSystem::si(1e-8).unwrap();
        let v = Vec3::new(0.004, 0.0, 0.0);
        let q = relativistic_momentum(&v, &units).unwrap();
        let rel = (q.x - 0.004 / units.compton_length) / (0.004 / units.compton_length);
        assert!(rel > 0.0 && rel < 1e-5);
    }

    #[test]
    fn free_motion_is_exact_after_integration() {
        let s = Snapshot::new(
            vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(-1.0, 0.5, 0.0),
                Vec3::new(0.0, -0.5, 0.2),
            ],
            vec![
                Vec3::new(0.01, 0.0, 0.0),
                Vec3::new(0.0, -0.02, 0.0),
                Vec3::new(-0.01, 0.02, 0.0),
            ],
        )
        .unwrap();
        let s = s.recentered();
        let traj = integrate_newton(&s, &PairPotential::free(), (0.0, 50.0), 1e-12).unwrap();
        let at = traj.snapshot(37.3).unwrap();
        for k in 0..3 {
            let expect = s.positions[k] + s.velocities[k] * 37.3;
            assert!((at.positions[k] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn circular_integration_keeps_radius() {
        let (r, g) = (1.0f64, 1e-3f64);
        let period = 2.0 * PI / (2.0 * g / (r * r * r)).sqrt();
        let traj = integrate_newton(
            &circular_initial(r, g),
            &PairPotential::InverseR(g),
            (0.0, period),
            1e-13,
        )
        .unwrap();
        for i in 0..=200 {
            let lambda = period * i as f64 / 200.0;
            let s = traj.snapshot(lambda).unwrap();
            let sep = (s.positions[0] - s.positions[1]).norm();
            assert!((sep - r).abs() / r < 1e-8, "λ = {lambda}: r = {sep}");
        }
    }

    #[test]
    fn recenters_inputs_and_flags_it() {
        let s = Snapshot::new(
            vec![Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)],
            vec![Vec3::zeros(); 2],
        )
        .unwrap();
        let traj = TrajectorySet::free(s).unwrap();
        assert!(traj.was_recentered());
        assert!(traj.frame_violation(3.0).unwrap() < 1e-15);
    }

    #[test]
    fn singularity_guard_triggers_on_collision() {
        let s = Snapshot::new(
            vec![Vec3::new(0.5, 0.0, 0.0), Vec3::new(-0.5, 0.0, 0.0)],
            vec![Vec3::zeros(); 2],
        )
        .unwrap();
        let r = integrate_newton(&s, &PairPotential::InverseR(1e-3), (0.0, 1e5), 1e-10);
        assert!(matches!(r, Err(Error::Singularity { .. })), "{r:?}");
    }

    #[test]
    fn custom_potential_with_numeric_derivative_matches_inverse_r() {
        let g = 2e-3;
        let custom = PairPotential::Custom {
            value: Arc::new(move |r| -g / r),
            derivative: None,
        };
        let pos = [Vec3::new(0.3, 0.1, 0.0), Vec3::new(-0.3, -0.1, 0.0)];
        let a = custom.accelerations(&pos);
        let b = PairPotential::InverseR(g).accelerations(&pos);
        assert!((a[0] - b[0]).norm() < 1e-8 * b[0].norm());
    }

    #[test]
    fn shifted_trajectory_translates_parameter() {
        let traj = TrajectorySet::circular(1.0, 1e-3, 0.0).unwrap();
        let sh = traj.shifted(5.0);
        assert_eq!(sh.snapshot(1.0).unwrap(), traj.snapshot(6.0).unwrap());
    }

    #[test]
    fn quintic_dense_output_is_accurate_between_nodes() {
        let (r, g) = (1.0f64, 1e-3f64);
        let traj = integrate_newton(
            &circular_initial(r, g),
            &PairPotential::InverseR(g),
            (0.0, 300.0),
            1e-12,
        )
        .unwrap();
        let exact = TrajectorySet::circular(r, g, 0.0).unwrap();
        let nodes = traj.dense().unwrap().nodes().to_vec();
        for w in nodes.windows(2).take(20) {
            let mid = 0.5 * (w[0] + w[1]);
            let a = traj.snapshot(mid).unwrap();
            let b = exact.snapshot(mid).unwrap();
            assert!((a.positions[0] - b.positions[0]).norm() < 1e-9);
            assert!((a.velocities[0] - b.velocities[0]).norm() < 1e-10);
        }
    }
}
