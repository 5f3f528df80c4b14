//! Parameters, columns and row evaluation for each scenario kind.

use std::f64::consts::PI;
use std::sync::OnceLock;

use uqft::coupling::{
    g_from_c4, g_from_cubic, solve_cubic, solve_l0_selection, CubicProblem, L0SelectionRule,
};
use uqft::l0_model::{l0_solution, ln_amplitude_on_trajectory, validity_domain, L0Dynamics};
use uqft::likelihood::{amplitude, circular_orbit_amplitude, CircularOrbitCase, Regime};
use uqft::scattering::{
    differential_cross_section, numeric_cross_section, PipelineOptions, PlaneWaveScenario,
};
use uqft::trajectory::{
    classical_quantities, integrate_newton, PairPotential, Snapshot, TrajectorySet,
};
use uqft::units::UnitSystem;
use uqft::Vec3;

use crate::params::Reader;
use crate::scenario::length_label;
use crate::table::{Cell, Column};

/// Settings shared by every evaluation of a run.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub units: UnitSystem,
    pub tolerance: Option<f64>,
}

/// Physical dimension of a column or parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Angle,
    Velocity,
    Length,
    InvLength,
    Area,
    /// Length to a fractional power, e.g. `"5/2"`.
    LengthPow(&'static str),
}

impl Dim {
    pub fn label(self, units: &UnitSystem) -> String {
        let l = length_label(units);
        match self {
            Dim::One => "1".into(),
            Dim::Angle => "rad".into(),
            Dim::Velocity => "c".into(),
            Dim::Length => l.into(),
            Dim::InvLength => format!("1/{l}"),
            Dim::Area => format!("{l}^2"),
            Dim::LengthPow(p) => format!("{l}^({p})"),
        }
    }
}

pub type Row = Vec<Cell>;

/// One scenario kind: how to read its parameters and evaluate them.
pub trait Job: Sized + Sync {
    /// Numeric parameters that may be swept, with their dimensions.
    const AXES: &'static [(&'static str, Dim)];

    fn parse(r: &mut Reader<'_>, ctx: &Context) -> Self;

    /// Output columns; the last one is the text column `flags`.
    fn columns(ctx: &Context) -> Vec<Column>;

    /// Deterministic remarks about the whole run.
    fn notes(&self, _ctx: &Context) -> Vec<String> {
        Vec::new()
    }

    fn rows(&self, ctx: &Context) -> uqft::Result<Vec<Row>>;
}

fn col(name: &str, dim: Dim, ctx: &Context) -> Column {
    Column::num(name, &dim.label(&ctx.units))
}

fn flags(items: &[String]) -> Cell {
    Cell::Text(items.join("; "))
}

fn positive(v: f64) -> bool {
    v > 0.0
}

fn non_negative(v: f64) -> bool {
    v >= 0.0
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::ParticleLike => "particle-like",
        Regime::Transition => "transition",
        Regime::WaveLike => "wave-like",
        Regime::Full => "full",
        Regime::Auto => "auto",
    }
}

fn parse_regime(r: &mut Reader<'_>) -> Regime {
    match r.str_or("regime", "full") {
        "particle-like" => Regime::ParticleLike,
        "transition" => Regime::Transition,
        "wave-like" => Regime::WaveLike,
        "full" => Regime::Full,
        "auto" => Regime::Auto,
        other => {
            r.error(format!("parameters.regime: unknown regime `{other}`"));
            Regime::Full
        }
    }
}

// ---------------------------------------------------------------------------
// orbit

pub struct Orbit {
    g: f64,
    initial: Option<Snapshot>,
    span: (f64, f64),
    samples: usize,
    tol: f64,
    traj: OnceLock<Result<TrajectorySet, String>>,
}

impl Orbit {
    fn trajectory(&self) -> uqft::Result<&TrajectorySet> {
        self.traj
            .get_or_init(|| {
                let initial = self
                    .initial
                    .as_ref()
                    .ok_or_else(|| "no initial conditions".to_string())?;
                integrate_newton(
                    initial,
                    &PairPotential::InverseR(self.g),
                    self.span,
                    self.tol,
                )
                .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| uqft::Error::InvalidTrajectory(e.clone()))
    }
}

impl Job for Orbit {
    const AXES: &'static [(&'static str, Dim)] = &[];

    fn parse(r: &mut Reader<'_>, ctx: &Context) -> Self {
        let g = r.f64_or("g", 0.0);
        if !(g >= 0.0) {
            r.error(format!("parameters.g: must be non-negative, got {g}"));
        }
        let positions = r.vec3_list("positions");
        let velocities = r.vec3_list("velocities");
        let initial = if positions.is_empty() && velocities.is_empty() {
            None
        } else {
            match Snapshot::new(positions, velocities) {
                Ok(s) => Some(s),
                Err(e) => {
                    r.error(format!("parameters.positions/velocities: {e}"));
                    None
                }
            }
        };
        let span = r.f64_list_or("span", &[]);
        let span = if span.len() == 2 && span[1] > span[0] {
            (span[0], span[1])
        } else {
            r.error("parameters.span: expected [start, stop] with stop > start");
            (0.0, 1.0)
        };
        let samples = r.usize_or("samples", 101);
        if samples < 2 {
            r.error("parameters.samples: must be at least 2");
        }
        let tol = ctx
            .tolerance
            .unwrap_or_else(|| r.f64_or("tolerance", 1e-12));
        Self {
            g,
            initial,
            span,
            samples,
            tol,
            traj: OnceLock::new(),
        }
    }

    fn columns(ctx: &Context) -> Vec<Column> {
        let mut c = vec![col("lambda", Dim::Length, ctx), Column::num("k", "1")];
        for n in ["x", "y", "z"] {
            c.push(col(n, Dim::Length, ctx));
        }
        for n in ["vx", "vy", "vz"] {
            c.push(col(n, Dim::Velocity, ctx));
        }
        c.push(Column::text("flags"));
        c
    }

    fn rows(&self, _ctx: &Context) -> uqft::Result<Vec<Row>> {
        let traj = self.trajectory()?;
        let mut rows = Vec::new();
        for i in 0..self.samples {
            let lambda =
                self.span.0 + (self.span.1 - self.span.0) * i as f64 / (self.samples - 1) as f64;
            let s = traj.snapshot(lambda)?;
            for (k, (x, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
                let flag = if traj.was_recentered() {
                    "recentered"
                } else {
                    ""
                };
                rows.push(vec![
                    lambda.into(),
                    k.into(),
                    x.x.into(),
                    x.y.into(),
                    x.z.into(),
                    v.x.into(),
                    v.y.into(),
                    v.z.into(),
                    flag.into(),
                ]);
            }
        }
        Ok(rows)
    }

    fn notes(&self, _ctx: &Context) -> Vec<String> {
        let mut notes = vec![format!("integration tolerance {:e}", self.tol)];
        if let Ok(traj) = self.trajectory() {
            if let (Ok(a), Ok(b)) = (
                classical_quantities(traj, self.span.0),
                classical_quantities(traj, self.span.1),
            ) {
                let drift = (b.e_c - a.e_c).abs() / a.e_c.abs().max(f64::MIN_POSITIVE);
                notes.push(format!("relative energy drift over the span {drift:e}"));
            }
            if traj.was_recentered() {
                notes.push("initial conditions were moved to the center-of-mass frame".into());
            }
        }
        notes
    }
}

// ---------------------------------------------------------------------------
// likelihood

pub struct Likelihood {
    pipeline: bool,
    regime: Regime,
    r: f64,
    g: f64,
    l0: f64,
    c4: f64,
    theta: f64,
}

impl Job for Likelihood {
    const AXES: &'static [(&'static str, Dim)] = &[
        ("theta", Dim::Angle),
        ("r", Dim::Length),
        ("g", Dim::Length),
        ("l0", Dim::Length),
        ("c4", Dim::One),
    ];

    fn parse(r: &mut Reader<'_>, _ctx: &Context) -> Self {
        let pipeline = match r.str_or("method", "closed") {
            "closed" => false,
            "pipeline" => true,
            other => {
                r.error(format!(
                    "parameters.method: expected `closed` or `pipeline`, got `{other}`"
                ));
                false
            }
        };
        let regime = parse_regime(r);
        Self {
            pipeline,
            regime,
            r: r.f64_where("r", "positive", positive),
            g: r.f64_where("g", "positive", positive),
            l0: r.f64_where("l0", "positive", positive),
            c4: r.f64_where("c4", "non-negative", non_negative),
            theta: r.f64("theta"),
        }
    }

    fn columns(ctx: &Context) -> Vec<Column> {
        vec![
            col("theta", Dim::Angle, ctx),
            col("lambda", Dim::Length, ctx),
            col("I", Dim::One, ctx),
            Column::text("regime"),
            col("a0", Dim::One, ctx),
            col("a1", Dim::One, ctx),
            col("c_R", Dim::One, ctx),
            Column::text("flags"),
        ]
    }

    fn rows(&self, ctx: &Context) -> uqft::Result<Vec<Row>> {
        let case = CircularOrbitCase::new(self.r, self.g, self.l0, self.c4, &ctx.units)?;
        let lambda = self.theta / (2.0 * self.g / self.r.powi(3)).sqrt();
        let (value, regime, warnings) = if self.pipeline {
            let traj = TrajectorySet::circular(self.r, self.g, 0.0)?;
            let res = amplitude(
                &traj,
                0.0,
                lambda,
                self.l0,
                self.l0,
                self.c4,
                self.regime,
                &ctx.units,
            )?;
            (res.amplitude, regime_name(res.regime), res.warnings)
        } else {
            (
                circular_orbit_amplitude(&case, self.theta),
                "reduced",
                Vec::new(),
            )
        };
        Ok(vec![vec![
            self.theta.into(),
            lambda.into(),
            value.into(),
            regime.into(),
            case.a0.into(),
            case.a1.into(),
            case.c_r.into(),
            flags(&warnings),
        ]])
    }
}

// ---------------------------------------------------------------------------
// optimize-g

enum Spread {
    Fixed(f64),
    Selected(L0SelectionRule),
}

pub struct OptimizeG {
    r: f64,
    c4: f64,
    spread: Spread,
}

impl Job for OptimizeG {
    const AXES: &'static [(&'static str, Dim)] = &[
        ("r", Dim::Length),
        ("c4", Dim::One),
        ("l0", Dim::Length),
        ("beta0", Dim::LengthPow("5/2")),
    ];

    fn parse(r: &mut Reader<'_>, _ctx: &Context) -> Self {
        let spread = match (r.has("l0"), r.has("beta0")) {
            (true, false) => Spread::Fixed(r.f64_where("l0", "positive", positive)),
            (false, true) => Spread::Selected(L0SelectionRule {
                beta0: r.f64_where("beta0", "positive", positive),
            }),
            (false, false) => Spread::Selected(L0SelectionRule { beta0: 1.0 }),
            (true, true) => {
                r.error("parameters: give at most one of `l0` and `beta0`");
                Spread::Fixed(f64::NAN)
            }
        };
        Self {
            r: r.f64_where("r", "positive", positive),
            c4: r.f64_where("c4", "positive", positive),
            spread,
        }
    }

    fn columns(ctx: &Context) -> Vec<Column> {
        vec![
            col("r", Dim::Length, ctx),
            col("L0", Dim::Length, ctx),
            col("g", Dim::Length, ctx),
            col("g_weak", Dim::Length, ctx),
            col("a0", Dim::One, ctx),
            col("a1", Dim::One, ctx),
            col("x", Dim::One, ctx),
            Column::text("flags"),
        ]
    }

    fn rows(&self, ctx: &Context) -> uqft::Result<Vec<Row>> {
        let spreads = match &self.spread {
            Spread::Fixed(l0) => vec![*l0],
            Spread::Selected(rule) => {
                let roots = solve_l0_selection(rule, self.r)?;
                if roots.is_empty() {
                    return Err(uqft::Error::NoSolution(format!(
                        "no L0 satisfies the selection rule at r = {}; solutions need r below about {}",
                        self.r,
                        rule.existence_bound()
                    )));
                }
                roots
            }
        };
        let lc = ctx.units.compton_length;
        let mut rows = Vec::new();
        for l0 in spreads {
            let a0 = self.r * self.r / (8.0 * l0 * l0);
            let k_r = PI * self.c4 * lc / (32.0 * 2f64.sqrt() * l0);
            let x = solve_cubic(&CubicProblem::new(a0, k_r)?)?;
            let full = g_from_cubic(self.r, l0, self.c4, &ctx.units)?;
            let weak = g_from_c4(self.r, l0, self.c4, &ctx.units)?;
            let mut notes = full.warnings;
            let weak_ok = a0.ln() + 4.0 * a0 > 4.0 * 10f64.ln() + 2.0 * k_r.ln();
            if !weak_ok {
                notes.push("outside the weak-coupling regime".into());
            }
            rows.push(vec![
                self.r.into(),
                l0.into(),
                full.g.into(),
                weak.g.into(),
                a0.into(),
                (1.0 / (x * x)).into(),
                x.into(),
                flags(&notes),
            ]);
        }
        Ok(rows)
    }
}

// ---------------------------------------------------------------------------
// l0-model

pub struct L0Model {
    dynamics: Option<L0Dynamics>,
    rho: f64,
    r0: f64,
    direction: Vec3,
    span: f64,
    samples: usize,
    tol: f64,
}

impl L0Model {
    fn trajectory(&self, d: &L0Dynamics) -> uqft::Result<TrajectorySet> {
        let g = self.rho * d.t_inf * self.r0;
        let v = self.direction.normalize() * d.t_initial.sqrt();
        let x = Vec3::new(self.r0 / 2.0, 0.0, 0.0);
        let s = Snapshot::new(vec![x, -x], vec![v, -v])?;
        integrate_newton(&s, &PairPotential::InverseR(g), (0.0, self.span), self.tol)
    }
}

impl Job for L0Model {
    const AXES: &'static [(&'static str, Dim)] = &[];

    fn parse(r: &mut Reader<'_>, ctx: &Context) -> Self {
        let t_inf = r.f64_where("t_inf", "positive", positive);
        let rho = r.f64_where("rho", "positive", positive);
        let l0_initial = r.f64_where("l0_initial", "positive", positive);
        let r0 = r.f64_where("r0", "positive", positive);
        let direction = r.vec3_or("direction", Vec3::new(0.8, 0.6, 0.0));
        if direction.norm() == 0.0 {
            r.error("parameters.direction: must be non-zero");
        }
        let span = r.f64_where("span", "positive", positive);
        let samples = r.usize_or("samples", 101);
        if samples < 2 {
            r.error("parameters.samples: must be at least 2");
        }
        let tol = ctx
            .tolerance
            .unwrap_or_else(|| r.f64_or("tolerance", 1e-12));
        let dynamics = if [t_inf, rho, l0_initial]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            match L0Dynamics::matched(t_inf, t_inf, l0_initial, (1.0 + rho) * t_inf, &ctx.units) {
                Ok(d) => Some(d),
                Err(e) => {
                    r.error(format!("parameters: {e}"));
                    None
                }
            }
        } else {
            None
        };
        Self {
            dynamics,
            rho,
            r0,
            direction,
            span,
            samples,
            tol,
        }
    }

    fn columns(ctx: &Context) -> Vec<Column> {
        vec![
            col("tau", Dim::Length, ctx),
            col("T", Dim::One, ctx),
            col("V", Dim::One, ctx),
            col("L0", Dim::Length, ctx),
            col("I", Dim::One, ctx),
            col("ln_I", Dim::One, ctx),
            Column::text("flags"),
        ]
    }

    fn notes(&self, ctx: &Context) -> Vec<String> {
        let Some(d) = &self.dynamics else {
            return Vec::new();
        };
        let mut notes = vec![format!("integration tolerance {:e}", self.tol)];
        match validity_domain(d.t_inf, d.l0_initial, self.rho, &ctx.units) {
            Ok(v) => {
                notes.push(format!(
                    "rho = {}, rho_max = {}, valid = {}",
                    v.rho, v.rho_max, v.valid
                ));
                notes.extend(v.reasons);
            }
            Err(e) => notes.push(format!("validity check failed: {e}")),
        }
        notes
    }

    fn rows(&self, ctx: &Context) -> uqft::Result<Vec<Row>> {
        let d = self
            .dynamics
            .as_ref()
            .ok_or_else(|| uqft::Error::InvalidInput("spread model is undefined".into()))?;
        let traj = self.trajectory(d)?;
        let mut rows = Vec::with_capacity(self.samples);
        for i in 0..self.samples {
            let tau = self.span * i as f64 / (self.samples - 1) as f64;
            let q = classical_quantities(&traj, tau)?;
            let l0 = l0_solution(q.t, q.v, d);
            let ln_i = ln_amplitude_on_trajectory(&traj, tau, d, &ctx.units);
            let mut notes = Vec::new();
            let mut cell = |r: uqft::Result<f64>| match r {
                Ok(v) => Cell::Num(v),
                Err(e) => {
                    notes.push(e.to_string());
                    Cell::Empty
                }
            };
            let l0 = cell(l0);
            let (i_cell, ln_cell) = match ln_i {
                Ok(v) => (Cell::Num(v.exp()), Cell::Num(v)),
                Err(e) => {
                    notes.push(e.to_string());
                    (Cell::Empty, Cell::Empty)
                }
            };
            rows.push(vec![
                tau.into(),
                q.t.into(),
                q.v.into(),
                l0,
                i_cell,
                ln_cell,
                flags(&notes),
            ]);
        }
        Ok(rows)
    }
}

// ---------------------------------------------------------------------------
// cross-section

pub struct CrossSectionJob {
    q: f64,
    theta: f64,
    c4: f64,
    l0_sequence: Vec<f64>,
    opts: PipelineOptions,
}

impl Job for CrossSectionJob {
    const AXES: &'static [(&'static str, Dim)] = &[
        ("theta", Dim::Angle),
        ("q", Dim::InvLength),
        ("c4", Dim::One),
    ];

    fn parse(r: &mut Reader<'_>, ctx: &Context) -> Self {
        let q = r.f64_where("q", "positive", positive);
        let theta = r.f64("theta");
        let c4 = r.f64_where("c4", "positive", positive);
        let l0_sequence = r.f64_list_or("l0_sequence", &[]);
        if l0_sequence.iter().any(|l| !(*l > 0.0)) {
            r.error("parameters.l0_sequence: spreads must be positive");
        }
        let mut opts = PipelineOptions::default();
        opts.lambda = r.f64_or("lambda", opts.lambda);
        opts.rel = ctx
            .tolerance
            .unwrap_or_else(|| r.f64_or("tolerance", opts.rel));
        Self {
            q,
            theta,
            c4,
            l0_sequence,
            opts,
        }
    }

    fn columns(ctx: &Context) -> Vec<Column> {
        vec![
            col("theta", Dim::Angle, ctx),
            col("q", Dim::InvLength, ctx),
            col("L0", Dim::Length, ctx),
            col("dsigma_domega", Dim::Area, ctx),
            col("flux", Dim::One, ctx),
            col("numeric", Dim::Area, ctx),
            col("ratio", Dim::One, ctx),
            Column::text("flags"),
        ]
    }

    fn rows(&self, ctx: &Context) -> uqft::Result<Vec<Row>> {
        let scen = PlaneWaveScenario::elastic(self.q, self.theta, self.c4, ctx.units)?;
        let closed = differential_cross_section(&scen);
        let base = |l0: Cell, numeric: Cell, ratio: Cell, note: String| {
            vec![
                self.theta.into(),
                self.q.into(),
                l0,
                closed.value.into(),
                closed.flux.into(),
                numeric,
                ratio,
                Cell::Text(note),
            ]
        };
        if self.l0_sequence.is_empty() {
            return Ok(vec![base(
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                String::new(),
            )]);
        }
        let mut rows = Vec::new();
        for &l0 in &self.l0_sequence {
            rows.push(match numeric_cross_section(&scen, l0, self.opts) {
                Ok(v) => base(
                    l0.into(),
                    v.into(),
                    (v / closed.value).into(),
                    String::new(),
                ),
                Err(e) => base(l0.into(), Cell::Empty, Cell::Empty, format!("error: {e}")),
            });
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context {
            units: UnitSystem::natural(),
            tolerance: None,
        }
    }

    fn parse<J: Job>(s: &str) -> Result<J, Vec<String>> {
        let t: toml::Table = s.parse().unwrap();
        let mut r = Reader::new(&t);
        let j = J::parse(&mut r, &ctx());
        r.finish().map(|_| j)
    }

    #[test]
    fn likelihood_is_one_at_zero_angle() {
        for method in ["closed", "pipeline"] {
            let j: Likelihood = parse(&format!("method = \"{method}\"\nr = 4000.0\ng = 0.02\nl0 = 1000.0\nc4 = 100.0\ntheta = 0.0\n")).unwrap();
            let rows = j.rows(&ctx()).unwrap();
            match rows[0][2] {
                Cell::Num(v) => assert!((v - 1.0).abs() < 1e-12, "{method}: {v}"),
                _ => panic!("no amplitude"),
            }
            assert_eq!(rows[0].len(), Likelihood::columns(&ctx()).len());
        }
    }

    #[test]
    fn optimize_g_takes_at_most_one_spread() {
        assert!(
            matches!(parse::<OptimizeG>("r = 10.0\nc4 = 1.0\n").unwrap().spread, Spread::Selected(L0SelectionRule { beta0 }) if beta0 == 1.0)
        );
        assert!(parse::<OptimizeG>("r = 10.0\nc4 = 1.0\nl0 = 1.0\nbeta0 = 1.0\n").is_err());
    }

    #[test]
    fn optimize_g_rows_follow_the_cubic() {
        let j: OptimizeG = parse("r = 100.0\nc4 = 1.0\nl0 = 10.0\n").unwrap();
        let row = &j.rows(&ctx()).unwrap()[0];
        let (Cell::Num(a1), Cell::Num(x)) = (&row[5], &row[6]) else {
            panic!()
        };
        assert!((a1 * x * x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_rule_without_solution_is_an_error() {
        let j: OptimizeG = parse("r = 1.0e6\nc4 = 1.0\nbeta0 = 1.0\n").unwrap();
        assert!(j.rows(&ctx()).is_err());
    }

    #[test]
    fn orbit_emits_one_row_per_particle_and_sample() {
        let j: Orbit = parse("g = 1.0e-3\npositions = [[0.5, 0, 0], [-0.5, 0, 0]]\nvelocities = [[0, 0.02, 0], [0, -0.02, 0]]\nspan = [0.0, 10.0]\nsamples = 5\n").unwrap();
        let rows = j.rows(&ctx()).unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[0].len(), Orbit::columns(&ctx()).len());
    }

    #[test]
    fn cross_section_without_spreads_reports_closed_form() {
        let j: CrossSectionJob = parse("q = 0.01\ntheta = 1.0\nc4 = 1.0\n").unwrap();
        let rows = j.rows(&ctx()).unwrap();
        let Cell::Num(v) = rows[0][3] else { panic!() };
        assert!((v - (PI / 2.0).powi(3) / (32.0 * PI)).abs() < 1e-15);
    }
}
