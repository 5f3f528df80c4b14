//! Scenario files: what to compute, in which units, and where to write it.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use uqft::units::UnitSystem;

/// What a scenario computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Orbit,
    Likelihood,
    OptimizeG,
    L0Model,
    CrossSection,
    Verify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Orbit => "orbit",
            Kind::Likelihood => "likelihood",
            Kind::OptimizeG => "optimize-g",
            Kind::L0Model => "l0-model",
            Kind::CrossSection => "cross-section",
            Kind::Verify => "verify",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    #[default]
    Natural,
    Si,
}

/// `[units]` table. SI mode needs the particle mass.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    #[serde(default)]
    pub system: System,
    pub mass_kg: Option<f64>,
}

/// `[sweep]` table: either explicit `values` or `start`/`stop`/`count`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A parsed scenario file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Option<Kind>,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default)]
    pub parameters: toml::Table,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Scenario together with the hash of the bytes it was read from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub sha256: Option<String>,
}

impl LoadedScenario {
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| vec![format!("scenario: {}", e.message())])?;
        let digest = Sha256::digest(text.as_bytes());
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            scenario,
            sha256: Some(sha256),
        })
    }

    pub fn empty(kind: Kind) -> Self {
        Self {
            scenario: Scenario {
                kind: Some(kind),
                ..Scenario::default()
            },
            sha256: None,
        }
    }
}

impl UnitsConfig {
    pub fn resolve(&self) -> Result<UnitSystem, String> {
        match (self.system, self.mass_kg) {
            (System::Natural, None) => Ok(UnitSystem::natural()),
            (System::Natural, Some(_)) => {
                Err("units.mass_kg is only used with system = \"si\"".into())
            }
            (System::Si, Some(m)) => UnitSystem::si(m).map_err(|e| format!("units: {e}")),
            (System::Si, None) => Err("units.mass_kg is required with system = \"si\"".into()),
        }
    }
}

/// Length unit label for column headers.
pub fn length_label(units: &UnitSystem) -> &'static str {
    if *units == UnitSystem::natural() {
        "λ_c"
    } else {
        "m"
    }
}

/// One-line description of the unit system for the provenance header.
pub fn describe_units(units: &UnitSystem) -> String {
    if *units == UnitSystem::natural() {
        "natural (λ_c = c = ħ = 1)".into()
    } else {
        format!(
            "si (mass = {} kg, λ_c = {} m)",
            units.mass_kg, units.compton_length
        )
    }
}

impl SweepConfig {
    /// Sweep values in ascending order.
    pub fn values(&self) -> Result<Vec<f64>, Vec<String>> {
        let mut errors = Vec::new();
        let mut values = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n < 2 {
                    errors.push("sweep.count must be at least 2".into());
                }
                if self.log && !(a > 0.0 && b > 0.0) {
                    errors
                        .push("sweep.start and sweep.stop must be positive for a log sweep".into());
                }
                let m = n.max(2) - 1;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / m as f64;
                        if i == 0 {
                            a
                        } else if i == m {
                            b
                        } else if self.log {
                            (a.ln() + t * (b.ln() - a.ln())).exp()
                        } else {
                            a + t * (b - a)
                        }
                    })
                    .collect()
            }
            _ => {
                errors
                    .push("sweep needs either `values` or all of `start`, `stop`, `count`".into());
                Vec::new()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            errors.push("sweep values must be finite".into());
        }
        if values.is_empty() && errors.is_empty() {
            errors.push("sweep has no values".into());
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}
