//! Scenario files: one TOML document per scenario.

use std::path::Path;

use anyhow::{bail, Context, Result};
use percolate_core::criteria::DEFAULT_LADDER;
use percolate_core::{ExteriorProfile, IntensityProfile, RadiusProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Poisson obstacles in the unit ball.
    Interior,
    /// Obstacles on a regular lattice in the unit ball.
    Deterministic,
    /// Poisson obstacles outside the unit ball.
    Exterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub separation: f64,
    pub covering: f64,
    /// Lattice depths simulated, increasing.
    pub depths: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Truncation ladder of the analytic criteria.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
    /// Truncations simulated; defaults to the analytic rungs ≥ 1e-3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_ladder: Option<Vec<f64>>,
    /// Boundary points of the balayage and Wiener series (normalized on use).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub taus: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_paths")]
    pub paths: u64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Exterior radii ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default = "default_criteria_csv")]
    pub criteria_csv: String,
    #[serde(default = "default_escape_csv")]
    pub escape_csv: String,
    pub phi: toml::Table,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<toml::Table>,
}

fn default_dimension() -> usize {
    3
}
fn default_seed() -> u64 {
    1
}
fn default_ladder() -> Vec<f64> {
    DEFAULT_LADDER.to_vec()
}
fn default_paths() -> u64 {
    1000
}
fn default_realizations() -> usize {
    20
}
fn default_criteria_csv() -> String {
    "criteria.csv".into()
}
fn default_escape_csv() -> String {
    "escape.csv".into()
}

pub const DEFAULT_EXTERIOR_RADII: [f64; 5] = [10.0, 30.0, 100.0, 300.0, 1000.0];

/// Profiles decoded for the scenario kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Interior { phi: RadiusProfile, nu: IntensityProfile },
    Deterministic { phi: RadiusProfile, lattice: LatticeSpec },
    Exterior { phi: ExteriorProfile, nu: ExteriorProfile, radii: Vec<f64> },
}

fn decode<T: serde::de::DeserializeOwned>(table: &toml::Table, what: &str) -> Result<T> {
    toml::Value::Table(table.clone())
        .try_into()
        .with_context(|| format!("cannot read the {what} profile"))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).context("malformed scenario file")?;
        s.model()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn model(&self) -> Result<Model> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            bail!("scenario name must be nonempty and use only letters, digits, '-' and '_'");
        }
        if self.dimension < 3 {
            bail!("dimension must be at least 3, got {}", self.dimension);
        }
        let nu = self.nu.as_ref();
        Ok(match self.kind {
            ScenarioKind::Interior => Model::Interior {
                phi: decode(&self.phi, "phi")?,
                nu: decode(nu.context("interior scenarios need a nu profile")?, "nu")?,
            },
            ScenarioKind::Deterministic => {
                if nu.is_some() {
                    bail!("deterministic scenarios take no nu profile");
                }
                Model::Deterministic {
                    phi: decode(&self.phi, "phi")?,
                    lattice: self.lattice.clone().context("deterministic scenarios need a [lattice] table")?,
                }
            }
            ScenarioKind::Exterior => Model::Exterior {
                phi: decode(&self.phi, "phi")?,
                nu: decode(nu.context("exterior scenarios need a nu profile")?, "nu")?,
                radii: self.radii.clone().unwrap_or_else(|| DEFAULT_EXTERIOR_RADII.to_vec()),
            },
        })
    }

    pub fn probe_ladder(&self) -> Vec<f64> {
        self.probe_ladder
            .clone()
            .unwrap_or_else(|| self.ladder.iter().copied().filter(|&e| e >= 1e-3).collect())
    }

    pub fn x0(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![0.0; self.dimension])
    }

    pub fn taus(&self) -> Vec<Vec<f64>> {
        if !self.taus.is_empty() {
            return self.taus.clone();
        }
        let d = self.dimension;
        let axis = |k: usize| (0..d).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        vec![axis(0), axis(1), vec![1.0; d]]
    }
}

/// Encodes a profile as a TOML table.
pub fn profile_table<T: Serialize>(profile: &T) -> toml::Table {
    match toml::Value::try_from(profile).expect("profiles serialize") {
        toml::Value::Table(t) => t,
        _ => unreachable!("profiles serialize as tables"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
kind = "interior"
phi = { family = "power-law", kappa = 0.1, gamma = 1 }
nu = { family = "constant", kappa = 0 }
"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.dimension, 3);
        assert_eq!(s.ladder, DEFAULT_LADDER.to_vec());
        assert_eq!(s.probe_ladder(), DEFAULT_LADDER.to_vec());
        assert_eq!(s.x0(), vec![0.0; 3]);
        assert_eq!(s.taus().len(), 3);
        match s.model().unwrap() {
            Model::Interior { phi, nu } => {
                assert_eq!(phi, RadiusProfile::linear(0.1));
                assert_eq!(nu, IntensityProfile::zero());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let s = Scenario::parse(MINIMAL).unwrap();
        let text = s.to_toml();
        assert_eq!(Scenario::parse(&text).unwrap(), s);
        assert_eq!(Scenario::parse(&text).unwrap().to_toml(), text);
    }

    #[test]
    fn malformed_files_are_rejected() {
        for bad in [
            "name = \"x\"",
            &MINIMAL.replace("interior", "sideways"),
            &format!("{MINIMAL}\nunknown_key = 3"),
            &MINIMAL.replace("power-law", "spline"),
            &MINIMAL.replace("\"demo\"", "\"a/b\""),
            &MINIMAL.replace("nu = { family = \"constant\", kappa = 0 }", ""),
        ] {
            assert!(Scenario::parse(bad).is_err(), "{bad}");
        }
    }
}
