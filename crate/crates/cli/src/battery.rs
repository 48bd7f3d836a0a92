//! Built-in scenarios spanning both sides of each criterion.

use percolate_core::{ExteriorProfile, IntensityProfile, RadiusProfile};

use crate::scenario::{profile_table, LatticeSpec, Scenario, ScenarioKind};

fn base(name: &str, kind: ScenarioKind) -> Scenario {
    Scenario {
        name: name.into(),
        kind,
        dimension: 3,
        seed: 1,
        ladder: percolate_core::criteria::DEFAULT_LADDER.to_vec(),
        probe_ladder: None,
        taus: Vec::new(),
        x0: None,
        paths: 1000,
        realizations: 20,
        radii: None,
        lattice: None,
        criteria_csv: "criteria.csv".into(),
        escape_csv: "escape.csv".into(),
        phi: profile_table(&RadiusProfile::linear(0.1)),
        nu: None,
    }
}

fn interior(name: &str, phi: RadiusProfile, nu: IntensityProfile, probe: &[f64]) -> Scenario {
    Scenario {
        probe_ladder: Some(probe.to_vec()),
        phi: profile_table(&phi),
        nu: Some(profile_table(&nu)),
        ..base(name, ScenarioKind::Interior)
    }
}

fn lattice(name: &str, phi: RadiusProfile) -> Scenario {
    Scenario {
        x0: Some(vec![0.25, 0.0, 0.0]),
        paths: 10_000,
        lattice: Some(LatticeSpec { separation: 0.1, covering: 0.9, depths: vec![2, 3, 4, 5, 6] }),
        phi: profile_table(&phi),
        ..base(name, ScenarioKind::Deterministic)
    }
}

fn exterior(name: &str, exponent: f64) -> Scenario {
    Scenario {
        phi: profile_table(&ExteriorProfile::PowerLaw { kappa: 1.0, exponent }),
        nu: Some(profile_table(&ExteriorProfile::Constant { kappa: 1.0 })),
        ..base(name, ScenarioKind::Exterior)
    }
}

/// Sparse linear-radius obstacles: the radial integral converges although
/// the expected number of obstacles is infinite.
pub fn lundh_counterexample() -> Scenario {
    interior(
        "lundh-counterexample",
        RadiusProfile::linear(0.1),
        IntensityProfile::power_law(1.0, 2.0),
        &[1e-2, 3e-3, 1e-3],
    )
}

pub fn battery() -> Vec<Scenario> {
    vec![
        lundh_counterexample(),
        interior(
            "dense-divergent",
            RadiusProfile::linear(0.1),
            IntensityProfile::power_law(1.0, 3.0),
            &[1e-1, 3e-2, 1e-2, 3e-3],
        ),
        interior("empty", RadiusProfile::linear(0.1), IntensityProfile::zero(), &[1e-1, 1e-2, 1e-3]),
        lattice("lattice-convergent", RadiusProfile::power_law(0.05, 2.5)),
        lattice("lattice-divergent", RadiusProfile::linear(0.01)),
        exterior("exterior-convergent", -3.0),
        exterior("exterior-divergent", -2.0),
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    battery().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_resolves_and_round_trips() {
        let all = battery();
        assert!(all.len() >= 6);
        for s in all {
            s.model().unwrap();
            assert_eq!(Scenario::parse(&s.to_toml()).unwrap(), s, "{}", s.name);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<String> = battery().into_iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), battery().len());
    }
}
