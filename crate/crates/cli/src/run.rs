//! Scenario execution: criteria, simulation, CSV artifacts and summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use percolate_core::criteria::{
    balayage, expected_obstacle_count_ladder, expected_wiener, exterior_criterion, lundh_criterion,
    radial_criterion, report_any_length, write_criteria_csv, CriterionReport, Verdict,
};
use percolate_core::process::mean_measure;
use percolate_core::wos::{
    avoidability_probe, lattice_probe, simulated_verdict, write_escape_csv, ProbeConfig, ProbeRung, WalkParams,
};
use percolate_core::{
    check_regular, regular_lattice, validate_profiles, BoundaryPoint, IntensityProfile, RadiusProfile,
};

use crate::plot::emit_plot;
use crate::scenario::{LatticeSpec, Model, Scenario};

/// Truncations finer than this are skipped by the expected Wiener series.
const WIENER_MIN_EPS: f64 = 3e-3;
/// Realizations with more expected obstacles than this are refused.
const MAX_EXPECTED_OBSTACLES: f64 = 5e6;
const LATTICE_CHECK_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub paths: Option<u64>,
    pub realizations: Option<usize>,
    pub out: PathBuf,
    pub plot: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub analytic: Verdict,
    pub simulated: Option<Verdict>,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn disagrees(&self) -> bool {
        matches!(self.simulated, Some(s) if s.is_decided() && self.analytic.is_decided() && s != self.analytic)
    }

    pub fn exit_code(&self) -> u8 {
        if self.disagrees() {
            4
        } else {
            0
        }
    }
}

/// Exit code for a failed run: 3 for numerical failures, 2 otherwise.
pub fn failure_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<percolate_core::Error>(), Some(percolate_core::Error::NumericalFailure(_))));
    if numerical {
        3
    } else {
        2
    }
}

struct Artifacts {
    criteria: Vec<CriterionReport>,
    escape: Option<Vec<ProbeRung>>,
    analytic: Verdict,
    notes: Vec<String>,
}

pub fn apply_overrides(s: &Scenario, opts: &RunOptions) -> Scenario {
    let mut s = s.clone();
    if let Some(seed) = opts.seed {
        s.seed = seed;
    }
    if let Some(p) = opts.paths {
        s.paths = p;
    }
    if let Some(r) = opts.realizations {
        s.realizations = r;
    }
    s
}

/// Runs one scenario and writes its artifacts under `out/<name>/`; nothing
/// is left behind on failure.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let s = apply_overrides(scenario, opts);
    let model = s.model()?;
    if s.paths == 0 || s.realizations == 0 {
        bail!("paths and realizations must be positive");
    }
    let art = match &model {
        Model::Interior { phi, nu } => interior(&s, phi, nu)?,
        Model::Deterministic { phi, lattice } => deterministic(&s, phi, lattice)?,
        Model::Exterior { phi, nu, radii } => {
            let report = exterior_criterion(phi, nu, s.dimension, radii)?;
            let note = format!(
                "exterior = {} ({}), limit {}",
                format_value(report.last_value()),
                report.verdict,
                report.limit_estimate().map_or("n/a".into(), format_value)
            );
            Artifacts { analytic: report.verdict, criteria: vec![report], escape: None, notes: vec![note] }
        }
    };
    let analytic = art.analytic;
    let simulated = art.escape.as_deref().map(simulated_verdict);

    let mut criteria_csv = Vec::new();
    write_criteria_csv(&art.criteria, &mut criteria_csv)?;
    let mut outputs = vec![(s.criteria_csv.clone(), criteria_csv)];
    if let Some(rungs) = &art.escape {
        let mut buf = Vec::new();
        write_escape_csv(&s.name, rungs, &mut buf)?;
        outputs.push((s.escape_csv.clone(), buf));
    }
    if opts.plot {
        let plots: Vec<(String, Vec<u8>)> = outputs
            .iter()
            .map(|(file, bytes)| {
                let svg = emit_plot(std::str::from_utf8(bytes).expect("CSV is UTF-8"))?;
                Ok((Path::new(file).with_extension("svg").to_string_lossy().into_owned(), svg.into_bytes()))
            })
            .collect::<Result<_>>()?;
        outputs.extend(plots);
    }
    let files = write_all(&opts.out.join(&s.name), &outputs)?;

    let mut summary = format!(
        "{}: verdict(analytic)={} vs verdict(simulated)={}",
        s.name,
        analytic,
        simulated.map_or("not-simulated".to_string(), |v| v.to_string())
    );
    for note in &art.notes {
        write!(summary, "\n  {note}").unwrap();
    }
    Ok(RunOutcome { name: s.name.clone(), analytic, simulated, summary, files })
}

/// Writes every file or none.
fn write_all(dir: &Path, outputs: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let existed = dir.exists();
    let mut written = Vec::new();
    let result = (|| -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, bytes) in outputs {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if !existed {
            let _ = fs::remove_dir_all(dir);
        }
        return Err(e);
    }
    Ok(written)
}

fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".into()
    }
}

fn interior(s: &Scenario, phi: &RadiusProfile, nu: &IntensityProfile) -> Result<Artifacts> {
    let d = s.dimension;
    let check = validate_profiles(phi, nu, d)?;
    if !check.passes() {
        bail!("profile assumptions fail: {}", check.failures().join("; "));
    }
    let taus = s
        .taus()
        .into_iter()
        .map(BoundaryPoint::new)
        .collect::<percolate_core::Result<Vec<_>>>()?;
    let probe = s.probe_ladder();
    let finest = *probe.last().context("probe_ladder is empty")?;
    let expected = mean_measure(nu, 0.0, 1.0 - finest, d)?;
    if expected > MAX_EXPECTED_OBSTACLES {
        bail!("probe truncation {finest} expects {expected:.3e} obstacles per realization; use a coarser probe_ladder");
    }

    let radial = radial_criterion(phi, nu, d, &s.ladder)?;
    let lundh = lundh_criterion(nu, d, &s.ladder)?;
    let count = expected_obstacle_count_ladder(nu, d, &s.ladder)?;
    let mut notes = vec![
        format!(
            "radial = {} ({}), limit {}",
            format_value(radial.last_value()),
            radial.verdict,
            radial.limit_estimate().map_or("n/a".into(), format_value)
        ),
        format!(
            "lundh = {} ({}), limit {}",
            format_value(lundh.last_value()),
            lundh.verdict,
            lundh.limit_estimate().map_or("n/a".into(), format_value)
        ),
        format!(
            "expected obstacle count at eps={:e} = {} ({})",
            count.ladder.last().unwrap().0,
            format_value(count.last_value()),
            count.verdict
        ),
    ];
    let analytic = radial.verdict;
    let mut criteria = vec![radial, lundh, count];
    for tau in &taus {
        criteria.push(balayage(phi, nu, tau, &s.ladder, d)?);
    }

    let wiener_ladder: Vec<f64> = probe.iter().copied().filter(|&e| (WIENER_MIN_EPS..0.5).contains(&e)).collect();
    if !wiener_ladder.is_empty() {
        let w = expected_wiener(phi, nu, d, &taus[0], &wiener_ladder, s.realizations, s.seed)?;
        let values = w.rungs.iter().map(|r| (r.epsilon, r.mean)).collect();
        let tau: Vec<String> = taus[0].coords().iter().map(|x| format!("{x:.6}")).collect();
        let report = report_any_length(
            "expected-wiener",
            values,
            format!("d={d};tau={};realizations={}", tau.join(" "), s.realizations),
        )?;
        notes.push(format!("expected wiener = {} ({})", format_value(report.last_value()), report.verdict));
        criteria.push(report);
    }

    let cfg = ProbeConfig {
        x0: s.x0(),
        n_paths: s.paths,
        n_realizations: s.realizations,
        seed: s.seed,
        params: WalkParams::default(),
    };
    let rungs = avoidability_probe(phi, nu, d, &probe, &cfg)?;
    notes.push(escape_note(&rungs));
    Ok(Artifacts { criteria, escape: Some(rungs), analytic, notes })
}

fn deterministic(s: &Scenario, phi: &RadiusProfile, spec: &LatticeSpec) -> Result<Artifacts> {
    let d = s.dimension;
    let check = validate_profiles(phi, &IntensityProfile::zero(), d)?;
    if !check.radius_ratio_ok || !check.quasi_constancy_ok {
        bail!("profile assumptions fail: {}", check.failures().join("; "));
    }
    let depth = *spec.depths.iter().max().context("lattice depths are empty")?;
    let lattice = regular_lattice(d, spec.separation, spec.covering, depth)?;
    let report = check_regular(&lattice, LATTICE_CHECK_SAMPLES, s.seed);
    if !(report.separation_ok && report.covering_ok) {
        bail!("generated lattice is not regular: {report:?}");
    }
    let criterion = percolate_core::criteria::deterministic_criterion(phi, d, &s.ladder)?;
    let analytic = criterion.verdict;
    let rungs = lattice_probe(&lattice, phi, &spec.depths, &s.x0(), &WalkParams::default(), s.paths, s.seed)?;
    let notes = vec![
        format!("lattice points = {}, separation ratio {}", lattice.len(), format_value(report.min_separation_ratio)),
        format!("deterministic = {} ({})", format_value(criterion.last_value()), criterion.verdict),
        escape_note(&rungs),
    ];
    Ok(Artifacts { criteria: vec![criterion], escape: Some(rungs), analytic, notes })
}

fn escape_note(rungs: &[ProbeRung]) -> String {
    let parts: Vec<String> = rungs
        .iter()
        .map(|r| format!("{:e}: {:.4} ± {:.4}", r.epsilon, r.mean, r.stderr))
        .collect();
    let blocked: usize = rungs.iter().map(|r| r.blocked).sum();
    let censored: u64 = rungs.iter().map(|r| r.censored).sum();
    format!("escape means [{}], blocked {blocked}, censored {censored}", parts.join(", "))
}
