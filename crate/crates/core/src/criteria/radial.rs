//! One-dimensional radial criteria.

use crate::error::{check_dimension, Error, Result};
use crate::geometry::sphere_area;
use crate::process::mean_measure;
use crate::profile::{ExteriorProfile, IntensityProfile, RadiusProfile};
use crate::quadrature::{breaks_toward, integrate_with_breaks, QuadOptions};

use super::{check_ladder, report_any_length, CriterionReport};

fn quad_opts() -> QuadOptions {
    QuadOptions::with_rel_tol(1e-11)
}

/// Cumulative `∫_0^{1−ε_i} f` along the ladder.
fn interior_ladder<F: Fn(f64) -> f64>(f: F, ladder: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_ladder(ladder, 1.0)?;
    let mut out = Vec::with_capacity(ladder.len());
    let (mut a, mut total) = (0.0, 0.0);
    for &eps in ladder {
        let b = 1.0 - eps;
        let piece = integrate_with_breaks(&f, &breaks_toward(a, b, 1.0), &quad_opts());
        if !piece.value.is_finite() || !piece.converged {
            return Err(Error::NumericalFailure(format!(
                "quadrature on [{a}, {b}] did not converge (estimate {}, error {})",
                piece.value, piece.abs_error
            )));
        }
        total += piece.value.max(0.0);
        out.push((eps, total));
        a = b;
    }
    Ok(out)
}

/// `∫_0^1 (1 − t) φ(t)^{d−2} ν(t) dt`.
pub fn radial_criterion(
    phi: &RadiusProfile,
    nu: &IntensityProfile,
    d: usize,
    ladder: &[f64],
) -> Result<CriterionReport> {
    check_dimension(d)?;
    phi.check()?;
    nu.check()?;
    let p = d as i32 - 2;
    let values = interior_ladder(|t| (1.0 - t) * phi.eval(t).powi(p) * nu.eval(t), ladder)?;
    report_any_length("radial", values, format!("d={d};phi={phi};nu={nu}"))
}

/// `∫_0^1 (1 − t)^{d−1} ν(t) dt`.
pub fn lundh_criterion(nu: &IntensityProfile, d: usize, ladder: &[f64]) -> Result<CriterionReport> {
    check_dimension(d)?;
    nu.check()?;
    let p = d as i32 - 1;
    let values = interior_ladder(|t| (1.0 - t).powi(p) * nu.eval(t), ladder)?;
    report_any_length("lundh", values, format!("d={d};nu={nu}"))
}

/// `∫_0^1 φ(t)^{d−2} / (1 − t)^{d−1} dt` for obstacles on a regular lattice.
pub fn deterministic_criterion(phi: &RadiusProfile, d: usize, ladder: &[f64]) -> Result<CriterionReport> {
    if d == 2 {
        return Err(Error::Unsupported("the planar lattice criterion is out of scope".into()));
    }
    check_dimension(d)?;
    phi.check()?;
    let (p, q) = (d as i32 - 2, d as i32 - 1);
    let values = interior_ladder(|t| phi.eval(t).powi(p) / (1.0 - t).powi(q), ladder)?;
    report_any_length("deterministic", values, format!("d={d};phi={phi}"))
}

/// `μ({|x| < 1 − ε})`; `+∞` when ε = 0 and ν is not integrable.
pub fn expected_obstacle_count(nu: &IntensityProfile, epsilon: f64, d: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("truncation must lie in [0, 1), got {epsilon}")));
    }
    match mean_measure(nu, 0.0, 1.0 - epsilon, d) {
        Err(Error::Divergence(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

pub fn expected_obstacle_count_ladder(nu: &IntensityProfile, d: usize, ladder: &[f64]) -> Result<CriterionReport> {
    check_ladder(ladder, 1.0)?;
    let values = ladder
        .iter()
        .map(|&e| Ok((e, expected_obstacle_count(nu, e, d)?)))
        .collect::<Result<Vec<_>>>()?;
    report_any_length("expected-count", values, format!("d={d};nu={nu}"))
}

fn check_radius_ladder(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii[0] <= 1.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "exterior radii must be strictly increasing and > 1, got {radii:?}"
        )));
    }
    Ok(())
}

/// Cumulative `∫_1^{R_i} f`, reported against `ε_i = 1/R_i`.
fn exterior_ladder<F: Fn(f64) -> f64>(f: F, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_radius_ladder(radii)?;
    let mut out = Vec::with_capacity(radii.len());
    let (mut a, mut total) = (1.0f64, 0.0);
    for &b in radii {
        let mut breaks = vec![a];
        while breaks.last().unwrap() * 2.0 < b {
            let next = breaks.last().unwrap() * 2.0;
            breaks.push(next);
        }
        breaks.push(b);
        let piece = integrate_with_breaks(&f, &breaks, &quad_opts());
        if !piece.value.is_finite() || !piece.converged {
            return Err(Error::NumericalFailure(format!("exterior quadrature on [{a}, {b}] did not converge")));
        }
        total += piece.value.max(0.0);
        out.push((1.0 / b, total));
        a = b;
    }
    Ok(out)
}

fn check_exterior_phi(phi: &ExteriorProfile) -> Result<()> {
    phi.check()?;
    if phi.growth_exponent().is_some_and(|p| p > 1.0) {
        return Err(Error::InvalidProfile(format!("φ(r)/r must stay bounded, got {phi}")));
    }
    Ok(())
}

/// `|𝕊^{d−1}| ∫_1^R r^{d−1} (φ(r)/r)^{d−2} ν(r) dr` along increasing radii.
pub fn exterior_criterion(
    phi: &ExteriorProfile,
    nu: &ExteriorProfile,
    d: usize,
    radii: &[f64],
) -> Result<CriterionReport> {
    check_dimension(d)?;
    check_exterior_phi(phi)?;
    nu.check()?;
    let area = sphere_area(d);
    let (p, q) = (d as i32 - 1, d as i32 - 2);
    let values = exterior_ladder(|r| area * r.powi(p) * (phi.eval(r) / r).powi(q) * nu.eval(r), radii)?;
    report_any_length("exterior", values, format!("d={d};phi={phi};nu={nu}"))
}

/// `∫_1^R r φ(r)^{d−2} dr`: the exterior integral with ν ≡ 1, without the sphere area.
pub fn exterior_deterministic_criterion(phi: &ExteriorProfile, d: usize, radii: &[f64]) -> Result<CriterionReport> {
    check_dimension(d)?;
    check_exterior_phi(phi)?;
    let q = d as i32 - 2;
    let values = exterior_ladder(|r| r * phi.eval(r).powi(q), radii)?;
    report_any_length("exterior-deterministic", values, format!("d={d};phi={phi}"))
}
