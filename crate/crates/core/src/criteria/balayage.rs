//! Poisson balayage `∫_𝔹 (1 − |x|²)² |x − τ|^{−d} φ(x)^{d−2} ν(x) dx`.
//!
//! In polar coordinates about the origin with the polar axis along τ,
//! radial profiles leave only the radius `t` and the angle θ from τ; the
//! remaining `d − 2` sphere directions integrate to `|𝕊^{d−2}|`.

use std::f64::consts::PI;

use crate::error::{check_dimension, Error, Result};
use crate::geometry::{sphere_area, BoundaryPoint};
use crate::profile::{IntensityProfile, RadiusProfile};
use crate::quadrature::{breaks_away_from, breaks_toward, integrate_with_breaks, QuadOptions};

use super::{check_ladder, report_any_length, CriterionReport};

/// `K(t) = ∫_0^π sin^{d−2}θ (1 + t² − 2t cos θ)^{−d/2} dθ`, refined
/// geometrically toward θ = 0 where the kernel peaks on the scale `1 − t`.
pub fn balayage_kernel(t: f64, d: usize) -> f64 {
    let gap = 1.0 - t;
    let f = |theta: f64| {
        let s = (0.5 * theta).sin();
        let q = gap * gap + 4.0 * t * s * s;
        theta.sin().powi(d as i32 - 2) * q.powf(-0.5 * d as f64)
    };
    let breaks = breaks_away_from(0.0, PI, gap.max(1e-300));
    integrate_with_breaks(f, &breaks, &QuadOptions::with_rel_tol(1e-12)).value
}

pub fn balayage(
    phi: &RadiusProfile,
    nu: &IntensityProfile,
    tau: &BoundaryPoint,
    ladder: &[f64],
    d: usize,
) -> Result<CriterionReport> {
    check_dimension(d)?;
    phi.check()?;
    nu.check()?;
    check_ladder(ladder, 1.0)?;
    if tau.dim() != d {
        return Err(Error::InvalidInput(format!("τ has dimension {}, expected {d}", tau.dim())));
    }
    let ring = sphere_area(d - 1);
    let p = d as i32 - 2;
    let g = |t: f64| {
        let mass = phi.eval(t).powi(p) * nu.eval(t);
        if mass == 0.0 {
            return 0.0;
        }
        let w = 1.0 - t * t;
        ring * w * w * mass * t.powi(d as i32 - 1) * balayage_kernel(t, d)
    };
    let opts = QuadOptions::with_rel_tol(1e-10);
    let mut values = Vec::with_capacity(ladder.len());
    let (mut a, mut total) = (0.0, 0.0);
    for &eps in ladder {
        let b = 1.0 - eps;
        let piece = integrate_with_breaks(g, &breaks_toward(a, b, 1.0), &opts);
        if !piece.value.is_finite() || !piece.converged {
            return Err(Error::NumericalFailure(format!(
                "balayage quadrature on [{a}, {b}] failed (estimate {}, error {})",
                piece.value, piece.abs_error
            )));
        }
        total += piece.value.max(0.0);
        values.push((eps, total));
        a = b;
    }
    let tau_str = tau.coords().iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
    report_any_length("balayage", values, format!("d={d};phi={phi};nu={nu};tau={tau_str}"))
}
