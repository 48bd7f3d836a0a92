//! Wiener-type series over Whitney cubes and over the exterior shells.

use rayon::prelude::*;

use crate::capacity::{axis_cube_capacity, cube_capacity};
use crate::error::{check_dimension, Error, Result};
use crate::exterior::exterior_cubes;
use crate::geometry::{Ball, BoundaryPoint};
use crate::process::{PoissonSampler, Realization};
use crate::profile::{IntensityProfile, RadiusProfile};
use crate::rng::derive_seed;
use crate::whitney::{dist_cube_to_point, WhitneyCube, WhitneyDecomposition};

use super::{check_ladder, report_any_length, CriterionReport};

/// Whitney cubes met by some ball, in key order, each with the indices of
/// those balls in increasing order.
fn incidences(balls: &[Ball], w: &WhitneyDecomposition) -> Vec<(WhitneyCube, Vec<usize>)> {
    let mut pairs: Vec<((u32, u64), usize)> = Vec::new();
    let mut keys = Vec::new();
    for (i, b) in balls.iter().enumerate() {
        keys.clear();
        w.keys_meeting_ball(b.center.coords(), b.radius, &mut keys);
        pairs.extend(keys.iter().map(|&k| (k, i)));
    }
    pairs.sort_unstable();
    let mut out: Vec<(WhitneyCube, Vec<usize>)> = Vec::new();
    let mut last = None;
    for (key, i) in pairs {
        if last != Some(key) {
            out.push((w.cube_at(key.0, key.1), Vec::new()));
            last = Some(key);
        }
        out.last_mut().unwrap().1.push(i);
    }
    out
}

/// `ℓ(Q)² cap(A ∩ Q) / ρ(Q, τ)^d`.
fn term(balls: &[Ball], q: &WhitneyCube, tau: &BoundaryPoint) -> f64 {
    let d = q.center.dim() as i32;
    let cap = cube_capacity(balls, q).value;
    if cap == 0.0 {
        return 0.0;
    }
    q.side * q.side * cap / dist_cube_to_point(q, tau).powi(d)
}

fn check_balls(balls: &[Ball], d: usize) -> Result<()> {
    if balls.iter().any(|b| b.dim() != d || !(b.radius >= 0.0)) {
        return Err(Error::InvalidInput("balls must match τ's dimension and have radius >= 0".into()));
    }
    Ok(())
}

/// `W(A, τ) = Σ_Q ℓ(Q)² cap(A ∩ Q) / ρ(Q, τ)^d` over the Whitney cubes of
/// each truncation; rung `i` keeps the cubes with `min_{x∈Q}|x| < 1 − ε_i`.
pub fn wiener_series(balls: &[Ball], tau: &BoundaryPoint, ladder: &[f64]) -> Result<CriterionReport> {
    let d = tau.dim();
    check_dimension(d)?;
    check_ladder(ladder, 0.5)?;
    check_balls(balls, d)?;
    let w = WhitneyDecomposition::new(d, *ladder.last().unwrap())?;
    let cubes = incidences(balls, &w);
    let mut terms = Vec::with_capacity(cubes.len());
    for (q, members) in &cubes {
        let local: Vec<Ball> = members.iter().map(|&i| balls[i].clone()).collect();
        terms.push((q.as_cube().min_norm(), term(&local, q, tau)));
    }
    let values = ladder
        .iter()
        .map(|&e| (e, terms.iter().filter(|(m, _)| *m < 1.0 - e).map(|(_, t)| t).sum()))
        .collect();
    report_any_length("wiener", values, format!("d={d};balls={}", balls.len()))
}

/// `W(A, ∞) = Σ_Q cap(A ∩ Q) / ℓ(Q)^{d−2}` over exterior shells `1..=j_max`,
/// reported at `ε_j = 3^{−j}`.
pub fn wiener_series_infinity(balls: &[Ball], d: usize, j_max: u32) -> Result<CriterionReport> {
    check_dimension(d)?;
    check_balls(balls, d)?;
    if let Some(b) = balls.iter().find(|b| b.center.norm() - b.radius < 1.0) {
        return Err(Error::InvalidInput(format!(
            "ball at |p| = {} with radius {} meets the unit ball",
            b.center.norm(),
            b.radius
        )));
    }
    let cubes = exterior_cubes(d, j_max)?;
    let mut values = Vec::with_capacity(j_max as usize);
    let mut total = 0.0;
    for j in 1..=j_max {
        for q in cubes.iter().filter(|q| q.shell == j) {
            let cube = q.as_cube();
            let cap = axis_cube_capacity(balls, &cube).value;
            total += cap / q.side.powi(d as i32 - 2);
        }
        values.push((3f64.powi(-(j as i32)), total));
    }
    report_any_length("wiener-infinity", values, format!("d={d};balls={}", balls.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WienerRung {
    pub epsilon: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedWiener {
    pub rungs: Vec<WienerRung>,
    pub realizations: usize,
}

/// Partial Wiener sums of one realization at every rung; rung `i` uses the
/// obstacles with `|p| < 1 − ε_i` and the cubes of the `ε_i` decomposition.
fn realization_partial_sums(
    real: &Realization,
    tau: &BoundaryPoint,
    ladder: &[f64],
    w: &WhitneyDecomposition,
) -> Vec<f64> {
    let balls: Vec<Ball> = crate::process::build_archipelago(real).balls();
    let norms: Vec<f64> = balls.iter().map(|b| b.center.norm()).collect();
    let mut sums = vec![0.0; ladder.len()];
    for (q, members) in incidences(&balls, w) {
        let min_norm = q.as_cube().min_norm();
        // Rungs are nested, so each cube's ball subset only grows along the
        // ladder; the term is recomputed only when the subset changes.
        let mut cached: Option<(usize, f64)> = None;
        for (i, &e) in ladder.iter().enumerate() {
            let limit = 1.0 - e;
            if min_norm >= limit {
                continue;
            }
            let inside = members.iter().filter(|&&k| norms[k] < limit).count();
            if inside == 0 {
                continue;
            }
            let value = match cached {
                Some((n, v)) if n == inside => v,
                _ => {
                    let local: Vec<Ball> =
                        members.iter().filter(|&&k| norms[k] < limit).map(|&k| balls[k].clone()).collect();
                    term(&local, &q, tau)
                }
            };
            cached = Some((inside, value));
            sums[i] += value;
        }
    }
    sums
}

/// Monte Carlo mean and standard error of `W(A_P, τ)` rung by rung.
/// Realization `r` is sampled at the finest truncation with seed
/// `derive_seed(seed, [r])`; coarser rungs restrict it.
pub fn expected_wiener(
    phi: &RadiusProfile,
    nu: &IntensityProfile,
    d: usize,
    tau: &BoundaryPoint,
    ladder: &[f64],
    n_realizations: usize,
    seed: u64,
) -> Result<ExpectedWiener> {
    check_ladder(ladder, 0.5)?;
    if tau.dim() != d {
        return Err(Error::InvalidInput(format!("τ has dimension {}, expected {d}", tau.dim())));
    }
    if n_realizations == 0 {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let eps_min = *ladder.last().unwrap();
    let sampler = PoissonSampler::new(phi, nu, eps_min, d)?;
    let w = WhitneyDecomposition::new(d, eps_min)?;
    let sums: Vec<Vec<f64>> = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let real = sampler.sample(derive_seed(seed, &[r as u64]));
            realization_partial_sums(&real, tau, ladder, &w)
        })
        .collect();
    let n = n_realizations as f64;
    let rungs = ladder
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let mean = sums.iter().map(|s| s[i]).sum::<f64>() / n;
            let var = if n_realizations > 1 {
                sums.iter().map(|s| (s[i] - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            WienerRung { epsilon: e, mean, stderr: (var / n).sqrt() }
        })
        .collect();
    Ok(ExpectedWiener { rungs, realizations: n_realizations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::clip_to_cube;
    use crate::criteria::Verdict;
    use crate::geometry::Point;
    use crate::whitney::whitney_decompose;

    fn ball(c: &[f64], r: f64) -> Ball {
        Ball::new(Point::new(c.to_vec()), r)
    }

    #[test]
    fn empty_set_converges() {
        let r = wiener_series(&[], &BoundaryPoint::axis(3, 0), &[0.1, 0.05, 0.02, 0.01]).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        assert_eq!(r.verdict, Verdict::Converges);
    }

    #[test]
    fn single_ball_matches_enumeration() {
        let tau = BoundaryPoint::axis(3, 0);
        let a = [ball(&[0.5, 0.0, 0.0], 0.01)];
        let ladder = [0.2, 0.1, 0.05, 0.02];
        let r = wiener_series(&a, &tau, &ladder).unwrap();
        for &(e, v) in &r.ladder {
            // Brute force over every cube of the decomposition.
            let mut expect = 0.0;
            for q in whitney_decompose(3, e).unwrap() {
                let cube = q.as_cube();
                let clipped = clip_to_cube(&a, &cube);
                let cap: f64 = clipped.iter().map(|b| b.radius).sum();
                expect += q.side * q.side * cap / dist_cube_to_point(&q, &tau).powi(3);
            }
            assert!(expect > 0.0);
            assert!((v - expect).abs() <= 1e-15 * expect, "{v} vs {expect}");
        }
        assert!(r.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn exterior_single_ball() {
        let a = [ball(&[2.0, 0.0, 0.0], 0.5)];
        let one = wiener_series_infinity(&a, 3, 1).unwrap();
        assert_eq!(one.last_value(), 0.5);
        let two = wiener_series_infinity(&a, 3, 2).unwrap();
        let four = wiener_series_infinity(&a, 3, 4).unwrap();
        assert!((two.last_value() - (0.5 + 0.5 / 3.0)).abs() < 1e-15);
        assert_eq!(two.last_value(), four.last_value());
        assert_eq!(wiener_series_infinity(&[], 3, 4).unwrap().verdict, Verdict::Converges);
        assert!(wiener_series_infinity(&[ball(&[1.2, 0.0, 0.0], 0.5)], 3, 2).is_err());
    }

    #[test]
    fn expected_wiener_of_empty_process() {
        let e = expected_wiener(
            &RadiusProfile::linear(0.1),
            &IntensityProfile::zero(),
            3,
            &BoundaryPoint::axis(3, 0),
            &[0.1, 0.03],
            5,
            1,
        )
        .unwrap();
        assert!(e.rungs.iter().all(|r| r.mean == 0.0 && r.stderr == 0.0));
    }

    #[test]
    fn expected_wiener_is_deterministic_and_nondecreasing() {
        let args = (RadiusProfile::linear(0.1), IntensityProfile::power_law(1.0, 2.0));
        let run = || {
            expected_wiener(&args.0, &args.1, 3, &BoundaryPoint::axis(3, 2), &[0.1, 0.03, 0.01], 8, 42).unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.rungs.windows(2).all(|w| w[1].mean >= w[0].mean));
        assert!(a.rungs[0].mean > 0.0);
    }
}
