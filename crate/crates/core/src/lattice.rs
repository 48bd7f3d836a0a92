//! Deterministic regularly spaced point sets in the unit ball.
//!
//! Points sit on the origin and on the shells `|x| = 1 − 2^{−j}`; each shell
//! carries a cube-sphere grid whose angular spacing shrinks like `2^{−j}`.

use rand::Rng;

use crate::error::{check_dimension, Error, Result};
use crate::geometry::{norm, Point};
use crate::index::ObstacleIndex;
use crate::rng;

/// Safety factor applied to the largest grid spacing the covering bound allows.
const SPACING_MARGIN: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    points: Vec<f64>,
    pub separation: f64,
    pub covering: f64,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub separation_ok: bool,
    pub covering_ok: bool,
    /// `min |λ − λ′| / (1 − |λ|)` over pairs closer than the required
    /// separation; `+∞` when there are none.
    pub min_separation_ratio: f64,
    pub uncovered_samples: usize,
    pub samples: usize,
}

impl Lattice {
    pub fn from_points(dim: usize, points: &[Point], separation: f64, covering: f64, depth: u32) -> Self {
        Lattice {
            dim,
            points: points.iter().flat_map(|p| p.coords().iter().copied()).collect(),
            separation,
            covering,
            depth,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    /// Keeps the shells needed to cover annuli up to `depth`.
    pub fn truncated(&self, depth: u32) -> Lattice {
        let limit = 1.0 - 0.5f64.powi(depth as i32 + 1) + 1e-12;
        let points = self
            .points
            .chunks_exact(self.dim)
            .filter(|p| norm(p) <= limit)
            .flatten()
            .copied()
            .collect();
        Lattice { points, depth: depth.min(self.depth), ..self.clone() }
    }
}

fn push_shell(d: usize, radius: f64, spacing: f64, out: &mut Vec<f64>) {
    let n = (2.0 / spacing).ceil().max(1.0) as usize;
    let step = 2.0 / n as f64;
    let mut idx = vec![0usize; d - 1];
    let mut u = vec![0.0; d];
    for axis in 0..d {
        for sign in [-1.0, 1.0] {
            idx.iter_mut().for_each(|i| *i = 0);
            loop {
                let mut k = 0;
                for (c, slot) in u.iter_mut().enumerate() {
                    if c == axis {
                        *slot = sign;
                    } else {
                        *slot = -1.0 + (idx[k] as f64 + 0.5) * step;
                        k += 1;
                    }
                }
                let s = radius / norm(&u);
                out.extend(u.iter().map(|x| x * s));
                let mut i = 0;
                while i < d - 1 {
                    idx[i] += 1;
                    if idx[i] < n {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == d - 1 {
                    break;
                }
            }
        }
    }
}

/// Generates a lattice satisfying `|λ − λ′| ≥ ε_sep (1 − |λ|)` and covering
/// `{|x| ≤ 1 − 2^{−depth−1}}` (dyadic annuli `0..=depth`) by the balls
/// `B(λ, r_cov (1 − |λ|))`. Shells run from 1 to `depth + 1`.
pub fn regular_lattice(d: usize, separation: f64, covering: f64, depth: u32) -> Result<Lattice> {
    check_dimension(d)?;
    if !(separation > 0.0) || !(covering > 0.0 && covering < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need separation > 0 and 0 < covering < 1, got ({separation}, {covering})"
        )));
    }
    if !(1..=20).contains(&depth) {
        return Err(Error::InvalidParameter(format!("depth must lie in 1..=20, got {depth}")));
    }
    // A point between shells j and j+1 is at most a third of the local
    // boundary distance from the nearer shell (measured in units of it).
    if covering <= 1.0 / 3.0 {
        return Err(Error::Infeasible(format!(
            "covering: r_cov = {covering} must exceed 1/3 for dyadic shells"
        )));
    }
    if separation > 0.5 {
        return Err(Error::Infeasible(format!(
            "separation: consecutive shells are only (1-|λ|)/2 apart, ε_sep = {separation} > 1/2"
        )));
    }
    let kappa = SPACING_MARGIN * 2.0 * (covering - 1.0 / 3.0) / ((d - 1) as f64).sqrt();
    let mut points = vec![0.0; d];
    for j in 1..=depth + 1 {
        let t = 1.0 - 0.5f64.powi(j as i32);
        push_shell(d, t, kappa * 0.5f64.powi(j as i32) / t, &mut points);
    }
    let lattice = Lattice { dim: d, points, separation, covering, depth };
    let ratio = min_separation_ratio(&lattice, separation);
    if ratio < separation {
        return Err(Error::Infeasible(format!(
            "separation: the grid spacing forced by r_cov = {covering} gives ratio {ratio:.4} < ε_sep = {separation}"
        )));
    }
    Ok(lattice)
}

fn min_separation_ratio(l: &Lattice, threshold: f64) -> f64 {
    let n = l.len();
    let idx = ObstacleIndex::new(l.dim, &l.points, &vec![0.0; n]);
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let p = l.point(i);
        let gap = 1.0 - norm(p);
        idx.for_each_within(p, threshold * gap, |k| {
            if k != i {
                let ratio = crate::geometry::distance(p, idx.center(k)) / gap;
                worst = worst.min(ratio);
            }
        });
        if gap <= 0.0 {
            worst = worst.min(0.0);
        }
    }
    worst
}

/// Checks separation over near neighbours and covering by Monte Carlo on
/// `{|x| ≤ 1 − 2^{−depth−1}}`.
pub fn check_regular(l: &Lattice, samples: usize, seed: u64) -> RegularityReport {
    let ratio = min_separation_ratio(l, l.separation);
    let radii: Vec<f64> = l
        .points
        .chunks_exact(l.dim)
        .map(|p| l.covering * (1.0 - norm(p)))
        .collect();
    let cover = ObstacleIndex::new(l.dim, &l.points, &radii);
    let limit = 1.0 - 0.5f64.powi(l.depth as i32 + 1);
    let mut rng = rng::stream(seed, &[]);
    let mut dir = vec![0.0; l.dim];
    let mut uncovered = 0;
    for _ in 0..samples {
        rng::sample_direction(&mut rng, &mut dir);
        let s = limit * rng.random::<f64>().powf(1.0 / l.dim as f64);
        dir.iter_mut().for_each(|x| *x *= s);
        if !cover.any_within(&dir, 0.0) {
            uncovered += 1;
        }
    }
    RegularityReport {
        separation_ok: ratio >= l.separation,
        covering_ok: uncovered == 0,
        min_separation_ratio: ratio,
        uncovered_samples: uncovered,
        samples,
    }
}
