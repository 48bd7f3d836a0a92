//! Poisson point process on the unit ball and the obstacle archipelago it generates.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{norm, sphere_area, AxisCube, Ball, Point};
use crate::profile::{validate_profiles, IntensityProfile, RadiusProfile};
use crate::quadrature::{breaks_toward, gauss_legendre, integrate_with_breaks, QuadOptions};
use crate::rng;

/// Each dyadic annulus is cut into this many equal-width sampling cells.
const CELLS_PER_ANNULUS: u32 = 8;

/// Gap left below `t = 1` when integrating up to the sphere; the remainder
/// is added from the tail power law.
const SPHERE_GAP: f64 = 1e-12;

/// μ({a ≤ |x| < b}) = |𝕊^{d−1}| ∫_a^b t^{d−1} ν(t) dt.
///
/// With `b = 1` a non-integrable ν yields [`Error::Divergence`].
pub fn mean_measure(nu: &IntensityProfile, a: f64, b: f64, d: usize) -> Result<f64> {
    crate::error::check_dimension(d)?;
    nu.check()?;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "annulus needs 0 <= a < b <= 1, got [{a}, {b})"
        )));
    }
    if nu.is_zero() {
        return Ok(0.0);
    }
    let area = sphere_area(d);
    let density = |t: f64| t.powi(d as i32 - 1) * nu.eval(t);
    let opts = QuadOptions::with_rel_tol(1e-11);
    if b < 1.0 {
        let r = integrate_with_breaks(density, &breaks_toward(a, b, 1.0), &opts);
        return Ok(area * r.value);
    }
    let p = nu.tail_exponent().unwrap_or(0.0);
    if p <= -1.0 {
        return Err(Error::Divergence(format!(
            "nu ~ (1-t)^{p} is not integrable up to the sphere; use a positive truncation"
        )));
    }
    let top = 1.0 - SPHERE_GAP;
    let body = if a < top {
        integrate_with_breaks(density, &breaks_toward(a, top, 1.0), &opts).value
    } else {
        0.0
    };
    let gap = 1.0 - a.max(top);
    let tail = nu.eval(1.0 - gap) * gap / (p + 1.0);
    Ok(area * (body + tail))
}

/// μ(Q) for a cube inside the ball, by tensor Gauss–Legendre quadrature.
pub fn mean_measure_cube(nu: &IntensityProfile, cube: &AxisCube) -> f64 {
    let (x, w) = gauss_legendre(8);
    let d = cube.dim();
    let h = 0.5 * cube.side;
    let c = cube.center.coords();
    let n = x.len();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for i in 0..d {
            point[i] = c[i] + h * x[idx[i]];
            weight *= w[idx[i]];
        }
        total += weight * nu.eval(norm(&point));
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] < n {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    total * h.powi(d as i32)
}

/// A finite sample of obstacle centers with their radii `φ(|p|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    dim: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
    epsilon: f64,
    seed: u64,
    phi: RadiusProfile,
    nu: IntensityProfile,
}

impl Realization {
    /// Builds a realization from explicit centers; radii follow φ.
    pub fn from_centers(
        dim: usize,
        centers: &[Point],
        phi: RadiusProfile,
        nu: IntensityProfile,
        epsilon: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut flat = Vec::with_capacity(centers.len() * dim);
        let mut radii = Vec::with_capacity(centers.len());
        for c in centers {
            if c.dim() != dim {
                return Err(Error::InvalidInput("center dimension mismatch".into()));
            }
            let t = c.norm();
            if !(t < 1.0 - epsilon) {
                return Err(Error::InvalidInput(format!(
                    "center with |p| = {t} outside the truncated ball |p| < {}",
                    1.0 - epsilon
                )));
            }
            flat.extend_from_slice(c.coords());
            radii.push(phi.eval(t));
        }
        Ok(Realization {
            dim,
            centers: flat,
            radii,
            epsilon,
            seed,
            phi,
            nu,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.radii.len()
    }
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn phi(&self) -> &RadiusProfile {
        &self.phi
    }
    pub fn nu(&self) -> &IntensityProfile {
        &self.nu
    }
    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }
    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    /// Keeps only the centers with `|p| < 1 − ε′`.
    pub fn restrict(&self, epsilon: f64) -> Realization {
        let mut out = Realization {
            centers: Vec::new(),
            radii: Vec::new(),
            epsilon: epsilon.max(self.epsilon),
            ..self.clone()
        };
        for i in 0..self.len() {
            let c = self.center(i);
            if norm(c) < 1.0 - epsilon {
                out.centers.extend_from_slice(c);
                out.radii.push(self.radii[i]);
            }
        }
        out
    }

    /// Line-oriented text: `#` header lines, then `x_1 … x_d r` per obstacle
    /// with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# percolate-realization v1")?;
        writeln!(w, "# d {}", self.dim)?;
        writeln!(w, "# epsilon {:?}", self.epsilon)?;
        writeln!(w, "# seed {}", self.seed)?;
        writeln!(w, "# phi {}", self.phi)?;
        writeln!(w, "# nu {}", self.nu)?;
        writeln!(w, "# count {}", self.len())?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            for x in self.center(i) {
                write!(line, "{x:.16e} ").unwrap();
            }
            write!(line, "{:.16e}", self.radii[i]).unwrap();
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut header = std::collections::HashMap::new();
        let mut centers = Vec::new();
        let mut radii = Vec::new();
        let mut dim = None;
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let perr = |message: String| Error::Parse { line: lineno, message };
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some((k, v)) = rest.split_once(' ') {
                    header.insert(k.to_string(), v.trim().to_string());
                    if k == "d" {
                        dim = Some(v.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?);
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let d = dim.ok_or_else(|| perr("data before `# d` header".into()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| perr(e.to_string())))
                .collect::<Result<_>>()?;
            if vals.len() != d + 1 {
                return Err(perr(format!("expected {} fields, got {}", d + 1, vals.len())));
            }
            centers.extend_from_slice(&vals[..d]);
            radii.push(vals[d]);
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Parse { line: 0, message: format!("missing header `{k}`") })
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Parse { line: 0, message: format!("bad `{k}`") })
        };
        let out = Realization {
            dim: dim.ok_or_else(|| Error::Parse { line: 0, message: "missing `# d`".into() })?,
            centers,
            radii,
            epsilon: num("epsilon")?,
            seed: get("seed")?
                .parse()
                .map_err(|_| Error::Parse { line: 0, message: "bad seed".into() })?,
            phi: get("phi")?.parse()?,
            nu: get("nu")?.parse()?,
        };
        if let Ok(count) = get("count") {
            if count.parse::<usize>().ok() != Some(out.len()) {
                return Err(Error::Parse { line: 0, message: "count does not match data".into() });
            }
        }
        Ok(out)
    }
}

/// The union of closed obstacle balls, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Archipelago {
    dim: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
}

impl Archipelago {
    pub fn new(dim: usize) -> Self {
        Archipelago { dim, centers: Vec::new(), radii: Vec::new() }
    }

    pub fn from_balls(dim: usize, balls: &[Ball]) -> Self {
        let mut a = Archipelago::new(dim);
        for b in balls {
            a.push(b.center.coords(), b.radius);
        }
        a
    }

    pub fn push(&mut self, center: &[f64], radius: f64) {
        debug_assert_eq!(center.len(), self.dim);
        self.centers.extend_from_slice(center);
        self.radii.push(radius);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.radii.len()
    }
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }
    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }
    pub fn ball(&self, i: usize) -> Ball {
        Ball::new(Point::new(self.center(i).to_vec()), self.radii[i])
    }
    pub fn balls(&self) -> Vec<Ball> {
        (0..self.len()).map(|i| self.ball(i)).collect()
    }
}

/// `A_P = ⋃ B̄(p, φ(|p|))`: one closed ball per center, overlaps allowed.
pub fn build_archipelago(p: &Realization) -> Archipelago {
    Archipelago {
        dim: p.dim,
        centers: p.centers.clone(),
        radii: p.radii.clone(),
    }
}

#[derive(Debug, Clone)]
struct Cell {
    annulus: u32,
    slot: u32,
    inner: f64,
    outer: f64,
    mass: f64,
    density_bound: f64,
}

/// Sampler for the Poisson process restricted to `{|x| < 1 − ε}`.
///
/// The ball is cut into cells: dyadic annuli `1 − 2^{−j} ≤ |x| < 1 − 2^{−j−1}`
/// split into equal-width sub-shells. Each cell draws a Poisson count from
/// its own mean and places points by rejection against the cell's bound
/// on `t^{d−1} ν(t)`; points beyond the truncation are then discarded. The
/// stream of cell `(j, k)` depends only on `(seed, j, k)`, so a sample at
/// `ε` restricted to `ε′ > ε` is exactly the sample at `ε′`.
#[derive(Debug, Clone)]
pub struct PoissonSampler {
    dim: usize,
    epsilon: f64,
    phi: RadiusProfile,
    nu: IntensityProfile,
    cells: Vec<Cell>,
}

impl PoissonSampler {
    pub fn new(phi: &RadiusProfile, nu: &IntensityProfile, epsilon: f64, dim: usize) -> Result<Self> {
        let report = validate_profiles(phi, nu, dim)?;
        if !report.passes() {
            return Err(Error::InvalidProfile(format!(
                "profile assumptions fail: {}",
                report.failures().join("; ")
            )));
        }
        if epsilon == 0.0 {
            return Err(match mean_measure(nu, 0.0, 1.0, dim) {
                Err(e @ Error::Divergence(_)) => e,
                _ => Error::InvalidParameter("sampling requires a positive truncation".into()),
            });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("truncation must lie in (0, 1), got {epsilon}")));
        }
        let mut cells = Vec::new();
        if !nu.is_zero() {
            let mut j = 0u32;
            loop {
                let a = 1.0 - 0.5f64.powi(j as i32);
                let b = 1.0 - 0.5f64.powi(j as i32 + 1);
                if a >= 1.0 - epsilon {
                    break;
                }
                let w = (b - a) / CELLS_PER_ANNULUS as f64;
                for k in 0..CELLS_PER_ANNULUS {
                    let inner = a + k as f64 * w;
                    let outer = if k + 1 == CELLS_PER_ANNULUS { b } else { inner + w };
                    if inner >= 1.0 - epsilon {
                        break;
                    }
                    let mass = mean_measure(nu, inner, outer, dim)?;
                    if !mass.is_finite() {
                        return Err(Error::Divergence(format!(
                            "infinite mean measure on [{inner}, {outer}); increase the truncation"
                        )));
                    }
                    let density_bound = outer.powi(dim as i32 - 1) * nu.sup_on(inner, outer);
                    cells.push(Cell { annulus: j, slot: k, inner, outer, mass, density_bound });
                }
                j += 1;
            }
        }
        Ok(PoissonSampler { dim, epsilon, phi: phi.clone(), nu: nu.clone(), cells })
    }

    /// Expected number of points in the truncated ball.
    pub fn expected_count(&self) -> f64 {
        mean_measure(&self.nu, 0.0, 1.0 - self.epsilon, self.dim).unwrap_or(f64::INFINITY)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn sample_cell(&self, cell: &Cell, seed: u64) -> Vec<f64> {
        let d = self.dim;
        let mut rng = rng::stream(seed, &[cell.annulus as u64, cell.slot as u64]);
        let count = if cell.mass > 0.0 {
            Poisson::new(cell.mass).map(|p| p.sample(&mut rng) as usize).unwrap_or(0)
        } else {
            0
        };
        let limit = 1.0 - self.epsilon;
        let mut out = Vec::new();
        let mut dir = vec![0.0; d];
        for _ in 0..count {
            let t = loop {
                let t = cell.inner + (cell.outer - cell.inner) * rng.random::<f64>();
                let accept = t.powi(d as i32 - 1) * self.nu.eval(t);
                if rng.random::<f64>() * cell.density_bound <= accept {
                    break t;
                }
            };
            rng::sample_direction(&mut rng, &mut dir);
            if t < limit {
                out.extend(dir.iter().map(|u| u * t));
            }
        }
        out
    }

    pub fn sample(&self, seed: u64) -> Realization {
        let per_cell: Vec<Vec<f64>> = self
            .cells
            .par_iter()
            .map(|c| self.sample_cell(c, seed))
            .collect();
        let centers: Vec<f64> = per_cell.concat();
        let radii = centers
            .chunks_exact(self.dim)
            .map(|c| self.phi.eval(norm(c)))
            .collect();
        Realization {
            dim: self.dim,
            centers,
            radii,
            epsilon: self.epsilon,
            seed,
            phi: self.phi.clone(),
            nu: self.nu.clone(),
        }
    }
}

/// Samples one realization of the truncated process.
pub fn sample_realization(
    nu: &IntensityProfile,
    phi: &RadiusProfile,
    epsilon: f64,
    dim: usize,
    seed: u64,
) -> Result<Realization> {
    Ok(PoissonSampler::new(phi, nu, epsilon, dim)?.sample(seed))
}
