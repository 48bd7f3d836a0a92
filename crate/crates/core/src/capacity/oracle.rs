//! Boundary-element equilibrium charge for finite unions of balls.
//!
//! Each sphere is covered by quasi-uniform collocation panels; panels
//! buried inside another ball are dropped so that only the outer boundary
//! carries charge. The symmetric system `K q = 1` with kernel
//! `|x − y|^{2−d}` is solved by Jacobi-preconditioned conjugate gradients;
//! small systems are assembled, large ones are applied matrix-free. Two
//! refinement levels are combined by Richardson extrapolation.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, distance, sphere_area, Ball};

use super::{CapacityEstimate, CapacityMethod};

pub const MAX_ORACLE_BALLS: usize = 64;
pub const MIN_PANELS: usize = 100;

const CG_TOL: f64 = 1e-10;
const CG_MAX_ITER: usize = 500;
/// Systems up to this size are assembled once as a packed triangle.
const DENSE_LIMIT: usize = 4096;
const COINCIDENT_R2: f64 = 1e-24;

/// Unit directions and relative area weights (summing to 1).
fn unit_panels(d: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    if d == 3 {
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut dirs = Vec::with_capacity(3 * n);
        for i in 0..n {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            dirs.extend_from_slice(&[s * a.cos(), s * a.sin(), z]);
        }
        return (dirs, vec![1.0 / n as f64; n]);
    }
    // Cube-sphere grid: m^{d−1} cells on each of the 2d faces, weighted by
    // the solid angle element h^{d−1}/|u|^d.
    let m = ((n as f64 / (2 * d) as f64).powf(1.0 / (d - 1) as f64)).round().max(1.0) as usize;
    let h = 2.0 / m as f64;
    let mut dirs = Vec::new();
    let mut weights = Vec::new();
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
                        *slot = -1.0 + (idx[k] as f64 + 0.5) * h;
                        k += 1;
                    }
                }
                let len = crate::geometry::norm(&u);
                dirs.extend(u.iter().map(|x| x / len));
                weights.push(h.powi(d as i32 - 1) / len.powi(d as i32));
                let mut i = 0;
                while i < d - 1 {
                    idx[i] += 1;
                    if idx[i] < m {
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
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (dirs, weights)
}

fn kernel(r2: f64, d: usize) -> f64 {
    r2.powf(-0.5 * (d as f64 - 2.0))
}

/// Drops balls contained in another ball (the first of identical balls stays).
fn outer_balls(balls: &[Ball]) -> Vec<&Ball> {
    let contained = |i: usize, j: usize| {
        let (a, b) = (&balls[i], &balls[j]);
        distance(a.center.coords(), b.center.coords()) + a.radius <= b.radius
    };
    (0..balls.len())
        .filter(|&i| {
            !(0..balls.len()).any(|j| j != i && contained(i, j) && !(contained(j, i) && j > i))
        })
        .map(|i| &balls[i])
        .collect()
}

struct Panels {
    dim: usize,
    /// Coordinates by axis: `axes[k][i]` is coordinate `k` of panel `i`.
    axes: Vec<Vec<f64>>,
    /// Diagonal of `K`: potential of a flat disc panel at its own centre.
    diag: Vec<f64>,
}

impl Panels {
    fn len(&self) -> usize {
        self.diag.len()
    }
}

fn build_panels(balls: &[&Ball], d: usize, n: usize) -> Panels {
    let (dirs, weights) = unit_panels(d, n);
    let area = sphere_area(d);
    let disc = ball_volume(d - 1);
    let mut axes = vec![Vec::new(); d];
    let mut diag = Vec::new();
    let mut x = vec![0.0; d];
    for (bi, b) in balls.iter().enumerate() {
        let c = b.center.coords();
        for (p, &wrel) in weights.iter().enumerate() {
            for k in 0..d {
                x[k] = c[k] + b.radius * dirs[p * d + k];
            }
            let w = wrel * area * b.radius.powi(d as i32 - 1);
            let rho = (w / disc).powf(1.0 / (d - 1) as f64);
            // Panels inside another ball, or within one panel radius of it,
            // are dropped: the first are not on the outer boundary, the
            // second would nearly coincide with that ball's own panels.
            let buried = balls
                .iter()
                .enumerate()
                .any(|(bj, o)| bj != bi && distance(&x, o.center.coords()) < o.radius + rho);
            if buried {
                continue;
            }
            for k in 0..d {
                axes[k].push(x[k]);
            }
            diag.push((d - 1) as f64 * disc * rho / w);
        }
    }
    Panels { dim: d, axes, diag }
}

/// `Σ_j q_j k(|x_i − x_j|²)` over `lo..hi` for a fixed dimension, in four
/// independent lanes so the loop vectorizes; also returns the smallest `r²`.
fn lanes<const D: usize>(p: &Panels, i: usize, lo: usize, hi: usize, q: &[f64], k: impl Fn(f64) -> f64) -> (f64, f64) {
    let axes: [&[f64]; D] = std::array::from_fn(|a| &p.axes[a][lo..hi]);
    let xi: [f64; D] = std::array::from_fn(|a| p.axes[a][i]);
    let qs = &q[lo..hi];
    let r2_at = |j: usize| {
        let mut r2 = 0.0;
        for a in 0..D {
            let t = axes[a][j] - xi[a];
            r2 += t * t;
        }
        r2
    };
    let mut acc = [0.0f64; 4];
    let mut mins = [f64::INFINITY; 4];
    let m = qs.len() / 4 * 4;
    for c in (0..m).step_by(4) {
        for l in 0..4 {
            let r2 = r2_at(c + l);
            mins[l] = mins[l].min(r2);
            acc[l] += qs[c + l] * k(r2);
        }
    }
    for j in m..qs.len() {
        let r2 = r2_at(j);
        mins[0] = mins[0].min(r2);
        acc[0] += qs[j] * k(r2);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3]), mins.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Sum over `j ∈ lo..hi` of `q_j |x_i − x_j|^{2−d}`, plus the smallest squared distance.
fn row_sum(p: &Panels, i: usize, lo: usize, hi: usize, q: &[f64]) -> (f64, f64) {
    let d = p.dim;
    match d {
        3 => lanes::<3>(p, i, lo, hi, q, |r2| 1.0 / r2.sqrt()),
        4 => lanes::<4>(p, i, lo, hi, q, |r2| 1.0 / r2),
        _ => {
            let (mut sum, mut min_r2) = (0.0, f64::INFINITY);
            for j in lo..hi {
                let mut r2 = 0.0;
                for axis in &p.axes {
                    let t = axis[j] - axis[i];
                    r2 += t * t;
                }
                min_r2 = min_r2.min(r2);
                sum += q[j] * kernel(r2, d);
            }
            (sum, min_r2)
        }
    }
}

/// `out = K q`; returns the smallest squared distance between distinct panels.
fn apply(p: &Panels, q: &[f64], out: &mut [f64]) -> f64 {
    let n = p.len();
    out.par_iter_mut()
        .enumerate()
        .with_min_len(64)
        .map(|(i, o)| {
            let (a, ma) = row_sum(p, i, 0, i, q);
            let (b, mb) = row_sum(p, i, i + 1, n, q);
            *o = p.diag[i] * q[i] + a + b;
            ma.min(mb)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Upper triangle of `K`, row `i` holding columns `i..n`.
struct Packed {
    n: usize,
    entries: Vec<f64>,
}

impl Packed {
    fn assemble(p: &Panels) -> Result<Self> {
        let n = p.len();
        let d = p.dim;
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        let mut min_r2 = f64::INFINITY;
        for i in 0..n {
            entries.push(p.diag[i]);
            for j in i + 1..n {
                let mut r2 = 0.0;
                for axis in &p.axes {
                    let t = axis[j] - axis[i];
                    r2 += t * t;
                }
                min_r2 = min_r2.min(r2);
                entries.push(match d {
                    3 => 1.0 / r2.sqrt(),
                    4 => 1.0 / r2,
                    _ => kernel(r2, d),
                });
            }
        }
        if min_r2 <= COINCIDENT_R2 {
            return Err(coincident());
        }
        Ok(Packed { n, entries })
    }

    fn apply(&self, q: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut start = 0;
        for i in 0..self.n {
            let row = &self.entries[start..start + self.n - i];
            start += self.n - i;
            let qi = q[i];
            let mut acc = row[0] * qi;
            let (qs, os) = (&q[i + 1..], &mut out[i + 1..]);
            for ((a, qj), oj) in row[1..].iter().zip(qs).zip(os.iter_mut()) {
                acc += a * qj;
                *oj += a * qi;
            }
            out[i] += acc;
        }
    }
}

fn coincident() -> Error {
    Error::NumericalFailure("coincident collocation panels; separate or merge the balls, or change n_panels".into())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve_total_charge(p: &Panels) -> Result<f64> {
    let n = p.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut q = vec![0.0; n];
    let mut r = vec![1.0; n];
    let mut z: Vec<f64> = r.iter().zip(&p.diag).map(|(r, m)| r / m).collect();
    let mut dir = z.clone();
    let mut kd = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let rhs_norm = (n as f64).sqrt();
    let packed = if n <= DENSE_LIMIT { Some(Packed::assemble(p)?) } else { None };
    for it in 0..CG_MAX_ITER {
        match &packed {
            Some(m) => m.apply(&dir, &mut kd),
            None => {
                let min_r2 = apply(p, &dir, &mut kd);
                if it == 0 && min_r2 <= COINCIDENT_R2 {
                    return Err(coincident());
                }
            }
        }
        let curv = dot(&dir, &kd);
        if !(curv > 0.0) {
            return Err(Error::NumericalFailure(
                "collocation matrix lost positive definiteness; increase n_panels".into(),
            ));
        }
        let alpha = rz / curv;
        for i in 0..n {
            q[i] += alpha * dir[i];
            r[i] -= alpha * kd[i];
        }
        if dot(&r, &r).sqrt() <= CG_TOL * rhs_norm {
            return Ok(q.iter().sum());
        }
        for i in 0..n {
            z[i] = r[i] / p.diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    Err(Error::NumericalFailure(
        "conjugate gradients did not converge; refine n_panels".into(),
    ))
}

/// Capacity of a union of at most 64 balls from `n_panels` and `4·n_panels`
/// panels per sphere.
pub fn capacity_oracle(balls: &[Ball], n_panels: usize) -> Result<CapacityEstimate> {
    if balls.len() > MAX_ORACLE_BALLS {
        return Err(Error::InvalidInput(format!(
            "oracle handles at most {MAX_ORACLE_BALLS} balls, got {}",
            balls.len()
        )));
    }
    if n_panels < MIN_PANELS {
        return Err(Error::InvalidParameter(format!(
            "n_panels must be at least {MIN_PANELS}, got {n_panels}"
        )));
    }
    if balls.is_empty() {
        return Ok(CapacityEstimate::exact(0.0));
    }
    let d = balls[0].dim();
    crate::error::check_dimension(d)?;
    if balls.iter().any(|b| b.dim() != d || !(b.radius > 0.0) || !b.radius.is_finite()) {
        return Err(Error::InvalidInput("balls need a common dimension and positive radii".into()));
    }
    let outer = outer_balls(balls);
    let coarse = build_panels(&outer, d, n_panels);
    let fine = build_panels(&outer, d, 4 * n_panels);
    let vc = solve_total_charge(&coarse)?;
    let vf = solve_total_charge(&fine)?;
    let refine = (fine.len() as f64 / coarse.len() as f64).powf(1.0 / (d - 1) as f64);
    let extrapolated = vf + (vf - vc) / (refine - 1.0);
    Ok(CapacityEstimate {
        value: extrapolated,
        lower: vc.min(vf).min(extrapolated),
        upper: vc.max(vf).max(extrapolated),
        method: CapacityMethod::Oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn ball(c: Vec<f64>, r: f64) -> Ball {
        Ball::new(Point::new(c), r)
    }

    #[test]
    fn single_ball_is_accurate_and_bracketed() {
        let est = capacity_oracle(&[ball(vec![0.2, 0.0, -0.1], 0.5)], 200).unwrap();
        assert!((est.value / 0.5 - 1.0).abs() < 1e-3, "{est:?}");
        assert!(est.lower <= est.value && est.value <= est.upper);
    }

    #[test]
    fn contained_balls_do_not_add_capacity() {
        let big = ball(vec![0.0; 3], 0.4);
        let alone = capacity_oracle(&[big.clone()], 150).unwrap().value;
        let both = capacity_oracle(&[big, ball(vec![0.1, 0.0, 0.0], 0.2)], 150).unwrap().value;
        assert_eq!(alone, both);
    }

    #[test]
    fn packed_and_matrix_free_products_agree() {
        let balls = [ball(vec![0.0, 0.0, 0.0], 0.3), ball(vec![0.5, 0.1, 0.0], 0.2)];
        let p = build_panels(&outer_balls(&balls), 3, 200);
        let q: Vec<f64> = (0..p.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let (mut a, mut b) = (vec![0.0; p.len()], vec![0.0; p.len()]);
        apply(&p, &q, &mut a);
        Packed::assemble(&p).unwrap().apply(&q, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let many: Vec<Ball> = (0..65).map(|k| ball(vec![k as f64, 0.0, 0.0], 0.1)).collect();
        assert!(matches!(capacity_oracle(&many, 100), Err(Error::InvalidInput(_))));
        assert!(matches!(capacity_oracle(&many[..1], 50), Err(Error::InvalidParameter(_))));
        assert!(matches!(capacity_oracle(&[ball(vec![0.0; 2], 0.1)], 100), Err(Error::Unsupported(_))));
        assert_eq!(capacity_oracle(&[], 100).unwrap().value, 0.0);
    }
}
