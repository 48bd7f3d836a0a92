//! Bounding-volume hierarchy over obstacle balls for signed-distance queries.

use crate::geometry::norm;
use crate::process::Archipelago;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
struct Node {
    /// Box enclosing every ball of the node, `[lo_0, hi_0, lo_1, hi_1, ...]`.
    bounds: Vec<f64>,
    max_radius: f64,
    start: usize,
    end: usize,
    /// Child node indices; `None` for leaves.
    children: Option<(usize, usize)>,
}

/// Immutable spatial index answering `min_i (|x − p_i| − r_i)`.
#[derive(Debug, Clone)]
pub struct ObstacleIndex {
    dim: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl ObstacleIndex {
    pub fn new(dim: usize, centers: &[f64], radii: &[f64]) -> Self {
        assert_eq!(centers.len(), dim * radii.len(), "center/radius length mismatch");
        let mut idx = ObstacleIndex {
            dim,
            centers: centers.to_vec(),
            radii: radii.to_vec(),
            order: (0..radii.len()).collect(),
            nodes: Vec::new(),
        };
        if !radii.is_empty() {
            idx.build(0, radii.len());
        }
        idx
    }

    pub fn from_archipelago(a: &Archipelago) -> Self {
        let mut centers = Vec::with_capacity(a.len() * a.dim());
        let mut radii = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            centers.extend_from_slice(a.center(i));
            radii.push(a.radius(i));
        }
        ObstacleIndex::new(a.dim(), &centers, &radii)
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

    fn build(&mut self, start: usize, end: usize) -> usize {
        let d = self.dim;
        let mut bounds = vec![0.0; 2 * d];
        let mut cmin = vec![f64::INFINITY; d];
        let mut cmax = vec![f64::NEG_INFINITY; d];
        for k in 0..d {
            bounds[2 * k] = f64::INFINITY;
            bounds[2 * k + 1] = f64::NEG_INFINITY;
        }
        let mut max_radius = 0.0f64;
        for &i in &self.order[start..end] {
            let r = self.radii[i];
            max_radius = max_radius.max(r);
            for k in 0..d {
                let c = self.centers[i * d + k];
                bounds[2 * k] = bounds[2 * k].min(c - r);
                bounds[2 * k + 1] = bounds[2 * k + 1].max(c + r);
                cmin[k] = cmin[k].min(c);
                cmax[k] = cmax[k].max(c);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { bounds, max_radius, start, end, children: None });
        if end - start > LEAF_SIZE {
            let axis = (0..d)
                .max_by(|&a, &b| (cmax[a] - cmin[a]).total_cmp(&(cmax[b] - cmin[b])))
                .unwrap();
            let mid = start + (end - start) / 2;
            let centers = &self.centers;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                centers[a * d + axis]
                    .total_cmp(&centers[b * d + axis])
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    /// A lower bound for the signed distance from `x` to any ball of the node.
    fn lower_bound(&self, node: &Node, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (k, &xk) in x.iter().enumerate() {
            let lo = node.bounds[2 * k];
            let hi = node.bounds[2 * k + 1];
            let e = if xk < lo { lo - xk } else if xk > hi { xk - hi } else { 0.0 };
            s += e * e;
        }
        if s > 0.0 {
            s.sqrt()
        } else {
            -node.max_radius
        }
    }

    fn signed(&self, i: usize, x: &[f64]) -> f64 {
        crate::geometry::distance(self.center(i), x) - self.radii[i]
    }

    /// Signed distance to the nearest obstacle and its index; `(+∞, None)` when empty.
    pub fn nearest(&self, x: &[f64]) -> (f64, Option<usize>) {
        let mut best = (f64::INFINITY, None);
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if self.lower_bound(node, x) >= best.0 {
                continue;
            }
            match node.children {
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let s = self.signed(i, x);
                        if s < best.0 || (s == best.0 && Some(i) < best.1) {
                            best = (s, Some(i));
                        }
                    }
                }
                Some((l, r)) => {
                    let bl = self.lower_bound(&self.nodes[l], x);
                    let br = self.lower_bound(&self.nodes[r], x);
                    if bl <= br {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        best
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.nearest(x).0
    }

    /// Whether some ball has `|x − p_i| − r_i < reach`; stops at the first hit.
    pub fn any_within(&self, x: &[f64], reach: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if self.lower_bound(node, x) >= reach {
                continue;
            }
            match node.children {
                None => {
                    if self.order[node.start..node.end].iter().any(|&i| self.signed(i, x) < reach) {
                        return true;
                    }
                }
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        false
    }

    /// Visits every ball with `|x − p_i| − r_i ≤ reach`.
    pub fn for_each_within<F: FnMut(usize)>(&self, x: &[f64], reach: f64, mut f: F) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if self.lower_bound(node, x) > reach {
                continue;
            }
            match node.children {
                None => {
                    for &i in &self.order[node.start..node.end] {
                        if self.signed(i, x) <= reach {
                            f(i);
                        }
                    }
                }
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
    }
}

/// Brute-force signed distance, used as a reference.
pub fn brute_force_distance(dim: usize, centers: &[f64], radii: &[f64], x: &[f64]) -> f64 {
    radii
        .iter()
        .enumerate()
        .map(|(i, r)| crate::geometry::distance(&centers[i * dim..(i + 1) * dim], x) - r)
        .fold(f64::INFINITY, f64::min)
}

/// `min(1 − |x|, distance to obstacles)`, the largest admissible walk-on-spheres step.
pub fn free_radius(idx: &ObstacleIndex, x: &[f64]) -> f64 {
    (1.0 - norm(x)).min(idx.distance(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn empty_index_is_infinite() {
        let idx = ObstacleIndex::new(3, &[], &[]);
        assert_eq!(idx.nearest(&[0.0, 0.0, 0.0]), (f64::INFINITY, None));
    }

    #[test]
    fn collinear_example() {
        let idx = ObstacleIndex::new(3, &[0.5, 0.0, 0.0], &[0.05]);
        assert!((idx.distance(&[0.0, 0.0, 0.0]) - 0.45).abs() < 1e-15);
        assert!(idx.distance(&[0.5, 0.0, 0.0]) < 0.0);
    }

    #[test]
    fn matches_brute_force() {
        for (dim, seed) in [(3usize, 1u64), (4, 2), (3, 3)] {
            let mut rng = crate::rng::stream(seed, &[]);
            let n = 3000;
            let centers: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.03)).collect();
            let idx = ObstacleIndex::new(dim, &centers, &radii);
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.2..1.2)).collect();
                let brute = brute_force_distance(dim, &centers, &radii, &x);
                let (fast, i) = idx.nearest(&x);
                assert!((fast - brute).abs() <= 1e-12, "{fast} vs {brute}");
                assert!((idx.signed(i.unwrap(), &x) - fast).abs() == 0.0);
                let mut hits = Vec::new();
                idx.for_each_within(&x, 0.05, |i| hits.push(i));
                let expect = (0..n).filter(|&i| idx.signed(i, &x) <= 0.05).count();
                assert_eq!(hits.len(), expect);
                assert_eq!(idx.any_within(&x, 0.0), brute < 0.0);
            }
        }
    }
}
