//! Whitney decomposition of the unit ball by dyadic subdivision of `[−1, 1]^d`.
//!
//! A dyadic cube is kept when it lies in the ball and its diameter does not
//! exceed its distance to the unit sphere; otherwise it is split into its
//! `2^d` children. Cubes lying entirely in the shell `{|x| ≥ 1 − ε}` are
//! dropped, so the kept cubes tile `{|x| ≤ 1 − ε}` up to a null set. The
//! parent of a kept cube failed the test, which gives
//! `diam(Q) ≤ dist(Q, 𝕊) < 3·diam(Q)`.
//!
//! Decompositions are nested: every cube kept at truncation `ε` is also kept
//! at any `ε′ < ε`.

use crate::error::{Error, Result};
use crate::geometry::{AxisCube, BoundaryPoint, Point};

/// Largest supported dimension for the dyadic tree (children per node is `2^d`).
pub const MAX_WHITNEY_DIM: usize = 8;

/// A cube of the Whitney decomposition.
///
/// `generation` is the dyadic level (`side = 2^{1−generation}`) and `index`
/// the lexicographic position `Σ k_i·(2^g)^i` of the cube in the level-`g`
/// lattice, so `(generation, index)` identifies the cube.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyCube {
    pub center: Point,
    pub side: f64,
    pub generation: u32,
    pub index: u64,
}

impl WhitneyCube {
    pub fn as_cube(&self) -> AxisCube {
        AxisCube::new(self.center.clone(), self.side)
    }

    pub fn diameter(&self) -> f64 {
        self.side * (self.center.dim() as f64).sqrt()
    }

    /// `dist(Q, 𝕊) = 1 − max_{x∈Q} |x|`.
    pub fn boundary_distance(&self) -> f64 {
        1.0 - self.as_cube().max_norm()
    }

    pub fn key(&self) -> (u32, u64) {
        (self.generation, self.index)
    }
}

/// Exact distance from the closed cube to the boundary point τ.
pub fn dist_cube_to_point(q: &WhitneyCube, tau: &BoundaryPoint) -> f64 {
    q.as_cube().distance_to(tau.coords())
}

#[derive(Clone, Copy)]
struct Node {
    generation: u32,
    k: [u32; MAX_WHITNEY_DIM],
}

#[derive(Debug, PartialEq, Eq)]
enum NodeClass {
    Keep,
    Discard,
    Split,
}

/// Lazily evaluated Whitney decomposition truncated at `ε`.
#[derive(Debug, Clone)]
pub struct WhitneyDecomposition {
    dim: usize,
    epsilon: f64,
    max_generation: u32,
}

impl WhitneyDecomposition {
    pub fn new(dim: usize, epsilon: f64) -> Result<Self> {
        crate::error::check_dimension(dim)?;
        if dim > MAX_WHITNEY_DIM {
            return Err(Error::Unsupported(format!(
                "Whitney decomposition supports d <= {MAX_WHITNEY_DIM}, got {dim}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must lie in (0, 1/2), got {epsilon}"
            )));
        }
        // Splitting stops once diam <= ε/2, i.e. 2^{1-g}·√d <= ε/2.
        let max_generation = (1.0 + (2.0 * (dim as f64).sqrt() / epsilon).log2()).ceil() as u32 + 1;
        if (max_generation as usize) * dim > 63 {
            return Err(Error::InvalidParameter(format!(
                "truncation {epsilon} too fine for d = {dim}: cube indices overflow"
            )));
        }
        Ok(WhitneyDecomposition {
            dim,
            epsilon,
            max_generation,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn root() -> Node {
        Node {
            generation: 0,
            k: [0; MAX_WHITNEY_DIM],
        }
    }

    fn side(generation: u32) -> f64 {
        2f64.powi(1 - generation as i32)
    }

    /// (min |x|², max |x|²) over the closed node cube.
    fn norm_range_sq(&self, node: &Node) -> (f64, f64) {
        let s = Self::side(node.generation);
        let (mut lo2, mut hi2) = (0.0, 0.0);
        for i in 0..self.dim {
            let lo = -1.0 + node.k[i] as f64 * s;
            let hi = lo + s;
            let far = lo.abs().max(hi.abs());
            hi2 += far * far;
            let near = if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                -hi
            } else {
                0.0
            };
            lo2 += near * near;
        }
        (lo2, hi2)
    }

    fn classify(&self, node: &Node) -> NodeClass {
        let (lo2, hi2) = self.norm_range_sq(node);
        let inner = 1.0 - self.epsilon;
        if lo2 >= inner * inner {
            return NodeClass::Discard;
        }
        if node.generation == 0 {
            return NodeClass::Split;
        }
        let dist = 1.0 - hi2.sqrt();
        let diam = Self::side(node.generation) * (self.dim as f64).sqrt();
        if dist > 0.0 && diam <= dist {
            NodeClass::Keep
        } else {
            NodeClass::Split
        }
    }

    fn children(&self, node: &Node) -> impl Iterator<Item = Node> + '_ {
        let node = *node;
        (0u32..(1 << self.dim)).map(move |bits| {
            let mut child = Node {
                generation: node.generation + 1,
                k: [0; MAX_WHITNEY_DIM],
            };
            for i in 0..self.dim {
                child.k[i] = 2 * node.k[i] + ((bits >> i) & 1);
            }
            child
        })
    }

    fn node_index(&self, node: &Node) -> u64 {
        let n = 1u64 << node.generation;
        (0..self.dim)
            .rev()
            .fold(0u64, |acc, i| acc * n + node.k[i] as u64)
    }

    fn node_cube(&self, node: &Node) -> AxisCube {
        let s = Self::side(node.generation);
        let center = (0..self.dim)
            .map(|i| -1.0 + (node.k[i] as f64 + 0.5) * s)
            .collect();
        AxisCube::new(Point::new(center), s)
    }

    fn to_cube(&self, node: &Node) -> WhitneyCube {
        let cube = self.node_cube(node);
        WhitneyCube {
            center: cube.center,
            side: cube.side,
            generation: node.generation,
            index: self.node_index(node),
        }
    }

    /// Distance from `x` to the closed node cube.
    fn node_distance(&self, node: &Node, x: &[f64]) -> f64 {
        let s = Self::side(node.generation);
        let mut acc = 0.0;
        for i in 0..self.dim {
            let lo = -1.0 + node.k[i] as f64 * s;
            let hi = lo + s;
            let e = if x[i] < lo {
                lo - x[i]
            } else if x[i] > hi {
                x[i] - hi
            } else {
                0.0
            };
            acc += e * e;
        }
        acc.sqrt()
    }

    fn visit<F: FnMut(&Node)>(&self, node: &Node, f: &mut F) {
        match self.classify(node) {
            NodeClass::Discard => {}
            NodeClass::Keep => f(node),
            NodeClass::Split => {
                debug_assert!(node.generation < self.max_generation);
                for child in self.children(node) {
                    self.visit(&child, f);
                }
            }
        }
    }

    /// Calls `f` on every kept cube, depth first.
    pub fn for_each<F: FnMut(WhitneyCube)>(&self, mut f: F) {
        self.visit(&Self::root(), &mut |n| f(self.to_cube(n)));
    }

    /// Number of kept cubes per generation (index = generation).
    pub fn count_by_generation(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.max_generation as usize + 1];
        self.visit(&Self::root(), &mut |n| counts[n.generation as usize] += 1);
        counts
    }

    /// All kept cubes in breadth-first order: by generation, then by index.
    pub fn cubes(&self) -> Vec<WhitneyCube> {
        let mut out = Vec::new();
        let mut frontier = vec![Self::root()];
        while !frontier.is_empty() {
            let mut level = Vec::new();
            let mut next = Vec::new();
            for node in &frontier {
                match self.classify(node) {
                    NodeClass::Discard => {}
                    NodeClass::Keep => level.push(self.to_cube(node)),
                    NodeClass::Split => next.extend(self.children(node)),
                }
            }
            level.sort_by_key(|c| c.index);
            out.extend(level);
            frontier = next;
        }
        out
    }

    /// Kept cubes whose closure meets the closed ball `B̄(center, radius)`.
    pub fn cubes_meeting_ball(&self, center: &[f64], radius: f64) -> Vec<WhitneyCube> {
        let mut keys = Vec::new();
        self.keys_meeting_ball(center, radius, &mut keys);
        keys.sort_unstable();
        keys.into_iter().map(|(g, i)| self.cube_at(g, i)).collect()
    }

    /// Appends the keys of the kept cubes meeting `B̄(center, radius)`, unsorted.
    ///
    /// A kept cube has `diam ≤ dist(Q, 𝕊) < 3·diam`, so a ball at boundary
    /// distance `δ` only meets kept cubes with `(δ − r)/4 < diam ≤ δ + r`;
    /// the cells of those generations covering the ball's bounding box are
    /// tested directly. A cell is kept iff it classifies as `Keep` and its
    /// parent as `Split`.
    pub fn keys_meeting_ball(&self, center: &[f64], radius: f64, out: &mut Vec<(u32, u64)>) {
        let d = self.dim;
        let sqrt_d = (d as f64).sqrt();
        let delta = 1.0 - crate::geometry::norm(center);
        let g_lo = (1.0 - ((delta + radius) / sqrt_d).log2()).floor().max(1.0) as u32;
        let g_hi = if delta - radius > 0.0 {
            ((1.0 - ((delta - radius) / (4.0 * sqrt_d)).log2()).ceil() as u32).min(self.max_generation)
        } else {
            self.max_generation
        };
        if g_hi - g_lo.min(g_hi) > 4 {
            return self.descend_keys(center, radius, out);
        }
        for g in g_lo..=g_hi {
            let s = Self::side(g);
            let cells = 1i64 << g;
            let mut lo = [0u32; MAX_WHITNEY_DIM];
            let mut hi = [0u32; MAX_WHITNEY_DIM];
            for i in 0..d {
                let a = (((center[i] - radius + 1.0) / s).floor() as i64).clamp(0, cells - 1);
                let b = (((center[i] + radius + 1.0) / s).floor() as i64).clamp(0, cells - 1);
                lo[i] = a as u32;
                hi[i] = b as u32;
            }
            let mut node = Node { generation: g, k: lo };
            'cells: loop {
                if self.node_distance(&node, center) <= radius
                    && matches!(self.classify(&node), NodeClass::Keep)
                    && matches!(self.classify(&Self::parent(&node)), NodeClass::Split)
                {
                    out.push((g, self.node_index(&node)));
                }
                for i in 0..d {
                    if node.k[i] < hi[i] {
                        node.k[i] += 1;
                        continue 'cells;
                    }
                    node.k[i] = lo[i];
                }
                break;
            }
        }
    }

    fn parent(node: &Node) -> Node {
        let mut p = Node { generation: node.generation - 1, k: [0; MAX_WHITNEY_DIM] };
        for (pk, k) in p.k.iter_mut().zip(&node.k) {
            *pk = k / 2;
        }
        p
    }

    fn descend_keys(&self, center: &[f64], radius: f64, out: &mut Vec<(u32, u64)>) {
        let mut stack = vec![Self::root()];
        while let Some(node) = stack.pop() {
            if self.node_distance(&node, center) > radius {
                continue;
            }
            match self.classify(&node) {
                NodeClass::Discard => {}
                NodeClass::Keep => out.push((node.generation, self.node_index(&node))),
                NodeClass::Split => stack.extend(self.children(&node)),
            }
        }
    }

    /// The cube with key `(generation, index)`; the key need not name a kept cube.
    pub fn cube_at(&self, generation: u32, index: u64) -> WhitneyCube {
        let n = 1u64 << generation;
        let mut node = Node { generation, k: [0; MAX_WHITNEY_DIM] };
        let mut rest = index;
        for i in 0..self.dim {
            node.k[i] = (rest % n) as u32;
            rest /= n;
        }
        self.to_cube(&node)
    }

    /// The kept cube containing `x`, if `x` is covered.
    pub fn locate(&self, x: &[f64]) -> Option<WhitneyCube> {
        let mut found = self.cubes_meeting_ball(x, 0.0);
        found.sort_by_key(|c| c.key());
        found.into_iter().next()
    }
}

/// Whitney decomposition of the unit ball truncated at `ε`, in breadth-first order.
pub fn whitney_decompose(d: usize, epsilon: f64) -> Result<Vec<WhitneyCube>> {
    Ok(WhitneyDecomposition::new(d, epsilon)?.cubes())
}
