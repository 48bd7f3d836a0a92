//! Walk-on-spheres estimate of the probability that Brownian motion started
//! at `x₀` reaches the unit sphere before the obstacles.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::Verdict;
use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::index::ObstacleIndex;
use crate::lattice::Lattice;
use crate::process::{build_archipelago, PoissonSampler};
use crate::profile::{IntensityProfile, RadiusProfile};
use crate::rng::{derive_seed, sample_direction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// A walker closer than this to the unit sphere has escaped.
    pub delta_boundary: f64,
    /// A walker within `delta_kill × radius` of its nearest obstacle is absorbed.
    pub delta_kill: f64,
    /// Walks still running after this many jumps are censored and count as absorbed.
    pub max_steps: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { delta_boundary: 1e-6, delta_kill: 1e-9, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeEstimate {
    pub probability: f64,
    pub stderr: f64,
    pub paths: u64,
    pub escaped: u64,
    /// Includes the censored walks.
    pub absorbed: u64,
    pub censored: u64,
    pub steps: u64,
}

impl EscapeEstimate {
    fn from_counts(paths: u64, escaped: u64, censored: u64, steps: u64) -> Self {
        let p = if paths == 0 { 0.0 } else { escaped as f64 / paths as f64 };
        let stderr = if paths == 0 { 0.0 } else { (p * (1.0 - p) / paths as f64).sqrt() };
        EscapeEstimate { probability: p, stderr, paths, escaped, absorbed: paths - escaped, censored, steps }
    }

    /// Whether the estimate exceeds three binomial standard errors.
    pub fn positive_at_3_sigma(&self) -> bool {
        self.probability > 0.0 && self.probability > 3.0 * self.stderr
    }
}

/// Signed distance from `x` to the obstacles; `+∞` when there are none.
pub fn distance_to_obstacles(idx: &ObstacleIndex, x: &[f64]) -> f64 {
    idx.distance(x)
}

fn absorbed(idx: &ObstacleIndex, x: &[f64], delta_kill: f64) -> (bool, f64) {
    match idx.nearest(x) {
        (dist, Some(i)) => (dist < delta_kill * idx.radius(i), dist),
        (dist, None) => (false, dist),
    }
}

enum Outcome {
    Escaped,
    Absorbed,
    Censored,
}

fn walk(idx: &ObstacleIndex, x0: &[f64], params: &WalkParams, rng: &mut ChaCha8Rng) -> (Outcome, u64) {
    let mut x = x0.to_vec();
    let mut dir = vec![0.0; x.len()];
    let mut steps = 0u64;
    loop {
        let to_sphere = 1.0 - norm(&x);
        if to_sphere < params.delta_boundary {
            return (Outcome::Escaped, steps);
        }
        let (hit, to_obstacle) = absorbed(idx, &x, params.delta_kill);
        if hit {
            return (Outcome::Absorbed, steps);
        }
        if steps >= params.max_steps {
            return (Outcome::Censored, steps);
        }
        let r = to_sphere.min(to_obstacle);
        sample_direction(rng, &mut dir);
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += r * di;
        }
        steps += 1;
    }
}

/// Escape frequency over `n_paths` independent walks; walk `k` uses the
/// ChaCha8 stream `k` of `seed`, so the result does not depend on the
/// number of worker threads.
pub fn escape_probability(
    idx: &ObstacleIndex,
    x0: &[f64],
    params: &WalkParams,
    n_paths: u64,
    seed: u64,
) -> Result<EscapeEstimate> {
    if x0.len() != idx.dim() {
        return Err(Error::InvalidStart(format!("start has dimension {}, expected {}", x0.len(), idx.dim())));
    }
    if !(norm(x0) < 1.0 - params.delta_boundary) {
        return Err(Error::InvalidStart(format!("|x0| = {} is not inside the unit ball", norm(x0))));
    }
    if absorbed(idx, x0, params.delta_kill).0 {
        return Err(Error::InvalidStart("x0 lies inside an obstacle".into()));
    }
    let (escaped, censored, steps) = (0..n_paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            match walk(idx, x0, params, &mut rng) {
                (Outcome::Escaped, s) => (1u64, 0u64, s),
                (Outcome::Absorbed, s) => (0, 0, s),
                (Outcome::Censored, s) => (0, 1, s),
            }
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(EscapeEstimate::from_counts(n_paths, escaped, censored, steps))
}

/// Escape statistics across realizations at one truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRung {
    pub epsilon: f64,
    pub mean: f64,
    /// Standard error of the mean across realizations.
    pub stderr: f64,
    pub min: f64,
    pub fraction_positive: f64,
    pub realizations: usize,
    pub paths: u64,
    /// Realizations whose start point lies in an obstacle (probability 0).
    pub blocked: usize,
    pub censored: u64,
}

impl ProbeRung {
    /// A rung with a single obstacle configuration; the standard error is binomial.
    pub fn from_estimate(epsilon: f64, estimate: Option<EscapeEstimate>, paths: u64) -> Self {
        let e = estimate.unwrap_or(EscapeEstimate::from_counts(paths, 0, 0, 0));
        ProbeRung {
            epsilon,
            mean: e.probability,
            stderr: e.stderr,
            min: e.probability,
            fraction_positive: if e.positive_at_3_sigma() { 1.0 } else { 0.0 },
            realizations: 1,
            paths,
            blocked: usize::from(estimate.is_none()),
            censored: e.censored,
        }
    }
}

/// Summarizes per-realization estimates of one rung.
pub fn summarize_rung(epsilon: f64, estimates: &[Option<EscapeEstimate>], paths: u64) -> ProbeRung {
    let n = estimates.len();
    let probs: Vec<f64> = estimates.iter().map(|e| e.map_or(0.0, |e| e.probability)).collect();
    let mean = probs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        probs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let positive = estimates.iter().filter(|e| e.is_some_and(|e| e.positive_at_3_sigma())).count();
    ProbeRung {
        epsilon,
        mean,
        stderr: (var / n as f64).sqrt(),
        min: probs.iter().copied().fold(f64::INFINITY, f64::min),
        fraction_positive: positive as f64 / n as f64,
        realizations: n,
        paths,
        blocked: estimates.iter().filter(|e| e.is_none()).count(),
        censored: estimates.iter().flatten().map(|e| e.censored).sum(),
    }
}

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub x0: Vec<f64>,
    pub n_paths: u64,
    pub n_realizations: usize,
    pub seed: u64,
    pub params: WalkParams,
}

/// Escape statistics along a truncation ladder. Realization `r` is sampled
/// once at the finest truncation (seed `derive_seed(seed, [r])`) and
/// restricted to each rung; rung `i` of realization `r` runs its walks
/// with seed `derive_seed(seed, [r, i, 1])`.
pub fn avoidability_probe(
    phi: &RadiusProfile,
    nu: &IntensityProfile,
    d: usize,
    ladder: &[f64],
    cfg: &ProbeConfig,
) -> Result<Vec<ProbeRung>> {
    crate::criteria::validate_ladder(ladder)?;
    if cfg.n_realizations == 0 || cfg.n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one realization and one path".into()));
    }
    if cfg.x0.len() != d || !(norm(&cfg.x0) < 1.0 - ladder[0]) {
        return Err(Error::InvalidStart(format!(
            "x0 must be a {d}-vector inside |x| < {}",
            1.0 - ladder[0]
        )));
    }
    let sampler = PoissonSampler::new(phi, nu, *ladder.last().unwrap(), d)?;
    let mut per_rung: Vec<Vec<Option<EscapeEstimate>>> = vec![Vec::with_capacity(cfg.n_realizations); ladder.len()];
    for r in 0..cfg.n_realizations {
        let real = sampler.sample(derive_seed(cfg.seed, &[r as u64]));
        for (i, &eps) in ladder.iter().enumerate() {
            let idx = ObstacleIndex::from_archipelago(&build_archipelago(&real.restrict(eps)));
            let est = escape_probability(&idx, &cfg.x0, &cfg.params, cfg.n_paths, derive_seed(cfg.seed, &[r as u64, i as u64, 1]));
            per_rung[i].push(match est {
                Ok(e) => Some(e),
                Err(Error::InvalidStart(_)) => None,
                Err(e) => return Err(e),
            });
        }
    }
    Ok(ladder
        .iter()
        .zip(&per_rung)
        .map(|(&e, ests)| summarize_rung(e, ests, cfg.n_paths))
        .collect())
}

/// Escape probabilities with obstacles `B(λ, φ(|λ|))` at the points of
/// `lattice.truncated(depth)`, one rung per depth at `ε = 2^{−depth−1}`.
pub fn lattice_probe(
    lattice: &Lattice,
    phi: &RadiusProfile,
    depths: &[u32],
    x0: &[f64],
    params: &WalkParams,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<ProbeRung>> {
    if depths.is_empty() || depths.windows(2).any(|w| w[1] <= w[0]) || *depths.last().unwrap() > lattice.depth {
        return Err(Error::InvalidParameter(format!(
            "depths must increase and stay within the lattice depth {}, got {depths:?}",
            lattice.depth
        )));
    }
    let d = lattice.dim();
    if x0.len() != d || !(norm(x0) < 1.0 - params.delta_boundary) {
        return Err(Error::InvalidStart(format!("x0 must be a {d}-vector inside the unit ball")));
    }
    let mut rungs = Vec::with_capacity(depths.len());
    for (i, &depth) in depths.iter().enumerate() {
        let sub = lattice.truncated(depth);
        let radii: Vec<f64> = (0..sub.len()).map(|k| phi.eval(norm(sub.point(k)))).collect();
        let idx = ObstacleIndex::new(d, sub.flat_points(), &radii);
        let est = match escape_probability(&idx, x0, params, n_paths, derive_seed(seed, &[i as u64, 2])) {
            Ok(e) => Some(e),
            Err(Error::InvalidStart(_)) => None,
            Err(e) => return Err(e),
        };
        rungs.push(ProbeRung::from_estimate(2f64.powi(-(depth as i32) - 1), est, n_paths));
    }
    Ok(rungs)
}

/// Verdict read off the escape means. Converges when the two finest rungs
/// agree within three pooled standard errors and the finest mean is
/// positive at 3σ; diverges when every successive drop exceeds three
/// pooled standard errors.
pub fn simulated_verdict(rungs: &[ProbeRung]) -> Verdict {
    if rungs.len() < 2 {
        return Verdict::Inconclusive;
    }
    let pooled = |a: &ProbeRung, b: &ProbeRung| (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    let [.., a, b] = rungs else { unreachable!() };
    if (a.mean - b.mean).abs() <= 3.0 * pooled(a, b) && b.mean > 3.0 * b.stderr {
        return Verdict::Converges;
    }
    if rungs.windows(2).all(|w| w[0].mean - w[1].mean > 3.0 * pooled(&w[0], &w[1])) {
        return Verdict::Diverges;
    }
    Verdict::Inconclusive
}

pub const ESCAPE_CSV_HEADER: &str = "scenario,epsilon,mean,stderr,min,fraction_positive,realizations,paths,blocked,censored";

pub fn write_escape_csv<W: Write>(scenario: &str, rungs: &[ProbeRung], mut w: W) -> Result<()> {
    writeln!(w, "{}", crate::criteria::CSV_SCHEMA_LINE)?;
    writeln!(w, "{ESCAPE_CSV_HEADER}")?;
    for r in rungs {
        writeln!(
            w,
            "{scenario},{:e},{:.12e},{:.12e},{:.12e},{:.6},{},{},{},{}",
            r.epsilon, r.mean, r.stderr, r.min, r.fraction_positive, r.realizations, r.paths, r.blocked, r.censored
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(d: usize, a: f64) -> ObstacleIndex {
        ObstacleIndex::new(d, &vec![0.0; d], &[a])
    }

    #[test]
    fn empty_domain_always_escapes() {
        let idx = ObstacleIndex::new(3, &[], &[]);
        let e = escape_probability(&idx, &[0.3, 0.1, 0.0], &WalkParams::default(), 2000, 1).unwrap();
        assert_eq!(e.escaped, 2000);
        assert_eq!(e.probability, 1.0);
        assert_eq!(distance_to_obstacles(&idx, &[0.0; 3]), f64::INFINITY);
    }

    #[test]
    fn invalid_starts() {
        let idx = single(3, 0.2);
        let p = WalkParams::default();
        assert!(matches!(escape_probability(&idx, &[0.1, 0.0, 0.0], &p, 10, 1), Err(Error::InvalidStart(_))));
        assert!(matches!(escape_probability(&idx, &[0.2 + 1e-12, 0.0, 0.0], &p, 10, 1), Err(Error::InvalidStart(_))));
        assert!(matches!(escape_probability(&idx, &[1.0, 0.0, 0.0], &p, 10, 1), Err(Error::InvalidStart(_))));
    }

    #[test]
    fn annulus_closed_form() {
        let (d, a, s) = (3usize, 0.2f64, 0.5f64);
        let exact = (a.powi(2 - d as i32) - s.powi(2 - d as i32)) / (a.powi(2 - d as i32) - 1.0);
        assert!((exact - 0.75f64).abs() < 1e-12);
        let e = escape_probability(&single(d, a), &[s, 0.0, 0.0], &WalkParams::default(), 20_000, 3).unwrap();
        assert!((e.probability - exact).abs() < 3.0 * e.stderr, "{e:?}");
        assert_eq!(e.escaped + e.absorbed, e.paths);
        assert_eq!(e.censored, 0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let idx = ObstacleIndex::new(3, &[0.3, 0.0, 0.0, -0.2, 0.4, 0.1], &[0.1, 0.15]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| escape_probability(&idx, &[0.0; 3], &WalkParams::default(), 5000, 77).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    fn rung(mean: f64, stderr: f64) -> ProbeRung {
        ProbeRung {
            epsilon: 0.1,
            mean,
            stderr,
            min: mean,
            fraction_positive: 1.0,
            realizations: 10,
            paths: 100,
            blocked: 0,
            censored: 0,
        }
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(simulated_verdict(&[rung(1.0, 0.0), rung(1.0, 0.0)]), Verdict::Converges);
        assert_eq!(simulated_verdict(&[rung(0.5, 0.01), rung(0.3, 0.01), rung(0.1, 0.01)]), Verdict::Diverges);
        assert_eq!(simulated_verdict(&[rung(0.5, 0.01), rung(0.49, 0.01), rung(0.1, 0.01)]), Verdict::Inconclusive);
        assert_eq!(simulated_verdict(&[rung(0.01, 0.01), rung(0.01, 0.01)]), Verdict::Inconclusive);
        assert_eq!(simulated_verdict(&[rung(0.5, 0.01)]), Verdict::Inconclusive);
    }

    #[test]
    fn lattice_probe_reports_each_depth() {
        let lattice = crate::lattice::regular_lattice(3, 0.1, 0.9, 3).unwrap();
        let phi = RadiusProfile::power_law(0.1, 2.5);
        let rungs = lattice_probe(&lattice, &phi, &[1, 2, 3], &[0.25, 0.0, 0.0], &WalkParams::default(), 200, 4).unwrap();
        assert_eq!(rungs.iter().map(|r| r.epsilon).collect::<Vec<_>>(), vec![0.25, 0.125, 0.0625]);
        assert!(rungs.iter().all(|r| r.realizations == 1 && r.mean > 0.0));
        assert!(lattice_probe(&lattice, &phi, &[2, 5], &[0.25, 0.0, 0.0], &WalkParams::default(), 10, 4).is_err());
    }

    #[test]
    fn probe_without_obstacles() {
        let cfg = ProbeConfig { x0: vec![0.0; 3], n_paths: 100, n_realizations: 3, seed: 5, params: WalkParams::default() };
        let rungs = avoidability_probe(&RadiusProfile::linear(0.1), &IntensityProfile::zero(), 3, &[0.1, 0.03, 0.01], &cfg).unwrap();
        for r in rungs {
            assert_eq!(r.mean, 1.0);
            assert_eq!(r.min, 1.0);
            assert_eq!(r.fraction_positive, 1.0);
            assert_eq!(r.blocked, 0);
        }
    }
}
