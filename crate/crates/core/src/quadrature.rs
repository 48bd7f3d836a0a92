//! Globally adaptive Gauss–Kronrod (7/15) quadrature and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, seeding the adaptive
/// bisection with the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: &QuadOptions) -> Integral {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            evaluations += 15;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let total = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    loop {
        let (value, error) = total(&heap);
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol || heap.len() >= opts.max_intervals {
            return Integral {
                value,
                abs_error: error,
                evaluations,
                converged: error <= tol,
            };
        }
        let Some(worst) = heap.pop() else {
            return Integral {
                value: 0.0,
                abs_error: 0.0,
                evaluations,
                converged: true,
            };
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Cannot split further at machine precision.
            heap.push(worst);
            let (value, error) = total(&heap);
            return Integral {
                value,
                abs_error: error,
                evaluations,
                converged: false,
            };
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, a, b);
            evaluations += 15;
            heap.push(Segment { a, b, value, error });
        }
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Breakpoints `a, …, b` refined geometrically toward `b`, where the
/// integrand is expected to vary on the scale `end − t`: the gaps
/// `end − t` halve from one breakpoint to the next.
pub fn breaks_toward(a: f64, b: f64, end: f64) -> Vec<f64> {
    let mut out = vec![a];
    let mut gap = end - a;
    loop {
        gap *= 0.5;
        let t = end - gap;
        if t >= b || gap <= 0.0 || !(t > *out.last().unwrap()) {
            break;
        }
        out.push(t);
    }
    out.push(b);
    out
}

/// Breakpoints `a, …, b` refined geometrically away from `start`, the
/// location of a peak: `start + scale·2^k`.
pub fn breaks_away_from(start: f64, b: f64, scale: f64) -> Vec<f64> {
    let mut out = vec![start];
    let mut t = start + scale;
    while t < b {
        out.push(t);
        t = start + 2.0 * (t - start);
    }
    out.push(b);
    out
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_integrals() {
        let o = QuadOptions::default();
        let r = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &o);
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-12);
        assert!(r.converged);
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, &o);
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn endpoint_singularity_with_breaks() {
        // ∫_0^{1−1e−6} (1−t)^{−1/2} dt = 2(1 − 1e−3)
        let eps = 1e-6;
        let br = breaks_toward(0.0, 1.0 - eps, 1.0);
        let r = integrate_with_breaks(|t: f64| (1.0 - t).powf(-0.5), &br, &QuadOptions::default());
        assert_relative_eq!(r.value, 2.0 * (1.0 - 1e-3), max_relative = 1e-10);
    }

    #[test]
    fn peaked_integrand() {
        // ∫_0^π θ/(δ² + θ²)^{3/2} dθ = 1/δ − 1/√(δ² + π²)
        let delta = 1e-5;
        let br = breaks_away_from(0.0, std::f64::consts::PI, delta);
        let r = integrate_with_breaks(
            |th: f64| th / (delta * delta + th * th).powf(1.5),
            &br,
            &QuadOptions::default(),
        );
        let exact = 1.0 / delta - 1.0 / (delta * delta + std::f64::consts::PI.powi(2)).sqrt();
        assert_relative_eq!(r.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let p = deg - 1;
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert_relative_eq!(got, exact, epsilon = 1e-13);
        }
    }
}
