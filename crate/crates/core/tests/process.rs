use percolate_core::process::mean_measure;
use percolate_core::{build_archipelago, IntensityProfile, PoissonSampler, RadiusProfile};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn counts_in(sampler: &PoissonSampler, seed: u64, edges: &[f64]) -> Vec<usize> {
    let real = sampler.sample(seed);
    let mut counts = vec![0; edges.len() - 1];
    for i in 0..real.len() {
        let t: f64 = real.center(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        if let Some(k) = edges.windows(2).position(|w| w[0] <= t && t < w[1]) {
            counts[k] += 1;
        }
    }
    counts
}

#[test]
fn constant_intensity_count_has_poisson_mean() {
    let nu = IntensityProfile::constant(100.0);
    let sampler = PoissonSampler::new(&RadiusProfile::linear(0.1), &nu, 0.1, 3).unwrap();
    let expected = 100.0 * 4.0 / 3.0 * std::f64::consts::PI * 0.9f64.powi(3);
    assert!((sampler.expected_count() - expected).abs() < 1e-9 * expected);
    let n = 1000;
    let total: usize = (0..n).map(|s| sampler.sample(s).len()).sum();
    let mean = total as f64 / n as f64;
    let sigma = (expected / n as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * sigma, "mean {mean} vs {expected}");
}

#[test]
fn disjoint_annuli_are_uncorrelated() {
    let nu = IntensityProfile::power_law(1.0, 2.0);
    let sampler = PoissonSampler::new(&RadiusProfile::linear(0.1), &nu, 0.01, 3).unwrap();
    let edges = [0.0, 0.5, 0.9, 0.95];
    let n = 1500;
    let samples: Vec<Vec<usize>> = (0..n).map(|s| counts_in(&sampler, s, &edges)).collect();
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let xa: Vec<f64> = samples.iter().map(|c| c[a] as f64).collect();
        let xb: Vec<f64> = samples.iter().map(|c| c[b] as f64).collect();
        let ma = xa.iter().sum::<f64>() / n as f64;
        let mb = xb.iter().sum::<f64>() / n as f64;
        let cov = xa.iter().zip(&xb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1) as f64;
        // Under independence the sample covariance has standard deviation √(λ_a λ_b / n).
        let exp_a = mean_measure(&nu, edges[a], edges[a + 1], 3).unwrap();
        let exp_b = mean_measure(&nu, edges[b], edges[b + 1], 3).unwrap();
        let sigma = (exp_a * exp_b / n as f64).sqrt();
        assert!(cov.abs() < 3.0 * sigma, "annuli {a},{b}: cov {cov}, σ {sigma}");
    }
}

#[test]
fn thinning_matches_direct_sampling() {
    let phi = RadiusProfile::linear(0.1);
    let nu = IntensityProfile::power_law(1.0, 2.0);
    let fine = PoissonSampler::new(&phi, &nu, 0.005, 3).unwrap();
    let coarse_eps = 0.02;
    let lambda = mean_measure(&nu, 0.0, 1.0 - coarse_eps, 3).unwrap();
    let n = 400u64;
    // Totals pooled over realizations are Poisson(nλ); compare binned
    // realization counts with their Poisson expectations.
    let bins = 8;
    let poisson = statrs::distribution::Poisson::new(lambda).unwrap();
    use statrs::distribution::DiscreteCDF;
    let edges: Vec<f64> = (1..bins).map(|k| poisson.inverse_cdf(k as f64 / bins as f64) as f64).collect();
    let bin_of = |c: f64| edges.iter().filter(|&&e| c > e).count();
    let mut observed = vec![0f64; bins];
    for s in 0..n {
        let c = fine.sample(1000 + s).restrict(coarse_eps).len() as f64;
        observed[bin_of(c)] += 1.0;
    }
    let mut lo = 0.0;
    let mut stat = 0.0;
    for (k, obs) in observed.iter().enumerate() {
        let hi = if k + 1 < bins { poisson.cdf(edges[k] as u64) } else { 1.0 };
        let expected = n as f64 * (hi - lo);
        stat += (obs - expected).powi(2) / expected;
        lo = hi;
    }
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 1e-3, "chi-square {stat}, p = {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn centers_respect_truncation_and_radii_follow_phi(
        seed in any::<u64>(),
        eps in 0.01f64..0.5,
        beta in 0.0f64..2.5,
        c in 0.01f64..0.5,
    ) {
        let phi = RadiusProfile::linear(c);
        let real = PoissonSampler::new(&phi, &IntensityProfile::power_law(1.0, beta), eps, 3).unwrap().sample(seed);
        let arch = build_archipelago(&real);
        for i in 0..real.len() {
            let t: f64 = real.center(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(t < 1.0 - eps);
            prop_assert_eq!(arch.radius(i), phi.eval(t));
        }
    }

    #[test]
    fn restriction_commutes_with_nesting(seed in any::<u64>(), a in 0.01f64..0.2, b in 0.2f64..0.6) {
        let sampler = PoissonSampler::new(&RadiusProfile::linear(0.1), &IntensityProfile::power_law(1.0, 2.0), a, 3).unwrap();
        let real = sampler.sample(seed);
        let once = real.restrict(b);
        let twice = real.restrict((a + b) / 2.0).restrict(b);
        prop_assert_eq!(once.len(), twice.len());
        for i in 0..once.len() {
            prop_assert_eq!(once.center(i), twice.center(i));
        }
    }
}
