use percolate_core::capacity::{ball_capacity, capacity_lower_ab, capacity_oracle, capacity_upper, LowerBound};
use percolate_core::rng::{sample_direction, stream};
use percolate_core::{Ball, Point};
use proptest::prelude::*;
use rand::Rng;

fn ball(c: Vec<f64>, r: f64) -> Ball {
    Ball::new(Point::new(c), r)
}

/// Ten balls of radius ≤ 0.02 placed by random sequential adsorption so the
/// separation hypothesis of the superadditivity bound holds.
fn admissible_configuration(seed: u64) -> Vec<Ball> {
    let mut rng = stream(seed, &[]);
    let mut balls: Vec<Ball> = Vec::new();
    let mut dir = [0.0; 3];
    while balls.len() < 10 {
        let r = rng.random_range(0.002..0.02);
        sample_direction(&mut rng, &mut dir);
        let s = 0.85 * rng.random::<f64>().cbrt();
        let candidate = ball(dir.iter().map(|x| x * s).collect(), r);
        let mut trial = balls.clone();
        trial.push(candidate);
        if matches!(capacity_lower_ab(&trial, 3), LowerBound::Applicable(_)) {
            balls = trial;
        }
    }
    balls
}

#[test]
fn sandwich_holds_on_admissible_configurations() {
    let mut violations = 0;
    for seed in 0..100 {
        let balls = admissible_configuration(seed);
        let lower = capacity_lower_ab(&balls, 3).value().unwrap();
        let upper = capacity_upper(&balls);
        let oracle = capacity_oracle(&balls, 100).unwrap();
        if !(lower <= oracle.value && oracle.value <= upper) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn single_balls_match_normalization() {
    for (d, r) in [(3, 0.1), (3, 0.5), (3, 1.0), (4, 0.5)] {
        let est = capacity_oracle(&[ball(vec![0.1; d], r)], 500).unwrap();
        let exact = ball_capacity(r, d);
        assert!((est.value / exact - 1.0).abs() < 0.02, "d={d} r={r}: {}", est.value);
    }
}

#[test]
fn adding_balls_never_decreases_capacity() {
    let balls = [
        ball(vec![0.0, 0.0, 0.0], 0.2),
        ball(vec![0.3, 0.0, 0.0], 0.15),
        ball(vec![0.0, 0.35, 0.1], 0.1),
        ball(vec![-0.2, -0.2, 0.0], 0.12),
    ];
    let mut last = 0.0;
    for k in 1..=balls.len() {
        let v = capacity_oracle(&balls[..k], 200).unwrap().value;
        assert!(v >= last * (1.0 - 1e-4), "{k} balls: {v} < {last}");
        last = v;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn capacity_scales_with_power_d_minus_two(
        x in -0.5f64..0.5,
        y in -0.5f64..0.5,
        r1 in 0.05f64..0.3,
        r2 in 0.05f64..0.3,
        d in 3usize..=4,
    ) {
        let mut c1 = vec![0.0; d];
        let mut c2 = vec![0.0; d];
        c1[0] = x;
        c2[1] = y;
        c2[0] = 0.4;
        let base = [ball(c1.clone(), r1), ball(c2.clone(), r2)];
        let v = capacity_oracle(&base, 150).unwrap().value;
        for alpha in [0.5, 2.0] {
            let scaled: Vec<Ball> = base
                .iter()
                .map(|b| ball(b.center.coords().iter().map(|c| c * alpha).collect(), b.radius * alpha))
                .collect();
            let w = capacity_oracle(&scaled, 150).unwrap().value;
            let expected = alpha.powi(d as i32 - 2) * v;
            prop_assert!((w / expected - 1.0).abs() < 0.02, "α={} {} vs {}", alpha, w, expected);
        }
    }
}
