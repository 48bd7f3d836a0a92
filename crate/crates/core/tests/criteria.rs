use percolate_core::criteria::{
    balayage, lundh_criterion, radial_criterion, CriterionReport, Verdict, DEFAULT_LADDER,
};
use percolate_core::{BoundaryPoint, IntensityProfile, RadiusProfile};
use proptest::prelude::*;

fn battery() -> Vec<(&'static str, RadiusProfile, IntensityProfile, Verdict)> {
    vec![
        ("inverse-square", RadiusProfile::linear(0.1), IntensityProfile::power_law(1.0, 2.0), Verdict::Converges),
        ("inverse-cube", RadiusProfile::linear(0.1), IntensityProfile::power_law(1.0, 3.0), Verdict::Diverges),
        ("wide-balls", RadiusProfile::linear(0.4), IntensityProfile::power_law(1.0, 1.5), Verdict::Converges),
        ("empty", RadiusProfile::linear(0.1), IntensityProfile::zero(), Verdict::Converges),
        ("quadratic-radius", RadiusProfile::power_law(0.2, 2.0), IntensityProfile::power_law(1.0, 4.0), Verdict::Diverges),
        ("uniform", RadiusProfile::linear(0.1), IntensityProfile::constant(1000.0), Verdict::Converges),
    ]
}

fn taus() -> Vec<BoundaryPoint> {
    vec![
        BoundaryPoint::axis(3, 0),
        BoundaryPoint::new(vec![0.0, 0.6, 0.8]).unwrap(),
        BoundaryPoint::new(vec![-1.0, 1.0, 1.0]).unwrap(),
    ]
}

fn assert_nondecreasing(r: &CriterionReport) {
    for w in r.ladder.windows(2) {
        assert!(w[1].1 >= w[0].1, "{}: {:?}", r.criterion, r.ladder);
    }
}

#[test]
fn balayage_verdict_matches_radial_verdict() {
    for (name, phi, nu, expected) in battery() {
        let radial = radial_criterion(&phi, &nu, 3, &DEFAULT_LADDER).unwrap();
        assert_eq!(radial.verdict, expected, "{name}");
        for tau in taus() {
            let b = balayage(&phi, &nu, &tau, &DEFAULT_LADDER, 3).unwrap();
            assert_eq!(b.verdict, radial.verdict, "{name}");
            assert_nondecreasing(&b);
        }
    }
}

#[test]
fn balayage_is_rotation_invariant() {
    for (name, phi, nu, _) in battery() {
        let reports: Vec<_> = taus().iter().map(|t| balayage(&phi, &nu, t, &DEFAULT_LADDER, 3).unwrap()).collect();
        for r in &reports[1..] {
            for ((_, a), (_, b)) in reports[0].ladder.iter().zip(&r.ladder) {
                assert!((a - b).abs() <= 0.01 * a.abs().max(1e-300), "{name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn lundh_is_the_linear_radius_case() {
    for beta in [1.5, 2.0, 2.5, 3.0, 3.5] {
        let nu = IntensityProfile::power_law(1.0, beta);
        let lundh = lundh_criterion(&nu, 3, &DEFAULT_LADDER).unwrap();
        for c in [0.1, 0.5] {
            let radial = radial_criterion(&RadiusProfile::linear(c), &nu, 3, &DEFAULT_LADDER).unwrap();
            assert_eq!(radial.verdict, lundh.verdict, "β = {beta}, c = {c}");
            for ((_, l), (_, r)) in lundh.ladder.iter().zip(&radial.ladder) {
                assert!((r - c * l).abs() <= 1e-9 * r.abs().max(1e-300));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn criterion_ladders_are_nondecreasing(
        c in 0.01f64..0.5,
        gamma in 1.0f64..3.0,
        kappa in 0.0f64..100.0,
        beta in -1.0f64..4.0,
        d in 3usize..=5,
    ) {
        let phi = RadiusProfile::power_law(c, gamma);
        let nu = IntensityProfile::power_law(kappa, beta);
        let radial = radial_criterion(&phi, &nu, d, &DEFAULT_LADDER).unwrap();
        let lundh = lundh_criterion(&nu, d, &DEFAULT_LADDER).unwrap();
        for r in [radial, lundh] {
            for w in r.ladder.windows(2) {
                prop_assert!(w[1].1 >= w[0].1);
            }
        }
    }
}
