use percolate_core::wos::{escape_probability, WalkParams};
use percolate_core::ObstacleIndex;

fn annulus_escape(d: usize, a: f64, s: f64) -> f64 {
    let g = |x: f64| x.powi(2 - d as i32);
    (g(a) - g(s)) / (g(a) - 1.0)
}

#[test]
fn annulus_closed_forms() {
    for (d, a, s) in [(3, 0.2, 0.5), (3, 0.5, 0.7), (3, 0.1, 0.9), (4, 0.3, 0.5), (4, 0.5, 0.8)] {
        let idx = ObstacleIndex::new(d, &vec![0.0; d], &[a]);
        let mut x0 = vec![0.0; d];
        x0[d - 1] = s;
        let est = escape_probability(&idx, &x0, &WalkParams::default(), 20_000, 11).unwrap();
        let exact = annulus_escape(d, a, s);
        assert!(
            (est.probability - exact).abs() < 3.0 * est.stderr,
            "d={d} a={a} s={s}: {} vs {exact}",
            est.probability
        );
        assert_eq!(est.censored, 0);
    }
}

#[test]
fn censoring_counts_as_absorption() {
    let idx = ObstacleIndex::new(3, &[0.0, 0.0, 0.0], &[0.2]);
    let params = WalkParams { max_steps: 1, ..WalkParams::default() };
    let est = escape_probability(&idx, &[0.5, 0.0, 0.0], &params, 1000, 3).unwrap();
    assert!(est.censored > 0);
    assert_eq!(est.escaped + est.absorbed, est.paths);
    assert!(est.absorbed >= est.censored);
}

#[test]
fn identical_inputs_give_identical_estimates() {
    let centers = [0.4, 0.1, 0.0, -0.3, -0.3, 0.2, 0.0, 0.5, -0.4];
    let idx = ObstacleIndex::new(3, &centers, &[0.1, 0.05, 0.08]);
    let a = escape_probability(&idx, &[0.0; 3], &WalkParams::default(), 3000, 99).unwrap();
    let b = escape_probability(&idx, &[0.0; 3], &WalkParams::default(), 3000, 99).unwrap();
    let c = escape_probability(&idx, &[0.0; 3], &WalkParams::default(), 3000, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.escaped, c.escaped);
}
