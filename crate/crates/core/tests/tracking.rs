use iogd::tracking::{
    dual_gradients, lagrangian_gradient, primal_solve, primal_solve_into, sigmoid_weights, simulate, DualSign,
    DualState, Point, TrackScenario,
};
use iogd::{seeded_rng, Matrix};
use rand::Rng;

fn random_points(n: usize, scale: f64, rng: &mut iogd::Rng) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

fn dense(dual: &DualState, anchors: &[Point], targets: &[Point], w: &Matrix, gamma: f64) -> Vec<Point> {
    let n = anchors.len();
    let mut a = Matrix::from_element(n, n, -1.0);
    let mut rhs = Matrix::zeros(n, 2);
    for i in 0..n {
        let mut d = n as f64 + 2.0 * gamma + 2.0 * dual.lambda[i];
        let mut phi = anchors[i] * (2.0 * (gamma + dual.lambda[i]));
        for (j, y) in targets.iter().enumerate() {
            d += 2.0 * dual.nu[j] * w[(i, j)];
            phi += y * (2.0 * dual.nu[j] * w[(i, j)]);
        }
        a[(i, i)] += d;
        rhs[(i, 0)] = phi.x;
        rhs[(i, 1)] = phi.y;
    }
    let sol = a.lu().solve(&rhs).unwrap();
    (0..n).map(|i| Point::new(sol[(i, 0)], sol[(i, 1)])).collect()
}

#[test]
fn closed_form_matches_dense_on_fuzzed_configurations() {
    let mut rng = seeded_rng(2024);
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let m = rng.random_range(1..=10);
        let anchors = random_points(n, 3.0, &mut rng);
        let targets = random_points(m, 3.0, &mut rng);
        let dual = DualState {
            lambda: (0..n).map(|_| rng.random_range(0.0..5.0)).collect(),
            nu: (0..m).map(|_| rng.random_range(0.0..50.0)).collect(),
        };
        let gamma = rng.random_range(0.1..3.0);
        let w = sigmoid_weights(&anchors, &targets, rng.random_range(1.0..20.0), 0.54);
        for j in 0..m {
            assert!((w.column(j).sum() - 1.0).abs() < 1e-12);
        }
        let fast = primal_solve(&dual, &anchors, &targets, &w, gamma).unwrap();
        let slow = dense(&dual, &anchors, &targets, &w, gamma);
        let diff = fast.iter().zip(&slow).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        assert!(diff <= 1e-9, "n={n} m={m} diff={diff}");
        let res = lagrangian_gradient(&fast, &dual, &anchors, &targets, &w, gamma, 1.0);
        assert!(res.iter().all(|g| g.norm() < 1e-8));
    }
}

#[test]
fn op_count_is_affine_in_agents_times_targets() {
    let mut rng = seeded_rng(1);
    let mut count = |n: usize, m: usize| {
        let anchors = random_points(n, 1.0, &mut rng);
        let targets = random_points(m, 1.0, &mut rng);
        let dual = DualState::constant(n, m, 0.1, 0.2);
        let w = sigmoid_weights(&anchors, &targets, 5.0, 0.54);
        let mut out = Vec::new();
        primal_solve_into(&dual, &anchors, &targets, &w, 1.0, &mut out).unwrap()
    };
    // ops = a*n*m + b*n + c, fitted on three sizes and checked on the rest
    let c = count(0, 0) as i64;
    let b = count(1, 0) as i64 - c;
    let a = count(1, 1) as i64 - b - c;
    assert!(a > 0 && b > 0);
    for (n, m) in [(3, 3), (50, 10), (17, 1), (80, 10), (5, 40)] {
        assert_eq!(count(n, m) as i64, a * (n * m) as i64 + b * n as i64 + c);
    }
}

#[test]
fn printed_and_literal_residuals_differ_only_by_pair_term() {
    let mut rng = seeded_rng(6);
    let anchors = random_points(6, 2.0, &mut rng);
    let targets = random_points(2, 2.0, &mut rng);
    let dual = DualState::constant(6, 2, 0.3, 4.0);
    let w = sigmoid_weights(&anchors, &targets, 5.0, 0.54);
    let x = primal_solve(&dual, &anchors, &targets, &w, 1.0).unwrap();
    let printed = lagrangian_gradient(&x, &dual, &anchors, &targets, &w, 1.0, 1.0);
    let literal = lagrangian_gradient(&x, &dual, &anchors, &targets, &w, 1.0, 2.0);
    let total: Point = x.iter().sum();
    for i in 0..6 {
        let pair = x[i] * 6.0 - total;
        assert!((literal[i] - printed[i] - pair).norm() < 1e-12);
    }
}

#[test]
fn noisy_estimates_shift_target_gradient_linearly() {
    // mean |d nu(noisy) - d nu(true)| at fixed agents grows linearly in the noise std
    let mut rng = seeded_rng(12);
    let agents = random_points(5, 1.0, &mut rng);
    let targets = random_points(2, 1.0, &mut rng);
    let w = sigmoid_weights(&agents, &targets, 5.0, 0.54);
    let (_, exact) = dual_gradients(&agents, &agents, &targets, &w, 0.04, 0.54);
    let stds = [0.01, 0.02, 0.04];
    let diffs: Vec<f64> = stds
        .iter()
        .map(|&s| {
            let draws = 20_000;
            let mut total = 0.0;
            for _ in 0..draws {
                let est = iogd::tracking::estimate_targets(&targets, s, &mut rng);
                let (_, noisy) = dual_gradients(&agents, &agents, &est, &w, 0.04, 0.54);
                total += (noisy[0] - exact[0]).abs();
            }
            total / draws as f64
        })
        .collect();
    let xs: Vec<f64> = stds.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn diverging_scenario_covers_all_targets() {
    for seed in 0..5 {
        let s = TrackScenario::diverging(seed, 500).unwrap();
        let tr = simulate(&s, 500, seed, 0).unwrap();
        assert!(tr.duals_nonnegative());
        let frac = tr.coverage_fraction(50);
        assert!(frac.iter().all(|f| *f >= 0.9), "seed {seed}: {frac:?}");
    }
}

#[test]
fn ascent_sign_keeps_duals_feasible() {
    let mut s = TrackScenario::diverging(3, 200).unwrap();
    s.params.sign = DualSign::Ascent;
    let tr = simulate(&s, 200, 3, 0).unwrap();
    assert!(tr.duals_nonnegative());
}

#[test]
fn tracking_error_against_reference_stays_bounded() {
    let s = TrackScenario::diverging(1, 300).unwrap();
    let tr = simulate(&s, 300, 1, 200).unwrap();
    let err = tr.tracking_error.unwrap();
    assert_eq!(err.len(), 300);
    let sup = err.iter().copied().fold(0.0, f64::max);
    assert!(sup.is_finite() && sup < 10.0, "sup error {sup}");
}

#[test]
fn large_scenario_covers_most_targets() {
    let s = TrackScenario::large(0, 100).unwrap();
    let tr = simulate(&s, 100, 0, 0).unwrap();
    let covered = tr.coverage_fraction(50).iter().filter(|f| **f >= 0.8).count();
    assert!(covered >= 8, "{covered}");
}
