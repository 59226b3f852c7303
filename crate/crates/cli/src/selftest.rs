//! Quick invariant checks over every module, seeded from the config.

use iogd::analysis::{alpha_interval, constants, TheoryParams};
use iogd::completion::{nuclear_norm, run_mc_tracking, svt, synthetic_stream, ProxConfig};
use iogd::lsq::{LsqParams, LsqScenario};
use iogd::montecarlo::{columnwise, map_seeds, seed_range};
use iogd::problem::{max_gradient_error, MovingQuadratic, ProblemSequence, Trajectory};
use iogd::tracking::{lagrangian_gradient, primal_solve, sigmoid_weights, simulate, DualState, Point, TrackScenario};
use iogd::{
    run_iogd, seeded_rng, EpsSchedule, Error, ErrorDistribution, ErrorModel, ErrorRegime, FeasibleSet, IogdConfig,
    Matrix, Vector,
};
use rand::Rng;

use crate::config::Config;
use crate::run::{Outputs, RunError};

type Check = (&'static str, Result<String, String>);

fn verdict(pass: bool, detail: String) -> Result<String, String> {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gaussian(r: usize, c: usize, rng: &mut iogd::Rng) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-2.0..2.0))
}

fn step_interval() -> Result<String, String> {
    let p = |nu| TheoryParams::new(1.0, 1.0, nu, 1.0, ErrorRegime::General);
    let general = alpha_interval(&p(0.0));
    let white = alpha_interval(&TheoryParams::new(1.0, 1.0, 0.0, 1.0, ErrorRegime::WhiteNoise));
    let infeasible = matches!(alpha_interval(&p(0.6)), Err(Error::Infeasible(_)));
    verdict(
        general == Ok((0.0, 1.0)) && white == Ok((0.0, 1.0)) && infeasible,
        format!("{general:?} {white:?} infeasible={infeasible}"),
    )
}

fn contraction(seed: u64) -> Result<String, String> {
    let c = constants(&TheoryParams::new(1.0, 1.0, 0.0, 1.0, ErrorRegime::General), 0.5).map_err(|e| e.to_string())?;
    let model = ErrorModel::new(ErrorRegime::General, EpsSchedule::Constant(0.05), 0.0, ErrorDistribution::SphereUniform)
        .map_err(|e| e.to_string())?;
    let runs = map_seeds(&seed_range(seed, 200), |s| {
        let mut rng = seeded_rng(s);
        let start = Vector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
        let velocity = Vector::from_fn(2, |_, _| rng.random_range(-0.007..0.007));
        let problem = MovingQuadratic::from_trajectory(1.0, &start, &Trajectory::ConstantVelocity { velocity }, 50)
            .expect("valid path");
        run_iogd(&problem, &model, &IogdConfig::new(0.5, 50, s)).expect("finite run")
    });
    let paired: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| {
            let (d, da) = (r.dist.as_ref().unwrap(), r.dist_after.as_ref().unwrap());
            d.iter().zip(da).map(|(d, da)| da - c.ell * d).collect()
        })
        .collect();
    let worst = columnwise(&paired)
        .iter()
        .map(|s| s.mean - c.zeta * 0.05 - 3.0 * s.se)
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(worst <= 0.0, format!("max excess {worst:.3e}"))
}

fn projection(seed: u64) -> Result<String, String> {
    let mut rng = seeded_rng(seed);
    let sets = [
        FeasibleSet::cube(3, -1.0, 1.0).map_err(|e| e.to_string())?,
        FeasibleSet::ball(Vector::zeros(3), 1.5).map_err(|e| e.to_string())?,
        FeasibleSet::NonnegativeOrthant,
    ];
    let mut bad = 0;
    for set in &sets {
        for _ in 0..1000 {
            let a = Vector::from_fn(3, |_, _| rng.random_range(-4.0..4.0));
            let b = Vector::from_fn(3, |_, _| rng.random_range(-4.0..4.0));
            let (pa, pb) = (set.project(&a).unwrap(), set.project(&b).unwrap());
            let idem = (set.project(&pa).unwrap() - &pa).norm() <= 1e-12;
            if (&pa - &pb).norm() > (&a - &b).norm() + 1e-12 || !idem {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("{bad} violations in 3000 pairs"))
}

fn primal(seed: u64) -> Result<String, String> {
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (n, m) = (rng.random_range(1..=30), rng.random_range(1..=6));
        let mut pts = |k: usize| -> Vec<Point> {
            (0..k).map(|_| Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()
        };
        let (anchors, targets) = (pts(n), pts(m));
        let dual = DualState::constant(n, m, 0.5, 3.0);
        let w = sigmoid_weights(&anchors, &targets, 5.0, 0.54);
        let x = primal_solve(&dual, &anchors, &targets, &w, 1.0).map_err(|e| e.to_string())?;
        let res = lagrangian_gradient(&x, &dual, &anchors, &targets, &w, 1.0, 1.0);
        worst = res.iter().map(|g| g.norm()).fold(worst, f64::max);
    }
    verdict(worst < 1e-8, format!("max stationarity residual {worst:.2e}"))
}

fn thresholding(seed: u64) -> Result<String, String> {
    let diag = svt(&Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]), 2.0).map_err(|e| e.to_string())?;
    let exact = (diag - Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() <= 1e-14;
    let mut rng = seeded_rng(seed);
    let mut bad = 0;
    for _ in 0..200 {
        let y = gaussian(5, 4, &mut rng);
        let x = svt(&y, 0.8).map_err(|e| e.to_string())?;
        let obj = |z: &Matrix| 0.8 * nuclear_norm(z) + 0.5 * (z - &y).norm_squared();
        let best = obj(&x);
        if (0..10).any(|_| obj(&(&x + gaussian(5, 4, &mut rng) * 1e-3)) < best - 1e-10) {
            bad += 1;
        }
    }
    verdict(exact && bad == 0, format!("diag case exact={exact}, {bad}/200 optimality failures"))
}

fn lsq_gradient(seed: u64) -> Result<String, String> {
    let params = LsqParams {
        horizon: 5,
        ..LsqParams::default()
    };
    let scenario = LsqScenario::generate(&params, seed).map_err(|e| e.to_string())?;
    let slot = scenario.slot(3).map_err(|e| e.to_string())?;
    let err = max_gradient_error(&slot, 100, 1.0, &mut seeded_rng(seed));
    verdict(err < 1e-6, format!("max relative error {err:.2e}"))
}

fn completion(seed: u64) -> Result<String, String> {
    let stream = synthetic_stream(40, 30, 2, 0.01, 0.4, 20, seed).map_err(|e| e.to_string())?;
    let tr = run_mc_tracking(&stream, &ProxConfig::default()).map_err(|e| e.to_string())?;
    let ratio = tr.rmse[0] / tr.rmse[19];
    verdict(ratio > 5.0, format!("RMSE ratio first/last {ratio:.2}"))
}

fn coverage(seed: u64) -> Result<String, String> {
    let s = TrackScenario::diverging(seed, 300).map_err(|e| e.to_string())?;
    let tr = simulate(&s, 300, seed, 0).map_err(|e| e.to_string())?;
    let worst = tr.coverage_fraction(50).into_iter().fold(1.0, f64::min);
    verdict(
        worst >= 0.9 && tr.duals_nonnegative(),
        format!("worst coverage {worst:.3}, duals nonnegative {}", tr.duals_nonnegative()),
    )
}

pub fn checks(seed: u64) -> Vec<Check> {
    vec![
        ("step_interval", step_interval()),
        ("contraction", contraction(seed)),
        ("projection", projection(seed)),
        ("primal_solve", primal(seed)),
        ("svt", thresholding(seed)),
        ("lsq_gradient", lsq_gradient(seed)),
        ("completion", completion(seed)),
        ("coverage", coverage(seed)),
    ]
}

pub(crate) fn run(config: &Config, out: &mut Outputs) -> Result<(), RunError> {
    let results = checks(config.seed());
    let mut csv = String::from("check,pass,detail\n");
    let mut failed = Vec::new();
    for (name, result) in &results {
        let (pass, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => {
                failed.push(*name);
                (false, d)
            }
        };
        csv.push_str(&format!("{name},{pass},\"{}\"\n", detail.replace('"', "'")));
    }
    out.add("selftest.csv", csv);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunError::Selftest(failed.join(", ")))
    }
}
