//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no bundler. The JSON builders are ordinary functions and are tested
//! natively.

use iogd::analysis::{alpha_interval, constants, tracking_bound, TheoryParams};
use iogd::lsq::{run_incremental_ogd, LsqParams, LsqScenario, SampleSchedule};
use iogd::montecarlo::{columnwise, seed_range};
use iogd::problem::{MovingQuadratic, Trajectory};
use iogd::tracking::{simulate, TrackScenario};
use iogd::{run_iogd, EpsSchedule, ErrorDistribution, ErrorModel, ErrorRegime, IogdConfig, Vector};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_HORIZON: usize = 5000;

fn bounded_horizon(horizon: u32) -> Result<usize, String> {
    match horizon as usize {
        0 => Err("horizon must be at least 1".into()),
        h if h > MAX_HORIZON => Err(format!("horizon is capped at {MAX_HORIZON}")),
        h => Ok(h),
    }
}

/// Agent and target paths of the multi-target tracker.
pub fn tracking_json(large: bool, horizon: u32, seed: u32, theta: f64, nu_init: f64) -> Result<Value, String> {
    let horizon = bounded_horizon(horizon)?;
    let seed = seed as u64;
    let mut scenario = if large {
        TrackScenario::large(seed, horizon)
    } else {
        TrackScenario::diverging(seed, horizon)
    }
    .map_err(|e| e.to_string())?;
    if theta > 0.0 {
        scenario.params.theta = theta;
    }
    if nu_init >= 0.0 {
        scenario.params.nu_init = nu_init;
    }
    let trace = simulate(&scenario, horizon, seed, 0).map_err(|e| e.to_string())?;
    let n = scenario.agents.len();
    let m = scenario.targets.count();
    let agents: Vec<Vec<[f64; 2]>> = (0..n)
        .map(|i| trace.positions.iter().map(|p| [p[i].x, p[i].y]).collect())
        .collect();
    let targets: Vec<Vec<[f64; 2]>> = (0..m)
        .map(|j| trace.targets.iter().map(|t| [t[j].x, t[j].y]).collect())
        .collect();
    let covered: Vec<Vec<usize>> = trace.coverage.clone();
    Ok(json!({
        "agents": agents,
        "targets": targets,
        "coverage": covered,
        "coverage_fraction": trace.coverage_fraction(50.min(horizon / 2)),
        "eta": scenario.params.eta,
        "duals_nonnegative": trace.duals_nonnegative(),
    }))
}

/// Step-size interval, contraction factor across step sizes, and the
/// tracking bound next to a simulated quadratic with curvature `mu = L`.
#[allow(clippy::too_many_arguments)]
pub fn bounds_json(
    mu: f64,
    lipschitz: f64,
    nu: f64,
    chi: f64,
    white: bool,
    alpha: f64,
    sigma: f64,
    eps: f64,
    horizon: u32,
) -> Result<Value, String> {
    let horizon = bounded_horizon(horizon)?;
    let regime = if white {
        ErrorRegime::WhiteNoise
    } else {
        ErrorRegime::General
    };
    let params = TheoryParams::new(mu, lipschitz, nu, chi, regime);
    let interval = alpha_interval(&params).map(|(lo, hi)| json!([lo, hi]));
    let top = 2.0 / lipschitz.max(1e-12);
    let sweep: Vec<Value> = (1..=200)
        .map(|i| {
            let a = top * i as f64 / 200.0;
            let ell = constants(&params, a).ok().map(|c| c.ell);
            json!([a, ell])
        })
        .collect();

    let mut out = json!({
        "interval": interval.as_ref().ok(),
        "interval_error": interval.as_ref().err().map(|e| e.to_string()),
        "sweep": sweep,
        "chi": chi,
    });
    let c = match constants(&params, alpha) {
        Ok(c) => c,
        Err(e) => {
            out["constants_error"] = json!(e.to_string());
            return Ok(out);
        }
    };
    out["ell"] = json!(c.ell);
    out["zeta"] = json!(c.zeta);
    out["xi"] = json!(c.xi);

    // unit-curvature quadratic tracked with sphere-uniform errors of size eps
    let model = ErrorModel::new(regime, EpsSchedule::Constant(eps), 0.0, ErrorDistribution::SphereUniform)
        .map_err(|e| e.to_string())?;
    let runs: Vec<Vec<f64>> = seed_range(0, 40)
        .into_iter()
        .map(|s| {
            let velocity = Vector::from_column_slice(&[sigma, 0.0]);
            let problem = MovingQuadratic::from_trajectory(
                mu,
                &Vector::from_column_slice(&[1.0, 0.0]),
                &Trajectory::ConstantVelocity { velocity },
                horizon,
            )?;
            let tr = run_iogd(&problem, &model, &IogdConfig::new(alpha, horizon, s))?;
            Ok(tr.dist.unwrap_or_default())
        })
        .collect::<iogd::Result<_>>()
        .map_err(|e| e.to_string())?;
    let empirical: Vec<f64> = columnwise(&runs).iter().map(|s| s.mean).collect();
    out["empirical"] = json!(empirical);
    if c.ell < chi {
        let bound: Vec<f64> = (0..horizon)
            .map(|k| tracking_bound(k, 1.0, sigma, eps, &c).unwrap_or(f64::NAN))
            .collect();
        out["bound"] = json!(bound);
        out["limit"] = json!(c.tracking_limit(sigma, eps).ok());
    }
    Ok(out)
}

/// Mean dynamic regret, path length and error sum for sampled and exact
/// gradients on one least-squares network.
pub fn regret_json(nodes: u32, alpha: f64, horizon: u32, seeds: u32, seed: u32) -> Result<Value, String> {
    let horizon = bounded_horizon(horizon)?;
    let nodes = nodes.max(2) as usize;
    let params = LsqParams {
        nodes,
        horizon,
        ..LsqParams::default()
    };
    let scenario = LsqScenario::generate(&params, seed as u64).map_err(|e| e.to_string())?;
    let curves = |schedule: SampleSchedule| -> Result<Value, String> {
        let runs = seed_range(seed as u64, seeds.clamp(1, 50) as usize)
            .into_iter()
            .map(|s| run_incremental_ogd(&scenario.with_noise_seed(s), schedule, alpha, horizon, s))
            .collect::<iogd::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let mean = |f: &dyn Fn(&iogd::RunTrace) -> Vec<f64>| -> Vec<f64> {
            columnwise(&runs.iter().map(f).collect::<Vec<_>>()).iter().map(|s| s.mean).collect()
        };
        Ok(json!({
            "regret": mean(&|r| r.regret_cum.clone().unwrap_or_default()),
            "path": mean(&|r| r.path_cum.clone().unwrap_or_default()),
            "error": mean(&|r| r.error_cum.clone()),
        }))
    };
    Ok(json!({
        "sampled": curves(SampleSchedule::growing(nodes))?,
        "exact": curves(SampleSchedule::Full { total: nodes })?,
        "chi": scenario.sigma_min() / scenario.sigma_max(),
    }))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn tracking(large: bool, horizon: u32, seed: u32, theta: f64, nu_init: f64) -> Result<String, JsValue> {
    to_js(tracking_json(large, horizon, seed, theta, nu_init))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn bounds(
    mu: f64,
    lipschitz: f64,
    nu: f64,
    chi: f64,
    white: bool,
    alpha: f64,
    sigma: f64,
    eps: f64,
    horizon: u32,
) -> Result<String, JsValue> {
    to_js(bounds_json(mu, lipschitz, nu, chi, white, alpha, sigma, eps, horizon))
}

#[wasm_bindgen]
pub fn regret(nodes: u32, alpha: f64, horizon: u32, seeds: u32, seed: u32) -> Result<String, JsValue> {
    to_js(regret_json(nodes, alpha, horizon, seeds, seed))
}
