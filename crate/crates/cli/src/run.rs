//! Command execution and artifact writing.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use iogd::analysis::{constants, regret_budget, sublinearity_slope, BoundReport, RegretInputs};
use iogd::completion::{ingest_ratings, run_mc_tracking, synthetic_stream, ProxConfig};
use iogd::lsq::{run_incremental_ogd, LsqParams, LsqScenario, SampleSchedule};
use iogd::montecarlo::{map_seeds, mean_se, seed_range};
use iogd::problem::TrajectorySpec;
use iogd::tracking::{simulate, DualSign, TrackScenario};
use iogd::{fmt_f64, ErrorRegime, RunTrace};
use sha2::{Digest, Sha256};

use crate::config::{Config, ConfigError};
use crate::selftest;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(String),
    Io(String),
    Selftest(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Selftest(_) => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numeric(m) => write!(f, "numeric error: {m}"),
            RunError::Io(m) => write!(f, "io error: {m}"),
            RunError::Selftest(m) => write!(f, "selftest failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<iogd::Error> for RunError {
    fn from(e: iogd::Error) -> Self {
        match e {
            iogd::Error::Io(m) => RunError::Io(m),
            e if e.is_numeric() => RunError::Numeric(e.to_string()),
            e => RunError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, dir.join(name))
}

/// Artifacts of one command, in write order.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
    notes: Vec<String>,
}

impl Outputs {
    pub(crate) fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

/// What `run_experiment` wrote.
#[derive(Debug)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

pub fn run_experiment(config: &Config, out_dir: &Path) -> Result<Report, RunError> {
    let mut out = Outputs::default();
    let result = match config.command() {
        "lsq" => run_lsq(config, &mut out),
        "analyze" => run_analyze(config, &mut out),
        "track" => run_track(config, &mut out),
        "mc" => run_mc(config, &mut out),
        "selftest" => selftest::run(config, &mut out),
        other => Err(RunError::Config(format!("unknown command `{other}`"))),
    };
    // a failing selftest still leaves its report behind
    if let Err(e) = &result {
        if !matches!(e, RunError::Selftest(_)) {
            return Err(result.unwrap_err());
        }
    }
    fs::create_dir_all(out_dir)?;
    let canonical = config.canonical();
    out.add("config.txt", canonical.clone());
    let mut manifest = format!(
        "tool = iogd-cli {}\ncore = iogd {}\ncommand = {}\nseed = {}\nconfig_sha256 = {}\n",
        env!("CARGO_PKG_VERSION"),
        iogd::VERSION,
        config.command(),
        config.seed(),
        sha256_hex(canonical.as_bytes())
    );
    let mut files = Vec::new();
    for (name, contents) in &out.files {
        write_atomic(out_dir, name, contents)?;
        manifest.push_str(&format!("file = {name} {}\n", sha256_hex(contents.as_bytes())));
        files.push(out_dir.join(name));
    }
    for note in &out.notes {
        manifest.push_str(&format!("note = {note}\n"));
    }
    write_atomic(out_dir, "manifest.txt", &manifest)?;
    files.push(out_dir.join("manifest.txt"));
    result?;
    Ok(Report {
        files,
        notes: out.notes,
    })
}

fn lsq_params(config: &Config, horizon: usize) -> LsqParams {
    let trajectory = match config.text("lsq.trajectory") {
        "static" => TrajectorySpec::Static,
        "constant" => TrajectorySpec::ConstantVelocity {
            speed: config.float("lsq.speed"),
        },
        _ => TrajectorySpec::DecayingVelocity {
            scale: config.float("lsq.scale"),
            decay: config.float("lsq.decay"),
        },
    };
    LsqParams {
        nodes: config.count("lsq.nodes"),
        rows: config.count("lsq.rows"),
        dim: config.count("lsq.dim"),
        horizon,
        trajectory,
        sigma_obs: config.float("lsq.sigma_obs"),
        zero_columns: config.list("lsq.zero_columns"),
    }
}

/// One scenario, `seeds` runs with consecutive noise seeds.
fn lsq_runs(config: &Config, horizon: usize) -> Result<(LsqScenario, Vec<RunTrace>), RunError> {
    let params = lsq_params(config, horizon);
    let scenario_seed = match config.int("lsq.scenario_seed") {
        s if s >= 0 => s as u64,
        _ => config.seed(),
    };
    let scenario = LsqScenario::generate(&params, scenario_seed)?;
    let schedule = match config.text("lsq.sampling") {
        "full" => SampleSchedule::Full { total: params.nodes },
        _ => SampleSchedule::Growing {
            total: params.nodes,
            rho: config.float("lsq.rho"),
        },
    };
    let alpha = config.float("alpha");
    let runs = map_seeds(&seed_range(config.seed(), config.count("seeds")), |s| {
        run_incremental_ogd(&scenario.with_noise_seed(s), schedule, alpha, horizon, s)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok((scenario, runs))
}

fn at(series: &Option<Vec<f64>>, k: usize) -> f64 {
    series.as_ref().map_or(f64::NAN, |s| s[k - 1])
}

/// Mean regret against the mean explicit budget at each `K` in `grid`;
/// `None` when the step-size constants are infeasible.
fn budget_report(
    scenario: &LsqScenario,
    runs: &[RunTrace],
    alpha: f64,
    grid: &[usize],
    out: &mut Outputs,
) -> Result<Option<BoundReport>, RunError> {
    let c = match constants(&scenario.theory_params(ErrorRegime::General), alpha) {
        Ok(c) if c.ell < c.params.chi => c,
        Ok(c) => {
            out.note(format!(
                "regret budget skipped: contraction {:.6} not below chi {:.6}",
                c.ell, c.params.chi
            ));
            return Ok(None);
        }
        Err(e) => {
            out.note(format!("regret budget skipped: {e}"));
            return Ok(None);
        }
    };
    let mut report = BoundReport::default();
    for &k in grid {
        let regrets: Vec<f64> = runs.iter().map(|r| at(&r.regret_cum, k)).collect();
        let budgets = runs
            .iter()
            .map(|r| {
                let path = r.path_cum.as_ref().expect("least squares exposes minimizers");
                let dist1 = at(&r.dist, 1);
                let inputs = RegretInputs {
                    path_length: path[k - 1],
                    error_sum: r.error_cum[k - 1],
                    dist1,
                    x1_gap: dist1,
                    eps: r.eps[..k].iter().copied().fold(0.0, f64::max),
                    sigma: path[..k].windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
                };
                regret_budget(&inputs, &c)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ms = mean_se(&regrets);
        report.push(k, ms.mean, mean_se(&budgets).mean, 3.0 * ms.se);
    }
    Ok(Some(report))
}

/// Powers of two up to the horizon, plus the horizon itself.
fn doubling_grid(horizon: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|k| *k < horizon)
        .collect();
    grid.push(horizon);
    grid
}

fn run_lsq(config: &Config, out: &mut Outputs) -> Result<(), RunError> {
    let horizon = config.count("horizon");
    let (scenario, runs) = lsq_runs(config, horizon)?;
    out.add("scenario.txt", scenario.to_text());
    out.add("trace.csv", runs[0].to_csv());

    let mut curves = String::from("K,mean_regret,se_regret,mean_W,mean_E,mean_dist\n");
    for k in 1..=horizon {
        let regret = mean_se(&runs.iter().map(|r| at(&r.regret_cum, k)).collect::<Vec<_>>());
        let path = mean_se(&runs.iter().map(|r| at(&r.path_cum, k)).collect::<Vec<_>>());
        let err = mean_se(&runs.iter().map(|r| r.error_cum[k - 1]).collect::<Vec<_>>());
        let dist = mean_se(&runs.iter().map(|r| at(&r.dist, k)).collect::<Vec<_>>());
        curves.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            fmt_f64(regret.mean),
            fmt_f64(regret.se),
            fmt_f64(path.mean),
            fmt_f64(err.mean),
            fmt_f64(dist.mean)
        ));
    }
    out.add("regret.csv", curves);
    if let Some(report) = budget_report(&scenario, &runs, config.float("alpha"), &doubling_grid(horizon), out)? {
        out.add("bounds.csv", report.to_csv());
    }
    if runs[0].alpha_admissible == Some(false) {
        out.note("alpha lies outside the admissible step-size interval");
    }
    Ok(())
}

fn run_analyze(config: &Config, out: &mut Outputs) -> Result<(), RunError> {
    let mut grid = config.list("analyze.grid");
    grid.sort_unstable();
    grid.dedup();
    if grid[0] == 0 {
        return Err(RunError::Config("key `analyze.grid`: entries must be >= 1".into()));
    }
    let horizon = *grid.last().unwrap();
    let (scenario, runs) = lsq_runs(config, horizon)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &k in &grid {
        let regret = mean_se(&runs.iter().map(|r| at(&r.regret_cum, k)).collect::<Vec<_>>());
        let path = mean_se(&runs.iter().map(|r| at(&r.path_cum, k)).collect::<Vec<_>>()).mean;
        let err = mean_se(&runs.iter().map(|r| r.error_cum[k - 1]).collect::<Vec<_>>()).mean;
        rows.push((k, regret, path, err));
    }
    let ks: Vec<f64> = grid.iter().map(|k| *k as f64).collect();
    let slope = |vals: Vec<f64>| sublinearity_slope(&ks, &vals).unwrap_or(f64::NAN);
    let regret_slope = slope(rows.iter().map(|r| r.1.mean).collect());
    let path_slope = slope(rows.iter().map(|r| r.2).collect());
    let err_slope = slope(rows.iter().map(|r| r.3).collect());
    if regret_slope.is_nan() {
        out.note("slope needs at least 4 grid points with positive values");
    }
    let mut csv = String::from("K,mean_regret,se_regret,mean_W,mean_E,slope,slope_W,slope_E\n");
    for (k, regret, path, err) in &rows {
        csv.push_str(&format!(
            "{k},{},{},{},{},{},{},{}\n",
            fmt_f64(regret.mean),
            fmt_f64(regret.se),
            fmt_f64(*path),
            fmt_f64(*err),
            fmt_f64(regret_slope),
            fmt_f64(path_slope),
            fmt_f64(err_slope)
        ));
    }
    out.add("sublinearity.csv", csv);
    if let Some(report) = budget_report(&scenario, &runs, config.float("alpha"), &grid, out)? {
        out.add("bounds.csv", report.to_csv());
    }
    Ok(())
}

fn run_track(config: &Config, out: &mut Outputs) -> Result<(), RunError> {
    let horizon = config.count("horizon");
    let seed = config.seed();
    let mut scenario = match config.text("track.scenario") {
        "large" => TrackScenario::large(seed, horizon)?,
        _ => TrackScenario::diverging(seed, horizon)?,
    };
    let p = &mut scenario.params;
    if config.float("track.theta") >= 0.0 {
        p.theta = config.float("track.theta");
    }
    if config.float("track.nu_init") >= 0.0 {
        p.nu_init = config.float("track.nu_init");
    }
    p.eps_w = config.float("track.eps_w");
    p.eta = config.float("track.eta");
    p.speed_cap_sq = config.float("track.speed_cap").powi(2);
    p.alpha_lambda = config.float("track.alpha_lambda");
    p.alpha_nu = config.float("track.alpha_nu");
    p.target_noise = config.float("track.target_noise");
    p.clip_speed = config.flag("track.clip_speed");
    p.sign = match config.text("track.sign") {
        "ascent" => DualSign::Ascent,
        _ => DualSign::Printed,
    };
    let trace = simulate(&scenario, horizon, seed, config.count("track.reference_iters"))?;
    out.add("agents.csv", trace.agent_csv());
    out.add("targets.csv", trace.target_csv());
    let burn_in = config.count("track.burn_in");
    let mut coverage = String::from("target_id,coverage_fraction\n");
    for (j, f) in trace.coverage_fraction(burn_in).iter().enumerate() {
        coverage.push_str(&format!("{},{}\n", j + 1, fmt_f64(*f)));
    }
    out.add("coverage.csv", coverage);
    let mut slots = String::from("k,clipped,residual,residual_literal,tracking_error\n");
    for k in 0..horizon {
        let err = trace.tracking_error.as_ref().map(|e| fmt_f64(e[k])).unwrap_or_default();
        slots.push_str(&format!(
            "{},{},{},{},{err}\n",
            k + 1,
            trace.clipped[k],
            fmt_f64(trace.residual[k]),
            fmt_f64(trace.residual_literal[k])
        ));
    }
    out.add("slots.csv", slots);
    if !trace.duals_nonnegative() {
        out.note("negative dual values were produced");
    }
    Ok(())
}

fn run_mc(config: &Config, out: &mut Outputs) -> Result<(), RunError> {
    let windows = match config.text("mc.source") {
        "movielens" => ingest_ratings(
            Path::new(config.text("mc.path")),
            config.float("mc.window_days"),
            config.count("mc.max_users"),
            config.count("mc.max_items"),
        )?,
        _ => synthetic_stream(
            config.count("mc.rows"),
            config.count("mc.cols"),
            config.count("mc.rank"),
            config.float("mc.drift"),
            config.float("mc.observed"),
            config.count("mc.windows"),
            config.seed(),
        )?,
    };
    if windows.is_empty() {
        return Err(RunError::Config("ratings input produced no windows".into()));
    }
    let lambda = config.float("mc.lambda");
    let prox = ProxConfig {
        step: config.float("mc.step"),
        lambda: (lambda >= 0.0).then_some(lambda),
        repeats: config.count("mc.repeats"),
    };
    let trace = run_mc_tracking(&windows, &prox)?;
    out.add("mc.csv", trace.to_csv());
    let mut objective = String::from("window,objective,observed\n");
    for (k, (v, w)) in trace.objective.iter().zip(&windows).enumerate() {
        objective.push_str(&format!("{},{},{}\n", k + 1, fmt_f64(*v), w.observed()));
    }
    out.add("objective.csv", objective);
    out.note(format!("nuclear-norm weight {}", fmt_f64(trace.lambda)));
    Ok(())
}
