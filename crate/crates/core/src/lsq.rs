//! Time-varying least squares over a network of `N` nodes,
//!
//! ```text
//! f_k(x) = (1/N) sum_i ||E_i x - b_{i,k}||^2,   b_{i,k} = E_i x_k + n_{i,k},
//! ```
//!
//! solved with sampled gradients whose sample size grows with `k`.

use rand::seq::index;
use rand::Rng as _;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::analysis::TheoryParams;
use crate::error::{check_dim, Error, Result};
use crate::fmt_f64;
use crate::iogd::{run_with_oracle, GradientOracle, IogdConfig, Observation};
use crate::noise::ErrorRegime;
use crate::problem::{ProblemSequence, SlotProblem, TrajectorySpec};
use crate::trace::RunTrace;
use crate::{seeded_rng, Matrix, Rng, Vector};

/// Generation parameters; defaults are the 100-node, 2x3 configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LsqParams {
    pub nodes: usize,
    pub rows: usize,
    pub dim: usize,
    pub horizon: usize,
    pub trajectory: TrajectorySpec,
    pub sigma_obs: f64,
    /// Columns zeroed in every `E_i`, making the minimizer set affine.
    pub zero_columns: Vec<usize>,
}

impl Default for LsqParams {
    fn default() -> Self {
        LsqParams {
            nodes: 100,
            rows: 2,
            dim: 3,
            horizon: 1000,
            trajectory: TrajectorySpec::default(),
            sigma_obs: 0.1,
            zero_columns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqScenario {
    nodes: usize,
    rows: usize,
    /// All `E_i` stacked row-wise, `(N m) x n`.
    stacked: Matrix,
    pinv: Matrix,
    /// `I - E^+ E`, the projector onto the null space.
    null_proj: Matrix,
    sigma_min: f64,
    sigma_max: f64,
    rank: usize,
    /// Generating parameter `x_k` for each slot.
    generators: Vec<Vector>,
    sigma_obs: f64,
    noise_seed: u64,
}

const RANK_TOL: f64 = 1e-10;

impl LsqScenario {
    /// Draws `E_i` with i.i.d. standard normal entries and the generating
    /// trajectory from `seed`. Observation noise is keyed by the same seed
    /// unless changed with [`LsqScenario::with_noise_seed`].
    pub fn generate(params: &LsqParams, seed: u64) -> Result<Self> {
        let LsqParams {
            nodes,
            rows,
            dim,
            horizon,
            ..
        } = *params;
        if nodes == 0 || rows == 0 || dim == 0 || horizon == 0 {
            return Err(Error::invalid("N, m, n and horizon must be at least 1"));
        }
        if !(params.sigma_obs >= 0.0) {
            return Err(Error::invalid("observation noise std must be >= 0"));
        }
        let mut rng = seeded_rng(seed);
        let mut stacked = Matrix::from_fn(nodes * rows, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        for &c in &params.zero_columns {
            if c >= dim {
                return Err(Error::invalid(format!("zero column {c} out of range")));
            }
            stacked.column_mut(c).fill(0.0);
        }
        let start = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let generators = params.trajectory.build(dim, &mut rng).realize(&start, horizon)?;
        Self::from_parts(nodes, rows, stacked, generators, params.sigma_obs, seed)
    }

    /// Builds a scenario from explicit data. `stacked` holds the node
    /// matrices row-wise.
    pub fn from_parts(
        nodes: usize,
        rows: usize,
        stacked: Matrix,
        generators: Vec<Vector>,
        sigma_obs: f64,
        noise_seed: u64,
    ) -> Result<Self> {
        check_dim(nodes * rows, stacked.nrows())?;
        let dim = stacked.ncols();
        if generators.is_empty() {
            return Err(Error::invalid("empty trajectory"));
        }
        for g in &generators {
            check_dim(dim, g.len())?;
        }
        let svd = stacked.clone().svd(false, false);
        let sigma_max = svd.singular_values.max();
        if !(sigma_max > 0.0) {
            return Err(Error::invalid("every node matrix is zero"));
        }
        let nonzero: Vec<f64> = svd
            .singular_values
            .iter()
            .copied()
            .filter(|s| *s > RANK_TOL * sigma_max)
            .collect();
        let sigma_min = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
        let pinv = stacked
            .clone()
            .pseudo_inverse(RANK_TOL * sigma_max)
            .map_err(|e| Error::Singular(e.to_string()))?;
        let null_proj = Matrix::identity(dim, dim) - &pinv * &stacked;
        Ok(LsqScenario {
            nodes,
            rows,
            stacked,
            pinv,
            null_proj,
            sigma_min,
            sigma_max,
            rank: nonzero.len(),
            generators,
            sigma_obs,
            noise_seed,
        })
    }

    /// Same matrices and trajectory, fresh observation noise.
    pub fn with_noise_seed(&self, seed: u64) -> Self {
        LsqScenario {
            noise_seed: seed,
            ..self.clone()
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn stacked(&self) -> &Matrix {
        &self.stacked
    }

    pub fn node_matrix(&self, i: usize) -> Matrix {
        self.stacked.rows(i * self.rows, self.rows).into_owned()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    /// QG modulus `2 sigma_min^2 / N`.
    pub fn qg_modulus(&self) -> f64 {
        2.0 * self.sigma_min.powi(2) / self.nodes as f64
    }

    /// Gradient Lipschitz constant `2 sigma_max^2 / N`.
    pub fn lipschitz(&self) -> f64 {
        2.0 * self.sigma_max.powi(2) / self.nodes as f64
    }

    /// Constants for the step-size analysis with purely additive errors.
    pub fn theory_params(&self, regime: ErrorRegime) -> TheoryParams {
        TheoryParams::new(
            self.qg_modulus(),
            self.lipschitz(),
            0.0,
            self.sigma_min / self.sigma_max,
            regime,
        )
    }

    /// Projection onto the solution set of the stacked system for slot data `b`.
    fn project_onto_solutions(&self, b: &Vector, x: &Vector) -> Vector {
        &self.pinv * b + &self.null_proj * x
    }

    fn observations(&self, k: usize) -> Vector {
        let gen = &self.generators[k - 1];
        let mut b = &self.stacked * gen;
        if self.sigma_obs > 0.0 {
            let mut rng = Rng::seed_from_u64(self.noise_seed);
            rng.set_stream(k as u64);
            for v in b.iter_mut() {
                *v += self.sigma_obs * rng.sample::<f64, _>(StandardNormal);
            }
        }
        b
    }

    /// Text serialization: a header of `key value` lines followed by the
    /// stacked matrix and the trajectory as whitespace-separated reals.
    pub fn to_text(&self) -> String {
        let dim = self.stacked.ncols();
        let mut out = String::new();
        out.push_str("lsq-scenario 1\n");
        out.push_str(&format!("nodes {}\nrows {}\ndim {}\n", self.nodes, self.rows, dim));
        out.push_str(&format!("horizon {}\n", self.generators.len()));
        out.push_str(&format!("sigma_obs {}\nnoise_seed {}\n", fmt_f64(self.sigma_obs), self.noise_seed));
        out.push_str("matrix\n");
        for r in 0..self.stacked.nrows() {
            let row: Vec<String> = self.stacked.row(r).iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("trajectory\n");
        for g in &self.generators {
            let row: Vec<String> = g.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end, expected {what}") })
        };
        let (ln, magic) = next("header")?;
        if magic != "lsq-scenario 1" {
            return Err(Error::Parse { line: ln, msg: "not an lsq-scenario file".into() });
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = next(key)?;
            match l.split_once(' ') {
                Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
                _ => Err(Error::Parse { line: ln, msg: format!("expected `{key} <value>`") }),
            }
        };
        fn num<T: std::str::FromStr>((ln, v): (usize, String)) -> Result<T> {
            v.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad number `{v}`") })
        }
        let nodes: usize = num(field("nodes")?)?;
        let rows: usize = num(field("rows")?)?;
        let dim: usize = num(field("dim")?)?;
        let horizon: usize = num(field("horizon")?)?;
        let sigma_obs: f64 = num(field("sigma_obs")?)?;
        let noise_seed: u64 = num(field("noise_seed")?)?;

        let mut read_block = |tag: &str, count: usize| -> Result<Vec<Vec<f64>>> {
            let (ln, l) = next(tag)?;
            if l != tag {
                return Err(Error::Parse { line: ln, msg: format!("expected `{tag}`") });
            }
            (0..count)
                .map(|_| {
                    let (ln, l) = next("row")?;
                    let vals: Vec<f64> = l
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad number `{t}`") }))
                        .collect::<Result<_>>()?;
                    if vals.len() != dim {
                        return Err(Error::Parse { line: ln, msg: format!("expected {dim} values") });
                    }
                    Ok(vals)
                })
                .collect()
        };
        let mat = read_block("matrix", nodes * rows)?;
        let traj = read_block("trajectory", horizon)?;
        let stacked = Matrix::from_fn(nodes * rows, dim, |r, c| mat[r][c]);
        let generators = traj.iter().map(|r| Vector::from_column_slice(r)).collect();
        Self::from_parts(nodes, rows, stacked, generators, sigma_obs, noise_seed)
    }
}

/// Slot data: observations and the exposed minimizer.
#[derive(Debug, Clone)]
pub struct LsqSlot<'a> {
    scenario: &'a LsqScenario,
    b: Vector,
    minimizer: Vector,
}

impl LsqSlot<'_> {
    fn residual(&self, x: &Vector) -> Vector {
        &self.scenario.stacked * x - &self.b
    }

    /// Per-node gradients `2 E_i' (E_i x - b_i)` as the columns of an `n x N` matrix.
    pub fn node_gradients(&self, x: &Vector) -> Matrix {
        let s = self.scenario;
        let r = &s.stacked * x - &self.b;
        let dim = s.stacked.ncols();
        let mut out = Matrix::zeros(dim, s.nodes);
        for i in 0..s.nodes {
            for row in i * s.rows..(i + 1) * s.rows {
                let ri = 2.0 * r[row];
                for c in 0..dim {
                    out[(c, i)] += s.stacked[(row, c)] * ri;
                }
            }
        }
        out
    }

    /// Mean of the per-node gradients over `sample`.
    pub fn incremental_gradient(&self, x: &Vector, sample: &[usize]) -> Result<Vector> {
        if sample.is_empty() {
            return Err(Error::invalid("empty sample set"));
        }
        let s = self.scenario;
        let r = &s.stacked * x - &self.b;
        let dim = s.stacked.ncols();
        let mut g = Vector::zeros(dim);
        for &i in sample {
            if i >= s.nodes {
                return Err(Error::invalid(format!("node {i} out of range")));
            }
            for row in i * s.rows..(i + 1) * s.rows {
                let ri = 2.0 * r[row];
                for c in 0..dim {
                    g[c] += s.stacked[(row, c)] * ri;
                }
            }
        }
        Ok(g / sample.len() as f64)
    }

    pub fn observations(&self) -> &Vector {
        &self.b
    }
}

impl SlotProblem for LsqSlot<'_> {
    fn dim(&self) -> usize {
        self.scenario.stacked.ncols()
    }

    fn cost(&self, x: &Vector) -> f64 {
        self.residual(x).norm_squared() / self.scenario.nodes as f64
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.scenario.stacked.tr_mul(&self.residual(x)) * (2.0 / self.scenario.nodes as f64)
    }

    fn minimizer(&self) -> Option<Vector> {
        Some(self.minimizer.clone())
    }

    fn project_minimizers(&self, x: &Vector) -> Option<Vector> {
        Some(self.scenario.project_onto_solutions(&self.b, x))
    }
}

impl ProblemSequence for LsqScenario {
    type Slot<'a> = LsqSlot<'a>;

    fn dim(&self) -> usize {
        self.stacked.ncols()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.generators.len())
    }

    fn slot(&self, k: usize) -> Result<LsqSlot<'_>> {
        if k == 0 || k > self.generators.len() {
            return Err(Error::invalid(format!("slot {k} outside 1..={}", self.generators.len())));
        }
        let b = self.observations(k);
        let minimizer = self.project_onto_solutions(&b, &self.generators[k - 1]);
        Ok(LsqSlot {
            scenario: self,
            b,
            minimizer,
        })
    }
}

/// Number of nodes sampled at slot `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleSchedule {
    /// Every node, every slot.
    Full { total: usize },
    /// `ceil(N k^rho / (N + k^rho))`, clamped to `[1, N]`.
    Growing { total: usize, rho: f64 },
}

impl SampleSchedule {
    pub fn growing(total: usize) -> Self {
        SampleSchedule::Growing { total, rho: 1.0 }
    }

    pub fn total(&self) -> usize {
        match *self {
            SampleSchedule::Full { total } | SampleSchedule::Growing { total, .. } => total,
        }
    }

    pub fn size(&self, k: usize) -> usize {
        match *self {
            SampleSchedule::Full { total } => total,
            SampleSchedule::Growing { total, rho } => {
                let n = total as f64;
                let kr = (k.max(1) as f64).powf(rho);
                // guard against 0.99999... rounding up past the exact integer
                let raw = n * kr / (n + kr);
                let size = (raw - 1e-9 * raw.max(1.0)).ceil();
                (size as usize).clamp(1, total)
            }
        }
    }
}

/// Gradient oracle that averages a uniformly drawn subset of nodes. The
/// claimed error level is `Lambda_k sqrt(1/N_k - 1/N)`, with `Lambda_k^2`
/// the sample variance of the node gradients at the current point.
#[derive(Debug, Clone)]
pub struct SamplingOracle {
    schedule: SampleSchedule,
    rng: Rng,
}

impl SamplingOracle {
    pub fn new(schedule: SampleSchedule, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        rng.set_stream(u64::MAX);
        SamplingOracle { schedule, rng }
    }
}

/// Sample variance (divisor `N - 1`) of the columns of `grads`.
pub fn node_gradient_variance(grads: &Matrix) -> f64 {
    let n = grads.ncols();
    if n < 2 {
        return 0.0;
    }
    let mean = grads.column_mean();
    let mut total = 0.0;
    for c in grads.column_iter() {
        total += (c - &mean).norm_squared();
    }
    total / (n - 1) as f64
}

impl<'a> GradientOracle<LsqSlot<'a>> for SamplingOracle {
    fn observe(&mut self, slot: &LsqSlot<'a>, k: usize, x: &Vector, exact: &Vector) -> Result<Observation> {
        let total = slot.scenario.nodes;
        if self.schedule.total() != total {
            return Err(Error::invalid(format!(
                "schedule is for {} nodes, scenario has {total}",
                self.schedule.total()
            )));
        }
        let size = self.schedule.size(k);
        if size == total {
            return Ok(Observation {
                gradient: exact.clone(),
                eps: 0.0,
                sample_size: Some(size),
            });
        }
        let sample = index::sample(&mut self.rng, total, size).into_vec();
        let gradient = slot.incremental_gradient(x, &sample)?;
        let spread = node_gradient_variance(&slot.node_gradients(x));
        let eps = (spread * (1.0 / size as f64 - 1.0 / total as f64)).sqrt();
        Ok(Observation {
            gradient,
            eps,
            sample_size: Some(size),
        })
    }
}

/// IOGD driven by sampled node gradients.
pub fn run_incremental_ogd(
    scenario: &LsqScenario,
    schedule: SampleSchedule,
    alpha: f64,
    horizon: usize,
    seed: u64,
) -> Result<RunTrace> {
    let config = IogdConfig::new(alpha, horizon, seed).with_theory(scenario.theory_params(ErrorRegime::General));
    let mut oracle = SamplingOracle::new(schedule, seed);
    run_with_oracle(scenario, &mut oracle, &config)
}
