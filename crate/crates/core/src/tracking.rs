//! Multi-agent multi-target tracking in the dual domain.
//!
//! Each slot solves
//!
//! ```text
//! min_x  sum_{i<l} ||x^i - x^l||^2 + gamma ||x - x_k||^2
//! s.t.   ||x^i - x_k^i||^2 <= v                       (one per agent)
//!        sum_i w^{ij} ||x^i - y^j||^2 <= eta           (one per target)
//! ```
//!
//! by one closed-form primal minimization at the current duals followed by
//! one projected dual gradient step, using noisy target estimates.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{fmt_f64, seeded_rng, Matrix, Rng};

pub type Point = nalgebra::Vector2<f64>;

/// Sign used in the dual update `[dual -/+ step * grad]_+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualSign {
    /// Subtract the gradient. This drives `nu` up while a target constraint
    /// is satisfied, which pulls agents tightly onto their targets.
    Printed,
    /// Add the gradient: plain projected ascent on the concave dual.
    Ascent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackParams {
    pub gamma: f64,
    /// Sigmoid sharpness.
    pub theta: f64,
    /// Sigmoid midpoint distance.
    pub eps_w: f64,
    /// Coverage radius; also the right-hand side of the target constraints.
    pub eta: f64,
    /// Squared per-slot displacement cap.
    pub speed_cap_sq: f64,
    pub alpha_lambda: f64,
    pub alpha_nu: f64,
    pub lambda_init: f64,
    pub nu_init: f64,
    pub target_noise: f64,
    pub sign: DualSign,
    /// Clip each displacement to `sqrt(speed_cap_sq)` after the primal step.
    pub clip_speed: bool,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            gamma: 1.0,
            theta: 5.0,
            eps_w: 0.54,
            eta: 0.54,
            speed_cap_sq: 0.2 * 0.2,
            alpha_lambda: 0.05,
            alpha_nu: 0.05,
            lambda_init: 0.0,
            nu_init: 0.0,
            target_noise: 0.02,
            sign: DualSign::Printed,
            clip_speed: true,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("theta", self.theta),
            ("eps_w", self.eps_w),
            ("eta", self.eta),
            ("speed_cap_sq", self.speed_cap_sq),
            ("alpha_lambda", self.alpha_lambda),
            ("alpha_nu", self.alpha_nu),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("lambda_init", self.lambda_init),
            ("nu_init", self.nu_init),
            ("target_noise", self.target_noise),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// True target positions, `positions[k - 1][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPaths {
    positions: Vec<Vec<Point>>,
}

impl TargetPaths {
    pub fn new(positions: Vec<Vec<Point>>) -> Result<Self> {
        let m = positions.first().map(Vec::len).ok_or_else(|| Error::invalid("empty target paths"))?;
        if positions.iter().any(|p| p.len() != m) {
            return Err(Error::invalid("target count changes between slots"));
        }
        Ok(TargetPaths { positions })
    }

    /// Targets start together at the origin and move outward along rays at
    /// evenly spaced angles, stopping at `stop_radius`.
    pub fn diverging_rays(m: usize, speed: f64, stop_radius: f64, angle0: f64, horizon: usize) -> Result<Self> {
        let dirs: Vec<Point> = (0..m)
            .map(|j| {
                let a = angle0 + std::f64::consts::TAU * j as f64 / m as f64;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        Self::new(
            (0..horizon)
                .map(|k| {
                    let r = (speed * k as f64).min(stop_radius);
                    dirs.iter().map(|d| d * r).collect()
                })
                .collect(),
        )
    }

    pub fn stationary(points: Vec<Point>, horizon: usize) -> Result<Self> {
        Self::new(vec![points; horizon])
    }

    /// Each target walks its polyline at constant speed and then waits at
    /// the last waypoint.
    pub fn waypoints(paths: &[Vec<Point>], speed: f64, horizon: usize) -> Result<Self> {
        if paths.iter().any(Vec::is_empty) {
            return Err(Error::invalid("waypoint path without points"));
        }
        let at = |path: &[Point], travelled: f64| -> Point {
            let mut left = travelled;
            for w in path.windows(2) {
                let seg = (w[1] - w[0]).norm();
                if left <= seg && seg > 0.0 {
                    return w[0] + (w[1] - w[0]) * (left / seg);
                }
                left -= seg;
            }
            *path.last().unwrap()
        };
        Self::new(
            (0..horizon)
                .map(|k| paths.iter().map(|p| at(p, speed * k as f64)).collect())
                .collect(),
        )
    }

    /// Random starts `N(0, spread^2 I)`, random headings and speeds drawn
    /// uniformly from `speed_range`; the heading drifts by `N(0, turn^2)`
    /// radians per slot.
    pub fn random_smooth(
        m: usize,
        spread: f64,
        speed_range: (f64, f64),
        turn: f64,
        horizon: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut pos: Vec<Point> = (0..m)
            .map(|_| Point::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * spread)
            .collect();
        let mut heading: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let speed: Vec<f64> = (0..m)
            .map(|_| {
                if speed_range.1 > speed_range.0 {
                    rng.random_range(speed_range.0..speed_range.1)
                } else {
                    speed_range.0
                }
            })
            .collect();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            out.push(pos.clone());
            for j in 0..m {
                if turn > 0.0 {
                    heading[j] += turn * rng.sample::<f64, _>(StandardNormal);
                }
                pos[j] += Point::new(heading[j].cos(), heading[j].sin()) * speed[j];
            }
        }
        Self::new(out)
    }

    pub fn horizon(&self) -> usize {
        self.positions.len()
    }

    pub fn count(&self) -> usize {
        self.positions[0].len()
    }

    /// Targets at slot `k` (1-based).
    pub fn at(&self, k: usize) -> &[Point] {
        &self.positions[k - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackScenario {
    pub agents: Vec<Point>,
    pub targets: TargetPaths,
    pub params: TrackParams,
}

impl TrackScenario {
    /// Three targets leaving a common point along rays, three agents in a
    /// tight formation near it.
    pub fn diverging(seed: u64, horizon: usize) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let n = 3;
        let angle0 = 0.3;
        let targets = TargetPaths::diverging_rays(3, 0.05, 3.0, angle0, horizon)?;
        let agents = (0..n)
            .map(|i| {
                let a = angle0 + std::f64::consts::TAU * i as f64 / n as f64 + 0.5;
                let jitter = Point::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
                Point::new(a.cos(), a.sin()) * 0.3 + jitter * 0.05
            })
            .collect();
        let params = TrackParams {
            nu_init: 40.0 * n as f64,
            ..TrackParams::default()
        };
        Ok(TrackScenario { agents, targets, params })
    }

    /// Ten targets on random straight paths and fifty agents scattered
    /// around them.
    pub fn large(seed: u64, horizon: usize) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let n = 50;
        let targets = TargetPaths::random_smooth(10, 1.0, (0.02, 0.05), 0.0, horizon, &mut rng)?;
        let agents = (0..n)
            .map(|_| Point::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let params = TrackParams {
            theta: 20.0,
            nu_init: 20.0 * n as f64,
            ..TrackParams::default()
        };
        Ok(TrackScenario { agents, targets, params })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.agents.is_empty() {
            return Err(Error::invalid("need at least one agent"));
        }
        if self.targets.count() == 0 {
            return Err(Error::invalid("need at least one target"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
}

impl DualState {
    pub fn constant(n: usize, m: usize, lambda: f64, nu: f64) -> Self {
        DualState {
            lambda: vec![lambda; n],
            nu: vec![nu; m],
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.lambda.iter().chain(&self.nu).all(|v| *v >= 0.0)
    }
}

/// `log(1 / (1 + exp(-z)))`, stable for large `|z|`.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Raw sigmoid weight for one agent-target distance.
pub fn raw_weight(dist: f64, theta: f64, eps_w: f64) -> f64 {
    log_sigmoid(theta * (eps_w - dist)).exp()
}

/// `n x m` weights, each column normalized to sum to one. Normalization is
/// done in the log domain so a column of tiny raw weights still sums to one.
pub fn sigmoid_weights(agents: &[Point], targets: &[Point], theta: f64, eps_w: f64) -> Matrix {
    let (n, m) = (agents.len(), targets.len());
    let mut w = Matrix::zeros(n, m);
    for j in 0..m {
        let mut top = f64::NEG_INFINITY;
        for i in 0..n {
            let lw = log_sigmoid(theta * (eps_w - (agents[i] - targets[j]).norm()));
            w[(i, j)] = lw;
            top = top.max(lw);
        }
        let mut total = 0.0;
        for i in 0..n {
            let e = (w[(i, j)] - top).exp();
            w[(i, j)] = e;
            total += e;
        }
        for i in 0..n {
            w[(i, j)] /= total;
        }
    }
    w
}

/// Closed-form minimizer of the Lagrangian in the agent positions, written
/// into `out`. Returns the number of floating-point operations performed.
pub fn primal_solve_into(
    dual: &DualState,
    anchors: &[Point],
    targets: &[Point],
    weights: &Matrix,
    gamma: f64,
    out: &mut Vec<Point>,
) -> Result<u64> {
    let (n, m) = (anchors.len(), targets.len());
    if dual.lambda.len() != n || dual.nu.len() != m || weights.nrows() != n || weights.ncols() != m {
        return Err(Error::invalid("primal solve: inconsistent agent/target counts"));
    }
    let nf = n as f64;
    let mut ops = 0u64;
    out.clear();
    let mut inv_sum = 0.0;
    let mut scaled = Point::zeros();
    // first pass: store D^{-1} phi in `out` and accumulate the two sums
    let mut inv_diag = Vec::with_capacity(n);
    for i in 0..n {
        let mut pull = 0.0;
        let mut target_term = Point::zeros();
        for j in 0..m {
            let c = dual.nu[j] * weights[(i, j)];
            pull += c;
            target_term += targets[j] * c;
            ops += 6;
        }
        let d = nf + 2.0 * gamma + 2.0 * dual.lambda[i] + 2.0 * pull;
        let phi = anchors[i] * (2.0 * (gamma + dual.lambda[i])) + target_term * 2.0;
        let inv = 1.0 / d;
        let base = phi * inv;
        inv_sum += inv;
        scaled += base;
        inv_diag.push(inv);
        out.push(base);
        ops += 18;
    }
    let denom = 1.0 - inv_sum;
    if denom.abs() < 1e-12 {
        return Err(Error::Singular("1 - sum of inverse diagonal is zero".into()));
    }
    let shift = scaled / denom;
    ops += 3;
    for i in 0..n {
        out[i] += shift * inv_diag[i];
        ops += 4;
    }
    Ok(ops)
}

pub fn primal_solve(
    dual: &DualState,
    anchors: &[Point],
    targets: &[Point],
    weights: &Matrix,
    gamma: f64,
) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(anchors.len());
    primal_solve_into(dual, anchors, targets, weights, gamma, &mut out)?;
    Ok(out)
}

/// Gradient of the Lagrangian in the agent positions. `pair_scale = 1`
/// gives the stationarity system the closed form solves; `pair_scale = 2`
/// differentiates the pairwise sum without the one-half factor.
pub fn lagrangian_gradient(
    x: &[Point],
    dual: &DualState,
    anchors: &[Point],
    targets: &[Point],
    weights: &Matrix,
    gamma: f64,
    pair_scale: f64,
) -> Vec<Point> {
    let n = x.len();
    let total: Point = x.iter().sum();
    (0..n)
        .map(|i| {
            let mut g = (x[i] * n as f64 - total) * pair_scale;
            g += (x[i] - anchors[i]) * (2.0 * (gamma + dual.lambda[i]));
            for (j, y) in targets.iter().enumerate() {
                g += (x[i] - y) * (2.0 * dual.nu[j] * weights[(i, j)]);
            }
            g
        })
        .collect()
}

/// Value of the Lagrangian; `pair_scale` as in [`lagrangian_gradient`].
pub fn lagrangian_value(
    x: &[Point],
    dual: &DualState,
    anchors: &[Point],
    targets: &[Point],
    weights: &Matrix,
    params: (f64, f64, f64),
    pair_scale: f64,
) -> f64 {
    let (gamma, v, eta) = params;
    let n = x.len();
    let mut val = 0.0;
    for i in 0..n {
        for l in i + 1..n {
            val += 0.5 * pair_scale * (x[i] - x[l]).norm_squared();
        }
        let mv = (x[i] - anchors[i]).norm_squared();
        val += gamma * mv + dual.lambda[i] * (mv - v);
    }
    for (j, y) in targets.iter().enumerate() {
        let spread: f64 = (0..n).map(|i| weights[(i, j)] * (x[i] - y).norm_squared()).sum();
        val += dual.nu[j] * (spread - eta);
    }
    val
}

/// Constraint residuals at the primal minimizer, which are the dual gradients.
pub fn dual_gradients(
    next: &[Point],
    anchors: &[Point],
    targets: &[Point],
    weights: &Matrix,
    speed_cap_sq: f64,
    eta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d_lambda = next
        .iter()
        .zip(anchors)
        .map(|(a, b)| (a - b).norm_squared() - speed_cap_sq)
        .collect();
    let d_nu = targets
        .iter()
        .enumerate()
        .map(|(j, y)| {
            next.iter()
                .enumerate()
                .map(|(i, x)| weights[(i, j)] * (x - y).norm_squared())
                .sum::<f64>()
                - eta
        })
        .collect();
    (d_lambda, d_nu)
}

pub fn dual_update(
    dual: &DualState,
    grads: (&[f64], &[f64]),
    alpha_lambda: f64,
    alpha_nu: f64,
    sign: DualSign,
) -> DualState {
    let s = match sign {
        DualSign::Printed => -1.0,
        DualSign::Ascent => 1.0,
    };
    let step = |vals: &[f64], g: &[f64], a: f64| -> Vec<f64> {
        vals.iter().zip(g).map(|(v, g)| (v + s * a * g).max(0.0)).collect()
    };
    DualState {
        lambda: step(&dual.lambda, grads.0, alpha_lambda),
        nu: step(&dual.nu, grads.1, alpha_nu),
    }
}

/// Noisy target estimates `y + N(0, std^2 I)`.
pub fn estimate_targets(truth: &[Point], std: f64, rng: &mut Rng) -> Vec<Point> {
    if std == 0.0 {
        return truth.to_vec();
    }
    truth
        .iter()
        .map(|y| y + Point::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * std)
        .collect()
}

/// Agents within `eta` of each target.
pub fn coverage_counts(agents: &[Point], targets: &[Point], eta: f64) -> Vec<usize> {
    targets
        .iter()
        .map(|y| agents.iter().filter(|x| (*x - y).norm() <= eta).count())
        .collect()
}

/// Near-optimal primal positions for one frozen slot: `iters` projected
/// dual-ascent iterations with exact targets, warm-started from `warm`.
pub fn reference_solution(
    anchors: &[Point],
    targets: &[Point],
    warm: &DualState,
    params: &TrackParams,
    iters: usize,
) -> Result<(Vec<Point>, DualState)> {
    let weights = sigmoid_weights(anchors, targets, params.theta, params.eps_w);
    let mut dual = warm.clone();
    let mut x = Vec::with_capacity(anchors.len());
    for _ in 0..iters {
        primal_solve_into(&dual, anchors, targets, &weights, params.gamma, &mut x)?;
        let (gl, gn) = dual_gradients(&x, anchors, targets, &weights, params.speed_cap_sq, params.eta);
        dual = dual_update(&dual, (&gl, &gn), params.alpha_lambda, params.alpha_nu, DualSign::Ascent);
    }
    primal_solve_into(&dual, anchors, targets, &weights, params.gamma, &mut x)?;
    Ok((x, dual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackTrace {
    /// Agent positions `x_1 .. x_{K+1}`.
    pub positions: Vec<Vec<Point>>,
    /// Duals in effect at slots `1 .. K+1`.
    pub duals: Vec<DualState>,
    /// True targets at slots `1 .. K`.
    pub targets: Vec<Vec<Point>>,
    /// Agents within `eta` of each target at slots `1 .. K`.
    pub coverage: Vec<Vec<usize>>,
    /// Agents whose displacement was clipped, per slot.
    pub clipped: Vec<usize>,
    /// Largest stationarity residual of the closed form, per slot.
    pub residual: Vec<f64>,
    /// Same, for the gradient without the one-half pairwise factor.
    pub residual_literal: Vec<f64>,
    /// `||x_{k+1} - x_k*||` against the reference solver, when requested.
    pub tracking_error: Option<Vec<f64>>,
}

impl TrackTrace {
    /// Fraction of slots after `burn_in` in which each target is covered.
    pub fn coverage_fraction(&self, burn_in: usize) -> Vec<f64> {
        let slots = &self.coverage[burn_in.min(self.coverage.len())..];
        let m = self.coverage.first().map_or(0, Vec::len);
        (0..m)
            .map(|j| {
                if slots.is_empty() {
                    return 0.0;
                }
                slots.iter().filter(|c| c[j] > 0).count() as f64 / slots.len() as f64
            })
            .collect()
    }

    pub fn duals_nonnegative(&self) -> bool {
        self.duals.iter().all(DualState::is_feasible)
    }

    pub fn agent_csv(&self) -> String {
        let mut out = String::from("k,agent_id,x,y,lambda_i\n");
        for (k, (pos, dual)) in self.positions.iter().zip(&self.duals).enumerate() {
            for (i, p) in pos.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    k + 1,
                    i + 1,
                    fmt_f64(p.x),
                    fmt_f64(p.y),
                    fmt_f64(dual.lambda[i])
                ));
            }
        }
        out
    }

    pub fn target_csv(&self) -> String {
        let mut out = String::from("k,target_id,tx,ty,nu_j,coverage_count\n");
        for (k, (ys, cov)) in self.targets.iter().zip(&self.coverage).enumerate() {
            for (j, y) in ys.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    k + 1,
                    j + 1,
                    fmt_f64(y.x),
                    fmt_f64(y.y),
                    fmt_f64(self.duals[k].nu[j]),
                    cov[j]
                ));
            }
        }
        out
    }
}

/// Runs the tracker for `horizon` slots. `reference_iters > 0` also runs the
/// reference solver each slot to record the tracking error.
pub fn simulate(scenario: &TrackScenario, horizon: usize, seed: u64, reference_iters: usize) -> Result<TrackTrace> {
    scenario.validate()?;
    if horizon > scenario.targets.horizon() {
        return Err(Error::invalid(format!(
            "targets defined for {} slots, horizon asks for {horizon}",
            scenario.targets.horizon()
        )));
    }
    let p = &scenario.params;
    let (n, m) = (scenario.agents.len(), scenario.targets.count());
    let mut rng = seeded_rng(seed);
    let mut x = scenario.agents.clone();
    let mut dual = DualState::constant(n, m, p.lambda_init, p.nu_init);
    let mut ref_dual = dual.clone();
    let cap = p.speed_cap_sq.sqrt();

    let mut trace = TrackTrace {
        positions: Vec::with_capacity(horizon + 1),
        duals: Vec::with_capacity(horizon + 1),
        targets: Vec::with_capacity(horizon),
        coverage: Vec::with_capacity(horizon),
        clipped: Vec::with_capacity(horizon),
        residual: Vec::with_capacity(horizon),
        residual_literal: Vec::with_capacity(horizon),
        tracking_error: (reference_iters > 0).then(|| Vec::with_capacity(horizon)),
    };
    let mut next = Vec::with_capacity(n);

    for k in 1..=horizon {
        let truth = scenario.targets.at(k);
        let est = estimate_targets(truth, p.target_noise, &mut rng);
        let w = sigmoid_weights(&x, &est, p.theta, p.eps_w);
        primal_solve_into(&dual, &x, &est, &w, p.gamma, &mut next)?;
        if next.iter().any(|q| !q.x.is_finite() || !q.y.is_finite()) {
            return Err(Error::NonFinite { slot: k, what: "agent position".into() });
        }
        let max_norm = |g: Vec<Point>| g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        trace.residual.push(max_norm(lagrangian_gradient(&next, &dual, &x, &est, &w, p.gamma, 1.0)));
        trace
            .residual_literal
            .push(max_norm(lagrangian_gradient(&next, &dual, &x, &est, &w, p.gamma, 2.0)));

        if let Some(errs) = trace.tracking_error.as_mut() {
            let (xr, dr) = reference_solution(&x, truth, &ref_dual, p, reference_iters)?;
            ref_dual = dr;
            errs.push(next.iter().zip(&xr).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt());
        }

        let (gl, gn) = dual_gradients(&next, &x, &est, &w, p.speed_cap_sq, p.eta);
        let new_dual = dual_update(&dual, (&gl, &gn), p.alpha_lambda, p.alpha_nu, p.sign);

        let mut clipped = 0;
        if p.clip_speed {
            for (q, a) in next.iter_mut().zip(&x) {
                let step = *q - a;
                let len = step.norm();
                if len > cap {
                    *q = a + step * (cap / len);
                    clipped += 1;
                }
            }
        }

        trace.coverage.push(coverage_counts(&x, truth, p.eta));
        trace.targets.push(truth.to_vec());
        trace.clipped.push(clipped);
        trace.positions.push(std::mem::replace(&mut x, next.clone()));
        trace.duals.push(std::mem::replace(&mut dual, new_dual));
    }
    trace.positions.push(x);
    trace.duals.push(dual);
    Ok(trace)
}
