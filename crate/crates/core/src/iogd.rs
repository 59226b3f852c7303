//! The projected inexact gradient iteration and its driver.

use crate::analysis::{alpha_interval, TheoryParams};
use crate::error::{check_dim, Error, Result};
use crate::feasible::FeasibleSet;
use crate::noise::ErrorModel;
use crate::problem::{ProblemSequence, SlotProblem};
use crate::trace::RunTrace;
use crate::{seeded_rng, Rng, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct IogdConfig {
    pub alpha: f64,
    pub horizon: usize,
    pub seed: u64,
    pub feasible: FeasibleSet,
    /// Starting action; zeros projected onto the feasible set when absent.
    pub x1: Option<Vector>,
    /// Problem constants used only to flag whether `alpha` is admissible.
    pub theory: Option<TheoryParams>,
}

impl IogdConfig {
    pub fn new(alpha: f64, horizon: usize, seed: u64) -> Self {
        IogdConfig {
            alpha,
            horizon,
            seed,
            feasible: FeasibleSet::Unbounded,
            x1: None,
            theory: None,
        }
    }

    pub fn with_feasible(mut self, set: FeasibleSet) -> Self {
        self.feasible = set;
        self
    }

    pub fn with_x1(mut self, x1: Vector) -> Self {
        self.x1 = Some(x1);
        self
    }

    pub fn with_theory(mut self, theory: TheoryParams) -> Self {
        self.theory = Some(theory);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid("step size alpha must be positive and finite"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon K must be at least 1"));
        }
        Ok(())
    }

    fn initial_point(&self, dim: usize) -> Result<Vector> {
        let start = match &self.x1 {
            Some(x) => {
                check_dim(dim, x.len())?;
                x.clone()
            }
            None => Vector::zeros(dim),
        };
        self.feasible.project(&start)
    }
}

/// What a gradient oracle returns for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub gradient: Vector,
    /// Additive error level `eps_k` the oracle claims for this draw.
    pub eps: f64,
    pub sample_size: Option<usize>,
}

/// Source of inexact gradients.
pub trait GradientOracle<S: SlotProblem + ?Sized> {
    fn observe(&mut self, slot: &S, k: usize, x: &Vector, exact: &Vector) -> Result<Observation>;
}

/// An [`ErrorModel`] with its own random stream.
#[derive(Debug, Clone)]
pub struct NoisyGradient {
    pub model: ErrorModel,
    rng: Rng,
}

impl NoisyGradient {
    pub fn new(model: ErrorModel, seed: u64) -> Self {
        NoisyGradient {
            model,
            rng: seeded_rng(seed),
        }
    }
}

impl<S: SlotProblem + ?Sized> GradientOracle<S> for NoisyGradient {
    fn observe(&mut self, _slot: &S, k: usize, _x: &Vector, exact: &Vector) -> Result<Observation> {
        let (gradient, eps) = self.model.apply(exact, k, &mut self.rng);
        Ok(Observation {
            gradient,
            eps,
            sample_size: None,
        })
    }
}

/// `P_X[x - alpha * grad]`. `slot` only labels errors.
pub fn iogd_step(x: &Vector, grad: &Vector, config: &IogdConfig, slot: usize) -> Result<Vector> {
    check_dim(x.len(), grad.len())?;
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            slot,
            what: "gradient".into(),
        });
    }
    let next = config.feasible.project(&(x - grad * config.alpha))?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            slot,
            what: "iterate".into(),
        });
    }
    Ok(next)
}

/// Runs IOGD with errors drawn from `model`, seeded by `config.seed`.
pub fn run_iogd<P: ProblemSequence>(problem: &P, model: &ErrorModel, config: &IogdConfig) -> Result<RunTrace> {
    let mut oracle = NoisyGradient::new(model.clone(), config.seed);
    run_with_oracle(problem, &mut oracle, config)
}

/// Runs IOGD with an arbitrary gradient oracle.
pub fn run_with_oracle<P, O>(problem: &P, oracle: &mut O, config: &IogdConfig) -> Result<RunTrace>
where
    P: ProblemSequence,
    O: for<'a> GradientOracle<P::Slot<'a>>,
{
    config.validate()?;
    let k_max = config.horizon;
    if let Some(h) = problem.horizon() {
        if h < k_max {
            return Err(Error::invalid(format!("problem has {h} slots, horizon asks for {k_max}")));
        }
    }
    let dim = problem.dim();
    let mut x = config.initial_point(dim)?;

    let alpha_admissible = config.theory.as_ref().map(|t| match alpha_interval(t) {
        Ok((lo, hi)) => config.alpha > lo && config.alpha < hi,
        Err(_) => false,
    });

    let mut actions = Vec::with_capacity(k_max);
    let mut cost = Vec::with_capacity(k_max);
    let mut grad_norm = Vec::with_capacity(k_max);
    let mut err_norm = Vec::with_capacity(k_max);
    let mut eps = Vec::with_capacity(k_max);
    let mut error_cum = Vec::with_capacity(k_max);
    let mut opt_cost = Some(Vec::with_capacity(k_max));
    let mut dist = Some(Vec::with_capacity(k_max));
    let mut dist_after = Some(Vec::with_capacity(k_max));
    let mut regret_cum: Option<Vec<f64>> = Some(Vec::with_capacity(k_max));
    let mut path_cum: Option<Vec<f64>> = Some(Vec::with_capacity(k_max));
    let mut sample_sizes = Some(Vec::with_capacity(k_max));
    let mut prev_minimizer: Option<Vector> = None;
    let mut e_total = 0.0;

    for k in 1..=k_max {
        let slot = problem.slot(k)?;
        let f = slot.cost(&x);
        if !f.is_finite() {
            return Err(Error::NonFinite { slot: k, what: "cost".into() });
        }
        let g = slot.gradient(&x);
        check_dim(dim, g.len())?;
        let obs = oracle.observe(&slot, k, &x, &g)?;
        let next = iogd_step(&x, &obs.gradient, config, k)?;

        e_total += obs.eps;
        grad_norm.push(g.norm());
        err_norm.push((&obs.gradient - &g).norm());
        eps.push(obs.eps);
        error_cum.push(e_total);
        cost.push(f);
        match (&mut sample_sizes, obs.sample_size) {
            (Some(s), Some(n)) => s.push(n),
            _ => sample_sizes = None,
        }

        match (slot.optimal_cost(), &mut opt_cost) {
            (Some(fs), Some(o)) => {
                o.push(fs);
                let r = regret_cum.as_mut().unwrap();
                let prev = r.last().copied().unwrap_or(0.0);
                r.push(prev + (f - fs));
            }
            _ => {
                opt_cost = None;
                regret_cum = None;
            }
        }
        match (slot.distance_to_minimizers(&x), slot.distance_to_minimizers(&next)) {
            (Some(d0), Some(d1)) if dist.is_some() => {
                dist.as_mut().unwrap().push(d0);
                dist_after.as_mut().unwrap().push(d1);
            }
            _ => {
                dist = None;
                dist_after = None;
            }
        }
        match (slot.minimizer(), &mut path_cum) {
            (Some(m), Some(p)) => {
                let step = prev_minimizer.as_ref().map_or(0.0, |pm| (&m - pm).norm());
                let prev = p.last().copied().unwrap_or(0.0);
                p.push(prev + step);
                prev_minimizer = Some(m);
            }
            _ => path_cum = None,
        }

        actions.push(std::mem::replace(&mut x, next));
    }

    Ok(RunTrace {
        alpha: config.alpha,
        actions,
        final_action: x,
        cost,
        opt_cost,
        grad_norm,
        err_norm,
        eps,
        dist,
        dist_after,
        regret_cum,
        path_cum,
        error_cum,
        sample_sizes,
        alpha_admissible,
    })
}
