//! Theory constants, admissible step sizes, bounds and trace diagnostics.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::noise::ErrorRegime;
use crate::problem::SlotProblem;
use crate::{fmt_f64, Rng, Vector};

/// Problem-level constants: QG modulus `mu`, gradient Lipschitz constant,
/// proportional error factor `nu`, singular-value ratio `chi` and the error
/// regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub mu: f64,
    pub lipschitz: f64,
    pub nu: f64,
    pub chi: f64,
    pub regime: ErrorRegime,
}

impl TheoryParams {
    pub fn new(mu: f64, lipschitz: f64, nu: f64, chi: f64, regime: ErrorRegime) -> Self {
        TheoryParams {
            mu,
            lipschitz,
            nu,
            chi,
            regime,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.lipschitz > 0.0) {
            return Err(Error::invalid("mu and L must be positive"));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::invalid("nu must be finite and >= 0"));
        }
        if !(self.chi > 0.0 && self.chi <= 1.0) {
            return Err(Error::invalid("chi must lie in (0, 1]"));
        }
        Ok(())
    }

    /// The discriminant whose square root sets the width of the
    /// admissible step-size interval.
    pub fn varpi_sq(&self) -> f64 {
        let (mu, l, nu, chi) = (self.mu, self.lipschitz, self.nu, self.chi);
        match self.regime {
            ErrorRegime::General => {
                (mu - 2.0 * nu * l).powi(2) - 4.0 * mu * l * (1.0 + nu).powi(2) * (1.0 - chi * chi)
            }
            ErrorRegime::WhiteNoise => mu * mu - 4.0 * mu * l * (1.0 + nu * nu) * (1.0 - chi * chi),
        }
    }
}

/// Open interval of step sizes for which the contraction factor is below
/// `chi`. Lower ends below zero are clamped to zero.
pub fn alpha_interval(p: &TheoryParams) -> Result<(f64, f64)> {
    p.validate()?;
    let (mu, l, nu) = (p.mu, p.lipschitz, p.nu);
    let w2 = p.varpi_sq();
    if w2 < 0.0 {
        return Err(Error::infeasible(format!("negative discriminant {w2}")));
    }
    let w = w2.sqrt();
    let (center, denom) = match p.regime {
        ErrorRegime::General => (mu - 2.0 * nu * l, 2.0 * mu * l * (1.0 + nu).powi(2)),
        ErrorRegime::WhiteNoise => (mu, 2.0 * mu * l * (1.0 + nu * nu)),
    };
    let lower = ((center - w) / denom).max(0.0);
    let upper = (center + w).min(2.0 * mu) / denom;
    if upper <= lower || upper <= 0.0 {
        return Err(Error::infeasible(format!(
            "empty step-size interval ({lower}, {upper})"
        )));
    }
    Ok((lower, upper))
}

/// Constants derived from [`TheoryParams`] at a given step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub params: TheoryParams,
    pub alpha: f64,
    /// Contraction factor.
    pub ell: f64,
    /// Error amplification factor.
    pub zeta: f64,
    /// Descent coefficient for the compact-domain analysis.
    pub xi: f64,
}

pub fn constants(p: &TheoryParams, alpha: f64) -> Result<TheoryConstants> {
    p.validate()?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha must be positive and finite"));
    }
    let (mu, l, nu) = (p.mu, p.lipschitz, p.nu);
    let d = p.regime.indicator();
    let ell_sq = 1.0 - mu * alpha * (1.0 - l * alpha * (1.0 + nu * nu + 2.0 * nu * d)) + 2.0 * alpha * nu * l * d;
    if !(ell_sq > 0.0 && ell_sq < 1.0) {
        return Err(Error::infeasible(format!(
            "contraction factor squared {ell_sq} outside (0, 1) at alpha = {alpha}"
        )));
    }
    let ell = ell_sq.sqrt();
    let zeta = alpha + d * alpha * (1.0 + alpha * l - ell) / ell;
    let xi = 2.0 * alpha * (1.0 - alpha * l * (1.0 + nu * nu + d * (1.0 - nu * nu)));
    Ok(TheoryConstants {
        params: *p,
        alpha,
        ell,
        zeta,
        xi,
    })
}

impl TheoryConstants {
    fn gap(&self) -> Result<f64> {
        let gap = self.params.chi - self.ell;
        if gap <= 0.0 {
            return Err(Error::infeasible(format!(
                "contraction factor {} not below chi {}",
                self.ell, self.params.chi
            )));
        }
        Ok(gap)
    }

    /// Gradient-norm bound `G = L (dist_1 + (zeta eps + sigma) / (chi - ell))`.
    pub fn gradient_bound(&self, dist1: f64, eps: f64, sigma: f64) -> Result<f64> {
        Ok(self.params.lipschitz * (dist1 + (self.zeta * eps + sigma) / self.gap()?))
    }

    /// Per-slot error energy `s_k^2` on a domain of diameter `radius`.
    pub fn error_energy(&self, eps_k: f64, radius: f64) -> f64 {
        let d = self.params.regime.indicator();
        let a = self.alpha;
        a * a * eps_k * eps_k * (d + 1.0) + 2.0 * a * eps_k * radius * d
    }

    /// Limit of [`tracking_bound`] as `k` grows.
    pub fn tracking_limit(&self, sigma: f64, eps: f64) -> Result<f64> {
        Ok((sigma + self.zeta * eps) / self.gap()?)
    }
}

/// Bound on `dist(x_{k+1}, X*_{k+1})` after `k` steps, for minimizer drift
/// at most `sigma` per slot and error level at most `eps`.
pub fn tracking_bound(k: usize, dist1: f64, sigma: f64, eps: f64, c: &TheoryConstants) -> Result<f64> {
    c.gap()?;
    let chi = c.params.chi;
    let rate = c.ell / chi;
    let rk = rate.powi(k as i32);
    Ok(rk * dist1 + (1.0 - rk) / (1.0 - rate) * (sigma + c.zeta * eps) / chi)
}

/// Inputs to the explicit dynamic-regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretInputs {
    pub path_length: f64,
    pub error_sum: f64,
    /// Distance bound used inside the gradient bound.
    pub dist1: f64,
    /// `||x_1 - x_1*||`.
    pub x1_gap: f64,
    /// Upper bound on every `eps_k`.
    pub eps: f64,
    /// Upper bound on the per-slot minimizer drift.
    pub sigma: f64,
}

/// `G (||x_1 - x_1*|| + W_K + zeta E_K) / (chi - ell)` with `G` from
/// [`TheoryConstants::gradient_bound`].
pub fn regret_budget(inputs: &RegretInputs, c: &TheoryConstants) -> Result<f64> {
    let g = c.gradient_bound(inputs.dist1, inputs.eps, inputs.sigma)?;
    Ok(g * (inputs.x1_gap + inputs.path_length + c.zeta * inputs.error_sum) / c.gap()?)
}

/// `sum_{k>=2} ||x_k* - x_{k-1}*||`.
pub fn path_length(trajectory: &[Vector]) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let dim = trajectory[0].len();
    let mut total = 0.0;
    for w in trajectory.windows(2) {
        check_dim(dim, w[1].len())?;
        total += (&w[1] - &w[0]).norm();
    }
    Ok(total)
}

/// `sum_k (f_k(x_k) - f_k(x_k*))`.
pub fn dynamic_regret(costs: &[f64], optimal_costs: &[f64]) -> Result<f64> {
    check_dim(costs.len(), optimal_costs.len())?;
    Ok(costs.iter().zip(optimal_costs).map(|(c, o)| c - o).sum())
}

/// Least-squares slope of `log(value)` against `log(K)`.
pub fn sublinearity_slope(ks: &[f64], values: &[f64]) -> Result<f64> {
    check_dim(ks.len(), values.len())?;
    if ks.len() < 4 {
        return Err(Error::invalid("need at least 4 grid points"));
    }
    if values.iter().chain(ks).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("grid and values must be positive"));
    }
    let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Smallest observed `2 (f(x) - f*) / dist(x, X*)^2` over Gaussian samples
/// centred on the minimizer set. Every sample ratio is at least the true
/// modulus, so the estimate approaches it from above.
pub fn qg_constant_estimate<S: SlotProblem + ?Sized>(slot: &S, samples: usize, rng: &mut Rng) -> Result<f64> {
    let dim = slot.dim();
    let base = slot
        .project_minimizers(&Vector::zeros(dim))
        .ok_or_else(|| Error::invalid("problem does not expose its minimizer set"))?;
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let x = &base + Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let p = slot.project_minimizers(&x).expect("projector disappeared");
        let d2 = (&x - &p).norm_squared();
        if d2 < 1e-24 {
            continue;
        }
        best = best.min(2.0 * (slot.cost(&x) - slot.cost(&p)) / d2);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::invalid("no sample off the minimizer set"))
    }
}

/// One comparison between an empirical quantity and its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    /// Records a row that passes when `empirical <= bound + tolerance`.
    pub fn push(&mut self, k: usize, empirical: f64, bound: f64, tolerance: f64) {
        self.rows.push(BoundRow {
            k,
            empirical,
            bound,
            slack: bound - empirical,
            pass: empirical <= bound + tolerance,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,empirical,bound,slack,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.k,
                fmt_f64(r.empirical),
                fmt_f64(r.bound),
                fmt_f64(r.slack),
                r.pass
            ));
        }
        out
    }
}
