//! Per-slot records of an IOGD run.

use crate::{fmt_f64, Vector};

/// Everything recorded while running IOGD for `K` slots. Arrays are indexed
/// by slot `k - 1`. Fields that need the minimizer are `None` when the
/// problem does not expose it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub alpha: f64,
    /// `x_1 .. x_K`.
    pub actions: Vec<Vector>,
    /// `x_{K+1}`, the action prepared for the slot after the horizon.
    pub final_action: Vector,
    pub cost: Vec<f64>,
    pub opt_cost: Option<Vec<f64>>,
    pub grad_norm: Vec<f64>,
    pub err_norm: Vec<f64>,
    pub eps: Vec<f64>,
    /// `dist(x_k, X_k*)`.
    pub dist: Option<Vec<f64>>,
    /// `dist(x_{k+1}, X_k*)`: distance after the step, measured against the
    /// slot the step was taken on.
    pub dist_after: Option<Vec<f64>>,
    pub regret_cum: Option<Vec<f64>>,
    pub path_cum: Option<Vec<f64>>,
    pub error_cum: Vec<f64>,
    /// Realized gradient sample size per slot, for sampled oracles.
    pub sample_sizes: Option<Vec<usize>>,
    /// Whether `alpha` lies in the admissible interval of the supplied
    /// theory parameters; `None` when no parameters were given.
    pub alpha_admissible: Option<bool>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.regret_cum.as_ref().and_then(|r| r.last().copied())
    }

    pub const CSV_HEADER: &'static str =
        "k,cost,opt_cost,regret_cum,dist,grad_norm,err_norm,eps_k,W_cum,E_cum";

    /// One row per slot; absent fields are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| fmt_f64(v[i])).unwrap_or_default();
        let mut out = String::with_capacity(self.len() * 220);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let row = [
                (i + 1).to_string(),
                fmt_f64(self.cost[i]),
                opt(&self.opt_cost, i),
                opt(&self.regret_cum, i),
                opt(&self.dist, i),
                fmt_f64(self.grad_norm[i]),
                fmt_f64(self.err_norm[i]),
                fmt_f64(self.eps[i]),
                opt(&self.path_cum, i),
                fmt_f64(self.error_cum[i]),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
