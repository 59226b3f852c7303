//! Online matrix completion with a proximal gradient step.
//!
//! Each window reveals a masked ratings matrix `M_k` (mask `J_k`); the
//! estimate is updated by
//!
//! ```text
//! X_{k+1} = svt(X_k + step * J_k .* (M_k - X_k), lambda)
//! ```
//!
//! where `svt` soft-thresholds singular values.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{fmt_f64, seeded_rng, Matrix};

/// Singular value thresholding: `U diag(max(s - lambda, 0)) V'`.
pub fn svt(y: &Matrix, lambda: f64) -> Result<Matrix> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("threshold must be >= 0"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            slot: 0,
            what: "matrix passed to svt".into(),
        });
    }
    if y.is_empty() {
        return Ok(y.clone());
    }
    let mut svd = y.clone().svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = (*s - lambda).max(0.0);
    }
    svd.recompose().map_err(|e| Error::Singular(e.to_string()))
}

pub fn nuclear_norm(x: &Matrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.singular_values().sum()
}

/// Number of singular values above `tol`.
pub fn numerical_rank(x: &Matrix, tol: f64) -> usize {
    if x.is_empty() {
        return 0;
    }
    x.singular_values().iter().filter(|s| **s > tol).count()
}

/// One window of revealed ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsWindow {
    /// Ratings, zero where unobserved.
    pub ratings: Matrix,
    /// 1 where a rating was observed, 0 elsewhere.
    pub mask: Matrix,
    pub index: usize,
    pub span_days: f64,
}

impl RatingsWindow {
    pub fn new(ratings: Matrix, mask: Matrix, index: usize, span_days: f64) -> Result<Self> {
        if ratings.shape() != mask.shape() {
            return Err(Error::invalid("ratings and mask shapes differ"));
        }
        if mask.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return Err(Error::invalid("mask entries must be 0 or 1"));
        }
        let ratings = ratings.component_mul(&mask);
        Ok(RatingsWindow {
            ratings,
            mask,
            index,
            span_days,
        })
    }

    pub fn observed(&self) -> usize {
        self.mask.iter().filter(|v| **v != 0.0).count()
    }
}

fn check_shapes(x: &Matrix, w: &RatingsWindow) -> Result<()> {
    if x.shape() != w.ratings.shape() {
        return Err(Error::invalid(format!(
            "estimate is {:?}, window is {:?}",
            x.shape(),
            w.ratings.shape()
        )));
    }
    Ok(())
}

/// `0.5 ||J .* (X - M)||_F^2`.
pub fn masked_loss(x: &Matrix, w: &RatingsWindow) -> f64 {
    0.5 * (x - &w.ratings).component_mul(&w.mask).norm_squared()
}

/// Gradient of [`masked_loss`]: `J .* (X - M)`.
pub fn masked_loss_gradient(x: &Matrix, w: &RatingsWindow) -> Matrix {
    (x - &w.ratings).component_mul(&w.mask)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxConfig {
    pub step: f64,
    /// Nuclear-norm weight; `None` picks [`default_lambda`] from the first window.
    pub lambda: Option<f64>,
    /// Updates per window.
    pub repeats: usize,
}

impl Default for ProxConfig {
    fn default() -> Self {
        ProxConfig {
            step: 1.0,
            lambda: None,
            repeats: 1,
        }
    }
}

/// `0.1 * sigma_max(J_1 .* M_1)`.
pub fn default_lambda(first: &RatingsWindow) -> f64 {
    let masked = first.ratings.component_mul(&first.mask);
    if masked.is_empty() {
        return 0.0;
    }
    0.1 * masked.singular_values().max()
}

pub fn prox_ogd_step(x: &Matrix, w: &RatingsWindow, step: f64, lambda: f64) -> Result<Matrix> {
    check_shapes(x, w)?;
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    svt(&(x - masked_loss_gradient(x, w) * step), lambda)
}

/// Gradient-proportional error factor `step L / (1 - step L)` of the
/// proximal step viewed as an inexact gradient step.
pub fn proximal_error_factor(step: f64, lipschitz: f64) -> Result<f64> {
    let p = step * lipschitz;
    if !(p >= 0.0) {
        return Err(Error::invalid("step and Lipschitz constant must be >= 0"));
    }
    if p >= 1.0 {
        return Err(Error::infeasible(format!("step * L = {p} must be below 1")));
    }
    Ok(p / (1.0 - p))
}

/// RMSE over observed entries.
pub fn rmse(x: &Matrix, m: &Matrix, mask: &Matrix) -> Result<f64> {
    if x.shape() != m.shape() || m.shape() != mask.shape() {
        return Err(Error::invalid("rmse: shape mismatch"));
    }
    let count: f64 = mask.sum();
    if count == 0.0 {
        return Err(Error::invalid("rmse: empty mask"));
    }
    Ok(((x - m).component_mul(mask).norm_squared() / count).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct McTrace {
    pub lambda: f64,
    /// RMSE of the estimate on each window's ratings, measured before the
    /// window is used for the update.
    pub rmse: Vec<f64>,
    /// Rank and nuclear norm of that same estimate.
    pub rank: Vec<usize>,
    pub nuclear: Vec<f64>,
    /// `masked_loss + lambda * nuclear_norm` of the estimate.
    pub objective: Vec<f64>,
    pub estimate: Matrix,
}

impl McTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window,rmse,rank,nuclear_norm\n");
        for k in 0..self.rmse.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                k + 1,
                fmt_f64(self.rmse[k]),
                self.rank[k],
                fmt_f64(self.nuclear[k])
            ));
        }
        out
    }
}

pub fn run_mc_tracking(windows: &[RatingsWindow], config: &ProxConfig) -> Result<McTrace> {
    let first = windows.first().ok_or_else(|| Error::invalid("no windows"))?;
    let lambda = config.lambda.unwrap_or_else(|| default_lambda(first));
    let mut x = Matrix::zeros(first.ratings.nrows(), first.ratings.ncols());
    let mut trace = McTrace {
        lambda,
        rmse: Vec::with_capacity(windows.len()),
        rank: Vec::with_capacity(windows.len()),
        nuclear: Vec::with_capacity(windows.len()),
        objective: Vec::with_capacity(windows.len()),
        estimate: Matrix::zeros(0, 0),
    };
    for (k, w) in windows.iter().enumerate() {
        check_shapes(&x, w)?;
        let nuc = nuclear_norm(&x);
        trace.rmse.push(rmse(&x, &w.ratings, &w.mask).unwrap_or(f64::NAN));
        trace.rank.push(numerical_rank(&x, 1e-8));
        trace.nuclear.push(nuc);
        trace.objective.push(masked_loss(&x, w) + lambda * nuc);
        for _ in 0..config.repeats.max(1) {
            x = prox_ogd_step(&x, w, config.step, lambda).map_err(|e| match e {
                Error::NonFinite { what, .. } => Error::NonFinite { slot: k + 1, what },
                other => other,
            })?;
        }
    }
    trace.estimate = x;
    Ok(trace)
}

/// Drifting low-rank stream: `M_k = (A + drift k dA)(B + drift k dB)'`
/// with a fresh Bernoulli(`observed`) mask per window.
pub fn synthetic_stream(
    rows: usize,
    cols: usize,
    rank: usize,
    drift: f64,
    observed: f64,
    windows: usize,
    seed: u64,
) -> Result<Vec<RatingsWindow>> {
    if !(0.0..=1.0).contains(&observed) {
        return Err(Error::invalid("observed fraction must lie in [0, 1]"));
    }
    let mut rng = seeded_rng(seed);
    let mut gauss = |r: usize, c: usize| Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (a, da, b, db) = (gauss(rows, rank), gauss(rows, rank), gauss(cols, rank), gauss(cols, rank));
    (0..windows)
        .map(|k| {
            let t = drift * k as f64;
            let m = (&a + &da * t) * (&b + &db * t).transpose();
            let mask = Matrix::from_fn(rows, cols, |_, _| if rng.random::<f64>() < observed { 1.0 } else { 0.0 });
            RatingsWindow::new(m, mask, k + 1, 0.0)
        })
        .collect()
}

/// One `UserID::MovieID::Rating::Timestamp` record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: u64,
    pub item: u64,
    pub value: f64,
    pub timestamp: i64,
}

/// Parses `::`-delimited ratings, skipping blank lines.
pub fn parse_ratings(text: &str) -> Result<Vec<Rating>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(bad("expected UserID::MovieID::Rating::Timestamp"));
        }
        let value: f64 = fields[2].trim().parse().map_err(|_| bad("bad rating"))?;
        if !value.is_finite() {
            return Err(bad("bad rating"));
        }
        out.push(Rating {
            user: fields[0].trim().parse().map_err(|_| bad("bad user id"))?,
            item: fields[1].trim().parse().map_err(|_| bad("bad movie id"))?,
            value,
            timestamp: fields[3].trim().parse().map_err(|_| bad("bad timestamp"))?,
        });
    }
    Ok(out)
}

/// The `cap` most frequent ids (ties to the smaller id), indexed in
/// ascending id order.
fn top_ids(ids: impl Iterator<Item = u64>, cap: usize) -> HashMap<u64, usize> {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for id in ids {
        *counts.entry(id).or_default() += 1;
    }
    let mut ranked: Vec<(u64, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(cap);
    let mut kept: Vec<u64> = ranked.into_iter().map(|(id, _)| id).collect();
    kept.sort_unstable();
    kept.into_iter().enumerate().map(|(i, id)| (id, i)).collect()
}

/// Splits ratings into consecutive windows of `window_days`, starting at the
/// earliest timestamp, restricted to the `max_users` most active users and
/// `max_items` most rated items. Windows without any kept rating are dropped.
pub fn windows_from_ratings(
    ratings: &[Rating],
    window_days: f64,
    max_users: usize,
    max_items: usize,
) -> Result<Vec<RatingsWindow>> {
    if !(window_days > 0.0) {
        return Err(Error::invalid("window length must be positive"));
    }
    if ratings.is_empty() {
        return Ok(Vec::new());
    }
    let users = top_ids(ratings.iter().map(|r| r.user), max_users);
    let items = top_ids(ratings.iter().map(|r| r.item), max_items);
    let t0 = ratings.iter().map(|r| r.timestamp).min().unwrap();
    let span = window_days * 86_400.0;
    let mut grouped: BTreeMap<usize, Vec<&Rating>> = BTreeMap::new();
    for r in ratings {
        if users.contains_key(&r.user) && items.contains_key(&r.item) {
            let w = ((r.timestamp - t0) as f64 / span).floor() as usize;
            grouped.entry(w).or_default().push(r);
        }
    }
    grouped
        .into_iter()
        .map(|(w, recs)| {
            let mut m = Matrix::zeros(users.len(), items.len());
            let mut j = Matrix::zeros(users.len(), items.len());
            for r in recs {
                let (u, i) = (users[&r.user], items[&r.item]);
                m[(u, i)] = r.value;
                j[(u, i)] = 1.0;
            }
            RatingsWindow::new(m, j, w + 1, window_days)
        })
        .collect()
}

pub fn ingest_ratings(
    path: &Path,
    window_days: f64,
    max_users: usize,
    max_items: usize,
) -> Result<Vec<RatingsWindow>> {
    let text = std::fs::read_to_string(path)?;
    windows_from_ratings(&parse_ratings(&text)?, window_days, max_users, max_items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(r: usize, c: usize, rng: &mut crate::Rng) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn prox_objective(x: &Matrix, y: &Matrix, lambda: f64) -> f64 {
        lambda * nuclear_norm(x) + 0.5 * (x - y).norm_squared()
    }

    #[test]
    fn zero_threshold_is_identity() {
        let y = gaussian(5, 4, &mut seeded_rng(1));
        assert!((svt(&y, 0.0).unwrap() - &y).norm() < 1e-10);
    }

    #[test]
    fn diagonal_case() {
        let y = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let x = svt(&y, 2.0).unwrap();
        assert!((x - Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn output_minimizes_prox_objective() {
        let mut rng = seeded_rng(2);
        let y = gaussian(8, 6, &mut rng);
        let x = svt(&y, 0.7).unwrap();
        let best = prox_objective(&x, &y, 0.7);
        for _ in 0..100 {
            let d = gaussian(8, 6, &mut rng);
            let d = &d * (1e-2 / d.norm());
            assert!(prox_objective(&(&x + d), &y, 0.7) >= best - 1e-12);
        }
        assert!((nuclear_norm(&x) - y.singular_values().map(|s| (s - 0.7).max(0.0)).sum()).abs() < 1e-10);
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut y = Matrix::zeros(2, 2);
        y[(0, 1)] = f64::NAN;
        assert!(svt(&y, 1.0).is_err());
    }

    fn window(m: Matrix, mask: Matrix) -> RatingsWindow {
        RatingsWindow::new(m, mask, 1, 30.0).unwrap()
    }

    #[test]
    fn empty_mask_keeps_estimate() {
        let mut rng = seeded_rng(3);
        let x = gaussian(4, 3, &mut rng);
        let w = window(gaussian(4, 3, &mut rng), Matrix::zeros(4, 3));
        assert!((prox_ogd_step(&x, &w, 1.0, 0.0).unwrap() - &x).norm() < 1e-10);
    }

    #[test]
    fn full_mask_unit_step_lands_on_data() {
        let mut rng = seeded_rng(4);
        let m = gaussian(4, 3, &mut rng);
        let w = window(m.clone(), Matrix::from_element(4, 3, 1.0));
        let next = prox_ogd_step(&gaussian(4, 3, &mut rng), &w, 1.0, 0.0).unwrap();
        assert!((next - m).norm() < 1e-10);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let w = window(Matrix::zeros(2, 2), Matrix::zeros(2, 2));
        assert!(prox_ogd_step(&Matrix::zeros(3, 2), &w, 1.0, 0.0).is_err());
    }

    #[test]
    fn error_factor_values() {
        assert_eq!(proximal_error_factor(0.0, 3.0).unwrap(), 0.0);
        assert!((proximal_error_factor(0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((proximal_error_factor(0.1, 1.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(matches!(proximal_error_factor(1.0, 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rmse_values() {
        let m = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let ones = Matrix::from_element(1, 3, 1.0);
        assert_eq!(rmse(&m, &m, &ones).unwrap(), 0.0);
        let single = Matrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]);
        let x = Matrix::from_row_slice(1, 3, &[9.0, 4.0, -5.0]);
        assert_eq!(rmse(&x, &m, &single).unwrap(), 2.0);
        let two = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let x = Matrix::from_row_slice(1, 3, &[4.0, 6.0, 0.0]);
        assert!((rmse(&x, &m, &two).unwrap() - (12.5f64).sqrt()).abs() < 1e-15);
        assert!(rmse(&x, &m, &Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn repeated_window_interpolates_observed_entries() {
        let stream = synthetic_stream(10, 8, 2, 0.0, 0.5, 1, 5).unwrap();
        let cfg = ProxConfig {
            step: 1.0,
            lambda: Some(0.0),
            repeats: 200,
        };
        let tr = run_mc_tracking(&stream, &cfg).unwrap();
        let w = &stream[0];
        assert!(rmse(&tr.estimate, &w.ratings, &w.mask).unwrap() < 1e-10);
    }

    #[test]
    fn repeated_fixed_window_decreases_rmse() {
        let w = synthetic_stream(20, 20, 2, 0.0, 0.4, 1, 6).unwrap().remove(0);
        let lambda = default_lambda(&w);
        let mut x = Matrix::zeros(20, 20);
        let mut prev = rmse(&x, &w.ratings, &w.mask).unwrap();
        for _ in 0..10 {
            x = prox_ogd_step(&x, &w, 1.0, lambda).unwrap();
            let now = rmse(&x, &w.ratings, &w.mask).unwrap();
            assert!(now < prev, "{now} !< {prev}");
            prev = now;
        }
    }

    #[test]
    fn parse_error_names_line() {
        let text = "1::10::4::100\n2::11::3::200\n3::12::five::300\n4::13::2::400\n5::14::1::500\n";
        assert!(matches!(parse_ratings(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn empty_input_gives_no_windows() {
        assert!(windows_from_ratings(&parse_ratings("").unwrap(), 30.0, 10, 10).unwrap().is_empty());
    }

    #[test]
    fn same_pair_in_two_windows() {
        let day = 86_400;
        let text = format!("7::3::4::0\n7::3::2::{}\n", 45 * day);
        let windows = windows_from_ratings(&parse_ratings(&text).unwrap(), 30.0, 10, 10).unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].ratings[(0, 0)], 4.0);
        assert_eq!(windows[1].ratings[(0, 0)], 2.0);
        assert!(windows.iter().all(|w| w.mask[(0, 0)] == 1.0));
    }

    #[test]
    fn caps_keep_most_active_ids_with_stable_indices() {
        let text = "1::1::5::0\n2::1::4::0\n2::2::3::0\n3::2::1::0\n2::3::2::3000000\n";
        let windows = windows_from_ratings(&parse_ratings(text).unwrap(), 30.0, 2, 2).unwrap();
        // users 2 (3 ratings) and 1 (tie with 3, smaller id); items 1 and 2
        assert_eq!(windows.len(), 1);
        let w = &windows[0];
        assert_eq!(w.ratings.shape(), (2, 2));
        assert_eq!(w.ratings[(0, 0)], 5.0);
        assert_eq!(w.ratings[(1, 1)], 3.0);
        assert_eq!(w.observed(), 3);
    }

    #[test]
    fn csv_header() {
        let stream = synthetic_stream(6, 5, 1, 0.01, 0.5, 3, 1).unwrap();
        let tr = run_mc_tracking(&stream, &ProxConfig::default()).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("window,rmse,rank,nuclear_norm\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
