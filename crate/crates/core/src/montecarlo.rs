//! Seeded Monte-Carlo helpers.
//!
//! Runs are independent and keyed by seed; results come back in seed order
//! whether or not the `parallel` feature is enabled, so statistics are
//! reproducible bit for bit.

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn upper(&self, z: f64) -> f64 {
        self.mean + z * self.se
    }
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    if n == 0 {
        return MeanSe { mean: f64::NAN, se: f64::NAN, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    MeanSe { mean, se, n }
}

/// Per-column statistics over equally long rows (one row per seed).
pub fn columnwise(rows: &[Vec<f64>]) -> Vec<MeanSe> {
    let width = rows.iter().map(Vec::len).min().unwrap_or(0);
    let mut column = Vec::with_capacity(rows.len());
    (0..width)
        .map(|j| {
            column.clear();
            column.extend(rows.iter().map(|r| r[j]));
            mean_se(&column)
        })
        .collect()
}

/// Evaluates `f` for every seed, in parallel when available.
pub fn map_seeds<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| f(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(|&s| f(s)).collect()
    }
}

/// `base, base + 1, ..., base + count - 1`.
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base + i).collect()
}
