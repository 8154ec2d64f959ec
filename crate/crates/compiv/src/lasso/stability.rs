//! Stability selection over half-sample refits.
//!
//! Each resample draws `n/2` rows without replacement, fits a warm-started
//! regularization path, and records which coefficients are active at each
//! penalty. Only the top of the path counts: once the cumulative number of
//! distinct features that have entered exceeds `q_cap`, the rest of the grid
//! is ignored for that resample. A feature's selection frequency is the
//! maximum, over counted grid points, of the fraction of resamples in which
//! it was active there. Features at or above the threshold are refitted
//! without a penalty on the full data.
//!
//! Capping the counted region keeps the frequencies meaningful: far down the
//! path nearly everything is active, so an uncapped maximum would select
//! every feature. When `p <= q_cap` the cap never binds and the procedure
//! degenerates to selecting everything, which reduces the refit to the
//! unpenalized constrained fit.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{
    constrained_refit, default_lambda_grid, solver, LinearFit, LossSpec, Prepared, SolverConfig,
};
use crate::rng::{stream_rng, RESAMPLE_STREAM_BASE};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub n_resamples: usize,
    /// Selection frequency at or above which a feature is kept.
    pub threshold: f64,
    /// Cap on how many distinct features may enter before the counted
    /// region of the path ends.
    pub q_cap: usize,
    pub seed: u64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { n_resamples: 50, threshold: 0.7, q_cap: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityProfile {
    /// Per-feature selection frequency in `[0, 1]`.
    pub selection_freq: Vec<f64>,
    pub threshold: f64,
    pub n_resamples: usize,
    pub q_cap: usize,
    /// Indices at or above the threshold, ascending.
    pub selected: Vec<usize>,
    /// True if every per-resample path fit converged.
    pub all_converged: bool,
}

impl StabilityProfile {
    /// No feature reached the threshold; the accompanying fit is
    /// intercept-only.
    pub fn is_empty_selection(&self) -> bool {
        self.selected.is_empty()
    }
}

type ResampleRecord = (Vec<(usize, Vec<bool>)>, bool);

fn resample_path(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    loss: &LossSpec,
    cfg: &StabilityConfig,
    k: usize,
) -> Result<ResampleRecord> {
    let (n, p) = x.shape();
    let n2 = n / 2;
    let mut rng = stream_rng(cfg.seed, RESAMPLE_STREAM_BASE + k as u64);
    let idx = rand::seq::index::sample(&mut rng, n, n2).into_vec();
    let xs = DMatrix::from_fn(n2, p, |i, j| x[(idx[i], j)]);
    let ys = DVector::from_fn(n2, |i, _| y[idx[i]]);

    let prep = Prepared::new(&xs, &ys, loss)?;
    let grid = default_lambda_grid(prep.lambda_max());
    let solver_cfg = SolverConfig::default();

    let mut warm = None;
    let mut entered = vec![false; p];
    let mut n_entered = 0usize;
    let mut records = Vec::new();
    let mut all_converged = true;
    for (grid_idx, &lambda) in grid.iter().enumerate() {
        let out = prep.solve(lambda, warm.take(), &solver_cfg)?;
        all_converged &= out.converged;
        let active: Vec<bool> = (0..p).map(|j| out.beta[j] != 0.0).collect();
        let mut would_enter = n_entered;
        for j in 0..p {
            if active[j] && !entered[j] {
                would_enter += 1;
            }
        }
        if would_enter > cfg.q_cap {
            break;
        }
        for j in 0..p {
            entered[j] |= active[j];
        }
        n_entered = would_enter;
        records.push((grid_idx, active));
        warm = Some((out.beta, out.c));
    }
    Ok((records, all_converged))
}

/// Stability selection followed by an unpenalized constrained refit.
///
/// If no feature reaches the threshold the returned fit is intercept-only
/// and the profile reports an empty selection.
pub fn stability_select(
    x_log: &DMatrix<f64>,
    y: &DVector<f64>,
    loss: &LossSpec,
    cfg: &StabilityConfig,
) -> Result<(StabilityProfile, LinearFit)> {
    let (n, p) = x_log.shape();
    if n < 4 {
        return Err(Error::invalid(format!(
            "stability selection needs at least 4 samples, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::invalid(format!(
            "design has {n} rows but response has {} entries",
            y.len()
        )));
    }
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(Error::invalid(format!(
            "selection threshold must lie in (0, 1], got {}",
            cfg.threshold
        )));
    }
    if cfg.n_resamples < 2 {
        return Err(Error::invalid("need at least 2 resamples"));
    }
    if cfg.q_cap == 0 {
        return Err(Error::invalid("q_cap must be positive"));
    }
    loss.validate()?;

    let results: Vec<ResampleRecord> = (0..cfg.n_resamples)
        .into_par_iter()
        .map(|k| resample_path(x_log, y, loss, cfg, k))
        .collect::<Result<Vec<_>>>()?;

    let grid_len = 50;
    let mut counts = vec![vec![0u32; p]; grid_len];
    let mut all_converged = true;
    for (records, conv) in &results {
        all_converged &= conv;
        for (grid_idx, active) in records {
            for j in 0..p {
                if active[j] {
                    counts[*grid_idx][j] += 1;
                }
            }
        }
    }
    let selection_freq: Vec<f64> = (0..p)
        .map(|j| {
            counts
                .iter()
                .map(|row| row[j] as f64 / cfg.n_resamples as f64)
                .fold(0.0, f64::max)
        })
        .collect();
    let selected: Vec<usize> = (0..p)
        .filter(|&j| selection_freq[j] >= cfg.threshold)
        .collect();

    let fit = if selected.is_empty() {
        LinearFit {
            beta_log: vec![0.0; p],
            intercept: solver::intercept_only_optimum(loss, y),
        }
    } else {
        constrained_refit(x_log, y, loss, &selected)?
    };

    let profile = StabilityProfile {
        selection_freq,
        threshold: cfg.threshold,
        n_resamples: cfg.n_resamples,
        q_cap: cfg.q_cap,
        selected,
        all_converged,
    };
    Ok((profile, fit))
}
