//! First-stage regressions of treatments on instruments.
//!
//! Two-stage estimators replace the observed treatment coordinates with
//! their instrument predictions before the outcome regression. This module
//! provides the regression models used for that prediction step: multi-target
//! ordinary least squares, a sparse Dirichlet generalized linear model for
//! compositional responses, and kernelized two-stage regression. It also
//! computes the classical first-stage F statistics used to diagnose weak
//! instruments.

mod dirichlet;
mod kiv;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use dirichlet::{fit_dirichlet_glm, DirichletConfig, DirichletFit};
pub use kiv::{fit_kiv, log_grid, KivConfig, KivFit};

/// F statistics larger than this are clamped; beyond it the distinction is
/// meaningless and serialized output stays finite.
pub const F_STAT_CLAMP: f64 = 1e15;

/// Multi-target least squares fit of `t ~ 1 + z`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Per-target intercepts, length `d`.
    pub intercept: DVector<f64>,
    /// Coefficients, `q x d`: column `j` holds the instrument weights for
    /// target `j`.
    pub coef: DMatrix<f64>,
}

impl OlsFit {
    /// Predicted targets for a matrix of instrument rows.
    pub fn fitted(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = z * &self.coef;
        for j in 0..out.ncols() {
            for i in 0..out.nrows() {
                out[(i, j)] += self.intercept[j];
            }
        }
        out
    }
}

/// Least squares with an intercept via a QR decomposition.
///
/// Near-collinear designs are rejected: if the ratio of the largest to the
/// smallest diagonal magnitude of `R` exceeds `1e10` the offending design
/// columns are reported (index `0` is the intercept, `k >= 1` is instrument
/// `k - 1`).
pub fn fit_ols(z: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, q) = z.shape();
    let d = t.ncols();
    if t.nrows() != n {
        return Err(Error::invalid(format!(
            "instruments have {n} rows but targets have {}",
            t.nrows()
        )));
    }
    if n < q + 2 {
        return Err(Error::invalid(format!(
            "need more than q + 1 = {} samples for a first-stage fit, got {n}",
            q + 1
        )));
    }
    if z.iter().any(|v| !v.is_finite()) || t.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("instruments and targets must be finite"));
    }

    let mut design = DMatrix::zeros(n, q + 1);
    for i in 0..n {
        design[(i, 0)] = 1.0;
        for k in 0..q {
            design[(i, k + 1)] = z[(i, k)];
        }
    }
    let qr = design.qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..q + 1).map(|k| r[(k, k)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let bad: Vec<usize> = (0..q + 1).filter(|&k| diag[k] < 1e-10 * dmax).collect();
    if !bad.is_empty() || dmax == 0.0 {
        return Err(Error::RankDeficient { columns: bad });
    }

    let qt_t = qr.q().tr_mul(t);
    let sol = r
        .solve_upper_triangular(&qt_t)
        .ok_or_else(|| Error::numerical("triangular solve failed in first-stage OLS"))?;
    let intercept = DVector::from_fn(d, |j, _| sol[(0, j)]);
    let coef = DMatrix::from_fn(q, d, |k, j| sol[(k + 1, j)]);
    Ok(OlsFit { intercept, coef })
}

/// First-stage F statistic for each target dimension.
///
/// `F_j = ((RSS0_j - RSS1_j) / q) / (RSS1_j / (n - q - 1))` compares the
/// instrument regression against the intercept-only model. A target with
/// essentially no variance gets `F = 0` by convention, and a perfect fit is
/// clamped at [`F_STAT_CLAMP`].
pub fn first_stage_f_stats(z: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (n, q) = z.shape();
    let fit = fit_ols(z, t)?;
    let pred = fit.fitted(z);
    let df2 = (n - q - 1) as f64;
    let mut out = Vec::with_capacity(t.ncols());
    for j in 0..t.ncols() {
        let col = t.column(j);
        let mean = col.sum() / n as f64;
        let rss0: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let rss1: f64 = (0..n).map(|i| (col[i] - pred[(i, j)]).powi(2)).sum();
        let scale = col.norm_squared().max(1.0);
        if rss0 <= 1e-12 * scale {
            out.push(0.0);
            continue;
        }
        if rss1 <= 0.0 {
            out.push(F_STAT_CLAMP);
            continue;
        }
        let f = ((rss0 - rss1).max(0.0) / q as f64) / (rss1 / df2);
        out.push(f.min(F_STAT_CLAMP));
    }
    Ok(out)
}
