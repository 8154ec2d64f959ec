//! Causal evaluation metrics and the benchmark harness.
//!
//! Fits are scored against the scenario's effect oracle on fresh
//! interventional treatment samples, plus coefficient-level metrics when
//! both the fit and the truth are linear in log coordinates. The benchmark
//! sweep runs (scenario, method, seed) cells concurrently and aggregates
//! each metric to mean and standard error over seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{GroundTruth, SimulationSpec};
use crate::error::{Error, Result};
use crate::iv::{fit_method, CausalFit, FitConfig, IvDataset, Method};
use crate::simplex::Composition;

/// Coefficients with magnitude at or below this count as zero when scoring
/// support recovery; stability-selected fits produce exact zeros.
pub const SUPPORT_ZERO_TOL: f64 = 1e-8;

/// Metrics of one fit against one ground truth.
///
/// `beta_mse`, `fz`, and `fnz` are present only when the fit has
/// log-contrast coefficients and the truth is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean squared error against the effect oracle on interventional
    /// samples.
    pub oos_mse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_mse: Option<f64>,
    /// Truly nonzero coefficients estimated as zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fz: Option<usize>,
    /// Truly zero coefficients estimated as nonzero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fnz: Option<usize>,
    /// First-stage F statistics carried over from the fit diagnostics.
    pub f_stats: Vec<f64>,
    pub n_interventions: usize,
}

/// Mean squared gap between the oracle effect and the fit's prediction over
/// interventional treatment samples.
pub fn oos_mse(fit: &CausalFit, truth: &GroundTruth, xs: &[Composition]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid(
            "out-of-sample error needs at least one interventional sample",
        ));
    }
    let mut sq_gaps = Vec::with_capacity(xs.len());
    for x in xs {
        let gap = truth.true_effect(x)? - fit.predict_effect(x)?;
        sq_gaps.push(gap * gap);
    }
    // Summing in sorted order makes the result independent of how the
    // samples were ordered, not just up to rounding.
    sq_gaps.sort_by(f64::total_cmp);
    Ok(sq_gaps.iter().sum::<f64>() / xs.len() as f64)
}

/// Squared coefficient error in log-contrast coordinates, summed over the
/// `p` components.
///
/// The summed convention matches the scale of the reference results this
/// crate is benchmarked against. Both vectors must satisfy the sum-zero
/// constraint within `1e-6`: the constraint removes the free additive
/// offset of log-contrast coefficients, making the comparison well defined.
pub fn beta_mse(beta_hat_log: &[f64], beta_true_log: &[f64]) -> Result<f64> {
    if beta_hat_log.len() != beta_true_log.len() {
        return Err(Error::invalid(format!(
            "coefficient vectors have lengths {} and {}",
            beta_hat_log.len(),
            beta_true_log.len()
        )));
    }
    for (name, beta) in [("estimated", beta_hat_log), ("true", beta_true_log)] {
        let sum: f64 = beta.iter().sum();
        if sum.abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "{name} coefficients sum to {sum}, expected zero"
            )));
        }
    }
    Ok(beta_hat_log
        .iter()
        .zip(beta_true_log)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Support recovery errors: `(fz, fnz)`.
///
/// `fz` counts truly nonzero coefficients whose estimate is within
/// `zero_tol` of zero; `fnz` counts truly zero coefficients estimated
/// beyond it.
pub fn support_errors(
    beta_hat_log: &[f64],
    beta_true_log: &[f64],
    zero_tol: f64,
) -> Result<(usize, usize)> {
    if beta_hat_log.len() != beta_true_log.len() {
        return Err(Error::invalid(format!(
            "coefficient vectors have lengths {} and {}",
            beta_hat_log.len(),
            beta_true_log.len()
        )));
    }
    let mut fz = 0;
    let mut fnz = 0;
    for (est, tru) in beta_hat_log.iter().zip(beta_true_log) {
        if *tru != 0.0 && est.abs() <= zero_tol {
            fz += 1;
        }
        if *tru == 0.0 && est.abs() > zero_tol {
            fnz += 1;
        }
    }
    Ok((fz, fnz))
}

/// Scores one fit on interventional samples, attaching coefficient metrics
/// when both the fit and the truth are linear.
pub fn evaluate(fit: &CausalFit, truth: &GroundTruth, xs: &[Composition]) -> Result<MetricsReport> {
    let mut report = MetricsReport {
        oos_mse: oos_mse(fit, truth, xs)?,
        beta_mse: None,
        fz: None,
        fnz: None,
        f_stats: fit.diagnostics.f_stats.clone(),
        n_interventions: xs.len(),
    };
    if !truth.nonlinear {
        if let Some(beta_hat) = fit.beta_log() {
            report.beta_mse = Some(beta_mse(beta_hat, &truth.beta_log)?);
            let (fz, fnz) = support_errors(beta_hat, &truth.beta_log, SUPPORT_ZERO_TOL)?;
            report.fz = Some(fz);
            report.fnz = Some(fnz);
        }
    }
    Ok(report)
}

/// One (scenario, method, seed) outcome in a benchmark sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub scenario: String,
    pub method: Method,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    /// Failure text when the fit or its evaluation errored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A mean with its standard error over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation divided by sqrt(count); absent when only
    /// one seed contributed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

/// Aggregated metrics of one (scenario, method) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub method: Method,
    pub n_seeds: usize,
    /// Seeds whose fit or evaluation failed; excluded from the means.
    pub n_failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oos_mse: Option<MeanSe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_mse: Option<MeanSe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fz: Option<MeanSe>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fnz: Option<MeanSe>,
}

/// Full benchmark output: per-cell summaries plus every raw record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub cells: Vec<CellSummary>,
    pub records: Vec<SeedRecord>,
}

fn mean_se(values: &[f64]) -> Option<MeanSe> {
    if values.is_empty() {
        return None;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return Some(MeanSe { mean, se: None });
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    Some(MeanSe { mean, se: Some((var / k).sqrt()) })
}

fn collect_metric(records: &[&SeedRecord], get: impl Fn(&MetricsReport) -> Option<f64>) -> Vec<f64> {
    records
        .iter()
        .filter_map(|r| r.metrics.as_ref().and_then(&get))
        .collect()
}

/// Runs every method on every scenario for `n_seeds` consecutive seeds
/// starting at `base_seed`.
///
/// Scenario cells run concurrently over (scenario, seed); one seed's data
/// and oracle are shared by all methods. A failing fit becomes a failure
/// record and the sweep continues. Output order and content are
/// deterministic for fixed inputs.
pub fn benchmark(
    scenarios: &[(String, SimulationSpec)],
    methods: &[Method],
    n_seeds: usize,
    base_seed: u64,
    cfg: &FitConfig,
) -> Result<BenchmarkTable> {
    if n_seeds < 2 {
        return Err(Error::invalid(
            "benchmark needs n_seeds >= 2 to report standard errors",
        ));
    }
    if scenarios.is_empty() || methods.is_empty() {
        return Err(Error::invalid("benchmark needs at least one scenario and one method"));
    }

    let jobs: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|s| (0..n_seeds as u64).map(move |k| (s, base_seed + k)))
        .collect();

    let per_job: Vec<Vec<SeedRecord>> = jobs
        .par_iter()
        .map(|&(s_idx, seed)| {
            let (name, spec) = &scenarios[s_idx];
            run_seed(name, spec, seed, methods, cfg)
        })
        .collect();
    let records: Vec<SeedRecord> = per_job.into_iter().flatten().collect();

    let mut cells = Vec::with_capacity(scenarios.len() * methods.len());
    for (name, _) in scenarios {
        for method in methods {
            let cell: Vec<&SeedRecord> = records
                .iter()
                .filter(|r| r.scenario == *name && r.method == *method)
                .collect();
            let n_failed = cell.iter().filter(|r| r.error.is_some()).count();
            cells.push(CellSummary {
                scenario: name.clone(),
                method: *method,
                n_seeds,
                n_failed,
                oos_mse: mean_se(&collect_metric(&cell, |m| Some(m.oos_mse))),
                beta_mse: mean_se(&collect_metric(&cell, |m| m.beta_mse)),
                fz: mean_se(&collect_metric(&cell, |m| m.fz.map(|v| v as f64))),
                fnz: mean_se(&collect_metric(&cell, |m| m.fnz.map(|v| v as f64))),
            });
        }
    }
    Ok(BenchmarkTable { cells, records })
}

fn run_seed(
    name: &str,
    spec: &SimulationSpec,
    seed: u64,
    methods: &[Method],
    cfg: &FitConfig,
) -> Vec<SeedRecord> {
    let prepared = (|| -> Result<_> {
        let scenario = spec.materialize(seed)?;
        let ds = IvDataset::from(scenario.generate(spec.n)?);
        let xs = scenario.interventional_sample(spec.m_interventions)?;
        let truth = scenario.ground_truth()?;
        Ok((ds, xs, truth))
    })();
    match prepared {
        Ok((ds, xs, truth)) => methods
            .iter()
            .map(|&method| {
                let outcome = fit_method(&ds, method, cfg)
                    .and_then(|fit| evaluate(&fit, &truth, &xs));
                match outcome {
                    Ok(metrics) => SeedRecord {
                        scenario: name.to_string(),
                        method,
                        seed,
                        metrics: Some(metrics),
                        error: None,
                    },
                    Err(e) => SeedRecord {
                        scenario: name.to_string(),
                        method,
                        seed,
                        metrics: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect(),
        // Data generation itself failed: every method gets a failure row.
        Err(e) => methods
            .iter()
            .map(|&method| SeedRecord {
                scenario: name.to_string(),
                method,
                seed,
                metrics: None,
                error: Some(e.to_string()),
            })
            .collect(),
    }
}

fn fmt_stat(v: Option<MeanSe>) -> (String, String) {
    match v {
        None => ("".into(), "".into()),
        Some(MeanSe { mean, se }) => (
            format!("{mean}"),
            se.map(|s| format!("{s}")).unwrap_or_default(),
        ),
    }
}

fn fmt_cell_text(v: Option<MeanSe>) -> String {
    let num = |x: f64| {
        if x == 0.0 || (x.abs() >= 0.01 && x.abs() < 10000.0) {
            format!("{x:.3}")
        } else {
            format!("{x:.3e}")
        }
    };
    match v {
        None => "-".into(),
        Some(MeanSe { mean, se: Some(se) }) => format!("{} \u{b1} {}", num(mean), num(se)),
        Some(MeanSe { mean, se: None }) => num(mean),
    }
}

impl BenchmarkTable {
    /// Summary cells as CSV, one row per (scenario, method).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "scenario,method,n_seeds,n_failed,oos_mse_mean,oos_mse_se,beta_mse_mean,beta_mse_se,fz_mean,fz_se,fnz_mean,fnz_se\n",
        );
        for c in &self.cells {
            let (om, os) = fmt_stat(c.oos_mse);
            let (bm, bs) = fmt_stat(c.beta_mse);
            let (zm, zs) = fmt_stat(c.fz);
            let (nm, ns) = fmt_stat(c.fnz);
            out.push_str(&format!(
                "{},{},{},{},{om},{os},{bm},{bs},{zm},{zs},{nm},{ns}\n",
                c.scenario,
                c.method.as_str(),
                c.n_seeds,
                c.n_failed
            ));
        }
        out
    }

    /// Summary cells as an aligned text table.
    pub fn to_aligned_text(&self) -> String {
        let header = ["scenario", "method", "oos_mse", "beta_mse", "fz", "fnz", "failed"];
        let mut rows: Vec<[String; 7]> = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            rows.push([
                c.scenario.clone(),
                c.method.as_str().to_string(),
                fmt_cell_text(c.oos_mse),
                fmt_cell_text(c.beta_mse),
                fmt_cell_text(c.fz),
                fmt_cell_text(c.fnz),
                format!("{}/{}", c.n_failed, c.n_seeds),
            ]);
        }
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let emit = |out: &mut String, cells: &[String]| {
            let line: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        };
        emit(&mut out, &header.map(String::from));
        for row in &rows {
            emit(&mut out, row);
        }
        out
    }

    /// Raw per-seed records as JSON lines.
    pub fn records_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}
