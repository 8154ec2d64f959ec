//! End-to-end causal estimators for compositional treatments.
//!
//! Every estimator consumes an [`IvDataset`] (instruments, treatment
//! compositions, outcomes) and produces a [`CausalFit`]: a tagged effect
//! model plus diagnostics. Linear fits carry their coefficients in both the
//! log-contrast parameterization (`p` entries summing to zero) and the
//! equivalent ilr parameterization (`p - 1` entries); predictions agree
//! because sum-zero log coefficients are exactly the image of ilr
//! coefficients under the basis contrast identity.

mod estimators;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::first_stage::{DirichletConfig, KivConfig, KivFit};
use crate::lasso::{LossSpec, StabilityConfig};
use crate::logratio::LogRatioBasis;
use crate::simplex::{diversity, Composition, Diversity};

pub use estimators::{
    fit_2sls, fit_alr_lc, fit_dir_lc, fit_diversity_iv, fit_ilr_lc, fit_kiv_ilr, fit_method,
    fit_only_lc, FitConfig, ScalarMethod, TreatmentCoords,
};

/// Aligned instruments, treatment compositions, and outcomes.
#[derive(Debug, Clone)]
pub struct IvDataset {
    z: DMatrix<f64>,
    x: Vec<Composition>,
    y: DVector<f64>,
}

impl IvDataset {
    pub fn new(z: DMatrix<f64>, x: Vec<Composition>, y: DVector<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 {
            return Err(Error::invalid("need at least 4 samples"));
        }
        if z.nrows() != n || y.len() != n {
            return Err(Error::invalid(format!(
                "misaligned dataset: {} compositions, {} instrument rows, {} outcomes",
                n,
                z.nrows(),
                y.len()
            )));
        }
        if z.ncols() == 0 {
            return Err(Error::invalid("need at least one instrument column"));
        }
        let p = x[0].len();
        if x.iter().any(|c| c.len() != p) {
            return Err(Error::invalid("compositions have inconsistent lengths"));
        }
        if x.iter().any(|c| !c.is_strictly_positive()) {
            return Err(Error::invalid(
                "compositions must be strictly positive; pseudo-count zeros upstream",
            ));
        }
        if z.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("instruments and outcomes must be finite"));
        }
        Ok(IvDataset { z, x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn p(&self) -> usize {
        self.x[0].len()
    }

    pub fn q(&self) -> usize {
        self.z.ncols()
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn x(&self) -> &[Composition] {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Componentwise logs of the treatment, `n x p`.
    pub fn x_log_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.p(), |i, j| self.x[i].parts()[j].ln())
    }

    /// ilr coordinates of the treatment, `n x (p - 1)`.
    pub fn x_ilr_matrix(&self, basis: &LogRatioBasis) -> Result<DMatrix<f64>> {
        let n = self.n();
        let d = basis.dim();
        let mut out = DMatrix::zeros(n, d);
        for i in 0..n {
            let coords = crate::logratio::ilr(&self.x[i], basis)?;
            out.row_mut(i).copy_from(&coords.transpose());
        }
        Ok(out)
    }

    /// Raw treatment components, `n x p`.
    pub fn x_raw_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.p(), |i, j| self.x[i].parts()[j])
    }

    /// One diversity scalar per sample.
    pub fn diversity_column(&self, measure: Diversity) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), 1, |i, _| diversity(&self.x[i], measure))
    }
}

impl From<crate::datagen::Dataset> for IvDataset {
    fn from(d: crate::datagen::Dataset) -> Self {
        IvDataset { z: d.z, x: d.x, y: d.y }
    }
}

/// Estimator identity tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Naive 2SLS on raw components, ignoring the simplex geometry.
    #[serde(rename = "2sls")]
    TwoSls,
    /// 2SLS on ilr coordinates.
    #[serde(rename = "2sls-ilr")]
    TwoSlsIlr,
    #[serde(rename = "ilr-lc")]
    IlrLc,
    #[serde(rename = "alr-lc")]
    AlrLc,
    #[serde(rename = "dir-lc")]
    DirLc,
    #[serde(rename = "kiv-ilr")]
    KivIlr,
    #[serde(rename = "only-lc")]
    OnlyLc,
    #[serde(rename = "diversity-2sls")]
    DiversityTwoSls,
    #[serde(rename = "diversity-kiv")]
    DiversityKiv,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::TwoSls => "2sls",
            Method::TwoSlsIlr => "2sls-ilr",
            Method::IlrLc => "ilr-lc",
            Method::AlrLc => "alr-lc",
            Method::DirLc => "dir-lc",
            Method::KivIlr => "kiv-ilr",
            Method::OnlyLc => "only-lc",
            Method::DiversityTwoSls => "diversity-2sls",
            Method::DiversityKiv => "diversity-kiv",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2sls" => Ok(Method::TwoSls),
            "2sls-ilr" => Ok(Method::TwoSlsIlr),
            "ilr-lc" => Ok(Method::IlrLc),
            "alr-lc" => Ok(Method::AlrLc),
            "dir-lc" => Ok(Method::DirLc),
            "kiv-ilr" => Ok(Method::KivIlr),
            "only-lc" => Ok(Method::OnlyLc),
            "diversity-2sls" => Ok(Method::DiversityTwoSls),
            "diversity-kiv" => Ok(Method::DiversityKiv),
            other => Err(Error::invalid(format!(
                "unknown method '{other}'; expected one of 2sls, 2sls-ilr, ilr-lc, alr-lc, \
                 dir-lc, kiv-ilr, only-lc, diversity-2sls, diversity-kiv"
            ))),
        }
    }
}

/// Stability-selection summary attached to sparse linear fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMeta {
    pub n_resamples: usize,
    pub q_cap: usize,
    pub threshold: f64,
    pub selection_freq: Vec<f64>,
    pub selected: Vec<usize>,
    pub empty_selection: bool,
}

/// Fit-quality information carried by every estimator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// First-stage F statistic per treatment coordinate (empty when the
    /// method has no first stage).
    pub f_stats: Vec<f64>,
    pub converged: bool,
    /// Set when the instruments span fewer directions than the treatment
    /// columns and the reported coefficients are a minimum-norm solution.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub under_identified: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_path_meta: Option<StabilityMeta>,
}

/// Feature space a kernel fit operates on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFeatures {
    Ilr,
    Diversity(Diversity),
}

/// The effect curve of a fitted estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EffectModel {
    /// `f(x) = intercept + beta_log' log x`, with `beta_log` sum-zero and
    /// `beta_ilr` its ilr-basis image.
    Linear { beta_log: Vec<f64>, beta_ilr: Vec<f64>, intercept: f64 },
    /// `f(x) = coef' x` on all raw components, fitted without an intercept.
    /// The naive baseline keeps whatever the projection solve returned; on
    /// under-identified designs that is a minimum-norm vector whose
    /// off-span behavior is unconstrained.
    RawSimplex { coef: Vec<f64> },
    /// `f(x) = intercept + slope * diversity(x)`.
    Scalar { measure: Diversity, slope: f64, intercept: f64 },
    /// Kernel ridge evaluation over stored training features.
    Kernel { features: KernelFeatures, split_seed: u64, fit: KivFit },
}

/// Builds the linear variant from log-contrast coefficients, checking the
/// sum-zero invariant and deriving the ilr image.
pub(crate) fn linear_model(
    beta_log: &DVector<f64>,
    intercept: f64,
    basis: &LogRatioBasis,
) -> Result<EffectModel> {
    let beta_ilr = crate::logratio::beta_log_to_ilr(beta_log, basis)?;
    let sum: f64 = beta_log.iter().sum();
    if sum.abs() > 1e-8 {
        return Err(Error::numerical(format!(
            "log-contrast coefficients sum to {sum}, expected zero"
        )));
    }
    Ok(EffectModel::Linear {
        beta_log: beta_log.iter().copied().collect(),
        beta_ilr: beta_ilr.iter().copied().collect(),
        intercept,
    })
}

/// A fitted causal-effect predictor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CausalFit {
    pub method: Method,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub model: EffectModel,
    pub diagnostics: Diagnostics,
}

impl CausalFit {
    /// Predicted interventional effect at a new treatment composition.
    ///
    /// Classification fits return the real-valued margin.
    pub fn predict_effect(&self, x: &Composition) -> Result<f64> {
        if x.len() != self.p {
            return Err(Error::invalid(format!(
                "composition has {} parts, fit expects {}",
                x.len(),
                self.p
            )));
        }
        match &self.model {
            EffectModel::Linear { beta_log, intercept, .. } => {
                let mut v = *intercept;
                for (b, part) in beta_log.iter().zip(x.parts()) {
                    v += b * part.ln();
                }
                Ok(v)
            }
            EffectModel::RawSimplex { coef } => {
                Ok(coef.iter().zip(x.parts()).map(|(c, part)| c * part).sum())
            }
            EffectModel::Scalar { measure, slope, intercept } => {
                Ok(intercept + slope * diversity(x, *measure))
            }
            EffectModel::Kernel { features, fit, .. } => match features {
                KernelFeatures::Ilr => {
                    let basis = LogRatioBasis::helmert(self.p)?;
                    let coords = crate::logratio::ilr(x, &basis)?;
                    Ok(fit.predict(coords.as_slice()))
                }
                KernelFeatures::Diversity(measure) => {
                    Ok(fit.predict(&[diversity(x, *measure)]))
                }
            },
        }
    }

    /// Predictions at several compositions.
    pub fn predict_effects(&self, xs: &[Composition]) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(xs.len());
        for (i, x) in xs.iter().enumerate() {
            out[i] = self.predict_effect(x)?;
        }
        Ok(out)
    }

    /// Log-contrast coefficients, when the fit is linear.
    pub fn beta_log(&self) -> Option<&[f64]> {
        match &self.model {
            EffectModel::Linear { beta_log, .. } => Some(beta_log),
            _ => None,
        }
    }

    /// ilr coefficients, when the fit is linear.
    pub fn beta_ilr(&self) -> Option<&[f64]> {
        match &self.model {
            EffectModel::Linear { beta_ilr, .. } => Some(beta_ilr),
            _ => None,
        }
    }
}

/// Configuration for the sparse log-contrast second stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcConfig {
    pub loss: LossSpec,
    pub stability: StabilityConfig,
}

impl Default for LcConfig {
    fn default() -> Self {
        LcConfig { loss: LossSpec::Squared, stability: StabilityConfig::default() }
    }
}

/// Configuration for the Dirichlet-first-stage pipeline.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DirLcConfig {
    pub dirichlet: DirichletConfig,
    pub lc: LcConfig,
}

/// Re-exported so callers can configure the kernel pipeline without
/// reaching into the first-stage module.
pub type KernelConfig = KivConfig;
