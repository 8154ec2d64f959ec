//! The estimator entry points.
//!
//! Every pipeline produces a [`CausalFit`]; the differences are which
//! treatment coordinates feed the first stage and which regression closes
//! the second. The two-stage core shared by the parametric estimators works
//! on the instrument projection of the treatment design, which is
//! numerically identical to regressing on first-stage fitted values but
//! keeps the solve at `(d + 1) x (d + 1)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::first_stage::{first_stage_f_stats, fit_dirichlet_glm, fit_kiv, fit_ols, DirichletConfig};
use crate::lasso::stability_select;
use crate::logratio::{beta_ilr_to_log, ilr_inv, LogRatioBasis};
use crate::simplex::Diversity;

use super::{
    linear_model, CausalFit, Diagnostics, DirLcConfig, EffectModel, IvDataset, KernelConfig,
    KernelFeatures, LcConfig, Method, StabilityMeta,
};

/// Projected designs worse conditioned than this are rejected rather than
/// silently inverted.
const CONDITION_LIMIT: f64 = 1e10;

/// Treatment coordinates for the plain two-stage estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreatmentCoords {
    /// All `p` raw components as free covariates: the deliberately naive
    /// baseline that pretends the simplex is ordinary Euclidean space.
    Raw,
    /// Isometric log-ratio coordinates.
    Ilr,
}

/// Second stage for scalar diversity treatments.
#[derive(Debug, Clone)]
pub enum ScalarMethod {
    TwoSls,
    Kiv(KernelConfig),
}

fn with_intercept(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = m.shape();
    let mut out = DMatrix::zeros(n, k + 1);
    out.column_mut(0).fill(1.0);
    out.view_mut((0, 1), (n, k)).copy_from(m);
    out
}

/// Two-stage least squares of `y` on `t` instrumented by `z`.
///
/// Returns the treatment coefficients and the intercept. Solves the
/// projected normal equations `C'C b = C'Q'y` where `Q` is an orthonormal
/// span of `[1 | z]` and `C = Q'[1 | t]`.
fn two_sls_core(
    z: &DMatrix<f64>,
    t: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let n = z.nrows();
    let q = z.ncols();
    let d = t.ncols();
    if t.nrows() != n || y.len() != n {
        return Err(Error::invalid("z, t, and y must have matching rows"));
    }
    if q < d {
        return Err(Error::UnderIdentified { q, d });
    }
    if n < q + d + 2 {
        return Err(Error::invalid(format!(
            "two-stage least squares needs at least {} samples, got {n}",
            q + d + 2
        )));
    }
    let z1 = with_intercept(z);
    let t1 = with_intercept(t);
    let qr = z1.qr();
    let r_diag = qr.r().diagonal();
    let scale = r_diag.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if r_diag.iter().any(|v| v.abs() < 1e-10 * scale) {
        return Err(Error::numerical(
            "instrument design is rank deficient; drop collinear instrument columns",
        ));
    }
    let qt = qr.q().transpose();
    let c = &qt * &t1;
    let qy = &qt * y;
    let m = c.transpose() * &c;
    let rhs = c.transpose() * &qy;
    let sv = m.singular_values();
    let s_max = sv.max();
    let s_min = sv.min();
    let cond = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if cond > CONDITION_LIMIT {
        return Err(Error::numerical(format!(
            "projected treatment design has condition number {cond:.3e}; \
             treatments are collinear or the instruments barely move them"
        )));
    }
    let chol = m.cholesky().ok_or_else(|| {
        Error::numerical("projected treatment design is not positive definite")
    })?;
    let beta = chol.solve(&rhs);
    let coef = DVector::from_iterator(d, beta.iter().skip(1).copied());
    Ok((coef, beta[0]))
}

/// The literal projection estimator behind the naive raw baseline.
///
/// Computes `(T' P_Z T)^-1 T' P_Z y` exactly as written, with `P_Z` the
/// projection onto the bare instrument columns and `T` the full component
/// matrix; no intercepts anywhere and no rank repair. With fewer
/// instruments than components the projected Gram matrix is singular up to
/// rounding, and the solve returns the noise-dominated coefficients a
/// naive implementation produces; the fit carries an under-identification
/// flag so downstream reports can say why the numbers are absurd.
fn naive_raw_core(
    z: &DMatrix<f64>,
    t: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<(DVector<f64>, bool)> {
    let n = z.nrows();
    let p = t.ncols();
    let q = z.ncols();
    if t.nrows() != n || y.len() != n {
        return Err(Error::invalid("z, t, and y must have matching rows"));
    }
    if n < p + 2 {
        return Err(Error::invalid(format!(
            "naive two-stage least squares needs at least {} samples, got {n}",
            p + 2
        )));
    }
    let zg = z.transpose() * z;
    let zt = z.transpose() * t;
    let zy = z.transpose() * y;
    let lu = zg.lu();
    let fs_t = lu
        .solve(&zt)
        .ok_or_else(|| Error::numerical("instrument gram matrix is singular"))?;
    let fs_y = lu
        .solve(&zy)
        .ok_or_else(|| Error::numerical("instrument gram matrix is singular"))?;
    let a = zt.transpose() * &fs_t;
    let b = zt.transpose() * &fs_y;
    let coef = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::numerical("projected component design is exactly singular"))?
        .column(0)
        .into_owned();
    Ok((coef, q < p))
}

/// Two-stage least squares with the treatment in raw or ilr coordinates.
///
/// Ilr coordinates produce a proper log-contrast effect model with
/// intercepts in both stages and a hard under-identification check. Raw
/// coordinates run the projection solve verbatim on all components, the way
/// the baseline is usually (mis)applied: no intercepts, no reparameterizing
/// around the closure constraint. With `q < p` the raw fit is a
/// minimum-norm solution, flagged in the diagnostics rather than rejected,
/// because producing that misleading fit is the baseline's entire job.
pub fn fit_2sls(ds: &IvDataset, coords: TreatmentCoords) -> Result<CausalFit> {
    let (method, t, model, under) = match coords {
        TreatmentCoords::Raw => {
            let t = ds.x_raw_matrix();
            let (coef, under) = naive_raw_core(ds.z(), &t, ds.y())?;
            let model = EffectModel::RawSimplex { coef: coef.iter().copied().collect() };
            (Method::TwoSls, t, model, under)
        }
        TreatmentCoords::Ilr => {
            let basis = LogRatioBasis::helmert(ds.p())?;
            let t = ds.x_ilr_matrix(&basis)?;
            let (coef, intercept) = two_sls_core(ds.z(), &t, ds.y())?;
            let beta_log = beta_ilr_to_log(&coef, &basis)?;
            let model = linear_model(&beta_log, intercept, &basis)?;
            (Method::TwoSlsIlr, t, model, false)
        }
    };
    Ok(CausalFit {
        method,
        p: ds.p(),
        q: ds.q(),
        n: ds.n(),
        model,
        diagnostics: Diagnostics {
            f_stats: first_stage_f_stats(ds.z(), &t)?,
            converged: true,
            under_identified: under,
            lambda_path_meta: None,
        },
    })
}

/// Sparse log-contrast stage shared by every `*-lc` pipeline.
fn log_contrast_stage(
    x_log: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &LcConfig,
    basis: &LogRatioBasis,
) -> Result<(EffectModel, bool, StabilityMeta)> {
    let (profile, fit) = stability_select(x_log, y, &cfg.loss, &cfg.stability)?;
    let meta = StabilityMeta {
        n_resamples: profile.n_resamples,
        q_cap: profile.q_cap,
        threshold: profile.threshold,
        selection_freq: profile.selection_freq.clone(),
        selected: profile.selected.clone(),
        empty_selection: profile.is_empty_selection(),
    };
    let beta = DVector::from_row_slice(&fit.beta_log);
    let model = linear_model(&beta, fit.intercept, basis)?;
    Ok((model, profile.all_converged, meta))
}

/// Sparse log-contrast regression of the outcome on the observed
/// compositions, ignoring the instruments entirely. This is the biased
/// baseline: any confounder moving both treatment and outcome leaks into
/// the coefficients.
pub fn fit_only_lc(ds: &IvDataset, cfg: &LcConfig) -> Result<CausalFit> {
    let basis = LogRatioBasis::helmert(ds.p())?;
    let (model, converged, meta) = log_contrast_stage(&ds.x_log_matrix(), ds.y(), cfg, &basis)?;
    Ok(CausalFit {
        method: Method::OnlyLc,
        p: ds.p(),
        q: ds.q(),
        n: ds.n(),
        model,
        diagnostics: Diagnostics {
            f_stats: Vec::new(),
            converged,
            under_identified: false,
            lambda_path_meta: Some(meta),
        },
    })
}

/// Maps rows of first-stage ilr fitted values back to the simplex and takes
/// componentwise logs.
fn ilr_fitted_to_log(fitted: &DMatrix<f64>, basis: &LogRatioBasis) -> Result<DMatrix<f64>> {
    let n = fitted.nrows();
    let mut out = DMatrix::zeros(n, basis.p());
    for i in 0..n {
        let coords = DVector::from_iterator(fitted.ncols(), fitted.row(i).iter().copied());
        let comp = ilr_inv(&coords, basis)?;
        for (j, part) in comp.parts().iter().enumerate() {
            out[(i, j)] = part.ln();
        }
    }
    Ok(out)
}

fn fit_linear_first_stage_lc(ds: &IvDataset, cfg: &LcConfig, method: Method) -> Result<CausalFit> {
    let basis = LogRatioBasis::helmert(ds.p())?;
    let t = ds.x_ilr_matrix(&basis)?;
    let ols = fit_ols(ds.z(), &t)?;
    let x_hat_log = ilr_fitted_to_log(&ols.fitted(ds.z()), &basis)?;
    let f_stats = first_stage_f_stats(ds.z(), &t)?;
    let (model, converged, meta) = log_contrast_stage(&x_hat_log, ds.y(), cfg, &basis)?;
    Ok(CausalFit {
        method,
        p: ds.p(),
        q: ds.q(),
        n: ds.n(),
        model,
        diagnostics: Diagnostics {
            f_stats,
            converged,
            under_identified: false,
            lambda_path_meta: Some(meta),
        },
    })
}

/// Two-stage pipeline: least squares of ilr coordinates on the instruments,
/// then sparse log-contrast regression of the outcome on the fitted
/// compositions.
pub fn fit_ilr_lc(ds: &IvDataset, cfg: &LcConfig) -> Result<CausalFit> {
    fit_linear_first_stage_lc(ds, cfg, Method::IlrLc)
}

/// Same pipeline as [`fit_ilr_lc`] with the first stage viewed in alr
/// coordinates. A saturated linear first stage produces identical fitted
/// compositions under any invertible log-ratio recoding, so the estimates
/// coincide; the tag records which view was requested.
pub fn fit_alr_lc(ds: &IvDataset, cfg: &LcConfig) -> Result<CausalFit> {
    fit_linear_first_stage_lc(ds, cfg, Method::AlrLc)
}

/// Two-stage pipeline with a sparse Dirichlet GLM first stage.
///
/// The fitted compositions are the Dirichlet means given the instruments.
/// First-stage F statistics are still the linear ones on ilr coordinates;
/// they diagnose instrument strength, not the GLM itself.
pub fn fit_dir_lc(ds: &IvDataset, cfg: &DirLcConfig) -> Result<CausalFit> {
    let basis = LogRatioBasis::helmert(ds.p())?;
    let (n, p, q) = (ds.n(), ds.p(), ds.q());
    let comp = DMatrix::from_fn(n, p, |i, j| ds.x()[i].parts()[j]);
    let dir = fit_dirichlet_glm(ds.z(), &comp, &cfg.dirichlet)?;
    let mut x_hat_log = DMatrix::zeros(n, p);
    let mut z_row = vec![0.0; q];
    for i in 0..n {
        for (k, v) in ds.z().row(i).iter().enumerate() {
            z_row[k] = *v;
        }
        let mean = dir.mean(&z_row);
        for j in 0..p {
            x_hat_log[(i, j)] = mean[j].ln();
        }
    }
    let t = ds.x_ilr_matrix(&basis)?;
    let f_stats = first_stage_f_stats(ds.z(), &t)?;
    let (model, stage2_converged, meta) = log_contrast_stage(&x_hat_log, ds.y(), &cfg.lc, &basis)?;
    Ok(CausalFit {
        method: Method::DirLc,
        p,
        q,
        n,
        model,
        diagnostics: Diagnostics {
            f_stats,
            converged: dir.converged && stage2_converged,
            under_identified: false,
            lambda_path_meta: Some(meta),
        },
    })
}

/// Kernel IV with ilr coordinates as treatment features.
pub fn fit_kiv_ilr(ds: &IvDataset, cfg: &KernelConfig) -> Result<CausalFit> {
    let basis = LogRatioBasis::helmert(ds.p())?;
    let t = ds.x_ilr_matrix(&basis)?;
    let f_stats = first_stage_f_stats(ds.z(), &t)?;
    let fit = fit_kiv(&t, ds.z(), ds.y(), cfg)?;
    Ok(CausalFit {
        method: Method::KivIlr,
        p: ds.p(),
        q: ds.q(),
        n: ds.n(),
        model: EffectModel::Kernel {
            features: KernelFeatures::Ilr,
            split_seed: cfg.seed,
            fit,
        },
        diagnostics: Diagnostics {
            f_stats,
            converged: true,
            under_identified: false,
            lambda_path_meta: None,
        },
    })
}

/// Instrumented effect of a scalar diversity summary of the composition.
///
/// Collapsing the composition to one number before estimation answers a
/// different question than the compositional pipelines: the slope measures
/// association with the chosen summary, and different summaries of the same
/// data can disagree, including in sign.
pub fn fit_diversity_iv(
    ds: &IvDataset,
    measure: Diversity,
    method: &ScalarMethod,
) -> Result<CausalFit> {
    let t = ds.diversity_column(measure);
    let f_stats = first_stage_f_stats(ds.z(), &t)?;
    let (tag, model) = match method {
        ScalarMethod::TwoSls => {
            let (coef, intercept) = two_sls_core(ds.z(), &t, ds.y())?;
            let model = EffectModel::Scalar {
                measure,
                slope: coef[0],
                intercept,
            };
            (Method::DiversityTwoSls, model)
        }
        ScalarMethod::Kiv(cfg) => {
            let fit = fit_kiv(&t, ds.z(), ds.y(), cfg)?;
            let model = EffectModel::Kernel {
                features: KernelFeatures::Diversity(measure),
                split_seed: cfg.seed,
                fit,
            };
            (Method::DiversityKiv, model)
        }
    };
    Ok(CausalFit {
        method: tag,
        p: ds.p(),
        q: ds.q(),
        n: ds.n(),
        model,
        diagnostics: Diagnostics {
            f_stats,
            converged: true,
            under_identified: false,
            lambda_path_meta: None,
        },
    })
}

/// One configuration bundle covering every estimator, so callers can
/// dispatch on a [`Method`] tag alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub lc: LcConfig,
    pub dirichlet: DirichletConfig,
    pub kernel: KernelConfig,
    /// Measure used by the diversity methods.
    pub diversity: Diversity,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lc: LcConfig::default(),
            dirichlet: DirichletConfig::default(),
            kernel: KernelConfig::default(),
            diversity: Diversity::Shannon,
        }
    }
}

/// Runs the estimator named by `method` with the matching slice of `cfg`.
pub fn fit_method(ds: &IvDataset, method: Method, cfg: &FitConfig) -> Result<CausalFit> {
    match method {
        Method::TwoSls => fit_2sls(ds, TreatmentCoords::Raw),
        Method::TwoSlsIlr => fit_2sls(ds, TreatmentCoords::Ilr),
        Method::IlrLc => fit_ilr_lc(ds, &cfg.lc),
        Method::AlrLc => fit_alr_lc(ds, &cfg.lc),
        Method::DirLc => fit_dir_lc(
            ds,
            &DirLcConfig { dirichlet: cfg.dirichlet.clone(), lc: cfg.lc.clone() },
        ),
        Method::KivIlr => fit_kiv_ilr(ds, &cfg.kernel),
        Method::OnlyLc => fit_only_lc(ds, &cfg.lc),
        Method::DiversityTwoSls => fit_diversity_iv(ds, cfg.diversity, &ScalarMethod::TwoSls),
        Method::DiversityKiv => {
            fit_diversity_iv(ds, cfg.diversity, &ScalarMethod::Kiv(cfg.kernel.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{preset, SettingSpec};
    use crate::logratio::alr;
    use crate::rng::stream_rng;
    use crate::simplex::Composition;
    use rand::Rng;

    fn random_instance(
        seed: u64,
        n: usize,
        q: usize,
        d: usize,
    ) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
        let mut rng = stream_rng(seed, 90);
        let z = DMatrix::from_fn(n, q, |_, _| rng.gen_range(-1.0..1.0));
        let a = DMatrix::from_fn(q, d, |_, _| rng.gen_range(-1.0..1.0));
        let mut t = &z * &a;
        t.apply(|v| *v += 0.4 * rng.gen_range(-1.0..1.0_f64));
        let beta = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
        let mut y = &t * &beta;
        y.apply(|v| *v += 1.5 + 0.3 * rng.gen_range(-1.0..1.0_f64));
        (z, t, y)
    }

    #[test]
    fn two_sls_matches_an_explicit_two_stage_regression() {
        for seed in 0..20 {
            let q = 1 + (seed as usize % 4);
            let d = 1 + (seed as usize % q.min(3));
            let (z, t, y) = random_instance(seed, 80, q, d);
            let (coef, intercept) = two_sls_core(&z, &t, &y).unwrap();

            let stage1 = fit_ols(&z, &t).unwrap();
            let fitted = stage1.fitted(&z);
            let y_mat = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
            let stage2 = fit_ols(&fitted, &y_mat).unwrap();
            assert!((intercept - stage2.intercept[0]).abs() < 1e-8);
            for j in 0..d {
                assert!((coef[j] - stage2.coef[(j, 0)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn just_identified_two_sls_reduces_to_the_instrument_solve() {
        for seed in 100..120 {
            let q = 1 + (seed as usize % 3);
            let (z, t, y) = random_instance(seed, 60, q, q);
            let (coef, intercept) = two_sls_core(&z, &t, &y).unwrap();

            let z1 = with_intercept(&z);
            let t1 = with_intercept(&t);
            let direct = (z1.transpose() * &t1)
                .lu()
                .solve(&(z1.transpose() * &y))
                .unwrap();
            assert!((intercept - direct[0]).abs() < 1e-8);
            for j in 0..q {
                assert!((coef[j] - direct[j + 1]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn two_sls_recovers_the_structural_slope_without_confounding() {
        let mut rng = stream_rng(5, 91);
        let n = 10_000;
        let z = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 0.8]);
        let mut t = &z * &a;
        t.apply(|v| *v += 0.5 * rng.gen_range(-1.0..1.0_f64));
        let beta = DVector::from_row_slice(&[2.0, -1.0]);
        let mut y = &t * &beta;
        y.apply(|v| *v += 1.0 + 0.3 * rng.gen_range(-1.0..1.0_f64));

        let (coef, intercept) = two_sls_core(&z, &t, &y).unwrap();
        assert!((coef[0] - 2.0).abs() < 0.05);
        assert!((coef[1] + 1.0).abs() < 0.05);
        assert!((intercept - 1.0).abs() < 0.05);
    }

    #[test]
    fn more_treatments_than_instruments_is_rejected() {
        let (z, t, y) = random_instance(7, 50, 3, 3);
        let z_short = z.columns(0, 2).into_owned();
        match two_sls_core(&z_short, &t, &y) {
            Err(Error::UnderIdentified { q, d }) => {
                assert_eq!((q, d), (2, 3));
            }
            other => panic!("expected under-identification, got {other:?}"),
        }
    }

    #[test]
    fn collinear_treatments_are_rejected() {
        let (z, t, y) = random_instance(9, 60, 3, 2);
        let mut t_dup = DMatrix::zeros(60, 3);
        t_dup.view_mut((0, 0), (60, 2)).copy_from(&t);
        t_dup.column_mut(2).copy_from(&t.column(0));
        let err = two_sls_core(&z, &t_dup, &y).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }), "got {err:?}");
    }

    fn a_p3_dataset(seed: u64, n: usize) -> IvDataset {
        let mut spec = preset("A-p3").unwrap();
        spec.n = n;
        let scenario = spec.materialize(seed).unwrap();
        IvDataset::from(scenario.generate(n).unwrap())
    }

    #[test]
    fn ilr_two_sls_recovers_the_structural_coefficients_under_confounding() {
        let ds = a_p3_dataset(3, 40_000);
        let fit = fit_2sls(&ds, TreatmentCoords::Ilr).unwrap();
        let beta_ilr = fit.beta_ilr().unwrap();
        assert!((beta_ilr[0] - 4.0).abs() < 0.3, "beta_ilr = {beta_ilr:?}");
        assert!((beta_ilr[1] - 1.0).abs() < 0.3, "beta_ilr = {beta_ilr:?}");
        assert_eq!(fit.diagnostics.f_stats.len(), 2);
        assert!(fit.diagnostics.f_stats.iter().all(|f| *f > 10.0));
    }

    #[test]
    fn naive_raw_core_matches_a_direct_projection_solve_when_well_posed() {
        // With q >= p the projected design is full rank and the minimum-norm
        // solve coincides with the plain inverse of T' P_Z T.
        for seed in 40..50 {
            let (z, t, y) = random_instance(seed, 120, 4, 3);
            let (coef, under) = naive_raw_core(&z, &t, &y).unwrap();
            assert!(!under);

            let pz = &z * (z.transpose() * &z).try_inverse().unwrap() * z.transpose();
            let direct = (t.transpose() * &pz * &t)
                .try_inverse()
                .unwrap()
                * (t.transpose() * &pz * &y);
            for j in 0..3 {
                assert!((coef[j] - direct[j]).abs() < 1e-7, "seed {seed} coord {j}");
            }
        }
    }

    #[test]
    fn naive_raw_core_flags_the_singular_solve_when_under_identified() {
        // q < p leaves the projected Gram matrix singular up to rounding;
        // the baseline keeps whatever the literal solve produced, flags it,
        // and stays deterministic.
        let (z, t, y) = random_instance(31, 100, 2, 3);
        let (coef, under) = naive_raw_core(&z, &t, &y).unwrap();
        assert!(under);
        assert!(coef.iter().all(|c| c.is_finite()));
        let (again, _) = naive_raw_core(&z, &t, &y).unwrap();
        assert_eq!(coef, again);
    }

    #[test]
    fn raw_two_sls_keeps_all_components_and_flags_under_identification() {
        let ds = a_p3_dataset(4, 400);
        let fit = fit_2sls(&ds, TreatmentCoords::Raw).unwrap();
        match &fit.model {
            EffectModel::RawSimplex { coef } => {
                assert_eq!(coef.len(), 3);
                assert!(coef.iter().all(|c| c.is_finite()));
            }
            other => panic!("expected a raw-simplex model, got {other:?}"),
        }
        assert_eq!(fit.method, Method::TwoSls);
        // q = 2 instruments cannot pin down 3 free raw coefficients.
        assert!(fit.diagnostics.under_identified);
        let x = Composition::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(fit.predict_effect(&x).unwrap().is_finite());
    }

    #[test]
    fn unconfounded_data_makes_only_lc_and_ilr_lc_agree() {
        let mut spec = preset("A-p3").unwrap();
        spec.n = 1000;
        match &mut spec.setting {
            SettingSpec::A(a) => {
                a.c_x = vec![0.0, 0.0];
                a.c_y = 0.0;
            }
            SettingSpec::B(_) => unreachable!(),
        }
        let scenario = spec.materialize(11).unwrap();
        let truth = scenario.ground_truth().unwrap();
        let ds = IvDataset::from(scenario.generate(1000).unwrap());

        let cfg = LcConfig::default();
        let naive = fit_only_lc(&ds, &cfg).unwrap();
        let two_stage = fit_ilr_lc(&ds, &cfg).unwrap();

        let meta_naive = naive.diagnostics.lambda_path_meta.as_ref().unwrap();
        let meta_two = two_stage.diagnostics.lambda_path_meta.as_ref().unwrap();
        assert_eq!(meta_naive.selected, meta_two.selected);

        let b_naive = naive.beta_log().unwrap();
        let b_two = two_stage.beta_log().unwrap();
        for j in 0..3 {
            assert!(
                (b_naive[j] - truth.beta_log[j]).abs() < 1e-6,
                "naive beta {b_naive:?} vs truth {:?}",
                truth.beta_log
            );
            assert!((b_naive[j] - b_two[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn ilr_lc_beats_the_naive_regression_under_confounding() {
        let ds = a_p3_dataset(21, 2000);
        let cfg = LcConfig::default();
        let two_stage = fit_ilr_lc(&ds, &cfg).unwrap();
        let naive = fit_only_lc(&ds, &cfg).unwrap();
        let scenario = preset("A-p3").unwrap().materialize(21).unwrap();
        let truth = scenario.ground_truth().unwrap();

        let sq_err = |fit: &CausalFit| -> f64 {
            let b = fit.beta_log().unwrap();
            b.iter()
                .zip(&truth.beta_log)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let err_two = sq_err(&two_stage);
        let err_naive = sq_err(&naive);
        assert!(err_two < 3.0, "two-stage error {err_two}");
        assert!(err_naive > 4.0 * err_two, "naive {err_naive} vs {err_two}");
    }

    #[test]
    fn alr_and_ilr_first_stages_produce_the_same_fitted_compositions() {
        let ds = a_p3_dataset(13, 500);
        let basis = LogRatioBasis::helmert(3).unwrap();

        let t_ilr = ds.x_ilr_matrix(&basis).unwrap();
        let ilr_fit = fit_ols(ds.z(), &t_ilr).unwrap();
        let via_ilr = ilr_fitted_to_log(&ilr_fit.fitted(ds.z()), &basis).unwrap();

        let mut t_alr = DMatrix::zeros(ds.n(), 2);
        for (i, x) in ds.x().iter().enumerate() {
            let coords = alr(x).unwrap();
            t_alr.row_mut(i).copy_from(&coords.transpose());
        }
        let alr_fit = fit_ols(ds.z(), &t_alr).unwrap();
        let alr_fitted = alr_fit.fitted(ds.z());
        for i in 0..ds.n() {
            let coords = DVector::from_iterator(2, alr_fitted.row(i).iter().copied());
            let comp = crate::logratio::alr_inv(&coords).unwrap();
            for j in 0..3 {
                assert!(
                    (comp.parts()[j].ln() - via_ilr[(i, j)]).abs() < 1e-8,
                    "row {i} part {j}"
                );
            }
        }

        let cfg = LcConfig::default();
        let a = fit_alr_lc(&ds, &cfg).unwrap();
        let b = fit_ilr_lc(&ds, &cfg).unwrap();
        assert_eq!(a.method, Method::AlrLc);
        let (ba, bb) = (a.beta_log().unwrap(), b.beta_log().unwrap());
        for j in 0..3 {
            assert!((ba[j] - bb[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_first_stage_produces_a_finite_log_contrast_model() {
        let ds = a_p3_dataset(17, 400);
        let fit = fit_dir_lc(&ds, &DirLcConfig::default()).unwrap();
        assert_eq!(fit.method, Method::DirLc);
        let beta = fit.beta_log().unwrap();
        assert!(beta.iter().all(|b| b.is_finite()));
        assert!(beta.iter().sum::<f64>().abs() < 1e-8);
        assert!(fit.diagnostics.lambda_path_meta.is_some());
        assert_eq!(fit.diagnostics.f_stats.len(), 2);
    }

    #[test]
    fn kernel_iv_fits_are_reproducible_and_evaluable() {
        let ds = a_p3_dataset(19, 600);
        let cfg = KernelConfig::default();
        let fit1 = fit_kiv_ilr(&ds, &cfg).unwrap();
        let fit2 = fit_kiv_ilr(&ds, &cfg).unwrap();
        let probe = [
            Composition::new(vec![0.6, 0.3, 0.1]).unwrap(),
            Composition::new(vec![0.2, 0.5, 0.3]).unwrap(),
            Composition::new(vec![1.0, 1.0, 1.0]).unwrap(),
        ];
        for x in &probe {
            let a = fit1.predict_effect(x).unwrap();
            let b = fit2.predict_effect(x).unwrap();
            assert!(a.is_finite());
            assert_eq!(a, b);
        }
        assert_eq!(fit1.method, Method::KivIlr);
        assert!(fit1.beta_log().is_none());
    }

    #[test]
    fn diversity_two_sls_is_exact_on_a_noiseless_binary_design() {
        let c0 = Composition::new(vec![0.7, 0.2, 0.1]).unwrap();
        let c1 = Composition::new(vec![0.5, 0.3, 0.2]).unwrap();
        let n = 40;
        let mut z = DMatrix::zeros(n, 1);
        let mut xs = Vec::with_capacity(n);
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let arm = i % 2;
            z[(i, 0)] = arm as f64;
            let x = if arm == 0 { c0.clone() } else { c1.clone() };
            let s = crate::simplex::diversity(&x, Diversity::Shannon);
            y[i] = 1.0 + 2.0 * s;
            xs.push(x);
        }
        let ds = IvDataset::new(z, xs, y).unwrap();
        let fit = fit_diversity_iv(&ds, Diversity::Shannon, &ScalarMethod::TwoSls).unwrap();
        match &fit.model {
            EffectModel::Scalar { measure, slope, intercept } => {
                assert_eq!(*measure, Diversity::Shannon);
                assert!((slope - 2.0).abs() < 1e-8, "slope {slope}");
                assert!((intercept - 1.0).abs() < 1e-8);
            }
            other => panic!("expected a scalar model, got {other:?}"),
        }
        assert_eq!(fit.method, Method::DiversityTwoSls);
        // The first stage is noiseless, so the F statistic hits the clamp.
        assert!(fit.diagnostics.f_stats[0] >= 1e14);
    }

    #[test]
    fn diversity_kiv_runs_on_generated_data() {
        let ds = a_p3_dataset(23, 600);
        let fit =
            fit_diversity_iv(&ds, Diversity::Simpson, &ScalarMethod::Kiv(KernelConfig::default()))
                .unwrap();
        assert_eq!(fit.method, Method::DiversityKiv);
        let x = Composition::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert!(fit.predict_effect(&x).unwrap().is_finite());
    }

    #[test]
    fn estimates_are_bit_reproducible() {
        let cfg = LcConfig::default();
        let a = fit_ilr_lc(&a_p3_dataset(29, 800), &cfg).unwrap();
        let b = fit_ilr_lc(&a_p3_dataset(29, 800), &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
