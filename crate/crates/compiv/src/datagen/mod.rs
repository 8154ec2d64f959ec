//! Synthetic benchmark generators with hidden confounding.
//!
//! Two families of scenarios are provided. Setting A places a linear model
//! in ilr coordinates: instruments and a Gaussian confounder shift the
//! coordinates of the treatment composition, and the outcome is linear in
//! those coordinates (optionally with an additive cubic distortion). Setting
//! B generates count data: zero-inflated negative binomial counts whose
//! means depend on the instruments are closed to a composition and then
//! perturbed by a confounder acting along a fixed compositional direction.
//!
//! A [`SimulationSpec`] holds symbolic parameters (rules, head/tail
//! patterns); [`SimulationSpec::materialize`] resolves them into a concrete
//! [`Scenario`] for one seed. All randomness is drawn from per-purpose
//! streams of one seed, so scenario constants, training data, interventional
//! draws, and oracle estimates never share random state.

mod presets;
mod truth;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logratio::LogRatioBasis;
use crate::rng::{stream_rng, INTERVENTION_STREAM, SCENARIO_STREAM, TRAIN_STREAM};
use crate::simplex::{closure, power, Composition};

pub use presets::{list_presets, preset};
pub use truth::GroundTruth;

/// Instrument-to-target coefficient matrix, either given explicitly or as a
/// structural rule resolved at materialization time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AlphaRule {
    /// Row `k` holds instrument `k`'s effect on every target dimension.
    Explicit { rows: Vec<Vec<f64>> },
    /// `alpha[k][j] = 1` when `k != j` and both fall inside the leading
    /// `size x size` block; all other entries are zero.
    OffDiagonalBlock { size: usize },
}

impl AlphaRule {
    fn materialize(&self, q: usize, d: usize) -> Result<DMatrix<f64>> {
        match self {
            AlphaRule::Explicit { rows } => {
                if rows.len() != q {
                    return Err(Error::invalid(format!(
                        "alpha has {} rows, expected q = {q}",
                        rows.len()
                    )));
                }
                for (k, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(Error::invalid(format!(
                            "alpha row {k} has {} entries, expected {d}",
                            row.len()
                        )));
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::invalid(format!("alpha row {k} has non-finite entries")));
                    }
                }
                Ok(DMatrix::from_fn(q, d, |k, j| rows[k][j]))
            }
            AlphaRule::OffDiagonalBlock { size } => {
                let s = *size;
                if s > q || s > d {
                    return Err(Error::invalid(format!(
                        "block size {s} exceeds dimensions q = {q}, d = {d}"
                    )));
                }
                Ok(DMatrix::from_fn(q, d, |k, j| {
                    if k != j && k < s && j < s {
                        1.0
                    } else {
                        0.0
                    }
                }))
            }
        }
    }
}

/// A parameter vector given as an explicit head plus random tail entries
/// drawn uniformly from a small choice set at materialization time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadTail {
    pub head: Vec<f64>,
    /// Values the tail entries are drawn from; may be empty when the head
    /// already covers the full length.
    pub tail_choices: Vec<f64>,
}

impl HeadTail {
    pub fn explicit(values: Vec<f64>) -> Self {
        HeadTail { head: values, tail_choices: Vec::new() }
    }

    fn materialize(&self, len: usize, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        if self.head.len() > len {
            return Err(Error::invalid(format!(
                "head has {} entries but the vector length is {len}",
                self.head.len()
            )));
        }
        if self.head.len() < len && self.tail_choices.is_empty() {
            return Err(Error::invalid(
                "tail entries required but no choices were given",
            ));
        }
        let mut out = DVector::zeros(len);
        for (i, v) in self.head.iter().enumerate() {
            out[i] = *v;
        }
        for i in self.head.len()..len {
            let pick = rng.gen_range(0..self.tail_choices.len());
            out[i] = self.tail_choices[pick];
        }
        Ok(out)
    }
}

/// A parameter vector given as an explicit head with the remainder set to a
/// constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadFill {
    pub head: Vec<f64>,
    pub fill: f64,
}

impl HeadFill {
    pub fn explicit(values: Vec<f64>) -> Self {
        HeadFill { head: values, fill: 0.0 }
    }

    fn materialize(&self, len: usize) -> Result<DVector<f64>> {
        if self.head.len() > len {
            return Err(Error::invalid(format!(
                "head has {} entries but the vector length is {len}",
                self.head.len()
            )));
        }
        let mut out = DVector::from_element(len, self.fill);
        for (i, v) in self.head.iter().enumerate() {
            out[i] = *v;
        }
        Ok(out)
    }
}

/// Structural outcome coefficient, in either coordinate system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coords", content = "values", rename_all = "snake_case")]
pub enum BetaSpec {
    /// `p - 1` ilr coordinates.
    Ilr(Vec<f64>),
    /// `p` log-scale coefficients summing to zero.
    Log(Vec<f64>),
}

/// Setting A: linear confounded model in ilr coordinates.
///
/// `ilr(X) = alpha0 + alpha' z + c_x u` with `z ~ U(0,1)^q` and
/// `u ~ N(mu_c, 1)`; the outcome is `y = beta0 + beta' ilr(X) + c_y u`, or
/// with `nonlinear` set,
/// `y = beta0 + beta' ilr(X) / 10 + sum_k (ilr_k(X) + 1)^3 / 20 + c_y u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingA {
    pub p: usize,
    pub q: usize,
    /// Confounder mean.
    pub mu_c: f64,
    /// Baseline ilr coordinates, length `p - 1`.
    pub alpha0: Vec<f64>,
    pub alpha: AlphaRule,
    /// Confounder loading on each ilr coordinate, length `p - 1`.
    pub c_x: Vec<f64>,
    pub beta0: f64,
    pub beta: BetaSpec,
    /// Confounder loading on the outcome.
    pub c_y: f64,
    pub nonlinear: bool,
}

/// Setting B: zero-inflated negative binomial counts closed to a composition
/// and perturbed by a compositional confounder.
///
/// Counts `W_ij ~ ZINB(mu_ij, theta, eta_j)` with `mu_i = alpha0 + alpha' z_i`,
/// `z ~ U(z_range)^q`. The treatment is `X_i = C(W_i) (+) (u_i (*) omega_c)`
/// with `u ~ U(u_range)`, and the outcome is
/// `y = beta0 + beta_log' log X + c_y' log(u (*) omega_c)`. When any count in
/// a generated batch is zero, `0.5` is added to every count before closure
/// and the batch is flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingB {
    pub p: usize,
    pub q: usize,
    pub z_range: (f64, f64),
    pub u_range: (f64, f64),
    /// Baseline count means, length `p`.
    pub alpha0: HeadTail,
    pub alpha: AlphaRule,
    /// Negative binomial dispersion.
    pub theta: f64,
    /// Per-component zero-inflation probabilities, length `p`.
    pub eta: HeadFill,
    /// Confounding direction on the simplex, length `p`; closed after
    /// materialization.
    pub omega_c: HeadTail,
    pub beta0: f64,
    /// Structural log-contrast coefficients, length `p`, summing to zero.
    pub beta_log: Vec<f64>,
    /// Confounder loadings on the outcome, length `p`.
    pub c_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingSpec {
    A(SettingA),
    B(SettingB),
}

/// A scenario family plus its default sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub setting: SettingSpec,
    /// Default training-sample size.
    pub n: usize,
    /// Default number of interventional evaluation points.
    pub m_interventions: usize,
}

pub(crate) struct ScenarioA {
    pub p: usize,
    pub q: usize,
    pub mu_c: f64,
    pub alpha0: DVector<f64>,
    /// `q x (p - 1)`.
    pub alpha: DMatrix<f64>,
    pub c_x: DVector<f64>,
    pub beta0: f64,
    pub beta_ilr: DVector<f64>,
    pub beta_log: DVector<f64>,
    pub c_y: f64,
    pub nonlinear: bool,
    pub basis: LogRatioBasis,
}

pub(crate) struct ScenarioB {
    pub p: usize,
    pub q: usize,
    pub z_range: (f64, f64),
    pub u_range: (f64, f64),
    pub alpha0: DVector<f64>,
    /// `q x p`.
    pub alpha: DMatrix<f64>,
    pub theta: f64,
    pub eta: DVector<f64>,
    pub omega_c: Composition,
    pub beta0: f64,
    pub beta_log: DVector<f64>,
    pub c_y: DVector<f64>,
}

pub(crate) enum ScenarioKind {
    A(ScenarioA),
    B(ScenarioB),
}

/// A fully resolved scenario for one seed.
pub struct Scenario {
    pub(crate) kind: ScenarioKind,
    pub seed: u64,
    /// Default training-sample size carried over from the spec.
    pub n_default: usize,
    /// Default interventional-sample size carried over from the spec.
    pub m_default: usize,
}

/// One generated dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Instruments, `n x q`.
    pub z: DMatrix<f64>,
    /// Treatment compositions.
    pub x: Vec<Composition>,
    /// Outcomes.
    pub y: DVector<f64>,
    /// True if zero counts forced a pseudo-count shift (Setting B only).
    pub pseudo_counted: bool,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.first().map_or(0, |c| c.len())
    }

    pub fn q(&self) -> usize {
        self.z.ncols()
    }

    /// Componentwise logs of the treatment, `n x p`.
    pub fn x_log_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let p = self.p();
        DMatrix::from_fn(n, p, |i, j| self.x[i].parts()[j].ln())
    }

    /// ilr coordinates of the treatment, `n x (p - 1)`.
    pub fn x_ilr_matrix(&self, basis: &LogRatioBasis) -> Result<DMatrix<f64>> {
        let n = self.n();
        let d = basis.dim();
        let mut out = DMatrix::zeros(n, d);
        for i in 0..n {
            let coords = crate::logratio::ilr(&self.x[i], basis)?;
            for j in 0..d {
                out[(i, j)] = coords[j];
            }
        }
        Ok(out)
    }
}

fn validate_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} must be finite")));
    }
    Ok(())
}

impl SimulationSpec {
    /// Number of treatment components.
    pub fn p(&self) -> usize {
        match &self.setting {
            SettingSpec::A(a) => a.p,
            SettingSpec::B(b) => b.p,
        }
    }

    /// Number of instruments.
    pub fn q(&self) -> usize {
        match &self.setting {
            SettingSpec::A(a) => a.q,
            SettingSpec::B(b) => b.q,
        }
    }

    /// Resolve all symbolic parameters into a concrete scenario for `seed`.
    ///
    /// Random tail entries are drawn from the scenario stream of `seed`, so
    /// the same spec and seed always produce the same scenario.
    pub fn materialize(&self, seed: u64) -> Result<Scenario> {
        if self.n < 2 {
            return Err(Error::invalid("default sample size must be at least 2"));
        }
        if self.m_interventions == 0 {
            return Err(Error::invalid("need at least one interventional point"));
        }
        let mut rng = stream_rng(seed, SCENARIO_STREAM);
        let kind = match &self.setting {
            SettingSpec::A(a) => ScenarioKind::A(a.materialize()?),
            SettingSpec::B(b) => ScenarioKind::B(b.materialize(&mut rng)?),
        };
        Ok(Scenario {
            kind,
            seed,
            n_default: self.n,
            m_default: self.m_interventions,
        })
    }
}

impl SettingA {
    fn materialize(&self) -> Result<ScenarioA> {
        let p = self.p;
        let q = self.q;
        if p < 2 {
            return Err(Error::invalid("setting A needs p >= 2"));
        }
        if q == 0 {
            return Err(Error::invalid("setting A needs at least one instrument"));
        }
        let d = p - 1;
        if self.alpha0.len() != d {
            return Err(Error::invalid(format!(
                "alpha0 has {} entries, expected p - 1 = {d}",
                self.alpha0.len()
            )));
        }
        if self.c_x.len() != d {
            return Err(Error::invalid(format!(
                "c_x has {} entries, expected p - 1 = {d}",
                self.c_x.len()
            )));
        }
        validate_finite("alpha0", &self.alpha0)?;
        validate_finite("c_x", &self.c_x)?;
        if !(self.mu_c.is_finite() && self.beta0.is_finite() && self.c_y.is_finite()) {
            return Err(Error::invalid("scalar parameters must be finite"));
        }
        let alpha = self.alpha.materialize(q, d)?;
        let basis = LogRatioBasis::helmert(p)?;
        let (beta_ilr, beta_log) = match &self.beta {
            BetaSpec::Ilr(b) => {
                if b.len() != d {
                    return Err(Error::invalid(format!(
                        "beta has {} ilr coordinates, expected p - 1 = {d}",
                        b.len()
                    )));
                }
                validate_finite("beta", b)?;
                let bi = DVector::from_row_slice(b);
                let bl = crate::logratio::beta_ilr_to_log(&bi, &basis)?;
                (bi, bl)
            }
            BetaSpec::Log(b) => {
                if b.len() != p {
                    return Err(Error::invalid(format!(
                        "beta has {} log coordinates, expected p = {p}",
                        b.len()
                    )));
                }
                validate_finite("beta", b)?;
                let bl = DVector::from_row_slice(b);
                let bi = crate::logratio::beta_log_to_ilr(&bl, &basis)?;
                (bi, bl)
            }
        };
        Ok(ScenarioA {
            p,
            q,
            mu_c: self.mu_c,
            alpha0: DVector::from_row_slice(&self.alpha0),
            alpha,
            c_x: DVector::from_row_slice(&self.c_x),
            beta0: self.beta0,
            beta_ilr,
            beta_log,
            c_y: self.c_y,
            nonlinear: self.nonlinear,
            basis,
        })
    }
}

impl SettingB {
    fn materialize(&self, rng: &mut ChaCha8Rng) -> Result<ScenarioB> {
        let p = self.p;
        let q = self.q;
        if p < 2 {
            return Err(Error::invalid("setting B needs p >= 2"));
        }
        if q == 0 {
            return Err(Error::invalid("setting B needs at least one instrument"));
        }
        if !(self.z_range.0 < self.z_range.1) {
            return Err(Error::invalid("z range must be increasing"));
        }
        if !(self.u_range.0 > 0.0 && self.u_range.0 < self.u_range.1) {
            return Err(Error::invalid(
                "u range must be increasing and strictly positive",
            ));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid("dispersion theta must be positive"));
        }
        if self.beta_log.len() != p {
            return Err(Error::invalid(format!(
                "beta_log has {} entries, expected p = {p}",
                self.beta_log.len()
            )));
        }
        validate_finite("beta_log", &self.beta_log)?;
        let beta_sum: f64 = self.beta_log.iter().sum();
        if beta_sum.abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "beta_log must sum to zero, got {beta_sum}"
            )));
        }
        if self.c_y.len() != p {
            return Err(Error::invalid(format!(
                "c_y has {} entries, expected p = {p}",
                self.c_y.len()
            )));
        }
        validate_finite("c_y", &self.c_y)?;

        // Materialization order is part of the seed contract: alpha0 tail
        // first, then omega_c tail.
        let alpha0 = self.alpha0.materialize(p, rng)?;
        if alpha0.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("baseline count means must be positive"));
        }
        let omega_raw = self.omega_c.materialize(p, rng)?;
        if omega_raw.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("confounding direction must be positive"));
        }
        let omega_c = closure(omega_raw.as_slice())?;
        let eta = self.eta.materialize(p)?;
        if eta.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::invalid(
                "zero-inflation probabilities must lie in [0, 1)",
            ));
        }
        let alpha = self.alpha.materialize(q, p)?;

        Ok(ScenarioB {
            p,
            q,
            z_range: self.z_range,
            u_range: self.u_range,
            alpha0,
            alpha,
            theta: self.theta,
            eta,
            omega_c,
            beta0: self.beta0,
            beta_log: DVector::from_row_slice(&self.beta_log),
            c_y: DVector::from_row_slice(&self.c_y),
        })
    }
}

/// One zero-inflated negative binomial draw with mean `mu` (conditional on
/// not being inflated), dispersion `theta`, and inflation probability `eta`.
///
/// The negative binomial arises as a Gamma-Poisson mixture:
/// `lambda ~ Gamma(theta, mu / theta)`, `W ~ Poisson(lambda)`, giving mean
/// `mu` and variance `mu + mu^2 / theta`.
pub fn sample_zinb(rng: &mut ChaCha8Rng, mu: f64, theta: f64, eta: f64) -> Result<u64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("count mean must be positive, got {mu}")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::invalid(format!("dispersion must be positive, got {theta}")));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid(format!(
            "inflation probability must lie in [0, 1), got {eta}"
        )));
    }
    if rng.gen_bool(eta) {
        return Ok(0);
    }
    let gamma = Gamma::new(theta, mu / theta)
        .map_err(|e| Error::invalid(format!("gamma parameters rejected: {e}")))?;
    let lambda: f64 = gamma.sample(rng);
    if lambda < 1e-12 {
        return Ok(0);
    }
    let poisson = Poisson::new(lambda)
        .map_err(|e| Error::numerical(format!("poisson rate rejected: {e}")))?;
    let draw: f64 = poisson.sample(rng);
    Ok(draw as u64)
}

#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct DetailedSample {
    pub z: DMatrix<f64>,
    pub u: DVector<f64>,
    pub x: Vec<Composition>,
    pub y: DVector<f64>,
    pub pseudo_counted: bool,
    /// Raw counts before any pseudo-count shift (Setting B only).
    pub counts: Option<Vec<Vec<u64>>>,
}

impl Scenario {
    pub fn p(&self) -> usize {
        match &self.kind {
            ScenarioKind::A(a) => a.p,
            ScenarioKind::B(b) => b.p,
        }
    }

    pub fn q(&self) -> usize {
        match &self.kind {
            ScenarioKind::A(a) => a.q,
            ScenarioKind::B(b) => b.q,
        }
    }

    /// Structural linear log-contrast coefficients.
    pub fn beta_log(&self) -> &DVector<f64> {
        match &self.kind {
            ScenarioKind::A(a) => &a.beta_log,
            ScenarioKind::B(b) => &b.beta_log,
        }
    }

    /// Generate a training dataset of `n` samples from the train stream.
    pub fn generate(&self, n: usize) -> Result<Dataset> {
        let detailed = self.generate_detailed(n, TRAIN_STREAM)?;
        Ok(Dataset {
            z: detailed.z,
            x: detailed.x,
            y: detailed.y,
            pseudo_counted: detailed.pseudo_counted,
        })
    }

    /// Draw `m` fresh treatment compositions from the intervention stream.
    ///
    /// These follow the observational marginal of the treatment and serve
    /// as evaluation points for interventional predictions.
    pub fn interventional_sample(&self, m: usize) -> Result<Vec<Composition>> {
        Ok(self.generate_detailed(m, INTERVENTION_STREAM)?.x)
    }

    pub(crate) fn generate_detailed(&self, n: usize, stream: u64) -> Result<DetailedSample> {
        if n == 0 {
            return Err(Error::invalid("sample size must be positive"));
        }
        let mut rng = stream_rng(self.seed, stream);
        match &self.kind {
            ScenarioKind::A(a) => {
                let mut z = DMatrix::zeros(n, a.q);
                let mut u = DVector::zeros(n);
                let mut x = Vec::with_capacity(n);
                let mut y = DVector::zeros(n);
                let d = a.p - 1;
                for i in 0..n {
                    for k in 0..a.q {
                        z[(i, k)] = rng.gen::<f64>();
                    }
                    let ui: f64 = a.mu_c + <StandardNormal as Distribution<f64>>::sample(
                        &StandardNormal,
                        &mut rng,
                    );
                    u[i] = ui;
                    let mut coords = DVector::zeros(d);
                    for j in 0..d {
                        let mut v = a.alpha0[j] + a.c_x[j] * ui;
                        for k in 0..a.q {
                            v += a.alpha[(k, j)] * z[(i, k)];
                        }
                        coords[j] = v;
                    }
                    let comp = crate::logratio::ilr_inv(&coords, &a.basis)?;
                    y[i] = structural_a(a, &coords) + a.c_y * ui;
                    x.push(comp);
                }
                Ok(DetailedSample { z, u, x, y, pseudo_counted: false, counts: None })
            }
            ScenarioKind::B(b) => {
                let mut z = DMatrix::zeros(n, b.q);
                let mut u = DVector::zeros(n);
                let mut counts = vec![vec![0u64; b.p]; n];
                let mut any_zero = false;
                for i in 0..n {
                    for k in 0..b.q {
                        z[(i, k)] = rng.gen_range(b.z_range.0..b.z_range.1);
                    }
                    u[i] = rng.gen_range(b.u_range.0..b.u_range.1);
                    for j in 0..b.p {
                        let mut mu = b.alpha0[j];
                        for k in 0..b.q {
                            mu += b.alpha[(k, j)] * z[(i, k)];
                        }
                        if !(mu > 0.0) {
                            return Err(Error::degenerate(format!(
                                "count mean for component {j} fell to {mu}; \
                                 check alpha parameters against the z range"
                            )));
                        }
                        let w = sample_zinb(&mut rng, mu, b.theta, b.eta[j])?;
                        any_zero |= w == 0;
                        counts[i][j] = w;
                    }
                }
                let mut x = Vec::with_capacity(n);
                let mut y = DVector::zeros(n);
                for i in 0..n {
                    let parts: Vec<f64> = counts[i]
                        .iter()
                        .map(|&w| w as f64 + if any_zero { 0.5 } else { 0.0 })
                        .collect();
                    let base = closure(&parts)?;
                    let shift = power(u[i], &b.omega_c)?;
                    let comp = crate::simplex::perturb(&base, &shift)?;
                    let mut yi = b.beta0;
                    for j in 0..b.p {
                        yi += b.beta_log[j] * comp.parts()[j].ln();
                        yi += b.c_y[j] * shift.parts()[j].ln();
                    }
                    y[i] = yi;
                    x.push(comp);
                }
                Ok(DetailedSample { z, u, x, y, pseudo_counted: any_zero, counts: Some(counts) })
            }
        }
    }
}

/// Structural part of the Setting A outcome (everything except the
/// confounder term), as a function of the ilr coordinates.
pub(crate) fn structural_a(a: &ScenarioA, coords: &DVector<f64>) -> f64 {
    if a.nonlinear {
        let cubic: f64 = coords.iter().map(|v| (v + 1.0).powi(3)).sum();
        a.beta0 + a.beta_ilr.dot(coords) / 10.0 + cubic / 20.0
    } else {
        a.beta0 + a.beta_ilr.dot(coords)
    }
}
