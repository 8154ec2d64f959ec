//! Ground-truth interventional effects.
//!
//! For a scenario with structural outcome `y = f(x, u)`, the interventional
//! effect of a treatment composition is `E_U[f(x, U)]`. The confounder enters
//! additively in every setting, so the effect splits into a structural part
//! evaluated at `x` plus a constant: analytic for Setting A, a Monte Carlo
//! estimate over the confounder distribution for Setting B.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logratio::LogRatioBasis;
use crate::rng::{stream_rng, ORACLE_STREAM};
use crate::simplex::Composition;

use super::{Scenario, ScenarioB, ScenarioKind};

const ORACLE_DRAWS: usize = 1_000_000;

/// The structural effect curve of one scenario, with the confounder
/// integrated out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    /// "a" or "b".
    pub setting: String,
    pub nonlinear: bool,
    pub seed: u64,
    pub p: usize,
    pub beta0: f64,
    /// Coefficient of the linear log-contrast part of the effect curve.
    pub beta_log: Vec<f64>,
    /// `E_U` of the confounder contribution to the outcome.
    pub oracle_const: f64,
    /// Monte Carlo standard error of `oracle_const` (zero when analytic).
    pub oracle_se: f64,
}

impl GroundTruth {
    /// Interventional effect `E_U[f(x, U)]` at a treatment composition.
    pub fn true_effect(&self, x: &Composition) -> Result<f64> {
        if x.len() != self.p {
            return Err(Error::invalid(format!(
                "composition has {} parts, scenario has p = {}",
                x.len(),
                self.p
            )));
        }
        let mut v = self.beta0 + self.oracle_const;
        for (b, part) in self.beta_log.iter().zip(x.parts()) {
            v += b * part.ln();
        }
        if self.nonlinear {
            let basis = LogRatioBasis::helmert(self.p)?;
            let coords = crate::logratio::ilr(x, &basis)?;
            v += coords.iter().map(|c| (c + 1.0).powi(3)).sum::<f64>() / 20.0;
        }
        Ok(v)
    }

    /// Effects at several compositions.
    pub fn true_effects(&self, xs: &[Composition]) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(xs.len());
        for (i, x) in xs.iter().enumerate() {
            out[i] = self.true_effect(x)?;
        }
        Ok(out)
    }
}

/// Monte Carlo estimate of `E_U[c_y' log(U (*) omega_c)]` with its standard
/// error.
///
/// Closure cancels analytically: for `u (*) omega`, the log of component `j`
/// is `u log(omega_j) - log(sum_k omega_k^u)`, so each draw costs one power
/// sum rather than a simplex operation.
pub(crate) fn mc_confounder_mean(b: &ScenarioB, rng: &mut ChaCha8Rng, draws: usize) -> (f64, f64) {
    let log_omega: Vec<f64> = b.omega_c.parts().iter().map(|w| w.ln()).collect();
    let weighted: f64 = b.c_y.iter().zip(&log_omega).map(|(c, lw)| c * lw).sum();
    let c_sum: f64 = b.c_y.iter().sum();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let u = rng.gen_range(b.u_range.0..b.u_range.1);
        let pow_sum: f64 = log_omega.iter().map(|lw| (u * lw).exp()).sum();
        let t = u * weighted - c_sum * pow_sum.ln();
        sum += t;
        sum_sq += t * t;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

impl Scenario {
    /// The effect oracle for this scenario.
    ///
    /// Setting A's confounder constant is analytic (`c_y mu_c`); Setting B's
    /// is estimated once with 10^6 draws from the oracle stream, so repeated
    /// calls on the same scenario return identical values.
    pub fn ground_truth(&self) -> Result<GroundTruth> {
        match &self.kind {
            ScenarioKind::A(a) => {
                let beta_log = if a.nonlinear {
                    let scaled = a.beta_ilr.map(|v| v / 10.0);
                    crate::logratio::beta_ilr_to_log(&scaled, &a.basis)?
                } else {
                    a.beta_log.clone()
                };
                Ok(GroundTruth {
                    setting: "a".to_string(),
                    nonlinear: a.nonlinear,
                    seed: self.seed,
                    p: a.p,
                    beta0: a.beta0,
                    beta_log: beta_log.iter().copied().collect(),
                    oracle_const: a.c_y * a.mu_c,
                    oracle_se: 0.0,
                })
            }
            ScenarioKind::B(b) => {
                let mut rng = stream_rng(self.seed, ORACLE_STREAM);
                let (mean, se) = mc_confounder_mean(b, &mut rng, ORACLE_DRAWS);
                Ok(GroundTruth {
                    setting: "b".to_string(),
                    nonlinear: false,
                    seed: self.seed,
                    p: b.p,
                    beta0: b.beta0,
                    beta_log: b.beta_log.iter().copied().collect(),
                    oracle_const: mean,
                    oracle_se: se,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{preset, ScenarioKind, TRAIN_STREAM};
    use crate::simplex::closure;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn uniform_composition_reduces_to_intercept_terms() {
        let scen = preset("A-p3").unwrap().materialize(1).unwrap();
        let gt = scen.ground_truth().unwrap();
        let x = closure(&[1.0, 1.0, 1.0]).unwrap();
        // ilr coordinates vanish at the uniform composition.
        assert_abs_diff_eq!(gt.true_effect(&x).unwrap(), 0.5 + 4.0 * -3.0, epsilon = 1e-12);
    }

    #[test]
    fn nonlinear_cubic_vanishes_at_minus_one_coordinates() {
        let scen = preset("A-nonlinear").unwrap().materialize(1).unwrap();
        let gt = scen.ground_truth().unwrap();
        assert!(gt.nonlinear);
        let basis = LogRatioBasis::helmert(3).unwrap();
        let x = crate::logratio::ilr_inv(&DVector::from_row_slice(&[-1.0, -1.0]), &basis).unwrap();
        // beta0 - (6 + 2)/10 + c_y mu_c.
        let expect = 0.5 - 0.8 + 4.0 * -1.0;
        assert_abs_diff_eq!(gt.true_effect(&x).unwrap(), expect, epsilon = 1e-10);
    }

    #[test]
    fn b_oracle_matches_numerical_integration() {
        let scen = preset("B-p3").unwrap().materialize(3).unwrap();
        let gt = scen.ground_truth().unwrap();
        let ScenarioKind::B(b) = &scen.kind else { panic!() };

        // Trapezoid rule over the uniform confounder density.
        let (lo, hi) = b.u_range;
        let steps = 200_000;
        let log_omega: Vec<f64> = b.omega_c.parts().iter().map(|w| w.ln()).collect();
        let weighted: f64 = b.c_y.iter().zip(&log_omega).map(|(c, lw)| c * lw).sum();
        let c_sum: f64 = b.c_y.iter().sum();
        let f = |u: f64| {
            let pow_sum: f64 = log_omega.iter().map(|lw| (u * lw).exp()).sum();
            u * weighted - c_sum * pow_sum.ln()
        };
        let h = (hi - lo) / steps as f64;
        let mut integral = (f(lo) + f(hi)) / 2.0;
        for i in 1..steps {
            integral += f(lo + i as f64 * h);
        }
        integral *= h / (hi - lo);

        assert!(gt.oracle_se > 0.0);
        assert!(
            (gt.oracle_const - integral).abs() < 4.0 * gt.oracle_se,
            "mc {} vs quadrature {} (se {})",
            gt.oracle_const,
            integral,
            gt.oracle_se
        );
    }

    #[test]
    fn b_oracle_two_estimates_agree_within_three_standard_errors() {
        let scen = preset("B-p3").unwrap().materialize(4).unwrap();
        let gt = scen.ground_truth().unwrap();
        let ScenarioKind::B(b) = &scen.kind else { panic!() };
        let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
        let (mean2, se2) = mc_confounder_mean(b, &mut rng, 1_000_000);
        let tol = 3.0 * (gt.oracle_se.powi(2) + se2.powi(2)).sqrt();
        assert!(
            (gt.oracle_const - mean2).abs() < tol,
            "{} vs {} (tol {tol})",
            gt.oracle_const,
            mean2
        );
    }

    #[test]
    fn ground_truth_is_reproducible() {
        let scen = preset("B-p3").unwrap().materialize(9).unwrap();
        let g1 = scen.ground_truth().unwrap();
        let g2 = scen.ground_truth().unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn generated_outcomes_scatter_around_the_true_effect() {
        // Setting A: the residual y - E_U[f(x, U)] is exactly c_y (u - mu_c).
        let scen = preset("A-p3").unwrap().materialize(2).unwrap();
        let gt = scen.ground_truth().unwrap();
        let det = scen.generate_detailed(200, TRAIN_STREAM).unwrap();
        for i in 0..200 {
            let effect = gt.true_effect(&det.x[i]).unwrap();
            let residual = det.y[i] - effect;
            assert_abs_diff_eq!(residual, 4.0 * (det.u[i] - -3.0), epsilon = 1e-8);
        }

        // Setting B: the residual is mean-zero; check against its own
        // standard error.
        let scen = preset("B-p3").unwrap().materialize(2).unwrap();
        let gt = scen.ground_truth().unwrap();
        let n = 4000;
        let det = scen.generate_detailed(n, TRAIN_STREAM).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..n {
            let r = det.y[i] - gt.true_effect(&det.x[i]).unwrap();
            sum += r;
            sum_sq += r * r;
        }
        let mean = sum / n as f64;
        let sd = (sum_sq / n as f64 - mean * mean).sqrt();
        let se = sd / (n as f64).sqrt();
        assert!(mean.abs() < 4.0 * se, "residual mean {mean}, se {se}");
    }

    #[test]
    fn effect_rejects_mismatched_dimensions() {
        let scen = preset("A-p3").unwrap().materialize(1).unwrap();
        let gt = scen.ground_truth().unwrap();
        let x = closure(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(gt.true_effect(&x).is_err());
    }

    #[test]
    fn ground_truth_serde_round_trip() {
        let scen = preset("B-p3").unwrap().materialize(1).unwrap();
        let gt = scen.ground_truth().unwrap();
        let s = serde_json::to_string(&gt).unwrap();
        let back: GroundTruth = serde_json::from_str(&s).unwrap();
        assert_eq!(gt, back);
    }
}
