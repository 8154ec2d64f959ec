//! Sparse Dirichlet regression of a composition on instruments.
//!
//! The model is `X_i ~ Dirichlet(alpha(z_i))` with log-linear concentrations
//! `alpha_j(z) = exp(omega0_j + omega_j' z)`. Fitting maximizes the mean
//! log-likelihood minus an `l1` penalty on the slope matrix (intercepts are
//! never penalized) by proximal gradient descent with a backtracking line
//! search; the penalty weight is chosen from a small grid by BIC. The
//! likelihood is not concave in the parameters, so convergence is to a
//! stationary point and is reported honestly: if the selected fit fails to
//! converge the error carries the best parameters found so far.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, NonConvergenceReport, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletConfig {
    /// Candidate penalty weights, applied to the mean log-likelihood scale.
    pub lambda_grid: Vec<f64>,
    pub max_iter: usize,
    /// Relative objective-change tolerance.
    pub tol: f64,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        DirichletConfig {
            lambda_grid: vec![0.1, 1.0, 2.0, 5.0, 10.0],
            max_iter: 2000,
            tol: 1e-8,
        }
    }
}

/// Summary of one penalty candidate considered during selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletCandidate {
    pub lambda: f64,
    pub bic: f64,
    /// Total log-likelihood at the candidate's parameters.
    pub log_lik: f64,
    pub nonzero_slopes: usize,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletFit {
    /// Intercepts, length `p`.
    pub omega0: Vec<f64>,
    /// Slopes, `p x q`: row `j` holds the instrument weights for component
    /// `j`'s concentration.
    pub omega: Vec<Vec<f64>>,
    /// Selected penalty weight.
    pub lambda: f64,
    /// Total log-likelihood at the selected parameters.
    pub log_lik: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub candidates: Vec<DirichletCandidate>,
}

impl DirichletFit {
    /// Concentration vector `alpha(z)` for one instrument row.
    pub fn concentrations(&self, z: &[f64]) -> Vec<f64> {
        let q = z.len();
        self.omega0
            .iter()
            .zip(&self.omega)
            .map(|(w0, wrow)| {
                let eta: f64 = w0 + (0..q).map(|k| wrow[k] * z[k]).sum::<f64>();
                eta.exp()
            })
            .collect()
    }

    /// Fitted conditional mean `E[X | z] = alpha(z) / sum(alpha(z))`.
    pub fn mean(&self, z: &[f64]) -> Vec<f64> {
        let mut a = self.concentrations(z);
        let total: f64 = a.iter().sum();
        a.iter_mut().for_each(|v| *v /= total);
        a
    }
}

struct Params {
    omega0: DVector<f64>,
    omega: DMatrix<f64>,
}

impl Params {
    fn clone_from_ref(&self) -> Params {
        Params { omega0: self.omega0.clone(), omega: self.omega.clone() }
    }
}

struct Workspace<'a> {
    z: &'a DMatrix<f64>,
    log_x: DMatrix<f64>,
    n: usize,
    p: usize,
    q: usize,
}

impl<'a> Workspace<'a> {
    /// Mean negative log-likelihood; `+inf` when the concentrations overflow,
    /// which the line search treats as a rejected step.
    fn neg_mean_ll(&self, par: &Params) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            let mut row_sum = 0.0;
            let mut row_ll = 0.0;
            for j in 0..self.p {
                let mut eta = par.omega0[j];
                for k in 0..self.q {
                    eta += par.omega[(j, k)] * self.z[(i, k)];
                }
                let a = eta.exp();
                if !a.is_finite() {
                    return f64::INFINITY;
                }
                row_sum += a;
                row_ll += (a - 1.0) * self.log_x[(i, j)] - ln_gamma(a);
            }
            row_ll += ln_gamma(row_sum);
            if !row_ll.is_finite() {
                return f64::INFINITY;
            }
            total += row_ll;
        }
        -total / self.n as f64
    }

    /// Gradient of the mean negative log-likelihood.
    fn grad(&self, par: &Params) -> (DVector<f64>, DMatrix<f64>) {
        let mut g0 = DVector::zeros(self.p);
        let mut g = DMatrix::zeros(self.p, self.q);
        let inv_n = 1.0 / self.n as f64;
        let mut alphas = vec![0.0; self.p];
        for i in 0..self.n {
            let mut row_sum = 0.0;
            for j in 0..self.p {
                let mut eta = par.omega0[j];
                for k in 0..self.q {
                    eta += par.omega[(j, k)] * self.z[(i, k)];
                }
                let a = eta.exp();
                alphas[j] = a;
                row_sum += a;
            }
            let psi_total = digamma(row_sum);
            for j in 0..self.p {
                let a = alphas[j];
                let d_eta = -inv_n * a * (psi_total - digamma(a) + self.log_x[(i, j)]);
                g0[j] += d_eta;
                for k in 0..self.q {
                    g[(j, k)] += d_eta * self.z[(i, k)];
                }
            }
        }
        (g0, g)
    }
}

fn soft(z: f64, tau: f64) -> f64 {
    let mag = z.abs() - tau;
    if mag <= 0.0 {
        0.0
    } else if z > 0.0 {
        mag
    } else {
        -mag
    }
}

/// Classical moment-matching start: scale the mean composition by the
/// precision implied by the first component's variance.
fn moment_init(x: &DMatrix<f64>) -> DVector<f64> {
    let (n, p) = x.shape();
    let means = DVector::from_fn(p, |j, _| x.column(j).sum() / n as f64);
    let m0 = means[0];
    let v0 = x
        .column(0)
        .iter()
        .map(|v| (v - m0) * (v - m0))
        .sum::<f64>()
        / n as f64;
    let precision = if v0 > 1e-12 {
        (m0 * (1.0 - m0) / v0 - 1.0).clamp(1e-2, 1e6)
    } else {
        p as f64
    };
    DVector::from_fn(p, |j, _| (means[j] * precision).ln())
}

/// Intercept-only maximum likelihood on a subset, by gradient descent from
/// the moment-matching start.
fn intercept_mle(ws: &Workspace, start: DVector<f64>) -> DVector<f64> {
    let p = ws.p;
    let q = ws.q;
    let mut par = Params { omega0: start, omega: DMatrix::zeros(p, q) };
    let mut obj = ws.neg_mean_ll(&par);
    let mut t = 1.0;
    for _ in 0..200 {
        let (g0, _) = ws.grad(&par);
        let mut accepted = false;
        for _ in 0..60 {
            let cand = Params {
                omega0: &par.omega0 - t * &g0,
                omega: DMatrix::zeros(p, q),
            };
            let cand_obj = ws.neg_mean_ll(&cand);
            if cand_obj.is_finite() && cand_obj <= obj - 0.5 * t * g0.norm_squared() * 1e-4 {
                let rel = (obj - cand_obj) / obj.abs().max(1.0);
                par = cand;
                obj = cand_obj;
                accepted = true;
                if rel < 1e-12 {
                    return par.omega0;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        t *= 1.5;
    }
    par.omega0
}

struct Solved {
    par: Params,
    objective: f64,
    converged: bool,
    iterations: usize,
    last_rel_change: f64,
}

/// Proximal gradient descent on the penalized likelihood. The grid value
/// penalizes the total log-likelihood, so on the mean scale used here it
/// enters as `lambda / n`.
fn solve_penalized(ws: &Workspace, grid_lambda: f64, init: &Params, cfg: &DirichletConfig) -> Solved {
    let lambda = grid_lambda / ws.n as f64;
    let mut par = init.clone_from_ref();
    let mut obj = ws.neg_mean_ll(&par) + lambda * par.omega.iter().map(|v| v.abs()).sum::<f64>();
    let mut t = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut last_rel = f64::INFINITY;

    for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        let (g0, g) = ws.grad(&par);
        let f_cur = ws.neg_mean_ll(&par);
        let mut stepped = false;
        for _ in 0..80 {
            let cand0 = &par.omega0 - t * &g0;
            let cand = DMatrix::from_fn(ws.p, ws.q, |j, k| {
                soft(par.omega[(j, k)] - t * g[(j, k)], t * lambda)
            });
            let cand_par = Params { omega0: cand0, omega: cand };
            let f_new = ws.neg_mean_ll(&cand_par);
            let d0 = &cand_par.omega0 - &par.omega0;
            let dm = &cand_par.omega - &par.omega;
            let lin = g0.dot(&d0) + g.iter().zip(dm.iter()).map(|(a, b)| a * b).sum::<f64>();
            let quad = (d0.norm_squared() + dm.norm_squared()) / (2.0 * t);
            if f_new.is_finite() && f_new <= f_cur + lin + quad + 1e-12 * (1.0 + f_cur.abs()) {
                let new_obj =
                    f_new + lambda * cand_par.omega.iter().map(|v| v.abs()).sum::<f64>();
                last_rel = (obj - new_obj).abs() / obj.abs().max(1.0);
                let dx = d0.amax().max(dm.amax());
                par = cand_par;
                obj = new_obj;
                stepped = true;
                if last_rel < cfg.tol && dx < 1e-6 * (1.0 + par.omega0.amax().max(par.omega.amax()))
                {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                break;
            }
        }
        if !stepped || converged {
            converged = converged || (!stepped && last_rel < cfg.tol);
            break;
        }
        t *= 1.2;
    }

    Solved { par, objective: obj, converged, iterations, last_rel_change: last_rel }
}

/// Fit the sparse Dirichlet GLM, selecting the penalty by BIC.
///
/// `x` holds strictly positive compositions in its rows (each summing to one
/// within `1e-6`); `z` holds the instrument rows. BIC counts the intercepts
/// plus the nonzero slopes; ties prefer the sparser (larger penalty) model.
/// Selection happens over candidates that converged; if none did, the error
/// reports the best parameters found.
pub fn fit_dirichlet_glm(
    z: &DMatrix<f64>,
    x: &DMatrix<f64>,
    cfg: &DirichletConfig,
) -> Result<DirichletFit> {
    let (n, q) = z.shape();
    let p = x.ncols();
    if x.nrows() != n {
        return Err(Error::invalid(format!(
            "instruments have {n} rows but compositions have {}",
            x.nrows()
        )));
    }
    if p < 2 {
        return Err(Error::invalid("compositions need at least 2 components"));
    }
    if n < q + 2 {
        return Err(Error::invalid(format!(
            "need more than q + 1 = {} samples, got {n}",
            q + 1
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("instruments must be finite"));
    }
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..p {
            let v = x[(i, j)];
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "composition row {i} has non-positive entry {v} at component {j}"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "composition row {i} sums to {sum}, expected 1"
            )));
        }
    }
    if cfg.lambda_grid.is_empty() {
        return Err(Error::invalid("lambda grid must be non-empty"));
    }
    if cfg.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::invalid("lambda grid must be nonnegative and finite"));
    }

    let log_x = DMatrix::from_fn(n, p, |i, j| x[(i, j)].ln());
    let ws = Workspace { z, log_x, n, p, q };

    // Initialize intercepts where the instruments are weakest; if too few
    // samples sit near zero, fall back to full-data moment matching.
    let near_zero: Vec<usize> = (0..n)
        .filter(|&i| (0..q).all(|k| z[(i, k)].abs() < 0.2))
        .collect();
    let omega0_init = if near_zero.len() >= (q + 2).max(10) {
        let xs = DMatrix::from_fn(near_zero.len(), p, |i, j| x[(near_zero[i], j)]);
        let zs = DMatrix::zeros(near_zero.len(), q);
        let log_xs = DMatrix::from_fn(near_zero.len(), p, |i, j| xs[(i, j)].ln());
        let sub_ws = Workspace { z: &zs, log_x: log_xs, n: near_zero.len(), p, q };
        intercept_mle(&sub_ws, moment_init(&xs))
    } else {
        moment_init(x)
    };
    let init = Params { omega0: omega0_init, omega: DMatrix::zeros(p, q) };

    let mut grid = cfg.lambda_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let mut candidates = Vec::with_capacity(grid.len());
    let mut solutions = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        let solved = solve_penalized(&ws, lambda, &init, cfg);
        let total_ll = -(ws.neg_mean_ll(&solved.par)) * n as f64;
        let nonzero = solved.par.omega.iter().filter(|v| **v != 0.0).count();
        let k = p + nonzero;
        let bic = k as f64 * (n as f64).ln() - 2.0 * total_ll;
        candidates.push(DirichletCandidate {
            lambda,
            bic,
            log_lik: total_ll,
            nonzero_slopes: nonzero,
            converged: solved.converged,
            iterations: solved.iterations,
        });
        solutions.push(solved);
    }

    // Ties prefer the larger penalty, so scan from the sparse end.
    let mut best: Option<usize> = None;
    for idx in (0..candidates.len()).rev() {
        if !candidates[idx].converged {
            continue;
        }
        if best.is_none() || candidates[idx].bic < candidates[best.unwrap()].bic {
            best = Some(idx);
        }
    }

    let Some(best) = best else {
        let fallback = solutions
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.objective.partial_cmp(&b.objective).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let s = &solutions[fallback];
        let mut best_params = Vec::with_capacity(p * (q + 1));
        best_params.extend(s.par.omega0.iter());
        best_params.extend(s.par.omega.iter());
        return Err(Error::NonConvergence(Box::new(NonConvergenceReport {
            context: format!(
                "dirichlet glm: no penalty candidate converged within {} iterations",
                cfg.max_iter
            ),
            iterations: s.iterations,
            last_rel_change: s.last_rel_change,
            objective: s.objective,
            best_params,
            shape: (p, q + 1),
        })));
    };

    let chosen = &solutions[best];
    let cand = &candidates[best];
    Ok(DirichletFit {
        omega0: chosen.par.omega0.iter().cloned().collect(),
        omega: (0..p)
            .map(|j| (0..q).map(|k| chosen.par.omega[(j, k)]).collect())
            .collect(),
        lambda: cand.lambda,
        log_lik: cand.log_lik,
        bic: cand.bic,
        converged: true,
        iterations: cand.iterations,
        candidates,
    })
}
