//! Proximal-gradient machinery shared by the single-lambda fit, the path,
//! and stability selection.
//!
//! The problem is solved in internally standardized coordinates: each design
//! column is centered and scaled to unit variance, the penalty applies to the
//! standardized coefficients, and the sum-zero constraint on the original
//! coefficients becomes a weighted constraint `sum_j w_j beta_j = 0` with
//! `w_j = 1 / scale_j`. Solutions are mapped back on output.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lasso::{LossSpec, SolverConfig};

/// Backtracking can only shrink the step this far before we declare the
/// line search broken (which in practice means non-finite inputs).
const MIN_STEP: f64 = 1e-20;

/// Reported lambda_max is inflated by this relative amount so that the
/// all-zero solution is numerically exact at the reported value, not just
/// in the limit.
const LAMBDA_MAX_SLACK: f64 = 1e-8;

pub(crate) struct Standardized {
    pub x: DMatrix<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Constraint weights in standardized coordinates: `1 / scales`.
    pub w: Vec<f64>,
}

pub(crate) fn standardize(x: &DMatrix<f64>) -> Standardized {
    let (n, p) = x.shape();
    let mut xs = x.clone();
    let mut means = vec![0.0; p];
    let mut scales = vec![0.0; p];
    for j in 0..p {
        let col = x.column(j);
        let m = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        let mut s = var.sqrt();
        if !(s > 1e-12 * (1.0 + m.abs())) {
            // Constant column: leave it unscaled so the math stays finite.
            s = 1.0;
        }
        means[j] = m;
        scales[j] = s;
        for i in 0..n {
            xs[(i, j)] = (x[(i, j)] - m) / s;
        }
    }
    let w = scales.iter().map(|s| 1.0 / s).collect();
    Standardized { x: xs, means, scales, w }
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

/// Exact proximal step: minimize `0.5 ||u - v||^2 + tau ||u||_1` subject to
/// `sum_j w_j u_j = 0` with all `w_j > 0`.
///
/// The KKT conditions give `u_j = soft(v_j - mu w_j, tau)` for a multiplier
/// `mu` chosen so the constraint holds; `h(mu) = sum_j w_j u_j(mu)` is a
/// nonincreasing piecewise-linear function whose root we find exactly from
/// its breakpoints `(v_j -+ tau) / w_j`. Coordinates in the clipped zone come
/// out as exact zeros.
pub(crate) fn prox_sum_zero(v: &DVector<f64>, w: &[f64], tau: f64) -> DVector<f64> {
    let p = v.len();
    debug_assert_eq!(w.len(), p);

    // Fast path: if some mu clips every coordinate, zero is the unique
    // solution and we return it without any root-finding noise.
    let mut lo_edge = f64::NEG_INFINITY;
    let mut hi_edge = f64::INFINITY;
    for j in 0..p {
        lo_edge = lo_edge.max((v[j] - tau) / w[j]);
        hi_edge = hi_edge.min((v[j] + tau) / w[j]);
    }
    if lo_edge <= hi_edge {
        return DVector::zeros(p);
    }

    let h = |mu: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..p {
            acc += w[j] * soft(v[j] - mu * w[j], tau);
        }
        acc
    };

    let mut bps = Vec::with_capacity(2 * p);
    for j in 0..p {
        bps.push((v[j] - tau) / w[j]);
        bps.push((v[j] + tau) / w[j]);
    }
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let sum_w2: f64 = w.iter().map(|wj| wj * wj).sum();
    let h_first = h(bps[0]);
    let h_last = h(*bps.last().unwrap());

    let mu = if h_first <= 0.0 {
        // Root lies left of every breakpoint where all coordinates are active.
        bps[0] + h_first / sum_w2
    } else if h_last >= 0.0 {
        *bps.last().unwrap() + h_last / sum_w2
    } else {
        // h(bps[lo]) > 0 > h(bps[hi]); shrink to adjacent breakpoints.
        let mut lo = 0usize;
        let mut hi = bps.len() - 1;
        let mut exact = None;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let hm = h(bps[mid]);
            if hm > 0.0 {
                lo = mid;
            } else if hm < 0.0 {
                hi = mid;
            } else {
                exact = Some(bps[mid]);
                break;
            }
        }
        match exact {
            Some(mu) => mu,
            None => {
                let mid = 0.5 * (bps[lo] + bps[hi]);
                let slope: f64 = (0..p)
                    .filter(|&j| (v[j] - mid * w[j]).abs() > tau)
                    .map(|j| w[j] * w[j])
                    .sum();
                if slope == 0.0 {
                    // Flat segment straddling zero: only float noise separates
                    // the endpoint values, so the midpoint is the root.
                    mid
                } else {
                    bps[lo] + h(bps[lo]) / slope
                }
            }
        }
    };

    DVector::from_fn(p, |j, _| soft(v[j] - mu * w[j], tau))
}

impl LossSpec {
    /// Loss value as a function of the prediction `f` for target `y`.
    pub(crate) fn value(&self, y: f64, f: f64) -> f64 {
        match *self {
            LossSpec::Squared => {
                let r = y - f;
                r * r
            }
            // Scaled so the quadratic zone matches the squared loss and the
            // large-delta limit recovers it exactly.
            LossSpec::Huber { delta } => {
                let r = y - f;
                if r.abs() <= delta {
                    r * r
                } else {
                    2.0 * delta * r.abs() - delta * delta
                }
            }
            LossSpec::SquaredHinge => {
                let m = y * f;
                if m >= 1.0 {
                    0.0
                } else {
                    (1.0 - m) * (1.0 - m)
                }
            }
            LossSpec::HuberizedHinge { delta } => {
                let m = y * f;
                if m >= 1.0 {
                    0.0
                } else if m >= delta {
                    (1.0 - m) * (1.0 - m)
                } else {
                    (1.0 - delta) * (1.0 + delta - 2.0 * m)
                }
            }
        }
    }

    /// Derivative of the loss with respect to the prediction `f`.
    pub(crate) fn dvalue(&self, y: f64, f: f64) -> f64 {
        match *self {
            LossSpec::Squared => -2.0 * (y - f),
            LossSpec::Huber { delta } => {
                let r = y - f;
                if r.abs() <= delta {
                    -2.0 * r
                } else {
                    -2.0 * delta * r.signum()
                }
            }
            LossSpec::SquaredHinge => {
                let m = y * f;
                if m >= 1.0 {
                    0.0
                } else {
                    -2.0 * (1.0 - m) * y
                }
            }
            LossSpec::HuberizedHinge { delta } => {
                let m = y * f;
                if m >= 1.0 {
                    0.0
                } else if m >= delta {
                    -2.0 * (1.0 - m) * y
                } else {
                    -2.0 * (1.0 - delta) * y
                }
            }
        }
    }

    pub(crate) fn is_classifier(&self) -> bool {
        matches!(self, LossSpec::SquaredHinge | LossSpec::HuberizedHinge { .. })
    }
}

/// One-dimensional minimizer of `sum_i L(y_i, c)` over the intercept `c`.
pub(crate) fn intercept_only_optimum(loss: &LossSpec, y: &DVector<f64>) -> f64 {
    if matches!(loss, LossSpec::Squared) {
        return y.sum() / y.len() as f64;
    }
    let dsum = |c: f64| y.iter().map(|&yi| loss.dvalue(yi, c)).sum::<f64>();
    let spread = y.iter().fold(0.0f64, |a, &v| a.max(v.abs())) + 2.0;
    let mut lo = -spread;
    let mut hi = spread;
    for _ in 0..200 {
        if dsum(lo) <= 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..200 {
        if dsum(hi) >= 0.0 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dsum(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smooth part of the objective in standardized coordinates.
pub(crate) enum Problem<'a> {
    /// Squared loss with precomputed Gram matrix; the intercept is eliminated
    /// analytically because both design and response are centered.
    Quadratic {
        gram: &'a DMatrix<f64>,
        xty: &'a DVector<f64>,
        yty: f64,
    },
    /// Everything else: per-sample loss with a live intercept coordinate.
    Samplewise {
        x: &'a DMatrix<f64>,
        y: &'a DVector<f64>,
        loss: LossSpec,
    },
}

impl<'a> Problem<'a> {
    pub(crate) fn has_intercept(&self) -> bool {
        matches!(self, Problem::Samplewise { .. })
    }

    pub(crate) fn dim(&self) -> usize {
        match self {
            Problem::Quadratic { xty, .. } => xty.len(),
            Problem::Samplewise { x, .. } => x.ncols(),
        }
    }

    pub(crate) fn eval(&self, beta: &DVector<f64>, c: f64) -> f64 {
        match self {
            Problem::Quadratic { gram, xty, yty } => {
                let gb = *gram * beta;
                yty - 2.0 * beta.dot(xty) + beta.dot(&gb)
            }
            Problem::Samplewise { x, y, loss } => {
                let f = *x * beta;
                (0..y.len()).map(|i| loss.value(y[i], f[i] + c)).sum()
            }
        }
    }

    pub(crate) fn grad(&self, beta: &DVector<f64>, c: f64) -> (DVector<f64>, f64) {
        match self {
            Problem::Quadratic { gram, xty, .. } => {
                let gb = *gram * beta;
                (2.0 * (gb - *xty), 0.0)
            }
            Problem::Samplewise { x, y, loss } => {
                let f = *x * beta;
                let d = DVector::from_fn(y.len(), |i, _| loss.dvalue(y[i], f[i] + c));
                (x.tr_mul(&d), d.sum())
            }
        }
    }
}

pub(crate) struct SolveOutcome {
    /// Solution in standardized coordinates (exact zeros preserved).
    pub beta: DVector<f64>,
    /// Intercept in standardized coordinates (0 for the quadratic problem).
    pub c: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub trace: Option<Vec<f64>>,
}

/// Monotone FISTA with backtracking line search. Accelerated steps that would
/// increase the objective are replaced by a plain proximal step from the last
/// accepted point, which restores the descent guarantee without giving up the
/// accelerated rate elsewhere.
pub(crate) fn solve(
    problem: &Problem,
    w: &[f64],
    lambda: f64,
    warm: Option<(DVector<f64>, f64)>,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let p = problem.dim();
    let (mut x_beta, mut x_c) = match warm {
        Some((b, c)) => (b, c),
        None => {
            let c0 = match problem {
                Problem::Samplewise { y, loss, .. } => intercept_only_optimum(loss, y),
                Problem::Quadratic { .. } => 0.0,
            };
            (DVector::zeros(p), c0)
        }
    };
    let penalty = |b: &DVector<f64>| lambda * b.iter().map(|v| v.abs()).sum::<f64>();
    let mut obj_x = problem.eval(&x_beta, x_c) + penalty(&x_beta);
    let mut trace = cfg.record_trace.then(|| vec![obj_x]);

    let mut y_beta = x_beta.clone();
    let mut y_c = x_c;
    let mut theta = 1.0f64;
    let mut t = 1.0f64;
    let has_c = problem.has_intercept();

    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..cfg.max_iter {
        iterations = iter + 1;

        // One backtracked proximal step from (yb, yc).
        let step = |yb: &DVector<f64>, yc: f64, t0: f64| -> Result<(DVector<f64>, f64, f64, f64)> {
            let fy = problem.eval(yb, yc);
            let (gb, gc) = problem.grad(yb, yc);
            let mut t = t0;
            loop {
                let zb = prox_sum_zero(&(yb - t * &gb), w, t * lambda);
                let zc = if has_c { yc - t * gc } else { yc };
                let fz = problem.eval(&zb, zc);
                let db = &zb - yb;
                let dc = zc - yc;
                let lin = gb.dot(&db) + gc * dc;
                let quad = (db.norm_squared() + dc * dc) / (2.0 * t);
                if fz.is_finite() && fz <= fy + lin + quad + 1e-12 * (1.0 + fy.abs()) {
                    return Ok((zb, zc, fz, t));
                }
                t *= 0.5;
                if t < MIN_STEP {
                    return Err(Error::numerical(
                        "line search failed in constrained lasso solver",
                    ));
                }
            }
        };

        let (mut z_beta, mut z_c, mut fz, t_used) = step(&y_beta, y_c, t)?;
        t = t_used;
        let mut obj_z = fz + penalty(&z_beta);

        if obj_z > obj_x + 1e-12 * (1.0 + obj_x.abs()) {
            // Accelerated step overshot: restart from the last accepted point.
            let (zb, zc, fz2, t2) = step(&x_beta, x_c, t)?;
            z_beta = zb;
            z_c = zc;
            fz = fz2;
            t = t2;
            obj_z = fz + penalty(&z_beta);
            theta = 1.0;
        }

        let dx = (&z_beta - &x_beta).amax().max((z_c - x_c).abs());
        let scale = z_beta.amax().max(z_c.abs());
        let rel_obj = (obj_z - obj_x).abs() / obj_x.abs().max(1.0);
        if rel_obj < cfg.obj_tol && dx < cfg.step_tol * (1.0 + scale) {
            converged = true;
        }

        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_next;
        y_beta = &z_beta + momentum * (&z_beta - &x_beta);
        y_c = z_c + momentum * (z_c - x_c);
        theta = theta_next;

        x_beta = z_beta;
        x_c = z_c;
        obj_x = obj_z;
        if let Some(tr) = trace.as_mut() {
            tr.push(obj_x);
        }
        if converged {
            break;
        }
        t *= 1.1;
    }

    Ok(SolveOutcome {
        beta: x_beta,
        c: x_c,
        iterations,
        converged,
        objective: obj_x,
        trace,
    })
}

/// Smallest penalty for which the all-zero coefficient vector satisfies the
/// constrained KKT conditions: `min_nu max_j |g_j + nu w_j|` where `g` is the
/// smooth gradient at zero coefficients and the optimal intercept.
///
/// The inner function is convex piecewise-linear in `nu`; ternary search
/// pins its minimum to machine precision and the result is inflated by a
/// relative `1e-8` so that fitting at the reported value yields exact zeros.
pub(crate) fn lambda_max_from_grad(g: &DVector<f64>, w: &[f64]) -> f64 {
    let phi = |nu: f64| -> f64 {
        let mut m = 0.0f64;
        for j in 0..g.len() {
            m = m.max((g[j] + nu * w[j]).abs());
        }
        m
    };
    let gmax = g.amax();
    if gmax == 0.0 {
        return 0.0;
    }
    let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = 2.0 * gmax / wmin + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..300 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if phi(m1) <= phi(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    phi(0.5 * (lo + hi)) * (1.0 + LAMBDA_MAX_SLACK)
}
