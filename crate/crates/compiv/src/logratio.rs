//! Log-ratio coordinates: alr, clr, and ilr transforms.
//!
//! The ilr transform is the workhorse: it maps the p-part simplex
//! isometrically onto `R^(p-1)`, so ordinary multivariate tools (OLS, kernel
//! methods) apply without the spurious-correlation artifacts of raw
//! proportions. All ilr operations here take an explicit [`LogRatioBasis`];
//! [`LogRatioBasis::helmert`] is the default balance basis used throughout
//! the crate, so coordinates are reproducible across runs and languages.

use crate::error::{Error, Result};
use crate::simplex::{closure, Composition};
use nalgebra::{DMatrix, DVector};

/// Sum-zero tolerance for log-contrast coefficient vectors.
pub const CONTRAST_TOLERANCE: f64 = 1e-8;

/// An orthonormal contrast matrix `V` of shape `p x (p-1)`: `VᵀV = I` and
/// every column sums to zero. `ilr(x) = Vᵀ clr(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioBasis {
    v: DMatrix<f64>,
}

impl LogRatioBasis {
    /// The Helmert balance basis: the classical Helmert matrix with its
    /// constant row removed, rows normalized, transposed to `p x (p-1)`.
    pub fn helmert(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid("a basis needs at least 2 parts"));
        }
        let mut v = DMatrix::zeros(p, p - 1);
        for k in 0..p - 1 {
            let m = (k + 1) as f64;
            let norm = (m * (m + 1.0)).sqrt();
            for i in 0..=k {
                v[(i, k)] = 1.0 / norm;
            }
            v[(k + 1, k)] = -m / norm;
        }
        Ok(LogRatioBasis { v })
    }

    /// Wraps an arbitrary contrast matrix, checking orthonormality and the
    /// sum-zero column property.
    pub fn from_matrix(v: DMatrix<f64>) -> Result<Self> {
        let (p, d) = v.shape();
        if p < 2 || d != p - 1 {
            return Err(Error::invalid(format!(
                "contrast matrix must be p x (p-1), got {p} x {d}"
            )));
        }
        let gram = v.tr_mul(&v);
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > 1e-10 {
                    return Err(Error::invalid("contrast matrix columns are not orthonormal"));
                }
            }
        }
        for j in 0..d {
            if v.column(j).sum().abs() > 1e-10 {
                return Err(Error::invalid("contrast matrix columns must sum to zero"));
            }
        }
        Ok(LogRatioBasis { v })
    }

    /// Number of parts `p`.
    pub fn p(&self) -> usize {
        self.v.nrows()
    }

    /// Coordinate dimension `p - 1`.
    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }
}

fn require_positive(x: &Composition, op: &str) -> Result<()> {
    if x.is_strictly_positive() {
        Ok(())
    } else {
        Err(Error::degenerate(format!("{op} requires strictly positive parts")))
    }
}

fn log_parts(x: &Composition) -> Vec<f64> {
    x.parts().iter().map(|v| v.ln()).collect()
}

/// Additive log-ratio transform: `alr(x)_j = log(x_j / x_p)` for `j < p`.
pub fn alr(x: &Composition) -> Result<DVector<f64>> {
    require_positive(x, "alr")?;
    let lx = log_parts(x);
    let last = lx[lx.len() - 1];
    Ok(DVector::from_iterator(lx.len() - 1, lx[..lx.len() - 1].iter().map(|l| l - last)))
}

/// Inverse alr: `C(exp([t, 0]))`.
pub fn alr_inv(t: &DVector<f64>) -> Result<Composition> {
    let mut ext = Vec::with_capacity(t.len() + 1);
    ext.extend(t.iter().copied());
    ext.push(0.0);
    exp_closure(&ext)
}

/// Centered log-ratio transform: `clr(x)_j = log(x_j / g(x))` with `g` the
/// geometric mean. Output sums to zero.
pub fn clr(x: &Composition) -> Result<DVector<f64>> {
    require_positive(x, "clr")?;
    let lx = log_parts(x);
    let mean = lx.iter().sum::<f64>() / lx.len() as f64;
    Ok(DVector::from_iterator(lx.len(), lx.iter().map(|l| l - mean)))
}

/// Inverse clr: `C(exp(t))`. Defined for any real vector; components of `t`
/// that share a shift map to the same composition.
pub fn clr_inv(t: &DVector<f64>) -> Result<Composition> {
    exp_closure(t.as_slice())
}

/// Isometric log-ratio transform: `ilr(x) = Vᵀ clr(x)`.
pub fn ilr(x: &Composition, basis: &LogRatioBasis) -> Result<DVector<f64>> {
    if x.len() != basis.p() {
        return Err(Error::invalid(format!(
            "ilr basis is for p = {}, composition has {} parts",
            basis.p(),
            x.len()
        )));
    }
    let c = clr(x)?;
    Ok(basis.v.tr_mul(&c))
}

/// Inverse ilr: `C(exp(V t))`.
pub fn ilr_inv(t: &DVector<f64>, basis: &LogRatioBasis) -> Result<Composition> {
    if t.len() != basis.dim() {
        return Err(Error::invalid(format!(
            "ilr coordinates have dimension {}, basis expects {}",
            t.len(),
            basis.dim()
        )));
    }
    let lx = &basis.v * t;
    exp_closure(lx.as_slice())
}

/// `C(exp(v))` with the max subtracted first so large coordinates cannot
/// overflow.
fn exp_closure(v: &[f64]) -> Result<Composition> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("log-ratio coordinates must be finite"));
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    closure(&exps)
}

/// Maps a sum-zero log-contrast coefficient vector into ilr coordinates:
/// `β_ilr = Vᵀ β_log`. The two parameterizations predict identically:
/// `β_logᵀ log(x) = β_ilrᵀ ilr(x)`.
pub fn beta_log_to_ilr(beta_log: &DVector<f64>, basis: &LogRatioBasis) -> Result<DVector<f64>> {
    if beta_log.len() != basis.p() {
        return Err(Error::invalid("coefficient length does not match basis"));
    }
    let sum: f64 = beta_log.sum();
    if sum.abs() > CONTRAST_TOLERANCE {
        return Err(Error::invalid(format!(
            "log-contrast coefficients must sum to zero, got {sum:.3e}"
        )));
    }
    Ok(basis.v.tr_mul(beta_log))
}

/// Maps ilr coefficients back to the (sum-zero) log-contrast scale:
/// `β_log = V β_ilr`.
pub fn beta_ilr_to_log(beta_ilr: &DVector<f64>, basis: &LogRatioBasis) -> Result<DVector<f64>> {
    if beta_ilr.len() != basis.dim() {
        return Err(Error::invalid("coefficient length does not match basis"));
    }
    Ok(&basis.v * beta_ilr)
}
