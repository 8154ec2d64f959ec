//! Aitchison geometry on the simplex.
//!
//! A composition carries only relative information: scaling a vector of
//! abundances by any positive constant describes the same object. The
//! operations here make that precise by treating the closed simplex as a
//! vector space, with perturbation as addition, powering as scalar
//! multiplication, and the Aitchison inner product as its metric.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parts at or below this threshold count as absent for richness.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Tolerance on `sum(parts) == 1` before an input is re-closed.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A point on the simplex: at least two non-negative parts summing to one.
///
/// Inputs whose sum drifts outside [`SUM_TOLERANCE`] (CSV round trips, float
/// noise) are re-closed rather than rejected; [`Composition::was_reclosed`]
/// reports when that happened.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<f64>,
    #[serde(skip, default)]
    reclosed: bool,
}

impl PartialEq for Composition {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Composition {
    /// Validates a vector that is already supposed to be a composition.
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        validate_parts(&parts)?;
        let sum: f64 = parts.iter().sum();
        if sum <= 0.0 {
            return Err(Error::degenerate("all parts are zero"));
        }
        if (sum - 1.0).abs() <= SUM_TOLERANCE {
            Ok(Composition { parts, reclosed: false })
        } else {
            let parts = parts.iter().map(|v| v / sum).collect();
            Ok(Composition { parts, reclosed: true })
        }
    }

    /// The uniform composition, the identity element of perturbation.
    pub fn uniform(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid("a composition needs at least 2 parts"));
        }
        Ok(Composition { parts: vec![1.0 / p as f64; p], reclosed: false })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.parts.iter().all(|&v| v > 0.0)
    }

    /// True when the constructor had to re-normalize an out-of-tolerance sum.
    pub fn was_reclosed(&self) -> bool {
        self.reclosed
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.parts
    }

    fn require_positive(&self, op: &str) -> Result<()> {
        if self.is_strictly_positive() {
            Ok(())
        } else {
            Err(Error::degenerate(format!("{op} requires strictly positive parts")))
        }
    }
}

fn validate_parts(parts: &[f64]) -> Result<()> {
    if parts.len() < 2 {
        return Err(Error::invalid("a composition needs at least 2 parts"));
    }
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("parts must be finite"));
    }
    if parts.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("parts must be non-negative"));
    }
    Ok(())
}

/// Raw counts (or any non-negative abundances) awaiting closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountVector(Vec<f64>);

impl CountVector {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        validate_parts(&counts)?;
        if counts.iter().all(|&c| c == 0.0) {
            return Err(Error::degenerate("all counts are zero"));
        }
        Ok(CountVector(counts))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Projects a non-negative vector onto the simplex by dividing by its total.
pub fn closure(v: &[f64]) -> Result<Composition> {
    validate_parts(v)?;
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 {
        return Err(Error::degenerate("closure of an all-zero vector"));
    }
    Ok(Composition { parts: v.iter().map(|x| x / sum).collect(), reclosed: false })
}

/// Perturbation `x ⊕ w`: component-wise product followed by closure. This is
/// the additive group operation of the simplex.
pub fn perturb(x: &Composition, w: &Composition) -> Result<Composition> {
    if x.len() != w.len() {
        return Err(Error::invalid(format!(
            "perturbation needs equal lengths, got {} and {}",
            x.len(),
            w.len()
        )));
    }
    x.require_positive("perturbation")?;
    w.require_positive("perturbation")?;
    let prod: Vec<f64> = x.parts.iter().zip(&w.parts).map(|(a, b)| a * b).collect();
    closure(&prod)
}

/// Powering `a ⊙ x`: component-wise power followed by closure. Scalar
/// multiplication of the simplex vector space.
pub fn power(a: f64, x: &Composition) -> Result<Composition> {
    if !a.is_finite() {
        return Err(Error::invalid("power exponent must be finite"));
    }
    if a <= 0.0 && !x.is_strictly_positive() {
        return Err(Error::degenerate(
            "powering with a non-positive exponent requires strictly positive parts",
        ));
    }
    let powered: Vec<f64> = x.parts.iter().map(|v| v.powf(a)).collect();
    closure(&powered)
}

/// Aitchison inner product
/// `⟨x, w⟩ = (1/2p) Σ_i Σ_j log(x_i/x_j) log(w_i/w_j)`.
pub fn aitchison_inner(x: &Composition, w: &Composition) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::invalid("inner product needs equal lengths"));
    }
    x.require_positive("aitchison inner product")?;
    w.require_positive("aitchison inner product")?;
    let p = x.len();
    let lx: Vec<f64> = x.parts.iter().map(|v| v.ln()).collect();
    let lw: Vec<f64> = w.parts.iter().map(|v| v.ln()).collect();
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..p {
            acc += (lx[i] - lx[j]) * (lw[i] - lw[j]);
        }
    }
    Ok(acc / (2.0 * p as f64))
}

/// Replaces zeros by adding `pc` to every count, then closes. The standard
/// zero strategy before any log-ratio work; with `pc > 0` the result is
/// strictly positive.
pub fn pseudo_count(counts: &CountVector, pc: f64) -> Result<Composition> {
    if !pc.is_finite() || pc < 0.0 {
        return Err(Error::invalid("pseudo-count must be non-negative"));
    }
    let shifted: Vec<f64> = counts.values().iter().map(|c| c + pc).collect();
    closure(&shifted)
}

/// Scalar diversity summaries of a composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diversity {
    /// Number of parts above [`ZERO_THRESHOLD`].
    Richness,
    /// Shannon entropy `-Σ x_j log x_j` (natural log, `0·log 0 = 0`).
    Shannon,
    /// `-Σ x_j²`. Note the sign: this is the negative of the usual
    /// Simpson concentration, so larger still means more diverse, but values
    /// are negative (the common index `1 - Σ x_j²` is this plus one).
    Simpson,
}

impl Diversity {
    pub fn name(&self) -> &'static str {
        match self {
            Diversity::Richness => "richness",
            Diversity::Shannon => "shannon",
            Diversity::Simpson => "simpson",
        }
    }
}

impl std::str::FromStr for Diversity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "richness" => Ok(Diversity::Richness),
            "shannon" => Ok(Diversity::Shannon),
            "simpson" => Ok(Diversity::Simpson),
            other => Err(Error::invalid(format!("unknown diversity measure '{other}'"))),
        }
    }
}

/// Evaluates a diversity measure. Defined for any composition, zeros included.
pub fn diversity(x: &Composition, kind: Diversity) -> f64 {
    match kind {
        Diversity::Richness => {
            x.parts.iter().filter(|&&v| v > ZERO_THRESHOLD).count() as f64
        }
        Diversity::Shannon => -x
            .parts
            .iter()
            .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
            .sum::<f64>(),
        Diversity::Simpson => -x.parts.iter().map(|&v| v * v).sum::<f64>(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn comp(parts: &[f64]) -> Composition {
        closure(parts).unwrap()
    }

    #[test]
    fn closure_normalizes() {
        let c = comp(&[1.0, 1.0, 2.0]);
        assert_eq!(c.parts(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn closure_rejects_bad_inputs() {
        assert!(matches!(closure(&[0.0, 0.0, 0.0]), Err(Error::Degenerate(_))));
        assert!(matches!(closure(&[0.5, -0.1, 0.6]), Err(Error::InvalidInput(_))));
        assert!(closure(&[1.0]).is_err());
        assert!(closure(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn new_recloses_out_of_tolerance_sums() {
        let c = Composition::new(vec![0.3, 0.3, 0.3]).unwrap();
        assert!(c.was_reclosed());
        for v in c.parts() {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let ok = Composition::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert!(!ok.was_reclosed());
    }

    #[test]
    fn perturb_matches_hand_computed_value() {
        // (0.2, 0.3, 0.5) ⊕ (0.5, 0.3, 0.2): products (0.10, 0.09, 0.10),
        // total 0.29.
        let x = comp(&[0.2, 0.3, 0.5]);
        let w = comp(&[0.5, 0.3, 0.2]);
        let r = perturb(&x, &w).unwrap();
        let expected = [10.0 / 29.0, 9.0 / 29.0, 10.0 / 29.0];
        for (got, want) in r.parts().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn perturb_rejects_zero_parts() {
        let x = comp(&[0.5, 0.5, 0.0 + 1.0]); // strictly positive
        let w = closure(&[0.0, 1.0, 1.0]).unwrap();
        assert!(perturb(&x, &w).is_err());
    }

    #[test]
    fn uniform_is_perturbation_identity() {
        let x = comp(&[0.1, 0.6, 0.3]);
        let u = Composition::uniform(3).unwrap();
        let r = perturb(&x, &u).unwrap();
        for (got, want) in r.parts().iter().zip(x.parts()) {
            assert_relative_eq!(*got, *want, epsilon = 1e-14);
        }
    }

    #[test]
    fn negative_power_is_perturbation_inverse() {
        let x = comp(&[0.2, 0.5, 0.3]);
        let inv = power(-1.0, &x).unwrap();
        let r = perturb(&x, &inv).unwrap();
        for v in r.parts() {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn power_matches_hand_computed_value() {
        // 2 ⊙ (0.2, 0.8) = C(0.04, 0.64) = (1/17, 16/17).
        let x = comp(&[0.2, 0.8]);
        let r = power(2.0, &x).unwrap();
        assert_relative_eq!(r.parts()[0], 1.0 / 17.0, epsilon = 1e-15);
        assert_relative_eq!(r.parts()[1], 16.0 / 17.0, epsilon = 1e-15);
    }

    #[test]
    fn power_zero_parts_need_positive_exponent() {
        let x = closure(&[0.0, 1.0, 3.0]).unwrap();
        assert!(power(0.5, &x).is_ok());
        assert!(power(-1.0, &x).is_err());
        assert!(power(0.0, &x).is_err());
    }

    #[test]
    fn pseudo_count_matches_hand_computed_value() {
        // (0 + 0.5, 1 + 0.5, 3 + 0.5) / 5.5 = (1/11, 3/11, 7/11).
        let c = CountVector::new(vec![0.0, 1.0, 3.0]).unwrap();
        let r = pseudo_count(&c, 0.5).unwrap();
        let expected = [1.0 / 11.0, 3.0 / 11.0, 7.0 / 11.0];
        for (got, want) in r.parts().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
        assert!(r.is_strictly_positive());
    }

    #[test]
    fn diversity_values() {
        let half = closure(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(diversity(&half, Diversity::Richness), 2.0);

        // Parts at the threshold count as absent.
        let tiny = Composition::new(vec![0.5, 0.5 - 1e-13, 1e-13]).unwrap();
        assert_eq!(diversity(&tiny, Diversity::Richness), 2.0);

        let u4 = Composition::uniform(4).unwrap();
        assert_relative_eq!(diversity(&u4, Diversity::Shannon), 4f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(diversity(&u4, Diversity::Simpson), -0.25, epsilon = 1e-15);

        let point = closure(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(diversity(&point, Diversity::Shannon), 0.0);
        assert_relative_eq!(diversity(&point, Diversity::Simpson), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn diversity_is_permutation_invariant() {
        let x = comp(&[0.1, 0.2, 0.3, 0.4]);
        let y = comp(&[0.4, 0.1, 0.3, 0.2]);
        for kind in [Diversity::Richness, Diversity::Shannon, Diversity::Simpson] {
            assert_relative_eq!(diversity(&x, kind), diversity(&y, kind), epsilon = 1e-15);
        }
    }

    #[test]
    fn inner_product_is_zero_only_at_uniform() {
        let u = Composition::uniform(5).unwrap();
        assert_relative_eq!(aitchison_inner(&u, &u).unwrap(), 0.0, epsilon = 1e-14);
        let x = comp(&[0.1, 0.2, 0.3, 0.25, 0.15]);
        assert!(aitchison_inner(&x, &x).unwrap() > 1e-3);
    }

    fn comp_strategy() -> impl Strategy<Value = Composition> {
        (2usize..8).prop_flat_map(|p| {
            prop::collection::vec(0.05f64..20.0, p).prop_map(|v| closure(&v).unwrap())
        })
    }

    fn comp_pair() -> impl Strategy<Value = (Composition, Composition)> {
        (2usize..8).prop_flat_map(|p| {
            (
                prop::collection::vec(0.05f64..20.0, p),
                prop::collection::vec(0.05f64..20.0, p),
            )
                .prop_map(|(a, b)| (closure(&a).unwrap(), closure(&b).unwrap()))
        })
    }

    fn assert_comp_eq(a: &Composition, b: &Composition, eps: f64) {
        for (x, y) in a.parts().iter().zip(b.parts()) {
            assert_relative_eq!(*x, *y, epsilon = eps, max_relative = eps);
        }
    }

    proptest! {
        #[test]
        fn closure_is_idempotent(x in comp_strategy()) {
            let again = closure(x.parts()).unwrap();
            assert_comp_eq(&x, &again, 1e-15);
        }

        #[test]
        fn perturbation_commutes((x, w) in comp_pair()) {
            let a = perturb(&x, &w).unwrap();
            let b = perturb(&w, &x).unwrap();
            assert_comp_eq(&a, &b, 1e-12);
        }

        #[test]
        fn power_distributes_over_exponent_sum(x in comp_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let lhs = power(a + b, &x).unwrap();
            let rhs = perturb(&power(a, &x).unwrap(), &power(b, &x).unwrap()).unwrap();
            assert_comp_eq(&lhs, &rhs, 1e-11);
        }

        #[test]
        fn power_distributes_over_perturbation((x, w) in comp_pair(), a in -2.0f64..2.0) {
            let lhs = power(a, &perturb(&x, &w).unwrap()).unwrap();
            let rhs = perturb(&power(a, &x).unwrap(), &power(a, &w).unwrap()).unwrap();
            assert_comp_eq(&lhs, &rhs, 1e-11);
        }

        #[test]
        fn inner_product_is_bilinear((x, w) in comp_pair(), a in -2.0f64..2.0) {
            let ax = power(a, &x).unwrap();
            let lhs = aitchison_inner(&ax, &w).unwrap();
            let rhs = a * aitchison_inner(&x, &w).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-9, max_relative = 1e-9);
        }

        #[test]
        fn inner_product_is_symmetric_and_nonnegative_on_diagonal((x, w) in comp_pair()) {
            let xy = aitchison_inner(&x, &w).unwrap();
            let yx = aitchison_inner(&w, &x).unwrap();
            assert_relative_eq!(xy, yx, epsilon = 1e-12, max_relative = 1e-12);
            assert!(aitchison_inner(&x, &x).unwrap() >= -1e-12);
        }
    }
}
