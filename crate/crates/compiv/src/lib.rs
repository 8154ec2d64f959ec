//! Causal effect estimation for compositional treatments with instrumental
//! variables.
//!
//! Compositions (relative abundances on the simplex) are an awkward treatment
//! variable: their components are not free to vary independently, and in most
//! observational data the composition and the outcome share unobserved
//! confounders. This crate combines Aitchison geometry with two-stage
//! instrumental-variable estimators so that causal statements about
//! compositional treatments become well defined and estimable:
//!
//! - [`simplex`]: the simplex as a vector space (closure, perturbation,
//!   powering, inner product) plus diversity summaries.
//! - [`logratio`]: alr/clr/ilr coordinates and contrast-matrix utilities.
//! - [`lasso`]: sparse log-contrast regression with the sum-zero constraint,
//!   regularization paths, and stability selection.
//! - [`first_stage`]: instrument-to-treatment models (OLS with F diagnostics,
//!   Dirichlet regression, kernel ridge for KIV).
//! - [`iv`]: the estimator menu (2SLS variants, KIV, two-stage log-contrast
//!   pipelines, diversity-as-treatment shortcuts).
//! - [`datagen`]: synthetic benchmark scenarios with known ground truth.
//! - [`metrics`]: causal evaluation metrics and the benchmark harness.
//! - [`io`]: CSV/JSON dataset, fit, and ground-truth interchange.
//!
//! The `compiv` binary wraps the same functionality as a small CLI; the
//! `examples/` directory walks through each capability on runnable data.

pub mod datagen;
pub mod error;
pub mod first_stage;
pub mod io;
pub mod iv;
pub mod lasso;
pub mod logratio;
pub mod metrics;
pub mod rng;
pub mod simplex;

pub use error::{Error, Result};
pub use simplex::{closure, Composition, Diversity};
