//! Growth-and-harvesting activations for binary classifiers.
//!
//! The crate bundles, in dependency order:
//!
//! - [`special`]: the q-deformed logarithm and the Lambert W principal branch;
//! - [`population`]: closed-form Verhulst/Gompertz solutions with
//!   proportional harvesting, equilibria and yield-maximizing rates;
//! - [`activation`]: the LIGHT activation family built from those solutions,
//!   with exact analytic derivatives;
//! - [`net`]: a minimal dense feed-forward binary classifier with a pluggable
//!   output activation and SGD/Adam/Adagrad optimizers;
//! - [`data`]: synthetic two-cluster datasets, delimited-text ingestion,
//!   deterministic splits and a binary on-disk cache;
//! - [`search`]: the hyperparameter grid, its 2.5% random pick and multi-run
//!   selection statistics;
//! - [`convergence`]: the Lambert-W convergence-rate function, a hard-margin
//!   oracle and margin-tracking experiments.

pub mod activation;
pub mod convergence;
pub mod data;
pub mod error;
pub mod fmt;
pub mod net;
pub mod population;
pub mod search;
pub mod special;

pub use error::{LightError, Result};
