//! Decision-tree learners for tabular classification: a reduced-error-pruned
//! decision tree ([`reptree`]) and a LogitBoost-grown alternating decision
//! tree ([`ladtree`]), with ARFF/CSV loading, stratified cross-validation,
//! and the usual accuracy/MAE/RMSE/confusion-matrix measures.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod ladtree;
pub mod metrics;
mod model_io;
pub mod reptree;

pub use error::{Error, Result};
pub use model_io::model_kind;
