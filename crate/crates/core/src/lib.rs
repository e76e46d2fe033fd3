//! Federated one-shot ensemble clustering.
//!
//! Sites fit local clustering models and share only their cluster parameters
//! and the labels those parameters assign. An analysis center turns each
//! model into a label-switching-invariant distance matrix, weights models by
//! the leading eigenvector of their cosine agreement, and clusters the
//! weighted consensus distance.

pub mod benchmarks;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod federation;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod simdata;

pub use error::{FontError, Result};
