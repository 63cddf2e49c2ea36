//! Collaborative-filtering research toolkit.
//!
//! The crate is organized around a shared in-memory rating model and a small
//! parallel execution engine:
//!
//! - [`datamodel`] loads rating triples from text files, splits users and
//!   items into training and test sets, and exposes the resulting
//!   [`datamodel::RatingsModel`] with precomputed per-profile statistics.
//! - [`engine`] runs three-phase passes (setup, per-element, teardown) over
//!   the user/item arrays, in parallel when the `parallel` feature is
//!   enabled (it is by default).
//! - [`knn`] implements memory-based CF: similarity metrics, neighbor
//!   selection and rating aggregation, in user-to-user and item-to-item
//!   orientations.
//! - [`mf`] implements model-based CF: regularized matrix factorization
//!   trained with SGD, with public access to every learned factor vector.
//! - [`quality`] scores test predictions (MAE, coverage, precision/recall)
//!   and collects results into printable/exportable grids.
//!
//! Intermediate pipeline outputs (similarities, neighbors, predictions) are
//! kept in per-profile key-value stores so that every stage's result stays
//! inspectable after the run.

pub mod datamodel;
pub mod engine;
pub mod error;
pub mod knn;
pub mod mf;
pub mod quality;

pub use error::{CfError, Result};
