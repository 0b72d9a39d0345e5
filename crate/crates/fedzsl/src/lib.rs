//! Deterministic simulator and library for federated zero-shot learning.
//!
//! Multiple clients holding disjoint class sets jointly train a linear
//! visual-to-attribute model by weighted aggregation. Local objectives
//! combine semantic cross-entropy, relation distillation against a
//! Graphical-Lasso class-similarity matrix, and a semantic-consistency
//! term. A backdoor adversary performs model replacement; the feature
//! magnitude defense filters suspect samples inside every local step.
//!
//! Every run is a pure function of its configuration and one master seed;
//! see the guide in `book/` for the concepts and the derivation rules.

pub mod data;
pub mod error;
pub mod linalg;
pub mod rng;

pub use error::{Error, Result};
