//! Blind source separation by entropy bound minimization with a smoothed
//! l1 sparsity penalty (SparseICA-EBM), with the penalty-free ICA-EBM and
//! natural-gradient Infomax baselines, ground-truth generators, and
//! separation metrics.
//!
//! All operations are pure functions of their inputs; concurrency happens
//! across independent runs one level up.

pub mod datagen;
pub mod engines;
pub mod entropy;
pub mod error;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
