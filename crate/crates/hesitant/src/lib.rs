//! Desk-scale pipeline for relating a classifier's predictive uncertainty to
//! the linguistic uncertainty expressed in the reports it classifies.
//!
//! The pipeline ingests (or synthesizes) a corpus of free-text reports, each
//! carrying a three-class verdict (positive / negative / uncertain) from two
//! rule-based labellers. Uncertain verdicts are binarised (`U-Ones`,
//! `U-Zeros`, or `U-Random`), a small dropout classifier over hashed n-grams
//! is trained on the result, and predictive uncertainty is estimated with
//! Monte Carlo dropout and deep ensembles. Per-study predictive entropy and
//! predictive standard deviation are then correlated (point-biserial) against
//! linguistic-uncertainty indicators: labeller disagreement and each
//! labeller's raw uncertain flag.
//!
//! Entry points:
//!
//! - [`corpus`]: data model, JSONL/CSV ingestion, synthetic corpus generator
//! - [`textprep`]: header stripping, tokenization, stopword removal, stemming
//! - [`labels`]: binarisation strategies and uncertainty indicators
//! - [`model`]: hashed n-gram featurizer, dropout MLP, AdamW, k-fold CV
//! - [`uq`]: MC dropout / ensemble sampling and uncertainty summaries
//! - [`stats`]: classification metrics and point-biserial correlation
//! - [`analysis`]: experiment orchestration and report emission
//! - [`cli`]: the `hesitant` command-line surface
//!
//! See the crate `examples/` directory for one runnable walkthrough per
//! capability, and `analysis::run_experiment` for the whole pipeline in one
//! call.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod labels;
pub mod model;
pub mod rng;
pub mod stats;
pub mod textprep;
pub mod uq;

pub use error::{Error, Result};
