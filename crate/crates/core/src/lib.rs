//! Reference-free evaluation of opinion summaries.
//!
//! Source reviews and a candidate summary are reduced to atomic
//! `(subject, description)` fact tuples by a chat model. Tuples are embedded,
//! compared with a clamped cosine similarity, and aggregated into coverage
//! (how much of the reviews the summary captures), consistency (how much of
//! the summary the reviews support), and their harmonic mean, FactSim.
//!
//! The crate also ships ROUGE baselines, a Kendall's tau harness for
//! correlating any metric with human ratings, and explainability reports
//! over the tuple similarity matrix.

pub mod benchmark;
pub mod config;
pub mod embedding;
pub mod error;
pub mod explain;
pub mod extraction;
pub mod http;
mod pool;
pub mod rouge;
pub mod scoring;

pub use error::{Error, Result, Side};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
