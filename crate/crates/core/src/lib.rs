//! Outlet-level reliability profiling and claim verification over a news corpus.
//!
//! An article's factuality mixes its own language reliability with its
//! outlet's site reliability. A claim's score is the reliability-weighted
//! sum of the stances of retrieved articles, normalized to a factuality in
//! `[0, 1]`.

// `!(x >= 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod canonical;
pub mod config;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod lexicon;
pub mod profilestore;
pub mod reliability;
pub mod retrieval;
pub mod sourcefeat;
pub mod stance;
pub mod textfeat;
pub mod verdict;

pub use engine::{Engine, ENGINE_VERSION};
pub use error::{Error, Result};
