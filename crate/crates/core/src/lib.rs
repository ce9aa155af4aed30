//! Core algorithms for auditing georeferenced text corpora.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std` (only `alloc` is required). File formats, the
//! pipeline driver and the command line live in the `geocorpus` crate.
//!
//! The pieces, in pipeline order:
//!
//! - [`ingest`]: `<p>` paragraph extraction, text cleaning, word counting
//!   and exact-hash deduplication.
//! - [`geo`]: ccTLD and nearest-city country assignment.
//! - [`lid`]: hashed character-trigram features and a one-hidden-layer MLP
//!   language identifier.
//! - [`aggregate`]: the mergeable (country, language) word-count matrix.
//! - [`baselines`]: population weighting and census language inventories.
//! - [`metrics`]: Pearson correlation, representation scores and
//!   language-inventory evaluation.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aggregate;
pub mod baselines;
pub mod geo;
pub mod hash;
pub mod ingest;
pub mod lid;
pub mod metrics;
pub mod synthetic;

pub use aggregate::{CountryLanguageCounts, GlobalLanguageTable};
pub use geo::CountryCode;
pub use lid::{LanguageLabel, LidModel, ModelConfig};
