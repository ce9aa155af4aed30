//! File formats, the ingest-to-report pipeline and the `geocorpus` command
//! line tool, on top of [`geocorpus_core`].

pub mod config;
pub mod corpus;
pub mod counts;
pub mod model_file;
pub mod pipeline;
pub mod report;
pub mod tables;

pub use geocorpus_core as core;
