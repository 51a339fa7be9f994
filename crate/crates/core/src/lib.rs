//! Batch audit toolkit for affiliate marketing disclosures.
//!
//! The pipeline runs over recorded crawl logs:
//!
//! 1. [`crawl`] ingests and validates the line-delimited crawl log.
//! 2. [`patterns`] labels links that match known affiliate or social URL shapes.
//! 3. [`graph`] turns each redirect trace into a typed interaction graph.
//! 4. [`classifier`] extracts graph features and classifies the remaining links
//!    with a random forest.
//! 5. [`disclosure`] segments descriptions and labels disclosure clarity.
//! 6. [`compliance`] maps clarity labels to compliance status and computes
//!    prevalence metrics.
//! 7. [`stats`] provides stratified sampling, bootstrap effect sizes and
//!    hypothesis tests.
//!
//! [`fixtures`] generates synthetic corpora with hidden ground truth and
//! [`pipeline`] chains every stage into a reproducible run directory.

pub mod classifier;
pub mod compliance;
pub mod crawl;
pub mod disclosure;
pub mod fixtures;
pub mod graph;
pub mod patterns;
pub mod pipeline;
pub mod stats;
