//! Statistical analysis: stratified sampling, bootstrap effect sizes and
//! classical hypothesis tests.

pub mod bootstrap;
pub mod dist;
pub mod hypothesis;
pub mod sampling;

pub use bootstrap::{bootstrap_effect, bootstrap_mean_difference, EffectEstimate, IntervalMethod};
pub use hypothesis::{pearson_r, welch_ttest, ztest_proportions, Correlation, WelchTest, ZTest};
pub use sampling::{stratified_records, stratified_sample, StratifiedSample, StratumReport};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input is constant")]
    ConstantInput,
    #[error("need at least {min} bootstrap resamples, got {0}", min = bootstrap::MIN_BOOT)]
    TooFewResamples(usize),
    #[error("every stratum is smaller than the quota {quota}")]
    AllStrataUndersized { quota: usize },
}
