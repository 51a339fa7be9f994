//! Stratified sampling with a fixed per-stratum quota.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::compliance::{Dimension, VideoComplianceRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumReport<K> {
    pub key: K,
    pub available: usize,
    pub drawn: usize,
    /// Smaller than the quota, so left out entirely.
    pub dropped: bool,
}

#[derive(Debug, Clone)]
pub struct StratifiedSample<'a, T, K> {
    pub items: Vec<&'a T>,
    pub strata: Vec<StratumReport<K>>,
}

/// Draws `quota` items without replacement from every stratum that has at
/// least that many; undersized strata are reported and skipped. Strata are
/// visited in key order and members keep their input order, so one seed
/// gives one sample.
pub fn stratified_sample<'a, T, K: Ord + Clone>(
    items: &'a [T],
    key: impl Fn(&T) -> K,
    quota: usize,
    seed: u64,
) -> Result<StratifiedSample<'a, T, K>, StatsError> {
    if quota == 0 {
        return Err(StatsError::InvalidCounts("quota must be positive".into()));
    }
    let mut strata: BTreeMap<K, Vec<&T>> = BTreeMap::new();
    for item in items {
        strata.entry(key(item)).or_default().push(item);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut reports = Vec::new();
    for (k, members) in strata {
        let dropped = members.len() < quota;
        if !dropped {
            let mut picked = index::sample(&mut rng, members.len(), quota).into_vec();
            picked.sort_unstable();
            out.extend(picked.into_iter().map(|i| members[i]));
        }
        reports.push(StratumReport {
            key: k,
            available: members.len(),
            drawn: if dropped { 0 } else { quota },
            dropped,
        });
    }
    if out.is_empty() {
        return Err(StatsError::AllStrataUndersized { quota });
    }
    Ok(StratifiedSample {
        items: out,
        strata: reports,
    })
}

/// Stratifies compliance records by the given dimensions.
pub fn stratified_records<'a>(
    records: &'a [VideoComplianceRecord],
    dims: &[Dimension],
    quota: usize,
    seed: u64,
) -> Result<StratifiedSample<'a, VideoComplianceRecord, Vec<String>>, StatsError> {
    stratified_sample(
        records,
        |r| dims.iter().map(|d| d.value(r)).collect(),
        quota,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_strata_quota_five() {
        let items: Vec<(u8, usize)> = (0..20).map(|i| ((i % 2) as u8, i)).collect();
        let s = stratified_sample(&items, |x| x.0, 5, 1).unwrap();
        assert_eq!(s.items.len(), 10);
        for k in [0u8, 1] {
            assert_eq!(s.items.iter().filter(|x| x.0 == k).count(), 5);
        }
        let again = stratified_sample(&items, |x| x.0, 5, 1).unwrap();
        assert_eq!(s.items, again.items);
    }

    #[test]
    fn undersized_strata_dropped() {
        let items: Vec<(u8, usize)> = (0..12).map(|i| (u8::from(i >= 10), i)).collect();
        let s = stratified_sample(&items, |x| x.0, 5, 1).unwrap();
        assert_eq!(s.items.len(), 5);
        assert!(s.strata[1].dropped);
        assert_eq!(
            stratified_sample(&items, |x| x.0, 11, 1).unwrap_err(),
            StatsError::AllStrataUndersized { quota: 11 }
        );
    }
}
