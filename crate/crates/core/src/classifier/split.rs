//! Train/holdout partitioning with a seen-domain and an unseen-domain holdout.
//!
//! Whole landing domains are drawn (in seeded shuffle order) into the
//! unseen holdout until it covers at least 20% of the links. Domains whose
//! addition would push the holdout past 25% are skipped while smaller
//! candidates remain. The remaining links are then split by link so that the
//! seen holdout holds 20% of the total and every seen-holdout domain keeps at
//! least one link in training.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LinkClass;

pub const MIN_DOMAINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledLink {
    pub link_id: String,
    pub landing_domain: String,
    pub label: LinkClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_test_ids: Vec<String>,
    pub holdout_seen_ids: Vec<String>,
    pub holdout_unseen_ids: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("need at least {MIN_DOMAINS} distinct landing domains, found {0}")]
    TooFewDomains(usize),
    #[error("duplicate link_id {0:?}")]
    DuplicateLink(String),
}

pub fn make_split(links: &[LabeledLink], seed: u64) -> Result<SplitPlan, SplitError> {
    let mut by_domain: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for l in links {
        if !ids.insert(l.link_id.as_str()) {
            return Err(SplitError::DuplicateLink(l.link_id.clone()));
        }
        by_domain
            .entry(l.landing_domain.as_str())
            .or_default()
            .push(l.link_id.as_str());
    }
    if by_domain.len() < MIN_DOMAINS {
        return Err(SplitError::TooFewDomains(by_domain.len()));
    }
    for members in by_domain.values_mut() {
        members.sort_unstable();
    }

    let n = links.len();
    let target = (n as f64 * 0.2).ceil() as usize;
    let ceiling = (n as f64 * 0.25).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut domains: Vec<&str> = by_domain.keys().copied().collect();
    domains.shuffle(&mut rng);

    let mut unseen_domains = BTreeSet::new();
    let mut covered = 0usize;
    for &d in &domains {
        if covered >= target {
            break;
        }
        let size = by_domain[d].len();
        if covered + size > ceiling.max(target) && covered > 0 {
            continue;
        }
        // never take every domain
        if unseen_domains.len() + 1 == by_domain.len() {
            break;
        }
        unseen_domains.insert(d);
        covered += size;
    }

    let mut unseen = Vec::new();
    let mut remainder = Vec::new();
    for (d, members) in &by_domain {
        if unseen_domains.contains(d) {
            unseen.extend(members.iter().map(|s| s.to_string()));
        } else {
            remainder.extend(members.iter().map(|m| (*d, *m)));
        }
    }

    remainder.shuffle(&mut rng);
    let mut left_in_train: BTreeMap<&str, usize> = BTreeMap::new();
    for (d, _) in &remainder {
        *left_in_train.entry(*d).or_default() += 1;
    }
    let seen_target = ((n as f64) * 0.2).round() as usize;
    let mut seen = Vec::new();
    let mut train = Vec::new();
    for (d, id) in remainder {
        let count = left_in_train.get_mut(d).expect("counted");
        if seen.len() < seen_target && *count > 1 {
            *count -= 1;
            seen.push(id.to_string());
        } else {
            train.push(id.to_string());
        }
    }
    train.sort_unstable();
    seen.sort_unstable();
    unseen.sort_unstable();
    Ok(SplitPlan {
        train_test_ids: train,
        holdout_seen_ids: seen,
        holdout_unseen_ids: unseen,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn links(n: usize, domains: usize) -> Vec<LabeledLink> {
        (0..n)
            .map(|i| LabeledLink {
                link_id: format!("l{i:04}"),
                landing_domain: format!("d{}.com", i % domains),
                label: if i % 3 == 0 {
                    LinkClass::Affiliate
                } else {
                    LinkClass::NonAffiliate
                },
            })
            .collect()
    }

    #[test]
    fn hundred_links_ten_domains() {
        let data = links(100, 10);
        let plan = make_split(&data, 7).unwrap();
        let near = |got: usize, want: usize| got.abs_diff(want) <= 2;
        assert!(
            near(plan.train_test_ids.len(), 60),
            "{}",
            plan.train_test_ids.len()
        );
        assert!(near(plan.holdout_seen_ids.len(), 20));
        assert!(near(plan.holdout_unseen_ids.len(), 20));

        let domain_of = |id: &String| {
            data.iter()
                .find(|l| &l.link_id == id)
                .unwrap()
                .landing_domain
                .clone()
        };
        let train: BTreeSet<_> = plan.train_test_ids.iter().map(domain_of).collect();
        let unseen: BTreeSet<_> = plan.holdout_unseen_ids.iter().map(domain_of).collect();
        assert!(train.is_disjoint(&unseen));
        assert_eq!(plan, make_split(&data, 7).unwrap());
    }

    #[test]
    fn one_domain_is_an_error() {
        assert_eq!(
            make_split(&links(5, 1), 1),
            Err(SplitError::TooFewDomains(1))
        );
    }
}
