//! Holdout evaluation of the forest against the phase-1 pattern baseline.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::forest::{predict, ForestError, ForestModel, LabeledVector};
use super::split::SplitPlan;
use super::{LinkClass, Prf};
use crate::patterns::{CorpusLabels, Phase1Label};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("{0} holdout is empty")]
    EmptyHoldout(&'static str),
    #[error("no features for planned link {0:?}")]
    MissingFeatures(String),
    #[error(transparent)]
    Model(#[from] ForestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutMetrics {
    pub n_links: usize,
    pub n_affiliate: usize,
    pub classifier: Prf,
    /// Phase-1 patterns only: a link counts as affiliate iff a pattern says so.
    pub regex_baseline: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seen: HoldoutMetrics,
    pub unseen: HoldoutMetrics,
}

fn holdout(
    name: &'static str,
    ids: &[String],
    index: &HashMap<&str, &LabeledVector>,
    model: &ForestModel,
    phase1: &CorpusLabels,
) -> Result<HoldoutMetrics, EvalError> {
    if ids.is_empty() {
        return Err(EvalError::EmptyHoldout(name));
    }
    let mut model_pairs = Vec::with_capacity(ids.len());
    let mut baseline_pairs = Vec::with_capacity(ids.len());
    for id in ids {
        let lv = index
            .get(id.as_str())
            .ok_or_else(|| EvalError::MissingFeatures(id.clone()))?;
        let truth = lv.label == LinkClass::Affiliate;
        let predicted = predict(model, &lv.features)?.label == LinkClass::Affiliate;
        model_pairs.push((predicted, truth));
        baseline_pairs.push((phase1.get(id) == Phase1Label::KnownAffiliate, truth));
    }
    Ok(HoldoutMetrics {
        n_links: ids.len(),
        n_affiliate: model_pairs.iter().filter(|(_, t)| *t).count(),
        classifier: Prf::from_pairs(model_pairs),
        regex_baseline: Prf::from_pairs(baseline_pairs),
    })
}

pub fn evaluate(
    model: &ForestModel,
    plan: &SplitPlan,
    features: &[LabeledVector],
    phase1: &CorpusLabels,
) -> Result<EvalReport, EvalError> {
    let index: HashMap<&str, &LabeledVector> = features
        .iter()
        .map(|lv| (lv.features.link_id.as_str(), lv))
        .collect();
    Ok(EvalReport {
        seen: holdout("seen", &plan.holdout_seen_ids, &index, model, phase1)?,
        unseen: holdout("unseen", &plan.holdout_unseen_ids, &index, model, phase1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::features::{FeatureVector, FEATURE_COUNT};
    use crate::classifier::forest::DecisionTree;
    use std::collections::BTreeMap;

    fn lv(id: &str, x: f64, label: LinkClass) -> LabeledVector {
        let mut values = [0.0; FEATURE_COUNT];
        values[0] = x;
        LabeledVector {
            features: FeatureVector::new(id, values),
            label,
        }
    }

    #[test]
    fn perfect_and_constant_models() {
        use LinkClass::*;
        let data: Vec<_> = (0..10)
            .map(|i| {
                let aff = i % 2 == 0;
                lv(
                    &format!("l{i}"),
                    if aff { 1.0 } else { 0.0 },
                    if aff { Affiliate } else { NonAffiliate },
                )
            })
            .collect();
        let plan = SplitPlan {
            train_test_ids: vec![],
            holdout_seen_ids: (0..6).map(|i| format!("l{i}")).collect(),
            holdout_unseen_ids: (6..10).map(|i| format!("l{i}")).collect(),
            seed: 0,
        };
        let phase1 = CorpusLabels {
            labels: BTreeMap::new(),
            coverage: 0.0,
        };
        let perfect =
            ForestModel::from_trees(vec![DecisionTree::stump(0, 0.5, NonAffiliate, Affiliate)]);
        let r = evaluate(&perfect, &plan, &data, &phase1).unwrap();
        assert_eq!(r.seen.classifier.f1, 1.0);
        assert_eq!(r.unseen.classifier.f1, 1.0);
        assert_eq!(r.seen.regex_baseline.f1, 0.0);

        let constant = ForestModel::from_trees(vec![DecisionTree::leaf(Affiliate)]);
        let r = evaluate(&constant, &plan, &data, &phase1).unwrap();
        assert_eq!(r.seen.classifier.precision, 0.5);
        assert_eq!(r.seen.classifier.recall, 1.0);
        assert!((r.seen.classifier.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_holdout_is_an_error() {
        let plan = SplitPlan {
            train_test_ids: vec![],
            holdout_seen_ids: vec![],
            holdout_unseen_ids: vec![],
            seed: 0,
        };
        let model = ForestModel::from_trees(vec![DecisionTree::leaf(LinkClass::Affiliate)]);
        let phase1 = CorpusLabels {
            labels: BTreeMap::new(),
            coverage: 0.0,
        };
        assert_eq!(
            evaluate(&model, &plan, &[], &phase1).unwrap_err(),
            EvalError::EmptyHoldout("seen")
        );
    }
}
