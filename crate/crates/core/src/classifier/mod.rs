//! Phase-3 link classification: features, forest, split protocol, evaluation.

pub mod eval;
pub mod features;
pub mod forest;
pub mod split;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, EvalError, EvalReport, HoldoutMetrics};
pub use features::{extract_features, shannon_entropy, FeatureVector, FEATURE_NAMES};
pub use forest::{
    predict, train_forest, CvReport, DecisionTree, ForestConfig, ForestError, ForestModel, Grid,
    LabeledVector, Prediction, TreeNode,
};
pub use split::{make_split, LabeledLink, SplitError, SplitPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    Affiliate,
    NonAffiliate,
}

/// Precision, recall and F1 with affiliate as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Prf {
    /// From `(predicted_positive, actually_positive)` pairs.
    ///
    /// A set without positives or positive predictions scores 1.0 across
    /// the board; otherwise an empty denominator yields 0.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Prf {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (pred, truth) in pairs {
            match (pred, truth) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        if tp + fp + fn_ == 0 {
            return Prf {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                tp,
                fp,
                fn_,
                tn,
            };
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            tn,
        }
    }
}
