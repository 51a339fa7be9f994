//! Deterministic random forest over feature vectors.
//!
//! Trees are CART classifiers with axis-aligned threshold splits chosen by
//! Gini impurity, grown on bootstrap resamples with `floor(sqrt(p))`
//! candidate features per split (more when none of them separates the
//! node). Tree `i` draws from a ChaCha8 stream seeded with `train_seed` on
//! stream number `i`, so results do not depend on how trees are scheduled
//! across threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_COUNT, FEATURE_SCHEMA_VERSION};
use super::{LinkClass, Prf};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ForestError {
    #[error("training data holds a single class")]
    SingleClass,
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("feature schema {found} does not match model schema {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("invalid hyperparameters: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl ForestConfig {
    fn validate(&self) -> Result<(), ForestError> {
        if self.n_trees == 0 || self.min_samples_leaf == 0 || self.max_depth == Some(0) {
            return Err(ForestError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }

    /// Ordering used to break F1 ties: fewer trees, then shallower, then
    /// larger leaves.
    fn size_key(&self) -> (usize, usize, std::cmp::Reverse<usize>) {
        (
            self.n_trees,
            self.max_depth.unwrap_or(usize::MAX),
            std::cmp::Reverse(self.min_samples_leaf),
        )
    }
}

/// Hyperparameter grid; every combination is cross-validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<Option<usize>>,
    pub min_samples_leaf: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            n_trees: vec![50, 100, 200],
            max_depth: vec![Some(4), Some(8), Some(16), None],
            min_samples_leaf: vec![1, 5],
        }
    }
}

impl Grid {
    pub fn single(config: ForestConfig) -> Grid {
        Grid {
            n_trees: vec![config.n_trees],
            max_depth: vec![config.max_depth],
            min_samples_leaf: vec![config.min_samples_leaf],
        }
    }

    pub fn configs(&self) -> Vec<ForestConfig> {
        let mut out = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &min_samples_leaf in &self.min_samples_leaf {
                    out.push(ForestConfig {
                        n_trees,
                        max_depth,
                        min_samples_leaf,
                    });
                }
            }
        }
        out
    }

    /// Reads a grid from TOML (`n_trees`, `max_depth`, `min_samples_leaf`
    /// arrays; a depth of 0 means unlimited).
    pub fn from_toml(text: &str) -> Result<Grid, ForestError> {
        #[derive(Deserialize)]
        struct Raw {
            n_trees: Vec<usize>,
            max_depth: Vec<usize>,
            min_samples_leaf: Vec<usize>,
        }
        let raw: Raw =
            toml::from_str(text).map_err(|e| ForestError::InvalidConfig(e.to_string()))?;
        Ok(Grid {
            n_trees: raw.n_trees,
            max_depth: raw
                .max_depth
                .into_iter()
                .map(|d| (d > 0).then_some(d))
                .collect(),
            min_samples_leaf: raw.min_samples_leaf,
        })
    }
}

/// Tree nodes live in an arena; the root is index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: LinkClass,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn leaf(class: LinkClass) -> DecisionTree {
        DecisionTree {
            nodes: vec![TreeNode::Leaf { class }],
        }
    }

    pub fn stump(
        feature: usize,
        threshold: f64,
        left: LinkClass,
        right: LinkClass,
    ) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                TreeNode::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { class: left },
                TreeNode::Leaf { class: right },
            ],
        }
    }

    pub fn predict(&self, x: &[f64; FEATURE_COUNT]) -> LinkClass {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    fn is_valid(&self) -> bool {
        let n = self.nodes.len();
        n > 0
            && self.nodes.iter().all(|node| match node {
                TreeNode::Leaf { .. } => true,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => *feature < FEATURE_COUNT && threshold.is_finite() && *left < n && *right < n,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub feature_schema_version: u32,
    pub train_seed: u64,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: LinkClass,
    /// Fraction of trees voting affiliate.
    pub score: f64,
}

impl ForestModel {
    /// Wraps hand-built trees; mostly useful for tests and experiments.
    pub fn from_trees(trees: Vec<DecisionTree>) -> ForestModel {
        ForestModel {
            feature_schema_version: FEATURE_SCHEMA_VERSION,
            train_seed: 0,
            n_trees: trees.len(),
            max_depth: None,
            min_samples_leaf: 1,
            trees,
        }
    }

    pub fn config(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }

    pub fn affiliate_score(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let votes = self
            .trees
            .iter()
            .filter(|t| t.predict(x) == LinkClass::Affiliate)
            .count();
        votes as f64 / self.trees.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<ForestModel, ForestError> {
        let model: ForestModel =
            serde_json::from_str(text).map_err(|e| ForestError::Serialization(e.to_string()))?;
        if model.trees.len() != model.n_trees || !model.trees.iter().all(DecisionTree::is_valid) {
            return Err(ForestError::Serialization("inconsistent tree data".into()));
        }
        Ok(model)
    }
}

/// Label is affiliate iff at least half the trees say so.
pub fn predict(model: &ForestModel, fv: &FeatureVector) -> Result<Prediction, ForestError> {
    if fv.schema_version != model.feature_schema_version {
        return Err(ForestError::SchemaMismatch {
            expected: model.feature_schema_version,
            found: fv.schema_version,
        });
    }
    let score = model.affiliate_score(&fv.values);
    let label = if score >= 0.5 {
        LinkClass::Affiliate
    } else {
        LinkClass::NonAffiliate
    };
    Ok(Prediction { label, score })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub features: FeatureVector,
    pub label: LinkClass,
}

// ---------------------------------------------------------------------------
// Training

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub(crate) fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a [[f64; FEATURE_COUNT]],
    y: &'a [bool],
    config: ForestConfig,
    mtry: usize,
    nodes: Vec<TreeNode>,
}

impl Grower<'_> {
    fn leaf_class(&self, idx: &[usize]) -> LinkClass {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        // ties go to affiliate
        if 2 * pos >= idx.len() {
            LinkClass::Affiliate
        } else {
            LinkClass::NonAffiliate
        }
    }

    fn push_leaf(&mut self, idx: &[usize]) -> usize {
        let class = self.leaf_class(idx);
        self.nodes.push(TreeNode::Leaf { class });
        self.nodes.len() - 1
    }

    fn best_split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let parent = gini(total_pos, n);
        let min_leaf = self.config.min_samples_leaf;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.to_vec();
        // Like common CART implementations, keep drawing features past
        // `mtry` while no valid split has been found.
        let order = index::sample(rng, FEATURE_COUNT, FEATURE_COUNT);
        for (drawn, feature) in order.into_iter().enumerate() {
            if drawn >= self.mtry && best.is_some_and(|(imp, _, _)| parent - imp > 1e-12) {
                break;
            }
            sorted.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
            let mut left_pos = 0usize;
            for cut in 1..n {
                if self.y[sorted[cut - 1]] {
                    left_pos += 1;
                }
                let lo = self.x[sorted[cut - 1]][feature];
                let hi = self.x[sorted[cut]][feature];
                if lo == hi || cut < min_leaf || n - cut < min_leaf {
                    continue;
                }
                let impurity = (cut as f64 * gini(left_pos, cut)
                    + (n - cut) as f64 * gini(total_pos - left_pos, n - cut))
                    / n as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((impurity, feature, threshold));
                }
            }
        }
        best.filter(|(imp, _, _)| parent - imp > 1e-12)
            .map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let pure = pos == 0 || pos == idx.len();
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || idx.len() < 2 * self.config.min_samples_leaf {
            return self.push_leaf(&idx);
        }
        let Some((feature, threshold)) = self.best_split(&idx, rng) else {
            return self.push_leaf(&idx);
        };
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class: LinkClass::NonAffiliate,
        });
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

fn fit_tree(
    x: &[[f64; FEATURE_COUNT]],
    y: &[bool],
    config: ForestConfig,
    seed: u64,
    tree_index: usize,
) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    let n = x.len();
    let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut grower = Grower {
        x,
        y,
        config,
        mtry: ((FEATURE_COUNT as f64).sqrt().floor() as usize).max(1),
        nodes: Vec::new(),
    };
    grower.grow(sample, 0, &mut rng);
    DecisionTree {
        nodes: grower.nodes,
    }
}

/// Randomly drops majority-class rows until both classes are the same size.
fn undersample(data: &[&LabeledVector], seed: u64) -> Vec<usize> {
    let pos: Vec<usize> = (0..data.len())
        .filter(|&i| data[i].label == LinkClass::Affiliate)
        .collect();
    let neg: Vec<usize> = (0..data.len())
        .filter(|&i| data[i].label == LinkClass::NonAffiliate)
        .collect();
    let (minority, majority) = if pos.len() <= neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xB411));
    let mut keep: Vec<usize> = index::sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|i| majority[i])
        .collect();
    keep.extend(minority);
    keep.sort_unstable();
    keep
}

fn fit(
    data: &[&LabeledVector],
    config: ForestConfig,
    seed: u64,
) -> Result<ForestModel, ForestError> {
    config.validate()?;
    let classes: std::collections::HashSet<_> = data.iter().map(|d| d.label).collect();
    if classes.len() < 2 {
        return Err(ForestError::SingleClass);
    }
    if let Some(bad) = data
        .iter()
        .find(|d| d.features.schema_version != FEATURE_SCHEMA_VERSION)
    {
        return Err(ForestError::SchemaMismatch {
            expected: FEATURE_SCHEMA_VERSION,
            found: bad.features.schema_version,
        });
    }
    let rows = undersample(data, seed);
    let x: Vec<[f64; FEATURE_COUNT]> = rows.iter().map(|&i| data[i].features.values).collect();
    let y: Vec<bool> = rows
        .iter()
        .map(|&i| data[i].label == LinkClass::Affiliate)
        .collect();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| fit_tree(&x, &y, config, seed, t))
        .collect();
    Ok(ForestModel {
        feature_schema_version: FEATURE_SCHEMA_VERSION,
        train_seed: seed,
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
        trees,
    })
}

pub const CV_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub config: ForestConfig,
    pub mean_f1: f64,
    pub folds: Vec<Prf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub selected: ForestConfig,
    /// Fold-level metrics of the selected configuration.
    pub selected_folds: Vec<Prf>,
    pub grid: Vec<ConfigScore>,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
fn fold_of(data: &[LabeledVector], folds: usize, seed: u64) -> Vec<usize> {
    let mut assignment = vec![0; data.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xF01D));
    for class in [LinkClass::Affiliate, LinkClass::NonAffiliate] {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data[i].label == class)
            .collect();
        rand::seq::SliceRandom::shuffle(members.as_mut_slice(), &mut rng);
        for (k, i) in members.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

/// Grid-searched training with stratified 5-fold cross-validation.
///
/// The configuration with the best mean fold F1 wins; ties go to the smaller
/// model. The final model is refit on all rows with `seed`.
pub fn train_forest(
    data: &[LabeledVector],
    grid: &Grid,
    seed: u64,
) -> Result<(ForestModel, CvReport), ForestError> {
    let configs = grid.configs();
    if configs.is_empty() {
        return Err(ForestError::EmptyGrid);
    }
    for c in &configs {
        c.validate()?;
    }
    let all: Vec<&LabeledVector> = data.iter().collect();
    let classes: std::collections::HashSet<_> = data.iter().map(|d| d.label).collect();
    if classes.len() < 2 {
        return Err(ForestError::SingleClass);
    }
    let folds = fold_of(data, CV_FOLDS, seed);

    let scores: Vec<ConfigScore> = configs
        .par_iter()
        .map(|&config| {
            let fold_metrics: Result<Vec<Prf>, ForestError> = (0..CV_FOLDS)
                .into_par_iter()
                .map(|k| {
                    let train: Vec<&LabeledVector> = (0..data.len())
                        .filter(|&i| folds[i] != k)
                        .map(|i| &data[i])
                        .collect();
                    let model = fit(&train, config, derive_seed(seed, k as u64 + 1))?;
                    let pairs = (0..data.len()).filter(|&i| folds[i] == k).map(|i| {
                        let predicted = model.affiliate_score(&data[i].features.values) >= 0.5;
                        (predicted, data[i].label == LinkClass::Affiliate)
                    });
                    Ok(Prf::from_pairs(pairs))
                })
                .collect();
            fold_metrics.map(|folds| ConfigScore {
                config,
                mean_f1: folds.iter().map(|p| p.f1).sum::<f64>() / folds.len() as f64,
                folds,
            })
        })
        .collect::<Result<_, _>>()?;

    let best = scores
        .iter()
        .min_by(|a, b| {
            b.mean_f1
                .total_cmp(&a.mean_f1)
                .then_with(|| a.config.size_key().cmp(&b.config.size_key()))
        })
        .expect("non-empty grid");
    let model = fit(&all, best.config, seed)?;
    let report = CvReport {
        folds: CV_FOLDS,
        selected: best.config,
        selected_folds: best.folds.clone(),
        grid: scores.clone(),
    };
    Ok((model, report))
}
