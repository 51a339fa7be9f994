//! End-to-end run: label, graph, features, classify, disclose, metrics,
//! effects. Every artifact lands in one run directory next to a manifest
//! of input and output checksums, so two runs can be compared byte for byte.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{
    evaluate, extract_features, make_split, predict, train_forest, CvReport, EvalReport,
    FeatureVector, ForestModel, Grid, LabeledLink, LabeledVector, LinkClass, Prf, SplitPlan,
};
use crate::compliance::{
    breakdown_table, clarity_breakdown, compute_metrics, dataset_summary, map_status, metrics_csv,
    metrics_table, summary_table, ChannelTier, Compensation, ComplianceStatus, Dimension, Period,
    Relationship, VideoComplianceRecord,
};
use crate::crawl::{
    domain_of, extract_hyperlinks, is_known_shortener, normalize_url, Corpus, CrawlRecord,
    OriginLocation, SCHEMA_VERSION,
};
use crate::disclosure::{
    analyze_batch, classifier_from_spec, most_compliant, DescriptionInput, DisclosureSegment,
    LinkVerdict,
};
use crate::fixtures::{default_guidance, parse_guidance, LinkTruth, TruthLine};
use crate::graph::build_graph;
use crate::patterns::{label_corpus, CorpusLabels, Phase1Label, Registry};
use crate::stats::{
    bootstrap_effect, stratified_records, ztest_proportions, EffectEstimate, StratumReport, ZTest,
};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Ingest,
    Label,
    Graph,
    Features,
    Train,
    Classify,
    Disclose,
    Compliance,
    Metrics,
    Stats,
    Write,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Label => "label",
            Stage::Graph => "graph",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Classify => "classify",
            Stage::Disclose => "disclose",
            Stage::Compliance => "compliance",
            Stage::Metrics => "metrics",
            Stage::Stats => "stats",
            Stage::Write => "write",
        }
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    /// Offending link or video id, when one is to blame.
    pub record: Option<String>,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl fmt::Display) -> Self {
        PipelineError {
            stage,
            record: None,
            message: message.to_string(),
        }
    }

    pub fn at(stage: Stage, record: impl Into<String>, message: impl fmt::Display) -> Self {
        PipelineError {
            stage,
            record: Some(record.into()),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.record {
            Some(r) => write!(f, "[{}] {}: {}", self.stage.as_str(), r, self.message),
            None => write!(f, "[{}] {}", self.stage.as_str(), self.message),
        }
    }
}

impl std::error::Error for PipelineError {}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    /// Pre-trained model; wins over `labels`.
    pub model: Option<PathBuf>,
    /// Per-link annotations to train on (`labels.jsonl`).
    pub labels: Option<PathBuf>,
    pub n_trees: Vec<usize>,
    /// 0 means unlimited.
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let g = Grid::default();
        ClassifierSection {
            model: None,
            labels: None,
            n_trees: g.n_trees,
            max_depth: g.max_depth.iter().map(|d| d.unwrap_or(0)).collect(),
            min_samples_leaf: g.min_samples_leaf,
        }
    }
}

impl ClassifierSection {
    pub fn grid(&self) -> Grid {
        Grid {
            n_trees: self.n_trees.clone(),
            max_depth: self
                .max_depth
                .iter()
                .map(|&d| (d > 0).then_some(d))
                .collect(),
            min_samples_leaf: self.min_samples_leaf.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectsSection {
    /// Dimension that splits the records into two groups.
    pub split_on: String,
    pub metrics: Vec<String>,
    pub n_boot: usize,
    /// Stratify before estimating; empty means no stratification.
    pub strata: Vec<String>,
    pub quota: usize,
}

impl Default for EffectsSection {
    fn default() -> Self {
        EffectsSection {
            split_on: "guidance".into(),
            metrics: vec!["CC".into(), "PC".into(), "NC".into()],
            n_boot: 10_000,
            strata: Vec::new(),
            quota: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Pattern registry; the bundled one when unset.
    pub registry: Option<PathBuf>,
    /// Partner guidance table; the bundled one when unset.
    pub guidance: Option<PathBuf>,
    /// `rules`, `keywords` or `external:<command>`.
    pub disclosure_classifier: String,
    pub group_by: Vec<String>,
    pub classifier: ClassifierSection,
    pub effects: EffectsSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 1,
            registry: None,
            guidance: None,
            disclosure_classifier: "rules".into(),
            group_by: ["category", "tier", "source", "period"]
                .map(String::from)
                .to_vec(),
            classifier: ClassifierSection::default(),
            effects: EffectsSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::new(Stage::Config, e))
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::at(Stage::Config, path.display().to_string(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.registry,
            &mut cfg.guidance,
            &mut cfg.classifier.model,
            &mut cfg.classifier.labels,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// Stage helpers, usable on their own

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(stage: Stage, path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path)
        .map_err(|e| PipelineError::at(stage, path.display().to_string(), e))
}

/// A shortened link that never left the shortener and matched no pattern.
pub fn is_unresolvable(crawl: &CrawlRecord, phase1: Phase1Label) -> bool {
    phase1 == Phase1Label::Unknown
        && crawl.redirects.is_empty()
        && is_known_shortener(&crawl.original_url)
}

/// Feature vectors for every resolvable link, in corpus order.
pub fn corpus_features(
    corpus: &Corpus,
    phase1: &CorpusLabels,
) -> Result<Vec<FeatureVector>, PipelineError> {
    corpus
        .crawls()
        .par_iter()
        .filter(|c| !is_unresolvable(c, phase1.get(&c.link_id)))
        .map(|c| {
            build_graph(c)
                .map(|g| extract_features(&g))
                .map_err(|e| PipelineError::at(Stage::Graph, c.link_id.clone(), e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: ForestModel,
    pub cv: CvReport,
    pub plan: SplitPlan,
    pub eval: EvalReport,
}

/// Splits the annotated links, trains on the train/test part and scores
/// both holdouts against the phase-1 baseline.
pub fn train_and_evaluate(
    features: &[FeatureVector],
    annotations: &[LabeledLink],
    phase1: &CorpusLabels,
    grid: &Grid,
    seed: u64,
) -> Result<TrainOutcome, PipelineError> {
    let by_id: HashMap<&str, &FeatureVector> =
        features.iter().map(|f| (f.link_id.as_str(), f)).collect();
    let mut labeled = Vec::with_capacity(annotations.len());
    for a in annotations {
        let fv = by_id.get(a.link_id.as_str()).ok_or_else(|| {
            PipelineError::at(
                Stage::Train,
                a.link_id.clone(),
                "annotated link has no features",
            )
        })?;
        labeled.push(LabeledVector {
            features: (*fv).clone(),
            label: a.label,
        });
    }
    let plan = make_split(annotations, seed).map_err(|e| PipelineError::new(Stage::Train, e))?;
    let train_ids: HashSet<&str> = plan.train_test_ids.iter().map(String::as_str).collect();
    let train: Vec<LabeledVector> = labeled
        .iter()
        .filter(|lv| train_ids.contains(lv.features.link_id.as_str()))
        .cloned()
        .collect();
    let (model, cv) =
        train_forest(&train, grid, seed).map_err(|e| PipelineError::new(Stage::Train, e))?;
    let eval = evaluate(&model, &plan, &labeled, phase1)
        .map_err(|e| PipelineError::new(Stage::Train, e))?;
    Ok(TrainOutcome {
        model,
        cv,
        plan,
        eval,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Affiliate,
    NonAffiliate,
    Unresolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictSource {
    Phase1,
    Forest,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkVerdictRecord {
    pub link_id: String,
    pub verdict: Verdict,
    pub source: VerdictSource,
    /// Forest affiliate vote share, when the forest decided.
    pub score: Option<f64>,
}

/// Phase-1 labels win; the forest decides the rest.
pub fn classify_links(
    corpus: &Corpus,
    phase1: &CorpusLabels,
    features: &[FeatureVector],
    model: Option<&ForestModel>,
) -> Result<Vec<LinkVerdictRecord>, PipelineError> {
    let by_id: HashMap<&str, &FeatureVector> =
        features.iter().map(|f| (f.link_id.as_str(), f)).collect();
    corpus
        .crawls()
        .iter()
        .map(|c| {
            let p1 = phase1.get(&c.link_id);
            let (verdict, source, score) = match p1 {
                Phase1Label::KnownAffiliate => (Verdict::Affiliate, VerdictSource::Phase1, None),
                Phase1Label::KnownNonAffiliate => (Verdict::NonAffiliate, VerdictSource::Phase1, None),
                Phase1Label::Unknown if is_unresolvable(c, p1) => {
                    (Verdict::Unresolvable, VerdictSource::None, None)
                }
                Phase1Label::Unknown => {
                    let model = model.ok_or_else(|| {
                        PipelineError::at(Stage::Classify, c.link_id.clone(), "no model for an unlabeled link (set classifier.model or classifier.labels)")
                    })?;
                    let fv = by_id.get(c.link_id.as_str()).ok_or_else(|| {
                        PipelineError::at(Stage::Classify, c.link_id.clone(), "missing features")
                    })?;
                    let p = predict(model, fv).map_err(|e| PipelineError::at(Stage::Classify, c.link_id.clone(), e))?;
                    let v = match p.label {
                        LinkClass::Affiliate => Verdict::Affiliate,
                        LinkClass::NonAffiliate => Verdict::NonAffiliate,
                    };
                    (v, VerdictSource::Forest, Some(p.score))
                }
            };
            Ok(LinkVerdictRecord {
                link_id: c.link_id.clone(),
                verdict,
                source,
                score,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSegments {
    pub video_id: String,
    pub segments: Vec<DisclosureSegment>,
}

/// Disclosure segments of English descriptions. Description links are
/// matched to crawl records by normalized URL; unmatched links count as
/// non-affiliate.
pub fn disclose_corpus(
    corpus: &Corpus,
    verdicts: &[LinkVerdictRecord],
    classifier_spec: &str,
) -> Result<Vec<VideoSegments>, PipelineError> {
    let classifier = classifier_from_spec(classifier_spec)
        .map_err(|e| PipelineError::new(Stage::Disclose, e))?;
    let verdict_of: HashMap<&str, Verdict> = verdicts
        .iter()
        .map(|v| (v.link_id.as_str(), v.verdict))
        .collect();
    let by_video = corpus.crawls_by_video();
    let english: Vec<_> = corpus.videos().iter().filter(|v| v.is_english()).collect();
    let links: Vec<Vec<LinkVerdict>> = english
        .iter()
        .map(|v| {
            let affiliate_urls: HashSet<&str> = by_video
                .get(v.video_id.as_str())
                .into_iter()
                .flatten()
                .filter(|c| verdict_of.get(c.link_id.as_str()) == Some(&Verdict::Affiliate))
                .map(|c| c.original_url.as_str())
                .collect();
            extract_hyperlinks(&v.description_text)
                .into_iter()
                .map(|(url, char_offset)| {
                    let affiliate = normalize_url(&url)
                        .map(|n| affiliate_urls.contains(n.as_str()))
                        .unwrap_or(false);
                    LinkVerdict {
                        url,
                        char_offset,
                        affiliate,
                    }
                })
                .collect()
        })
        .collect();
    let inputs: Vec<DescriptionInput<'_>> = english
        .iter()
        .zip(&links)
        .map(|(v, l)| DescriptionInput {
            description: &v.description_text,
            links: l,
        })
        .collect();
    let segments = analyze_batch(&inputs, classifier.as_ref())
        .map_err(|e| PipelineError::new(Stage::Disclose, e))?;
    Ok(english
        .iter()
        .zip(segments)
        .map(|(v, segments)| VideoSegments {
            video_id: v.video_id.clone(),
            segments,
        })
        .collect())
}

/// One compliance record per video. Shopping-shelf affiliate links carry
/// the platform's own disclosure and count as (Clear, Explicit).
pub fn compliance_records(
    corpus: &Corpus,
    verdicts: &[LinkVerdictRecord],
    segments: &[VideoSegments],
    guidance: &BTreeMap<String, bool>,
) -> Vec<VideoComplianceRecord> {
    let verdict_of: HashMap<&str, Verdict> = verdicts
        .iter()
        .map(|v| (v.link_id.as_str(), v.verdict))
        .collect();
    let segments_of: HashMap<&str, &[DisclosureSegment]> = segments
        .iter()
        .map(|s| (s.video_id.as_str(), s.segments.as_slice()))
        .collect();
    let by_video = corpus.crawls_by_video();
    corpus
        .videos()
        .iter()
        .map(|v| {
            let crawls: &[&CrawlRecord] = by_video
                .get(v.video_id.as_str())
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let is_aff =
                |c: &CrawlRecord| verdict_of.get(c.link_id.as_str()) == Some(&Verdict::Affiliate);
            let all: HashSet<&str> = crawls.iter().map(|c| c.original_url.as_str()).collect();
            let aff: HashSet<&str> = crawls
                .iter()
                .filter(|c| is_aff(c))
                .map(|c| c.original_url.as_str())
                .collect();
            let partner = crawls
                .iter()
                .find(|c| is_aff(c))
                .and_then(|c| domain_of(&c.landing_url));
            let shelf = crawls
                .iter()
                .any(|c| c.origin_location == OriginLocation::ShoppingShelf && is_aff(c));
            let analyzed = v.is_english();
            let (compensation, relationship) = if !analyzed || aff.is_empty() {
                (Compensation::Absent, Relationship::Absent)
            } else if shelf {
                (Compensation::Clear, Relationship::Explicit)
            } else {
                most_compliant(segments_of.get(v.video_id.as_str()).copied().unwrap_or(&[]))
            };
            VideoComplianceRecord {
                video_id: v.video_id.clone(),
                channel_id: v.channel_id.clone(),
                is_affiliate_video: !aff.is_empty(),
                affiliate_link_count: aff.len(),
                total_link_count: all.len(),
                compensation,
                relationship,
                status: map_status(compensation, relationship),
                category: v.category,
                channel_tier: ChannelTier::from_subscribers(v.subscriber_count),
                subscriber_count: v.subscriber_count,
                source_tag: v.source_tag,
                period: Period::of(v.upload_date),
                guidance: partner.as_ref().and_then(|p| guidance.get(p).copied()),
                partner,
                disclosure_analyzed: analyzed,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Effects

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    pub split_on: Dimension,
    /// Baseline group; `delta = mean(b) - mean(a)`.
    pub group_a: String,
    pub group_b: String,
    pub estimate: EffectEstimate,
    pub ztest: Option<ZTest>,
    pub strata: Vec<StratumReport<Vec<String>>>,
}

/// The two groups compared along `dim`: guidance is compared as
/// guidance minus no guidance; other dimensions need exactly two values,
/// taken in sorted order.
pub fn effect_groups(
    records: &[VideoComplianceRecord],
    dim: Dimension,
) -> Result<(String, String), String> {
    if dim == Dimension::Guidance {
        return Ok(("no_guidance".into(), "guidance".into()));
    }
    let values: std::collections::BTreeSet<String> = records
        .iter()
        .filter(|r| r.is_affiliate_video && r.disclosure_analyzed)
        .map(|r| dim.value(r))
        .collect();
    if values.len() != 2 {
        return Err(format!(
            "{} has {} values among analysed affiliate videos; need exactly two",
            dim.as_str(),
            values.len()
        ));
    }
    let mut it = values.into_iter();
    Ok((it.next().expect("two"), it.next().expect("two")))
}

pub fn effect_analysis(
    records: &[VideoComplianceRecord],
    split_on: Dimension,
    metric: ComplianceStatus,
    n_boot: usize,
    seed: u64,
    strata: Option<(&[Dimension], usize)>,
) -> Result<EffectReport, String> {
    let pool: Vec<VideoComplianceRecord> = records
        .iter()
        .filter(|r| r.is_affiliate_video && r.disclosure_analyzed)
        .cloned()
        .collect();
    let (pool, strata_report) = match strata {
        Some((dims, quota)) if !dims.is_empty() && quota > 0 => {
            let s = stratified_records(&pool, dims, quota, seed).map_err(|e| e.to_string())?;
            (s.items.into_iter().cloned().collect(), s.strata)
        }
        _ => (pool, Vec::new()),
    };
    let (ga, gb) = effect_groups(&pool, split_on)?;
    let a: Vec<VideoComplianceRecord> = pool
        .iter()
        .filter(|r| split_on.value(r) == ga)
        .cloned()
        .collect();
    let b: Vec<VideoComplianceRecord> = pool
        .iter()
        .filter(|r| split_on.value(r) == gb)
        .cloned()
        .collect();
    let estimate =
        bootstrap_effect(&a, &b, metric, n_boot, seed).map_err(|e| format!("{ga} vs {gb}: {e}"))?;
    let hits = |g: &[VideoComplianceRecord]| g.iter().filter(|r| r.status == metric).count() as u64;
    let ztest = ztest_proportions(hits(&b), b.len() as u64, hits(&a), a.len() as u64).ok();
    Ok(EffectReport {
        split_on,
        group_a: ga,
        group_b: gb,
        estimate,
        ztest,
        strata: strata_report,
    })
}

// ---------------------------------------------------------------------------
// Truth comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthScore {
    /// Affiliate detection over resolvable links.
    pub links: Prf,
    pub n_links: usize,
    /// Status agreement over analysed videos that are affiliate in truth.
    pub status_accuracy: f64,
    pub n_videos: usize,
}

pub fn score_against_truth(
    verdicts: &[LinkVerdictRecord],
    records: &[VideoComplianceRecord],
    truth: &[TruthLine],
) -> TruthScore {
    let verdict_of: HashMap<&str, Verdict> = verdicts
        .iter()
        .map(|v| (v.link_id.as_str(), v.verdict))
        .collect();
    let record_of: HashMap<&str, &VideoComplianceRecord> =
        records.iter().map(|r| (r.video_id.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let (mut agree, mut n_videos) = (0usize, 0usize);
    for t in truth {
        match t {
            TruthLine::Link(LinkTruth {
                link_id,
                affiliate,
                unresolvable: false,
                ..
            }) => {
                let predicted = verdict_of.get(link_id.as_str()) == Some(&Verdict::Affiliate);
                pairs.push((predicted, *affiliate));
            }
            TruthLine::Video(v) if v.is_affiliate_video && v.disclosure_analyzed => {
                n_videos += 1;
                if record_of
                    .get(v.video_id.as_str())
                    .is_some_and(|r| r.status == v.status)
                {
                    agree += 1;
                }
            }
            _ => {}
        }
    }
    TruthScore {
        n_links: pairs.len(),
        links: Prf::from_pairs(pairs),
        status_accuracy: if n_videos == 0 {
            1.0
        } else {
            agree as f64 / n_videos as f64
        },
        n_videos,
    }
}

// ---------------------------------------------------------------------------
// The run

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub schema_version: u32,
    pub feature_schema_version: u32,
    pub tool_version: String,
    pub seeds: BTreeMap<String, u64>,
    /// Input name -> sha256.
    pub inputs: BTreeMap<String, String>,
    pub disclosure_classifier: String,
    /// Artifact file name -> sha256.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// sha256 of `manifest.json`.
    pub manifest_checksum: String,
    pub n_videos: usize,
    pub n_links: usize,
    pub phase1_coverage: f64,
    pub eval: Option<EvalReport>,
}

struct Bundle {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Bundle {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        std::fs::write(self.dir.join(name), bytes)
            .map_err(|e| PipelineError::at(Stage::Write, name.to_string(), e))?;
        self.artifacts.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| PipelineError::at(Stage::Write, name.to_string(), e))?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    fn put_lines<T: Serialize>(&mut self, name: &str, items: &[T]) -> Result<(), PipelineError> {
        let mut bytes = Vec::new();
        for it in items {
            serde_json::to_writer(&mut bytes, it)
                .map_err(|e| PipelineError::at(Stage::Write, name.to_string(), e))?;
            bytes.push(b'\n');
        }
        self.put(name, &bytes)
    }
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(
    stage: Stage,
    path: &Path,
) -> Result<Vec<T>, PipelineError> {
    read(stage, path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| PipelineError::at(stage, format!("{}:{}", path.display(), i + 1), e))
        })
        .collect()
}

pub fn run_pipeline(
    corpus: &Corpus,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<RunSummary, PipelineError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| PipelineError::at(Stage::Write, out_dir.display().to_string(), e))?;
    let mut bundle = Bundle {
        dir: out_dir.to_path_buf(),
        artifacts: BTreeMap::new(),
    };
    let mut inputs = BTreeMap::new();
    let mut corpus_bytes = Vec::new();
    corpus
        .write_to(&mut corpus_bytes)
        .map_err(|e| PipelineError::new(Stage::Ingest, e))?;
    inputs.insert("corpus".to_string(), sha256_hex(&corpus_bytes));
    let config_bytes = toml::to_string(config).map_err(|e| PipelineError::new(Stage::Config, e))?;
    inputs.insert("config".to_string(), sha256_hex(config_bytes.as_bytes()));

    // label
    let registry = match &config.registry {
        Some(p) => Registry::parse(&read(Stage::Label, p)?)
            .map_err(|e| PipelineError::at(Stage::Label, p.display().to_string(), e))?,
        None => Registry::default_registry(),
    };
    inputs.insert(
        "registry".to_string(),
        sha256_hex(registry.source_text().as_bytes()),
    );
    let phase1 = label_corpus(corpus, &registry);
    let phase1_rows: Vec<_> = phase1
        .labels
        .iter()
        .map(|(id, l)| serde_json::json!({"link_id": id, "label": l.label, "rule_id": l.rule_id}))
        .collect();
    bundle.put_lines("phase1_labels.jsonl", &phase1_rows)?;

    // graph + features
    let features = corpus_features(corpus, &phase1)?;
    bundle.put_lines("features.jsonl", &features)?;

    // train or load
    let mut eval = None;
    let model = if corpus.crawls().is_empty() {
        None
    } else if let Some(path) = &config.classifier.model {
        let text = read(Stage::Classify, path)?;
        inputs.insert("model_file".to_string(), sha256_hex(text.as_bytes()));
        Some(
            ForestModel::from_json(&text)
                .map_err(|e| PipelineError::at(Stage::Classify, path.display().to_string(), e))?,
        )
    } else if let Some(path) = &config.classifier.labels {
        let text = read(Stage::Train, path)?;
        inputs.insert("labels".to_string(), sha256_hex(text.as_bytes()));
        let annotations: Vec<LabeledLink> = read_jsonl(Stage::Train, path)?;
        let outcome = train_and_evaluate(
            &features,
            &annotations,
            &phase1,
            &config.classifier.grid(),
            config.seed,
        )?;
        bundle.put_json("cv.json", &outcome.cv)?;
        bundle.put_json("split.json", &outcome.plan)?;
        bundle.put_json("eval.json", &outcome.eval)?;
        eval = Some(outcome.eval);
        Some(outcome.model)
    } else {
        None
    };
    if let Some(m) = &model {
        let json = m.to_json();
        inputs.insert("model".to_string(), sha256_hex(json.as_bytes()));
        bundle.put("model.json", json.as_bytes())?;
    }

    // classify
    let verdicts = classify_links(corpus, &phase1, &features, model.as_ref())?;
    bundle.put_lines("verdicts.jsonl", &verdicts)?;

    // disclose
    let segments = disclose_corpus(corpus, &verdicts, &config.disclosure_classifier)?;
    bundle.put_lines("segments.jsonl", &segments)?;

    // compliance
    let guidance_owned;
    let guidance = match &config.guidance {
        Some(p) => {
            let text = read(Stage::Compliance, p)?;
            inputs.insert("guidance".to_string(), sha256_hex(text.as_bytes()));
            guidance_owned = parse_guidance(&text)
                .map_err(|e| PipelineError::at(Stage::Compliance, p.display().to_string(), e))?;
            &guidance_owned
        }
        None => {
            inputs.insert(
                "guidance".to_string(),
                sha256_hex(crate::fixtures::DEFAULT_GUIDANCE.as_bytes()),
            );
            default_guidance()
        }
    };
    let records = compliance_records(corpus, &verdicts, &segments, guidance);
    for r in &records {
        r.validate()
            .map_err(|e| PipelineError::at(Stage::Compliance, r.video_id.clone(), e))?;
    }
    bundle.put_lines("records.jsonl", &records)?;

    // metrics
    let dims: Vec<Dimension> = Dimension::parse_list(&config.group_by.join(","))
        .map_err(|e| PipelineError::new(Stage::Config, e))?;
    let mut tables = summary_table(&dataset_summary(corpus));
    if records.is_empty() {
        bundle.put("metrics_overall.csv", b"")?;
    } else {
        let overall =
            compute_metrics(&records, &[]).map_err(|e| PipelineError::new(Stage::Metrics, e))?;
        bundle.put("metrics_overall.csv", metrics_csv(&overall).as_bytes())?;
        tables.push('\n');
        tables.push_str(&metrics_table("Overall", &overall));
        for d in &dims {
            let per = compute_metrics(&records, &[*d])
                .map_err(|e| PipelineError::new(Stage::Metrics, e))?;
            bundle.put(
                &format!("metrics_{}.csv", d.as_str()),
                metrics_csv(&per).as_bytes(),
            )?;
            tables.push('\n');
            tables.push_str(&metrics_table(&format!("By {}", d.as_str()), &per));
        }
        tables.push('\n');
        tables.push_str(&breakdown_table(&clarity_breakdown(&records)));
    }
    bundle.put("tables.txt", tables.as_bytes())?;

    // stats
    let split_on = Dimension::parse_list(&config.effects.split_on)
        .ok()
        .and_then(|d| d.first().copied())
        .ok_or_else(|| {
            PipelineError::new(
                Stage::Config,
                format!("bad split_on {:?}", config.effects.split_on),
            )
        })?;
    let strata = Dimension::parse_list(&config.effects.strata.join(","))
        .map_err(|e| PipelineError::new(Stage::Config, e))?;
    let mut effects = Vec::new();
    for m in &config.effects.metrics {
        let metric: ComplianceStatus = m
            .parse()
            .map_err(|e| PipelineError::new(Stage::Config, e))?;
        let outcome = effect_analysis(
            &records,
            split_on,
            metric,
            config.effects.n_boot,
            config.seed,
            Some((&strata, config.effects.quota)),
        );
        effects.push(match outcome {
            Ok(r) => serde_json::json!({"metric": metric.as_str(), "result": r}),
            // too little data is reported, not fatal
            Err(reason) => serde_json::json!({"metric": metric.as_str(), "skipped": reason}),
        });
    }
    bundle.put_json("effects.json", &effects)?;

    let mut seeds = BTreeMap::new();
    seeds.insert("split".to_string(), config.seed);
    seeds.insert("train".to_string(), config.seed);
    seeds.insert("bootstrap".to_string(), config.seed);
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        schema_version: SCHEMA_VERSION,
        feature_schema_version: crate::classifier::features::FEATURE_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seeds,
        inputs,
        disclosure_classifier: config.disclosure_classifier.clone(),
        artifacts: bundle.artifacts.clone(),
    };
    let mut manifest_bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::new(Stage::Write, e))?;
    manifest_bytes.push(b'\n');
    std::fs::write(out_dir.join("manifest.json"), &manifest_bytes)
        .map_err(|e| PipelineError::at(Stage::Write, "manifest.json", e))?;

    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        manifest_checksum: sha256_hex(&manifest_bytes),
        manifest,
        n_videos: corpus.videos().len(),
        n_links: corpus.crawls().len(),
        phase1_coverage: phase1.coverage,
        eval,
    })
}
