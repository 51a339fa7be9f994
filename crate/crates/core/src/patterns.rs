//! Phase-1 labeling of hyperlinks against a registry of known URL patterns.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use url::Url;

use crate::crawl::Corpus;

pub const DEFAULT_REGISTRY: &str = include_str!("../data/default_registry.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleTarget {
    Affiliate,
    NonAffiliate,
}

/// A registry entry as written in the registry file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRule {
    pub rule_id: String,
    pub target: RuleTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host_pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub query_keys: Vec<String>,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RegistryFile {
    #[serde(default)]
    rule: Vec<PatternRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("duplicate rule_id {0:?}")]
    DuplicateRuleId(String),
    #[error("rule {rule_id:?}: {message}")]
    Compile { rule_id: String, message: String },
}

#[derive(Debug, Clone)]
struct CompiledRule {
    rule: PatternRule,
    host: Option<Regex>,
    path: Option<Regex>,
}

impl CompiledRule {
    fn matches(&self, url: &Url) -> bool {
        if let Some(re) = &self.host {
            match url.host_str() {
                Some(h) if re.is_match(h) => {}
                _ => return false,
            }
        }
        if let Some(re) = &self.path {
            if !re.is_match(url.path()) {
                return false;
            }
        }
        if !self.rule.query_keys.is_empty() {
            let present: HashSet<_> = url.query_pairs().map(|(k, _)| k.into_owned()).collect();
            if !self.rule.query_keys.iter().all(|k| present.contains(k)) {
                return false;
            }
        }
        true
    }
}

/// Compiled, immutable rule set. Affiliate rules are stored ahead of
/// non-affiliate rules, each group in file order.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    rules: Vec<CompiledRule>,
    source_text: String,
}

impl Registry {
    pub fn from_rules(rules: Vec<PatternRule>) -> Result<Registry, RegistryError> {
        let mut seen = HashSet::new();
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in rules {
            if !seen.insert(rule.rule_id.clone()) {
                return Err(RegistryError::DuplicateRuleId(rule.rule_id));
            }
            if rule.host_pattern.is_none()
                && rule.path_pattern.is_none()
                && rule.query_keys.is_empty()
            {
                return Err(RegistryError::Compile {
                    rule_id: rule.rule_id,
                    message: "needs at least one of host_pattern, path_pattern, query_keys".into(),
                });
            }
            let compile = |pat: &str, anchored: bool| {
                let src = if anchored {
                    format!("^(?:{pat})$")
                } else {
                    pat.to_string()
                };
                RegexBuilder::new(&src)
                    .case_insensitive(anchored)
                    .build()
                    .map_err(|e| RegistryError::Compile {
                        rule_id: rule.rule_id.clone(),
                        message: e.to_string(),
                    })
            };
            let host = rule
                .host_pattern
                .as_deref()
                .map(|p| compile(p, true))
                .transpose()?;
            let path = rule
                .path_pattern
                .as_deref()
                .map(|p| compile(p, false))
                .transpose()?;
            compiled.push(CompiledRule { rule, host, path });
        }
        compiled.sort_by_key(|r| r.rule.target != RuleTarget::Affiliate);
        let source_text = toml::to_string(&RegistryFile {
            rule: compiled.iter().map(|r| r.rule.clone()).collect(),
        })
        .unwrap_or_default();
        Ok(Registry {
            rules: compiled,
            source_text,
        })
    }

    pub fn parse(text: &str) -> Result<Registry, RegistryError> {
        let file: RegistryFile = toml::from_str(text)?;
        let mut reg = Registry::from_rules(file.rule)?;
        reg.source_text = text.to_string();
        Ok(reg)
    }

    /// The bundled registry.
    pub fn default_registry() -> Registry {
        Registry::parse(DEFAULT_REGISTRY).expect("bundled registry compiles")
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &PatternRule> {
        self.rules.iter().map(|r| &r.rule)
    }

    /// Text the registry was loaded from; used for manifest checksums.
    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Labels `url` and says which rule fired or why nothing could.
    pub fn explain(&self, url: &str) -> Labeling {
        let parsed = match Url::parse(url) {
            Ok(u) => u,
            Err(e) => {
                return Labeling {
                    label: Phase1Label::Unknown,
                    rule_id: None,
                    diagnostic: Some(format!("unparseable URL: {e}")),
                }
            }
        };
        for r in &self.rules {
            if r.matches(&parsed) {
                return Labeling {
                    label: match r.rule.target {
                        RuleTarget::Affiliate => Phase1Label::KnownAffiliate,
                        RuleTarget::NonAffiliate => Phase1Label::KnownNonAffiliate,
                    },
                    rule_id: Some(r.rule.rule_id.clone()),
                    diagnostic: None,
                };
            }
        }
        Labeling {
            label: Phase1Label::Unknown,
            rule_id: None,
            diagnostic: None,
        }
    }
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<Registry, RegistryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Registry::parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase1Label {
    KnownAffiliate,
    KnownNonAffiliate,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub label: Phase1Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

pub fn label_url(url: &str, registry: &Registry) -> Phase1Label {
    registry.explain(url).label
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusLabels {
    pub labels: BTreeMap<String, Labeling>,
    /// Fraction of links with a non-Unknown label (0 for an empty corpus).
    pub coverage: f64,
}

impl CorpusLabels {
    pub fn get(&self, link_id: &str) -> Phase1Label {
        self.labels
            .get(link_id)
            .map(|l| l.label)
            .unwrap_or(Phase1Label::Unknown)
    }
}

/// Labels the clicked URL of every crawl record.
pub fn label_corpus(corpus: &Corpus, registry: &Registry) -> CorpusLabels {
    let labels: BTreeMap<String, Labeling> = corpus
        .crawls()
        .iter()
        .map(|c| (c.link_id.clone(), registry.explain(&c.original_url)))
        .collect();
    let known = labels
        .values()
        .filter(|l| l.label != Phase1Label::Unknown)
        .count();
    let coverage = if labels.is_empty() {
        0.0
    } else {
        known as f64 / labels.len() as f64
    };
    CorpusLabels { labels, coverage }
}
