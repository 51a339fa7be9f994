use std::path::Path;

use rayon::prelude::*;
use regex::{Regex, RegexSet, RegexSetBuilder};
use serde::Deserialize;

use super::relationship::{label_relationship, ScopeHints};
use super::{ClassifierError, DisclosureClassifier, RelationshipLabel, SegmentContext};
use crate::compliance::Compensation;

pub const DEFAULT_RULES: &str = include_str!("../../data/disclosure_rules.toml");
pub const DEFAULT_KEYWORDS: &str = include_str!("../../data/disclosure_keywords.txt");

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    detection: DetectionSection,
    compensation: CompensationSection,
    relationship: RelationshipSection,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionSection {
    include: Vec<String>,
    #[serde(default)]
    exclude: Vec<String>,
    #[serde(default)]
    continuation: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompensationSection {
    beneficiary_action: Vec<String>,
    monetary: Vec<String>,
    ambiguous: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationshipSection {
    scope_whole: Vec<String>,
    #[serde(default)]
    points_back: Vec<String>,
}

fn set(patterns: &[String]) -> Result<RegexSet, ClassifierError> {
    RegexSetBuilder::new(patterns)
        .case_insensitive(true)
        .build()
        .map_err(|e| ClassifierError::Lexicon(e.to_string()))
}

/// Lexicon-driven reference implementation of all three decisions.
#[derive(Debug, Clone)]
pub struct ReferenceRules {
    include: RegexSet,
    exclude: RegexSet,
    continuation: RegexSet,
    beneficiary: RegexSet,
    monetary: RegexSet,
    ambiguous: RegexSet,
    scope_whole: RegexSet,
    points_back: RegexSet,
}

impl ReferenceRules {
    pub fn parse(text: &str) -> Result<ReferenceRules, ClassifierError> {
        let f: RulesFile =
            toml::from_str(text).map_err(|e| ClassifierError::Lexicon(e.to_string()))?;
        Ok(ReferenceRules {
            include: set(&f.detection.include)?,
            exclude: set(&f.detection.exclude)?,
            continuation: set(&f.detection.continuation)?,
            beneficiary: set(&f.compensation.beneficiary_action)?,
            monetary: set(&f.compensation.monetary)?,
            ambiguous: set(&f.compensation.ambiguous)?,
            scope_whole: set(&f.relationship.scope_whole)?,
            points_back: set(&f.relationship.points_back)?,
        })
    }

    pub fn load(path: &Path) -> Result<ReferenceRules, ClassifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifierError::Lexicon(format!("{}: {e}", path.display())))?;
        ReferenceRules::parse(&text)
    }

    /// Sentence-level decision, without neighbours.
    pub fn is_disclosure(&self, sentence: &str) -> bool {
        self.include.is_match(sentence) && !self.exclude.is_match(sentence)
    }

    /// Decisions for the sentences of one description: a continuation
    /// sentence counts when a neighbour is a disclosure on its own.
    pub fn detect_in_context(&self, sentences: &[&str]) -> Vec<bool> {
        let own: Vec<bool> = sentences.iter().map(|s| self.is_disclosure(s)).collect();
        (0..sentences.len())
            .map(|i| {
                own[i]
                    || (self.continuation.is_match(sentences[i])
                        && !self.exclude.is_match(sentences[i])
                        && ((i > 0 && own[i - 1]) || own.get(i + 1).copied().unwrap_or(false)))
            })
            .collect()
    }

    pub fn label_compensation(&self, segment: &str) -> Compensation {
        if self.beneficiary.is_match(segment) && self.monetary.is_match(segment) {
            Compensation::Clear
        } else if self.ambiguous.is_match(segment) {
            Compensation::Ambiguous
        } else {
            Compensation::Absent
        }
    }

    pub fn scope_hints(&self, segment: &str) -> ScopeHints {
        ScopeHints {
            whole_description: self.scope_whole.is_match(segment),
            points_back: self.points_back.is_match(segment),
        }
    }

    pub(crate) fn relationship_of(&self, ctx: &SegmentContext<'_>) -> RelationshipLabel {
        label_relationship(
            ctx.description,
            ctx.char_span,
            ctx.links,
            self.scope_hints(ctx.text),
        )
    }
}

impl Default for ReferenceRules {
    fn default() -> Self {
        ReferenceRules::parse(DEFAULT_RULES).expect("bundled rules compile")
    }
}

impl DisclosureClassifier for ReferenceRules {
    fn id(&self) -> &str {
        "rules"
    }

    fn detect(&self, sentences: &[&str]) -> Result<Vec<bool>, ClassifierError> {
        Ok(sentences
            .par_iter()
            .map(|s| self.is_disclosure(s))
            .collect())
    }

    fn detect_descriptions(&self, groups: &[Vec<&str>]) -> Result<Vec<Vec<bool>>, ClassifierError> {
        Ok(groups
            .par_iter()
            .map(|g| self.detect_in_context(g))
            .collect())
    }

    fn compensation(&self, segments: &[&str]) -> Result<Vec<Compensation>, ClassifierError> {
        Ok(segments
            .iter()
            .map(|s| self.label_compensation(s))
            .collect())
    }

    fn relationship(
        &self,
        segments: &[SegmentContext<'_>],
    ) -> Result<Vec<RelationshipLabel>, ClassifierError> {
        Ok(segments.iter().map(|c| self.relationship_of(c)).collect())
    }
}

/// Keyword-list detector. Clarity labels come from the reference rules,
/// since keyword matching alone cannot judge them.
#[derive(Debug, Clone)]
pub struct KeywordBaseline {
    keywords: Vec<String>,
    matcher: Regex,
    clarity: ReferenceRules,
}

impl KeywordBaseline {
    /// One marker per line; blank lines and lines starting with `"# "` are skipped.
    pub fn parse(list: &str) -> Result<KeywordBaseline, ClassifierError> {
        let keywords: Vec<String> = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && *l != "#" && !l.starts_with("# "))
            .map(str::to_string)
            .collect();
        if keywords.is_empty() {
            return Err(ClassifierError::Lexicon("keyword list is empty".into()));
        }
        let word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
        let alternatives: Vec<String> = keywords
            .iter()
            .map(|k| {
                let head = if word(k.chars().next()) {
                    r"\b"
                } else {
                    r"(?:^|\W)"
                };
                let tail = if word(k.chars().last()) { r"\b" } else { "" };
                format!("{head}{}{tail}", regex::escape(k))
            })
            .collect();
        let matcher = Regex::new(&format!("(?i){}", alternatives.join("|")))
            .map_err(|e| ClassifierError::Lexicon(e.to_string()))?;
        Ok(KeywordBaseline {
            keywords,
            matcher,
            clarity: ReferenceRules::default(),
        })
    }

    pub fn load(path: &Path) -> Result<KeywordBaseline, ClassifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifierError::Lexicon(format!("{}: {e}", path.display())))?;
        KeywordBaseline::parse(&text)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn matches(&self, sentence: &str) -> bool {
        self.matcher.is_match(sentence)
    }
}

impl Default for KeywordBaseline {
    fn default() -> Self {
        KeywordBaseline::parse(DEFAULT_KEYWORDS).expect("bundled keywords compile")
    }
}

/// True iff the sentence contains a marker from the bundled keyword list.
pub fn keyword_baseline(sentence: &str) -> bool {
    use std::sync::OnceLock;
    static BASELINE: OnceLock<KeywordBaseline> = OnceLock::new();
    BASELINE
        .get_or_init(KeywordBaseline::default)
        .matches(sentence)
}

impl DisclosureClassifier for KeywordBaseline {
    fn id(&self) -> &str {
        "keywords"
    }

    fn detect(&self, sentences: &[&str]) -> Result<Vec<bool>, ClassifierError> {
        Ok(sentences.iter().map(|s| self.matches(s)).collect())
    }

    fn compensation(&self, segments: &[&str]) -> Result<Vec<Compensation>, ClassifierError> {
        self.clarity.compensation(segments)
    }

    fn relationship(
        &self,
        segments: &[SegmentContext<'_>],
    ) -> Result<Vec<RelationshipLabel>, ClassifierError> {
        self.clarity.relationship(segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_examples() {
        let r = ReferenceRules::default();
        assert_eq!(
            r.label_compensation("I get a small commission at no cost to you"),
            Compensation::Clear
        );
        assert_eq!(
            r.label_compensation("Support the channel through these links."),
            Compensation::Ambiguous
        );
        assert_eq!(
            r.label_compensation("This is an affiliate link."),
            Compensation::Absent
        );
        assert_eq!(
            r.label_compensation("As an Amazon Associate I earn from qualifying purchases."),
            Compensation::Clear
        );
    }

    #[test]
    fn keyword_markers() {
        assert!(keyword_baseline("#ad"));
        assert!(keyword_baseline("This video is SPONSORED by a VPN"));
        assert!(!keyword_baseline("great gadget review"));
        assert!(!keyword_baseline("#adventure time"));
        assert!(!keyword_baseline("a bad day"));
    }

    #[test]
    fn exclusions_veto() {
        let r = ReferenceRules::default();
        assert!(r.is_disclosure("These are affiliate links."));
        assert!(!r.is_disclosure("This video is not sponsored."));
        assert!(!r.is_disclosure("My art commissions are open!"));
        assert!(!r.is_disclosure("Check out my new video"));
    }

    #[test]
    fn broken_lexicon_reported() {
        let bad = "[detection]\ninclude=['(']\n[compensation]\nbeneficiary_action=[]\nmonetary=[]\nambiguous=[]\n[relationship]\nscope_whole=[]\n";
        assert!(matches!(
            ReferenceRules::parse(bad),
            Err(ClassifierError::Lexicon(_))
        ));
        assert!(KeywordBaseline::parse("# only comments\n").is_err());
    }
}
