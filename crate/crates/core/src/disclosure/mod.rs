//! Disclosure detection and clarity labeling for video descriptions.
//!
//! Descriptions are split into sentences, each sentence is classified as
//! disclosure or not, and maximal runs of disclosure sentences are merged
//! into segments. Every segment then gets a compensation label (Clear,
//! Ambiguous, None) and a relationship label (Explicit, Grouped, Mixed
//! group). Classifiers implement [`DisclosureClassifier`]; the crate ships
//! [`ReferenceRules`], the [`KeywordBaseline`] and an [`ExternalClassifier`]
//! for models served by another process.

pub mod annotated;
pub mod external;
pub mod kappa;
pub mod relationship;
pub mod rules;
pub mod segment;

use serde::{Deserialize, Serialize};

use crate::compliance::{Compensation, Relationship};

pub use external::ExternalClassifier;
pub use kappa::{cohens_kappa, AnnotationPair, EmptyAnnotations};
pub use relationship::{label_relationship, LinkVerdict, RelationshipLabel, ScopeHints};
pub use rules::{keyword_baseline, KeywordBaseline, ReferenceRules};
pub use segment::{segment_sentences, SentenceSegment};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("classifier {command} unavailable: {message}")]
    Unavailable { command: String, message: String },
    #[error("classifier protocol: {0}")]
    Protocol(String),
    #[error("classifier returned unknown {task} label {label:?}")]
    BadLabel { task: String, label: String },
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("unknown classifier {0:?} (expected rules, keywords or external:<cmd>)")]
    UnknownKind(String),
}

/// What a classifier sees when labeling relationship clarity.
#[derive(Debug, Clone, Copy)]
pub struct SegmentContext<'a> {
    pub text: &'a str,
    pub char_span: (usize, usize),
    pub description: &'a str,
    pub links: &'a [LinkVerdict],
}

pub trait DisclosureClassifier: Sync {
    /// Recorded on every segment the classifier produces.
    fn id(&self) -> &str;
    /// One decision per sentence, same order.
    fn detect(&self, sentences: &[&str]) -> Result<Vec<bool>, ClassifierError>;
    /// Decisions for several descriptions at once, one group of sentences
    /// per description. Classifiers that look at neighbouring sentences
    /// override this; the default flattens into one [`detect`](Self::detect) call.
    fn detect_descriptions(&self, groups: &[Vec<&str>]) -> Result<Vec<Vec<bool>>, ClassifierError> {
        let flat: Vec<&str> = groups.iter().flatten().copied().collect();
        let flags = self.detect(&flat)?;
        if flags.len() != flat.len() {
            return Err(ClassifierError::Protocol(format!(
                "{} decisions for {} sentences",
                flags.len(),
                flat.len()
            )));
        }
        let mut out = Vec::with_capacity(groups.len());
        let mut offset = 0;
        for g in groups {
            out.push(flags[offset..offset + g.len()].to_vec());
            offset += g.len();
        }
        Ok(out)
    }
    fn compensation(&self, segments: &[&str]) -> Result<Vec<Compensation>, ClassifierError>;
    fn relationship(
        &self,
        segments: &[SegmentContext<'_>],
    ) -> Result<Vec<RelationshipLabel>, ClassifierError>;
}

/// Builds a classifier from `rules`, `keywords` or `external:<command>`.
pub fn classifier_from_spec(spec: &str) -> Result<Box<dyn DisclosureClassifier>, ClassifierError> {
    match spec {
        "rules" => Ok(Box::new(ReferenceRules::default())),
        "keywords" => Ok(Box::new(KeywordBaseline::default())),
        _ => match spec.strip_prefix("external:") {
            Some(cmd) => Ok(Box::new(ExternalClassifier::from_command(cmd)?)),
            None => Err(ClassifierError::UnknownKind(spec.to_string())),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosureSegment {
    /// Contiguous sentence ordinals.
    pub sentence_indexes: Vec<usize>,
    /// The description slice covering those sentences.
    pub text: String,
    pub char_span: (usize, usize),
    /// `Absent` stands for the None label.
    pub compensation: Compensation,
    pub relationship: Relationship,
    /// The description has no links; `relationship` is `Explicit` by default.
    pub relationship_vacuous: bool,
    pub classifier_id: String,
}

/// Merges maximal runs of `true` into inclusive index ranges.
fn runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let start = i;
            while i + 1 < flags.len() && flags[i + 1] {
                i += 1;
            }
            out.push((start, i));
        }
        i += 1;
    }
    out
}

/// A description with the links found in it.
#[derive(Debug, Clone, Copy)]
pub struct DescriptionInput<'a> {
    pub description: &'a str,
    pub links: &'a [LinkVerdict],
}

/// Labels many descriptions with one classifier call per decision type.
pub fn analyze_batch(
    inputs: &[DescriptionInput<'_>],
    classifier: &dyn DisclosureClassifier,
) -> Result<Vec<Vec<DisclosureSegment>>, ClassifierError> {
    let sentences: Vec<Vec<SentenceSegment>> = inputs
        .iter()
        .map(|d| segment_sentences(d.description))
        .collect();
    detect_batch(inputs, &sentences, classifier)
}

fn detect_batch(
    inputs: &[DescriptionInput<'_>],
    sentences: &[Vec<SentenceSegment>],
    classifier: &dyn DisclosureClassifier,
) -> Result<Vec<Vec<DisclosureSegment>>, ClassifierError> {
    let groups: Vec<Vec<&str>> = sentences
        .iter()
        .map(|g| g.iter().map(|s| s.text.as_str()).collect())
        .collect();
    let flags = classifier.detect_descriptions(&groups)?;
    if flags.len() != groups.len() || flags.iter().zip(&groups).any(|(f, g)| f.len() != g.len()) {
        return Err(ClassifierError::Protocol("decision count mismatch".into()));
    }

    // (description index, first sentence, last sentence)
    let mut spans = Vec::new();
    for (d, f) in flags.iter().enumerate() {
        for (a, b) in runs(f) {
            spans.push((d, a, b));
        }
    }
    let texts: Vec<(String, (usize, usize))> = spans
        .iter()
        .map(|&(d, a, b)| {
            let span = (sentences[d][a].char_span.0, sentences[d][b].char_span.1);
            (
                segment::char_slice(inputs[d].description, span).to_string(),
                span,
            )
        })
        .collect();
    let text_refs: Vec<&str> = texts.iter().map(|(t, _)| t.as_str()).collect();
    let compensation = classifier.compensation(&text_refs)?;
    let contexts: Vec<SegmentContext<'_>> = spans
        .iter()
        .zip(&texts)
        .map(|(&(d, _, _), (t, span))| SegmentContext {
            text: t,
            char_span: *span,
            description: inputs[d].description,
            links: inputs[d].links,
        })
        .collect();
    let relationship = classifier.relationship(&contexts)?;
    if compensation.len() != spans.len() || relationship.len() != spans.len() {
        return Err(ClassifierError::Protocol("label count mismatch".into()));
    }

    let mut out: Vec<Vec<DisclosureSegment>> = vec![Vec::new(); inputs.len()];
    for (k, &(d, a, b)) in spans.iter().enumerate() {
        out[d].push(DisclosureSegment {
            sentence_indexes: (a..=b).collect(),
            text: texts[k].0.clone(),
            char_span: texts[k].1,
            compensation: compensation[k],
            relationship: relationship[k].relationship,
            relationship_vacuous: relationship[k].vacuous,
            classifier_id: classifier.id().to_string(),
        });
    }
    Ok(out)
}

/// Detects and labels disclosure segments among already segmented sentences.
pub fn detect_disclosures(
    description: &str,
    sentences: &[SentenceSegment],
    links: &[LinkVerdict],
    classifier: &dyn DisclosureClassifier,
) -> Result<Vec<DisclosureSegment>, ClassifierError> {
    let input = [DescriptionInput { description, links }];
    Ok(detect_batch(&input, &[sentences.to_vec()], classifier)?.remove(0))
}

/// Segments and labels one description.
pub fn analyze_description(
    description: &str,
    links: &[LinkVerdict],
    classifier: &dyn DisclosureClassifier,
) -> Result<Vec<DisclosureSegment>, ClassifierError> {
    let sentences = segment_sentences(description);
    detect_disclosures(description, &sentences, links, classifier)
}

/// Video-level clarity: the most compliant label per dimension
/// (Clear > Ambiguous > None; Explicit = Grouped > Mixed group), or
/// `(Absent, Absent)` without any disclosure.
pub fn most_compliant(segments: &[DisclosureSegment]) -> (Compensation, Relationship) {
    let comp_rank = |c: Compensation| match c {
        Compensation::Clear => 3,
        Compensation::Ambiguous => 2,
        Compensation::Absent => 1,
    };
    let rel_rank = |r: Relationship| match r {
        Relationship::Explicit => 4,
        Relationship::Grouped => 3,
        Relationship::MixedGroup => 2,
        Relationship::Absent => 1,
    };
    let compensation = segments
        .iter()
        .map(|s| s.compensation)
        .max_by_key(|&c| comp_rank(c))
        .unwrap_or(Compensation::Absent);
    let relationship = segments
        .iter()
        .map(|s| s.relationship)
        .max_by_key(|&r| rel_rank(r))
        .unwrap_or(Relationship::Absent);
    (compensation, relationship)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_disclosure() {
        let r = ReferenceRules::default();
        assert!(analyze_description("Check out my new video", &[], &r)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn commission_sentence_is_clear() {
        let r = ReferenceRules::default();
        let text = "If you click on this link and purchase a product, I get a small commission at no cost to you";
        let segs = analyze_description(text, &[], &r).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].compensation, Compensation::Clear);
        assert!(segs[0].relationship_vacuous);
    }

    #[test]
    fn adjacent_sentences_merge() {
        let r = ReferenceRules::default();
        let text = "These are affiliate links. I earn a commission from them. Enjoy!";
        let segs = analyze_description(text, &[], &r).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].sentence_indexes, vec![0, 1]);
        assert_eq!(
            segs[0].text,
            "These are affiliate links. I earn a commission from them."
        );
        assert_eq!(segs[0].classifier_id, "rules");
    }

    #[test]
    fn run_merging() {
        assert_eq!(runs(&[true, true, false, true]), vec![(0, 1), (3, 3)]);
        assert!(runs(&[false, false]).is_empty());
    }

    #[test]
    fn spec_strings() {
        assert!(classifier_from_spec("rules").is_ok());
        assert!(classifier_from_spec("keywords").is_ok());
        assert!(classifier_from_spec("bert").is_err());
    }
}
