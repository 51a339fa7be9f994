//! Hand-annotated description fixture and evaluation helpers.
//!
//! Format: blocks start with `=== <id>`; each following line is
//! `<tags>\t<description line>`, where `<tags>` holds one comma-separated
//! tag per sentence on the line: `-` (not a disclosure), `D:<comp>:<rel>`
//! (first sentence of a disclosure segment, with gold labels) or `D`
//! (continuation). `<comp>` is `clear`, `ambiguous` or `none`; `<rel>` is
//! `explicit`, `grouped`, `mixed` or `-` when the description has no links.
//! An empty line is a blank description line. URLs prefixed with `[A]` are
//! affiliate links and `[N]` (or no prefix) marks non-affiliate links; the
//! prefix is not part of the description. Lines starting with `#` are
//! comments, except `#! held-out`, which flags every later description as
//! held out from lexicon development.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::segment::{char_slice, segment_sentences};
use super::{ClassifierError, DisclosureClassifier, LinkVerdict, SegmentContext};
use crate::classifier::Prf;
use crate::compliance::{Compensation, Relationship};
use crate::crawl::{extract_hyperlinks, url_byte_spans};

pub const DEFAULT_FIXTURE: &str = include_str!("../../data/disclosure_fixture.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSegment {
    pub sentences: (usize, usize),
    pub compensation: Compensation,
    /// `None` when the description has no links.
    pub relationship: Option<Relationship>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDescription {
    pub id: String,
    pub description: String,
    pub links: Vec<LinkVerdict>,
    pub sentence_labels: Vec<bool>,
    pub segments: Vec<GoldSegment>,
    pub held_out: bool,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("fixture line {line}: {message}")]
pub struct FixtureError {
    pub line: usize,
    pub message: String,
}

enum Tag {
    Plain,
    Start(Compensation, Option<Relationship>),
    Continue,
}

fn parse_tag(t: &str) -> Option<Tag> {
    if t == "-" {
        return Some(Tag::Plain);
    }
    if t == "D" {
        return Some(Tag::Continue);
    }
    let mut parts = t.split(':');
    if parts.next()? != "D" {
        return None;
    }
    let comp = match parts.next()? {
        "clear" => Compensation::Clear,
        "ambiguous" => Compensation::Ambiguous,
        "none" => Compensation::Absent,
        _ => return None,
    };
    let rel = match parts.next()? {
        "explicit" => Some(Relationship::Explicit),
        "grouped" => Some(Relationship::Grouped),
        "mixed" => Some(Relationship::MixedGroup),
        "-" => None,
        _ => return None,
    };
    parts.next().is_none().then_some(Tag::Start(comp, rel))
}

struct Builder {
    id: String,
    lines: Vec<String>,
    affiliate_urls: Vec<bool>,
    labels: Vec<bool>,
    segments: Vec<GoldSegment>,
    open: bool,
    held_out: bool,
}

impl Builder {
    fn finish(self, line: usize) -> Result<AnnotatedDescription, FixtureError> {
        let description = self.lines.join("\n");
        let found = extract_hyperlinks(&description);
        if found.len() != self.affiliate_urls.len() {
            return Err(FixtureError {
                line,
                message: format!("{}: link markers do not line up with URLs", self.id),
            });
        }
        let links: Vec<LinkVerdict> = found
            .into_iter()
            .zip(self.affiliate_urls)
            .map(|((url, char_offset), affiliate)| LinkVerdict {
                url,
                char_offset,
                affiliate,
            })
            .collect();
        for s in &self.segments {
            if s.relationship.is_some() == links.is_empty() {
                return Err(FixtureError {
                    line,
                    message: format!(
                        "{}: relationship gold must be '-' exactly when there are no links",
                        self.id
                    ),
                });
            }
        }
        Ok(AnnotatedDescription {
            id: self.id,
            description,
            links,
            sentence_labels: self.labels,
            segments: self.segments,
            held_out: self.held_out,
        })
    }
}

pub fn parse_fixture(text: &str) -> Result<Vec<AnnotatedDescription>, FixtureError> {
    let mut out = Vec::new();
    let mut current: Option<Builder> = None;
    let mut held_out = false;
    let err = |line: usize, message: String| FixtureError { line, message };
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.starts_with('#') {
            if raw.trim_end() == "#! held-out" {
                held_out = true;
            }
            continue;
        }
        if let Some(id) = raw.strip_prefix("=== ") {
            if let Some(b) = current.take() {
                out.push(b.finish(lineno)?);
            }
            current = Some(Builder {
                id: id.trim().to_string(),
                lines: Vec::new(),
                affiliate_urls: Vec::new(),
                labels: Vec::new(),
                segments: Vec::new(),
                open: false,
                held_out,
            });
            continue;
        }
        let Some(b) = current.as_mut() else {
            if raw.trim().is_empty() {
                continue;
            }
            return Err(err(lineno, "text outside a block".into()));
        };
        if raw.trim().is_empty() {
            b.lines.push(String::new());
            continue;
        }
        let (tags, body) = raw
            .split_once('\t')
            .ok_or_else(|| err(lineno, "missing tab between tags and text".into()))?;
        for (b0, _) in url_byte_spans(body) {
            b.affiliate_urls.push(body[..b0].ends_with("[A]"));
        }
        let clean = body.replace("[A]http", "http").replace("[N]http", "http");

        let sentences = segment_sentences(&clean);
        let tags: Vec<&str> = tags.split(',').map(str::trim).collect();
        if tags.len() != sentences.len() {
            return Err(err(
                lineno,
                format!("{} tags for {} sentences", tags.len(), sentences.len()),
            ));
        }
        for t in tags {
            let tag = parse_tag(t).ok_or_else(|| err(lineno, format!("bad tag {t:?}")))?;
            let index = b.labels.len();
            match tag {
                Tag::Plain => {
                    b.labels.push(false);
                    b.open = false;
                }
                Tag::Start(compensation, relationship) => {
                    if b.open {
                        return Err(err(lineno, "adjacent gold segments must be merged".into()));
                    }
                    b.labels.push(true);
                    b.segments.push(GoldSegment {
                        sentences: (index, index),
                        compensation,
                        relationship,
                    });
                    b.open = true;
                }
                Tag::Continue => {
                    if !b.open {
                        return Err(err(lineno, "'D' continues no segment".into()));
                    }
                    b.labels.push(true);
                    b.segments.last_mut().expect("open segment").sentences.1 = index;
                }
            }
        }
        b.lines.push(clean);
    }
    if let Some(b) = current.take() {
        out.push(b.finish(text.lines().count())?);
    }
    Ok(out)
}

pub fn default_fixture() -> Vec<AnnotatedDescription> {
    parse_fixture(DEFAULT_FIXTURE).expect("bundled fixture parses")
}

pub fn sentence_count(fixture: &[AnnotatedDescription]) -> usize {
    fixture.iter().map(|d| d.sentence_labels.len()).sum()
}

/// Sentence-level detection scores, disclosure as the positive class.
pub fn evaluate_detection(
    fixture: &[AnnotatedDescription],
    classifier: &dyn DisclosureClassifier,
) -> Result<Prf, ClassifierError> {
    let sentences: Vec<Vec<String>> = fixture
        .iter()
        .map(|d| {
            segment_sentences(&d.description)
                .into_iter()
                .map(|s| s.text)
                .collect()
        })
        .collect();
    let groups: Vec<Vec<&str>> = sentences
        .iter()
        .map(|g| g.iter().map(String::as_str).collect())
        .collect();
    let predicted = classifier.detect_descriptions(&groups)?;
    let gold = fixture
        .iter()
        .flat_map(|d| d.sentence_labels.iter().copied());
    Ok(Prf::from_pairs(predicted.into_iter().flatten().zip(gold)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarityReport {
    pub compensation_accuracy: f64,
    pub relationship_accuracy: f64,
    pub n_compensation: usize,
    pub n_relationship: usize,
    /// `"gold->predicted"` counts.
    pub compensation_confusion: BTreeMap<String, usize>,
    pub relationship_confusion: BTreeMap<String, usize>,
}

/// Clarity labels on the gold segments, independent of detection errors.
pub fn evaluate_clarity(
    fixture: &[AnnotatedDescription],
    classifier: &dyn DisclosureClassifier,
) -> Result<ClarityReport, ClassifierError> {
    let mut texts = Vec::new();
    let mut spans = Vec::new();
    for d in fixture {
        let sents = segment_sentences(&d.description);
        for g in &d.segments {
            let span = (
                sents[g.sentences.0].char_span.0,
                sents[g.sentences.1].char_span.1,
            );
            texts.push(char_slice(&d.description, span).to_string());
            spans.push((d, g, span));
        }
    }
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let comp = classifier.compensation(&refs)?;
    let contexts: Vec<SegmentContext<'_>> = spans
        .iter()
        .zip(&texts)
        .map(|((d, _, span), t)| SegmentContext {
            text: t,
            char_span: *span,
            description: &d.description,
            links: &d.links,
        })
        .collect();
    let rel = classifier.relationship(&contexts)?;

    let mut report = ClarityReport {
        compensation_accuracy: 0.0,
        relationship_accuracy: 0.0,
        n_compensation: 0,
        n_relationship: 0,
        compensation_confusion: BTreeMap::new(),
        relationship_confusion: BTreeMap::new(),
    };
    let (mut comp_ok, mut rel_ok) = (0usize, 0usize);
    for (k, (_, g, _)) in spans.iter().enumerate() {
        report.n_compensation += 1;
        comp_ok += usize::from(comp[k] == g.compensation);
        *report
            .compensation_confusion
            .entry(format!("{:?}->{:?}", g.compensation, comp[k]))
            .or_default() += 1;
        if let Some(gold) = g.relationship {
            report.n_relationship += 1;
            rel_ok += usize::from(rel[k].relationship == gold);
            *report
                .relationship_confusion
                .entry(format!("{:?}->{:?}", gold, rel[k].relationship))
                .or_default() += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    report.compensation_accuracy = ratio(comp_ok, report.n_compensation);
    report.relationship_accuracy = ratio(rel_ok, report.n_relationship);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# demo\n=== a\n-,D:clear:grouped\tMy gear. I earn a commission from these links:\n-\t[A]https://amzn.to/x\n-\t[A]https://amzn.to/y https://twitter.com/me\n\n-\tBye!\n";

    #[test]
    fn parses_small_block() {
        let f = parse_fixture(SMALL).unwrap();
        assert_eq!(f.len(), 1);
        let d = &f[0];
        assert_eq!(d.sentence_labels, vec![false, true, false, false, false]);
        assert_eq!(
            d.links.iter().map(|l| l.affiliate).collect::<Vec<_>>(),
            [true, true, false]
        );
        assert!(d.description.contains("\n\nBye!"));
        assert!(!d.description.contains("[A]"));
        assert_eq!(d.segments[0].sentences, (1, 1));
    }

    #[test]
    fn tag_count_must_match() {
        let bad = "=== a\n-\tOne. Two.\n";
        assert_eq!(parse_fixture(bad).unwrap_err().line, 2);
    }
}
