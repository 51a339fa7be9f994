//! Relationship clarity from line geometry.
//!
//! A disclosure is attached to the links on its own lines. Without any, it
//! is attached to the block of link lines right after it, or right before
//! it when nothing follows (the other way round for statements pointing
//! back, such as "the links above"). Blank lines and list headings (lines ending in `:`) may
//! sit between the disclosure and its block; a blank line ends the block.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::compliance::Relationship;

/// A hyperlink found in a description and whether it was judged affiliate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkVerdict {
    pub url: String,
    /// Character offset in the description.
    pub char_offset: usize,
    pub affiliate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipLabel {
    pub relationship: Relationship,
    /// The description has no links at all, so `Explicit` holds vacuously.
    pub vacuous: bool,
}

struct Lines<'a> {
    /// Char offset at which each line starts.
    starts: Vec<usize>,
    texts: Vec<&'a str>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Lines<'a> {
        let mut starts = vec![0];
        let mut offset = 0;
        for line in text.split('\n') {
            offset += line.chars().count() + 1;
            starts.push(offset);
        }
        starts.pop();
        Lines {
            starts,
            texts: text.split('\n').collect(),
        }
    }

    fn line_of(&self, char_offset: usize) -> usize {
        self.starts.partition_point(|&s| s <= char_offset) - 1
    }

    fn is_blank(&self, i: usize) -> bool {
        self.texts[i].trim().is_empty()
    }

    fn is_heading(&self, i: usize) -> bool {
        self.texts[i].trim_end().ends_with(':')
    }
}

/// Cues taken from the disclosure wording.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScopeHints {
    /// Talks about the description as a whole ("some of the links").
    pub whole_description: bool,
    /// Refers to links before it ("the links above").
    pub points_back: bool,
}

pub fn label_relationship(
    description: &str,
    segment_span: (usize, usize),
    links: &[LinkVerdict],
    hints: ScopeHints,
) -> RelationshipLabel {
    if links.is_empty() {
        return RelationshipLabel {
            relationship: Relationship::Explicit,
            vacuous: true,
        };
    }
    let mixed = RelationshipLabel {
        relationship: Relationship::MixedGroup,
        vacuous: false,
    };
    if hints.whole_description {
        return mixed;
    }
    let lines = Lines::new(description);
    let mut by_line: BTreeMap<usize, Vec<&LinkVerdict>> = BTreeMap::new();
    for l in links {
        by_line
            .entry(lines.line_of(l.char_offset))
            .or_default()
            .push(l);
    }
    let first = lines.line_of(segment_span.0);
    let last = lines.line_of(segment_span.1.saturating_sub(1).max(segment_span.0));
    let n = lines.texts.len();

    let mut block: Vec<usize> = (first..=last).filter(|i| by_line.contains_key(i)).collect();
    let walk = |mut i: isize, step: isize| {
        let mut found = Vec::new();
        let inside = |i: isize| i >= 0 && (i as usize) < n;
        // gap before the block
        while inside(i) && !by_line.contains_key(&(i as usize)) {
            let u = i as usize;
            if !(lines.is_blank(u) || (step > 0 && lines.is_heading(u))) {
                return found;
            }
            i += step;
        }
        while inside(i) {
            let u = i as usize;
            if !by_line.contains_key(&u) {
                break;
            }
            found.push(u);
            i += step;
        }
        found
    };
    if block.is_empty() {
        let forward = walk(last as isize + 1, 1);
        let backward = walk(first as isize - 1, -1);
        block = match (hints.points_back, forward.is_empty(), backward.is_empty()) {
            (false, false, _) | (true, false, true) => forward,
            _ => backward,
        };
    }
    if block.is_empty() {
        return mixed;
    }

    let mut affiliate = BTreeSet::new();
    let mut other = BTreeSet::new();
    for l in block.iter().flat_map(|i| &by_line[i]) {
        if l.affiliate {
            affiliate.insert(l.url.as_str());
        } else {
            other.insert(l.url.as_str());
        }
    }
    let relationship = match (affiliate.len(), other.len()) {
        (1, 0) => Relationship::Explicit,
        (a, 0) if a >= 2 => Relationship::Grouped,
        _ => Relationship::MixedGroup,
    };
    RelationshipLabel {
        relationship,
        vacuous: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::extract_hyperlinks;

    fn verdicts(text: &str, affiliate: &[bool]) -> Vec<LinkVerdict> {
        extract_hyperlinks(text)
            .into_iter()
            .zip(affiliate)
            .map(|((url, char_offset), &affiliate)| LinkVerdict {
                url,
                char_offset,
                affiliate,
            })
            .collect()
    }

    fn first_line(text: &str) -> (usize, usize) {
        (0, text.find('\n').unwrap_or(text.len()))
    }

    #[test]
    fn single_link_below() {
        let text = "This is a sponsored link for X:\nhttps://amzn.to/abc\n\nFollow me https://instagram.com/me";
        let l = label_relationship(
            text,
            first_line(text),
            &verdicts(text, &[true, false]),
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::Explicit);
    }

    #[test]
    fn following_block_of_three() {
        let text = "I get compensated when you make purchases through the following links:\nhttps://amzn.to/a\nhttps://amzn.to/b\nhttps://amzn.to/c\nThanks for watching";
        let l = label_relationship(
            text,
            first_line(text),
            &verdicts(text, &[true; 3]),
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::Grouped);
    }

    #[test]
    fn mixed_block_and_scope_phrase() {
        let text = "Links below:\nhttps://amzn.to/a\nhttps://twitter.com/me";
        let v = verdicts(text, &[true, false]);
        assert_eq!(
            label_relationship(text, first_line(text), &v, ScopeHints::default()).relationship,
            Relationship::MixedGroup
        );
        let l = label_relationship(
            text,
            first_line(text),
            &v[..1],
            ScopeHints {
                whole_description: true,
                points_back: false,
            },
        );
        assert_eq!(l.relationship, Relationship::MixedGroup);
    }

    #[test]
    fn preceding_block_used_when_nothing_follows() {
        let text =
            "Gear:\nhttps://amzn.to/a\nhttps://amzn.to/b\n\nThe links above are affiliate links.";
        let start = text.find("The").unwrap();
        let span = (start, text.chars().count());
        let l = label_relationship(
            text,
            span,
            &verdicts(text, &[true, true]),
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::Grouped);
    }

    #[test]
    fn detached_disclosure_is_mixed() {
        let text = "https://amzn.to/a\nMy story.\nAffiliate links are used.";
        let start = text.find("Affiliate").unwrap();
        let l = label_relationship(
            text,
            (start, text.len()),
            &verdicts(text, &[true]),
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::MixedGroup);
    }

    #[test]
    fn pointing_back_prefers_preceding_links() {
        let text = "https://amzn.to/a\nhttps://amzn.to/b\nLinks above earn me a commission.\nhttps://x.com/me";
        let start = text.find("Links").unwrap();
        let span = (start, text.find(".\n").unwrap() + 1);
        let v = verdicts(text, &[true, true, false]);
        let hints = ScopeHints {
            whole_description: false,
            points_back: true,
        };
        assert_eq!(
            label_relationship(text, span, &v, hints).relationship,
            Relationship::Grouped
        );
        let l = label_relationship(text, span, &v, ScopeHints::default());
        assert_eq!(l.relationship, Relationship::MixedGroup);
    }

    #[test]
    fn same_line_link_wins() {
        let text = "Affiliate link: https://amzn.to/a\nhttps://patreon.com/me";
        let l = label_relationship(
            text,
            first_line(text),
            &verdicts(text, &[true, false]),
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::Explicit);
    }

    #[test]
    fn no_links_is_vacuous() {
        let l = label_relationship(
            "Affiliate links are used.",
            (0, 25),
            &[],
            ScopeHints::default(),
        );
        assert_eq!(l.relationship, Relationship::Explicit);
        assert!(l.vacuous);
    }
}
