use serde::{Deserialize, Serialize};

use crate::crawl::url_byte_spans;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSegment {
    pub index: usize,
    pub text: String,
    /// Character offsets `[start, end)` into the description.
    pub char_span: (usize, usize),
}

/// Splits a description into sentences.
///
/// Boundaries are newlines and `.`, `!` or `?` followed by whitespace.
/// Punctuation inside a URL never ends a sentence. Surrounding whitespace is
/// trimmed from each sentence and empty sentences are dropped.
pub fn segment_sentences(text: &str) -> Vec<SentenceSegment> {
    let urls = url_byte_spans(text);
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut cuts: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    let mut u = 0usize;
    for (k, &(b, c)) in chars.iter().enumerate() {
        while u < urls.len() && urls[u].1 <= b {
            u += 1;
        }
        if c == '\n' {
            cuts.push((start, b));
            start = b + 1;
            continue;
        }
        let in_url = u < urls.len() && urls[u].0 <= b;
        if !in_url
            && matches!(c, '.' | '!' | '?')
            && chars.get(k + 1).is_some_and(|&(_, n)| n.is_whitespace())
        {
            cuts.push((start, b + 1));
            start = b + 1;
        }
    }
    cuts.push((start, text.len()));

    let mut out = Vec::new();
    let mut seen_bytes = 0usize;
    let mut seen_chars = 0usize;
    let mut char_at = |byte: usize| {
        seen_chars += text[seen_bytes..byte].chars().count();
        seen_bytes = byte;
        seen_chars
    };
    for (s, e) in cuts {
        let piece = &text[s..e];
        let trimmed = piece.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = piece.len() - piece.trim_start().len();
        let bs = s + lead;
        let be = bs + trimmed.len();
        let cs = char_at(bs);
        let ce = char_at(be);
        out.push(SentenceSegment {
            index: out.len(),
            text: trimmed.to_string(),
            char_span: (cs, ce),
        });
    }
    out
}

/// Substring by character offsets.
pub(crate) fn char_slice(text: &str, (start, end): (usize, usize)) -> &str {
    let mut idx = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()));
    let bs = idx.nth(start).unwrap_or(text.len());
    let be = if end > start {
        idx.nth(end - start - 1).unwrap_or(text.len())
    } else {
        bs
    };
    &text[bs..be]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_blank() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences(" \n\n  ").is_empty());
    }

    #[test]
    fn url_stays_whole() {
        let s = segment_sentences("Thanks! Links below.\nhttps://a.com?x=1.b");
        let texts: Vec<&str> = s.iter().map(|x| x.text.as_str()).collect();
        assert_eq!(texts, ["Thanks!", "Links below.", "https://a.com?x=1.b"]);
        assert_eq!(s[2].char_span, (21, 40));
    }

    #[test]
    fn url_followed_by_period() {
        let s = segment_sentences("See https://a.com/x. Then more");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "See https://a.com/x.");
    }

    #[test]
    fn spans_slice_the_input() {
        let text = "Grüße! Ça va? Oui.\n  Très bien";
        for s in segment_sentences(text) {
            assert_eq!(char_slice(text, s.char_span), s.text);
        }
    }

    #[test]
    fn punctuation_without_space_does_not_split() {
        assert_eq!(segment_sentences("v1.2 is out!Now").len(), 1);
    }
}
