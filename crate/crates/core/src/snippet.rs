//! Query-biased snippets.
//!
//! The core window is the shortest span of at most [`SNIPPET_TOKENS`] body
//! tokens that covers the largest number of distinct query terms (earliest
//! wins ties). The displayed snippet pads that window with surrounding
//! context up to [`SNIPPET_TOKENS`] tokens. Without any query term in the
//! body the snippet is the first [`SNIPPET_TOKENS`] tokens.

use std::collections::HashSet;
use std::ops::Range;

use unicode_normalization::UnicodeNormalization;

use crate::corpus::token_spans;

pub const SNIPPET_TOKENS: usize = 40;

/// Token range of the core window, or `None` when no query term occurs.
pub fn best_window<S: AsRef<str>>(
    tokens: &[S],
    query_terms: &HashSet<&str>,
) -> Option<Range<usize>> {
    let hits: Vec<(usize, &str)> = tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| query_terms.get(t.as_ref()).map(|q| (i, *q)))
        .collect();
    // (distinct, start, end) ordered by more distinct, then shorter, then earlier.
    let mut best: Option<(usize, usize, usize)> = None;
    let mut seen: HashSet<&str> = HashSet::new();
    for (a, &(start, _)) in hits.iter().enumerate() {
        seen.clear();
        for &(end, term) in &hits[a..] {
            if end - start >= SNIPPET_TOKENS {
                break;
            }
            if !seen.insert(term) {
                continue;
            }
            let candidate = (seen.len(), start, end);
            let better = match best {
                None => true,
                Some((d, s, e)) => candidate.0 > d || (candidate.0 == d && end - start < e - s),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.map(|(_, s, e)| s..e + 1)
}

/// Grows `core` to `width` tokens inside `0..len`, splitting the padding
/// evenly around it.
fn pad(core: Range<usize>, len: usize, width: usize) -> Range<usize> {
    let width = width.min(len);
    let extra = width.saturating_sub(core.len());
    let mut start = core.start.saturating_sub(extra / 2);
    let end = (start + width).min(len);
    start = end.saturating_sub(width);
    start..end
}

/// Snippet text for `body` given the analyzed query terms.
pub fn snippet(body: &str, query_terms: &HashSet<&str>) -> String {
    let normalized: String = body.nfc().collect();
    let spans = token_spans(&normalized);
    if spans.is_empty() {
        return String::new();
    }
    let tokens: Vec<&str> = spans.iter().map(|(_, t)| t.as_str()).collect();
    let range = match best_window(&tokens, query_terms) {
        Some(core) => pad(core, tokens.len(), SNIPPET_TOKENS),
        None => 0..tokens.len().min(SNIPPET_TOKENS),
    };
    let from = spans[range.start].0.start;
    let to = spans[range.end - 1].0.end;
    normalized[from..to].to_string()
}
