use std::collections::HashSet;

use crate::align::Alignment;
use crate::corpus::{EmbeddingMatrix, LidRecord};
use crate::vector::{cosine, desc};

/// Language-ID evidence for one side of a pair: the probability that each
/// sentence is in `lang`, defaulting to `default` when unknown.
#[derive(Debug, Clone, Copy)]
pub struct SideLid<'a> {
    pub record: Option<&'a LidRecord>,
    pub lang: &'a str,
    pub default: f64,
}

impl<'a> SideLid<'a> {
    pub fn new(record: Option<&'a LidRecord>, lang: &'a str, default: f64) -> Self {
        SideLid {
            record,
            lang,
            default,
        }
    }

    /// No LID evidence: every sentence counts as being in the right language.
    pub fn neutral(lang: &'a str) -> Self {
        SideLid::new(None, lang, 1.0)
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.record
            .map(|r| r.prob(idx, self.lang, self.default))
            .unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub src_id: String,
    pub tgt_id: String,
    /// Stage-1 document-vector cosine.
    pub cosine: f64,
    /// Alignment-based re-score.
    pub eq2_score: f64,
}

/// Mean over alignment links of `cos(e, f) · p(L_src | e) · p(L_tgt | f)`,
/// where insertions and deletions contribute zero but still count in the
/// denominator. An empty alignment scores 0.
pub fn score_pair(
    alignment: &Alignment,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    src_lid: &SideLid<'_>,
    tgt_lid: &SideLid<'_>,
) -> f64 {
    if alignment.links.is_empty() {
        return 0.0;
    }
    let mass: f64 = alignment
        .matches()
        .map(|(i, j)| link_score(src, tgt, src_lid, tgt_lid, i, j))
        .sum();
    mass / alignment.links.len() as f64 + 0.0
}

fn link_score(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    src_lid: &SideLid<'_>,
    tgt_lid: &SideLid<'_>,
    i: usize,
    j: usize,
) -> f64 {
    cosine(src.row(i), tgt.row(j)) * src_lid.prob(i) * tgt_lid.prob(j)
}

/// Greedy one-to-one selection: best score first (ties by src_id, then
/// tgt_id), skipping pairs whose source or target is already taken.
pub fn greedy_match(scored: &[ScoredPair]) -> Vec<ScoredPair> {
    let mut order: Vec<&ScoredPair> = scored.iter().collect();
    order.sort_by(|a, b| {
        desc(a.eq2_score, b.eq2_score)
            .then_with(|| a.src_id.cmp(&b.src_id))
            .then_with(|| a.tgt_id.cmp(&b.tgt_id))
    });
    let mut used_src = HashSet::new();
    let mut used_tgt = HashSet::new();
    let mut out = Vec::new();
    for p in order {
        if used_src.contains(p.src_id.as_str()) || used_tgt.contains(p.tgt_id.as_str()) {
            continue;
        }
        used_src.insert(p.src_id.as_str());
        used_tgt.insert(p.tgt_id.as_str());
        out.push(p.clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePair {
    pub src_id: String,
    pub src_idx: usize,
    pub tgt_id: String,
    pub tgt_idx: usize,
    pub score: f64,
}

/// Input for one matched document pair.
pub struct MatchedDocs<'a> {
    pub src_id: &'a str,
    pub tgt_id: &'a str,
    pub alignment: &'a Alignment,
    pub src: &'a EmbeddingMatrix,
    pub tgt: &'a EmbeddingMatrix,
    pub src_lid: SideLid<'a>,
    pub tgt_lid: SideLid<'a>,
}

/// One scored sentence pair per match link over all matched documents,
/// best first (ties by src_id, then sentence indices).
pub fn extract_sentence_pairs<'a>(
    matches: impl IntoIterator<Item = MatchedDocs<'a>>,
) -> Vec<SentencePair> {
    let mut out: Vec<SentencePair> = matches
        .into_iter()
        .flat_map(|m| {
            m.alignment
                .matches()
                .map(|(i, j)| SentencePair {
                    src_id: m.src_id.to_string(),
                    src_idx: i,
                    tgt_id: m.tgt_id.to_string(),
                    tgt_idx: j,
                    score: link_score(m.src, m.tgt, &m.src_lid, &m.tgt_lid, i, j),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort_by(|a, b| {
        desc(a.score, b.score)
            .then_with(|| a.src_id.cmp(&b.src_id))
            .then(a.src_idx.cmp(&b.src_idx))
            .then(a.tgt_idx.cmp(&b.tgt_idx))
    });
    out
}
