use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::Document;
use crate::docvec::DocVector;
use crate::error::{Error, Result};
use crate::search::{build_index, SearchMode};

/// A candidate document pair, oriented by language: `src_id` is always the
/// source-language document. `rank` (1-based) is the position of the pair in
/// the query document's result list.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub src_id: String,
    pub tgt_id: String,
    pub rank: usize,
    pub cosine: f64,
}

/// Which side of a webdomain issues the queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuerySide {
    /// The language with more documents in the webdomain queries the other
    /// (source-language side on a tie).
    #[default]
    Larger,
    /// Source-language documents always query.
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateConfig {
    pub k: usize,
    pub mode: SearchMode,
    pub query: QuerySide,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            k: 32,
            mode: SearchMode::Exact,
            query: QuerySide::Larger,
        }
    }
}

/// Top-K candidates per query document, restricted to documents of the same
/// webdomain and the other language. Output is grouped by webdomain (sorted),
/// then by query doc_id, then by rank.
pub fn generate_candidates(
    docs: &[Document],
    docvecs: &BTreeMap<String, DocVector>,
    src_lang: &str,
    tgt_lang: &str,
    cfg: &CandidateConfig,
) -> Result<Vec<CandidatePair>> {
    if src_lang == tgt_lang {
        return Err(Error::Invalid(
            "source and target languages must differ".into(),
        ));
    }
    let mut domains: BTreeMap<&str, (Vec<&Document>, Vec<&Document>)> = BTreeMap::new();
    for doc in docs.iter().filter(|d| !d.is_empty()) {
        let entry = domains.entry(doc.webdomain.as_str()).or_default();
        if doc.lang == src_lang {
            entry.0.push(doc);
        } else if doc.lang == tgt_lang {
            entry.1.push(doc);
        }
    }
    let vector = |d: &Document| -> Result<&[f32]> {
        docvecs
            .get(&d.doc_id)
            .map(|v| v.data.as_slice())
            .ok_or_else(|| Error::Missing {
                what: "document vector",
                id: d.doc_id.clone(),
            })
    };

    let mut out = Vec::new();
    for (domain, (src, tgt)) in domains {
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let src_queries = match cfg.query {
            QuerySide::Source => true,
            QuerySide::Larger => src.len() >= tgt.len(),
        };
        let (mut queries, targets) = if src_queries { (src, tgt) } else { (tgt, src) };
        queries.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        let entries = targets
            .iter()
            .map(|d| Ok((d.doc_id.as_str(), vector(d)?)))
            .collect::<Result<Vec<_>>>()?;
        let index = build_index(domain, entries, cfg.mode)?;
        let per_query: Vec<Vec<CandidatePair>> = queries
            .par_iter()
            .map(|q| {
                let hits = index.knn_query(vector(q)?, cfg.k)?;
                Ok(hits
                    .into_iter()
                    .enumerate()
                    .map(|(r, hit)| {
                        let (src_id, tgt_id) = if src_queries {
                            (q.doc_id.clone(), hit.id)
                        } else {
                            (hit.id, q.doc_id.clone())
                        };
                        CandidatePair {
                            src_id,
                            tgt_id,
                            rank: r + 1,
                            cosine: hit.cosine,
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        out.extend(per_query.into_iter().flatten());
    }
    Ok(out)
}

/// Fraction of gold pairs whose candidate rank is at most K, for each K.
/// An empty gold set has recall 0.
pub fn recall_at_k(
    candidates: &[CandidatePair],
    gold: &[(String, String)],
    ks: &[usize],
) -> BTreeMap<usize, f64> {
    let mut best_rank: HashMap<(&str, &str), usize> = HashMap::new();
    for c in candidates {
        let r = best_rank
            .entry((c.src_id.as_str(), c.tgt_id.as_str()))
            .or_insert(c.rank);
        *r = (*r).min(c.rank);
    }
    ks.iter()
        .map(|&k| {
            let hits = gold
                .iter()
                .filter(|(s, t)| {
                    best_rank
                        .get(&(s.as_str(), t.as_str()))
                        .is_some_and(|&r| r <= k)
                })
                .count();
            let recall = if gold.is_empty() {
                0.0
            } else {
                hits as f64 / gold.len() as f64
            };
            (k, recall)
        })
        .collect()
}
