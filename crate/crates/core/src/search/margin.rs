//! Ratio-margin sentence mining over a comparable corpus, used as a
//! document-agnostic baseline.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{Document, EmbeddingMatrix, EmbeddingSet};
use crate::error::{Error, Result};
use crate::vector::{desc, dot};

/// Default neighbourhood size for the margin denominator.
pub const MARGIN_NEIGHBORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginPair {
    pub src_idx: usize,
    pub tgt_idx: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginRecord {
    pub src_id: String,
    pub src_sent_idx: usize,
    pub tgt_id: String,
    pub tgt_sent_idx: usize,
    pub margin: f64,
}

/// Mean of the `k` largest values, keeping a running top-k list.
#[derive(Clone)]
struct TopK {
    k: usize,
    vals: Vec<f64>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            vals: Vec::with_capacity(k + 1),
        }
    }

    fn push(&mut self, v: f64) {
        if self.vals.len() < self.k {
            self.vals.push(v);
        } else if let Some((i, min)) = self
            .vals
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            if v > min {
                self.vals[i] = v;
            }
        }
    }

    /// Σ top-k / (2·k_eff)
    fn half_mean(&self) -> f64 {
        if self.vals.is_empty() {
            return 0.0;
        }
        let mut sorted = self.vals.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted.iter().sum::<f64>() / (2.0 * sorted.len() as f64)
    }
}

/// Best (margin, target) of one source row, and its margin to every target.
type RowMargins = (Option<(f64, usize)>, Vec<Option<f64>>);

/// Mutual-best ratio-margin pairs between two unit-normalized sentence sets.
///
/// `margin(x, y) = cos(x, y) / (Σ_{z ∈ NN_k(x)} cos(x, z) / 2k + Σ_{z ∈ NN_k(y)} cos(y, z) / 2k)`
/// with neighbourhoods taken from the opposite side. Pairs whose denominator
/// is not positive are never emitted. Output is sorted by margin descending,
/// then by source index.
pub fn margin_score_pairs(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    k: usize,
) -> Vec<MarginPair> {
    let (n, m) = (src.rows(), tgt.rows());
    if n == 0 || m == 0 || k == 0 {
        return Vec::new();
    }
    let src_rows: Vec<&[f32]> = src.iter_rows().collect();
    let tgt_rows: Vec<&[f32]> = tgt.iter_rows().collect();

    // neighbourhood terms
    let (src_half, col_tops): (Vec<f64>, Vec<TopK>) = src_rows
        .par_iter()
        .fold(
            || (Vec::new(), vec![TopK::new(k); m]),
            |(mut rows, mut cols), x| {
                let mut top = TopK::new(k);
                for (j, y) in tgt_rows.iter().enumerate() {
                    let c = dot(x, y);
                    top.push(c);
                    cols[j].push(c);
                }
                rows.push(top.half_mean());
                (rows, cols)
            },
        )
        .reduce(
            || (Vec::new(), vec![TopK::new(k); m]),
            |(mut ra, mut ca), (rb, cb)| {
                ra.extend(rb);
                for (a, b) in ca.iter_mut().zip(cb) {
                    for v in b.vals {
                        a.push(v);
                    }
                }
                (ra, ca)
            },
        );
    let tgt_half: Vec<f64> = col_tops.iter().map(TopK::half_mean).collect();

    let margin = |i: usize, j: usize, c: f64| -> Option<f64> {
        let denom = src_half[i] + tgt_half[j];
        (denom > 0.0).then(|| c / denom)
    };

    // forward best per source row and backward best per target column
    let rows: Vec<RowMargins> = src_rows
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let margins: Vec<Option<f64>> = tgt_rows
                .iter()
                .enumerate()
                .map(|(j, y)| margin(i, j, dot(x, y)))
                .collect();
            let mut best: Option<(f64, usize)> = None;
            for (j, mg) in margins.iter().enumerate() {
                if let Some(mg) = *mg {
                    if best.is_none_or(|(b, _)| mg > b) {
                        best = Some((mg, j));
                    }
                }
            }
            (best, margins)
        })
        .collect();
    let mut backward: Vec<Option<(f64, usize)>> = vec![None; m];
    for (i, (_, margins)) in rows.iter().enumerate() {
        for (j, mg) in margins.iter().enumerate() {
            if let Some(mg) = *mg {
                if backward[j].is_none_or(|(b, _)| mg > b) {
                    backward[j] = Some((mg, i));
                }
            }
        }
    }

    let mut out: Vec<MarginPair> = rows
        .iter()
        .enumerate()
        .filter_map(|(i, (best, _))| {
            let (mg, j) = (*best)?;
            (backward[j].map(|b| b.1) == Some(i)).then_some(MarginPair {
                src_idx: i,
                tgt_idx: j,
                margin: mg,
            })
        })
        .collect();
    out.sort_by(|a, b| desc(a.margin, b.margin).then(a.src_idx.cmp(&b.src_idx)));
    out
}

/// Run the margin miner within each webdomain over all sentences of the
/// source-language and target-language documents.
pub fn mine_margin(
    docs: &[Document],
    embeddings: &EmbeddingSet,
    src_lang: &str,
    tgt_lang: &str,
    k: usize,
) -> Result<Vec<MarginRecord>> {
    let mut domains: BTreeMap<&str, (Vec<&Document>, Vec<&Document>)> = BTreeMap::new();
    for doc in docs {
        let e = domains.entry(doc.webdomain.as_str()).or_default();
        if doc.lang == src_lang {
            e.0.push(doc);
        } else if doc.lang == tgt_lang {
            e.1.push(doc);
        }
    }
    let stack = |side: &[&Document]| -> Result<(EmbeddingMatrix, Vec<(String, usize)>)> {
        let mut data = Vec::new();
        let mut owners = Vec::new();
        let mut dim = 0;
        for d in side {
            let m = embeddings.get(&d.doc_id).ok_or_else(|| Error::Missing {
                what: "embeddings",
                id: d.doc_id.clone(),
            })?;
            if m.rows() == 0 {
                continue;
            }
            dim = m.dim();
            data.extend(m.normalized().into_vec());
            owners.extend((0..m.rows()).map(|i| (d.doc_id.clone(), i)));
        }
        Ok((EmbeddingMatrix::new(dim, data)?, owners))
    };

    let mut out = Vec::new();
    for (_, (src, tgt)) in domains {
        let (src_m, src_owner) = stack(&src)?;
        let (tgt_m, tgt_owner) = stack(&tgt)?;
        if src_m.rows() > 0 && tgt_m.rows() > 0 && src_m.dim() != tgt_m.dim() {
            return Err(Error::Dimension(
                "source and target embedding dims differ".into(),
            ));
        }
        for p in margin_score_pairs(&src_m, &tgt_m, k) {
            out.push(MarginRecord {
                src_id: src_owner[p.src_idx].0.clone(),
                src_sent_idx: src_owner[p.src_idx].1,
                tgt_id: tgt_owner[p.tgt_idx].0.clone(),
                tgt_sent_idx: tgt_owner[p.tgt_idx].1,
                margin: p.margin,
            });
        }
    }
    out.sort_by(|a, b| {
        desc(a.margin, b.margin)
            .then_with(|| a.src_id.cmp(&b.src_id))
            .then(a.src_sent_idx.cmp(&b.src_sent_idx))
    });
    Ok(out)
}
