use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{desc, dot, unit_normalize};

/// Minimum number of quantized-scan survivors that are re-ranked exactly.
const APPROX_MIN_RERANK: usize = 64;
/// Survivors per requested neighbour in approximate mode.
const APPROX_RERANK_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Exhaustive cosine scan.
    #[default]
    Exact,
    /// 8-bit scalar-quantized scan followed by an exact re-rank of the
    /// best `max(4K, 64)` survivors.
    Approx,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exact => "exact",
            SearchMode::Approx => "approx",
        })
    }
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(SearchMode::Exact),
            "approx" => Ok(SearchMode::Approx),
            other => Err(Error::Invalid(format!("unknown search mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub id: String,
    pub cosine: f64,
}

#[derive(Debug, Clone)]
struct Quantized {
    codes: Vec<i8>,
    scales: Vec<f32>,
}

/// Cosine-similarity index over one webdomain's document vectors. Rows are
/// kept unit-normalized and sorted by id, so index order is the tie-break
/// order.
#[derive(Debug, Clone)]
pub struct SearchIndex {
    pub webdomain: String,
    pub mode: SearchMode,
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<f32>,
    quantized: Option<Quantized>,
}

fn quantize(v: &[f32]) -> (Vec<i8>, f32) {
    let max = v.iter().fold(0f32, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return (vec![0; v.len()], 0.0);
    }
    let scale = max / 127.0;
    let codes = v.iter().map(|x| (x / scale).round() as i8).collect();
    (codes, scale)
}

fn by_score_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    desc(a.0, b.0).then(a.1.cmp(&b.1))
}

fn top_k(scored: &mut Vec<(f64, usize)>, k: usize) {
    if k < scored.len() {
        scored.select_nth_unstable_by(k, by_score_then_index);
        scored.truncate(k);
    }
    scored.sort_by(by_score_then_index);
}

pub fn build_index<'a>(
    webdomain: &str,
    entries: impl IntoIterator<Item = (&'a str, &'a [f32])>,
    mode: SearchMode,
) -> Result<SearchIndex> {
    let mut entries: Vec<(&str, &[f32])> = entries.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateId(w[0].0.to_string()));
    }
    let dim = entries.first().map(|e| e.1.len()).unwrap_or(0);
    let mut vectors = Vec::with_capacity(entries.len() * dim);
    for (id, v) in &entries {
        if v.len() != dim {
            return Err(Error::Dimension(format!(
                "vector for {id:?} has length {} but index dim is {dim}",
                v.len()
            )));
        }
        vectors.extend(unit_normalize(v));
    }
    let quantized = match mode {
        SearchMode::Exact => None,
        SearchMode::Approx => {
            let mut codes = Vec::with_capacity(vectors.len());
            let mut scales = Vec::with_capacity(entries.len());
            for row in vectors.chunks_exact(dim.max(1)) {
                let (c, s) = quantize(row);
                codes.extend(c);
                scales.push(s);
            }
            Some(Quantized { codes, scales })
        }
    };
    Ok(SearchIndex {
        webdomain: webdomain.to_string(),
        mode,
        dim,
        ids: entries.iter().map(|e| e.0.to_string()).collect(),
        vectors,
        quantized,
    })
}

impl SearchIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Up to `k` nearest entries by cosine, sorted by (cosine desc, id asc).
    pub fn knn_query(&self, q: &[f32], k: usize) -> Result<Vec<Hit>> {
        if self.is_empty() || k == 0 {
            return Ok(Vec::new());
        }
        if q.len() != self.dim {
            return Err(Error::Dimension(format!(
                "query of length {} against index of dim {}",
                q.len(),
                self.dim
            )));
        }
        let q = unit_normalize(q);
        let mut scored: Vec<(f64, usize)> = match &self.quantized {
            None => (0..self.len()).map(|i| (dot(&q, self.row(i)), i)).collect(),
            Some(quant) => {
                let (qc, qs) = quantize(&q);
                let mut approx: Vec<(f64, usize)> = quant
                    .codes
                    .chunks_exact(self.dim.max(1))
                    .zip(&quant.scales)
                    .enumerate()
                    .map(|(i, (codes, &s))| {
                        let acc: i32 = codes
                            .iter()
                            .zip(&qc)
                            .map(|(&a, &b)| a as i32 * b as i32)
                            .sum();
                        (acc as f64 * s as f64 * qs as f64, i)
                    })
                    .collect();
                top_k(
                    &mut approx,
                    (APPROX_RERANK_FACTOR * k).max(APPROX_MIN_RERANK),
                );
                approx
                    .into_iter()
                    .map(|(_, i)| (dot(&q, self.row(i)), i))
                    .collect()
            }
        };
        top_k(&mut scored, k);
        Ok(scored
            .into_iter()
            .map(|(c, i)| Hit {
                id: self.ids[i].clone(),
                cosine: c.clamp(-1.0, 1.0),
            })
            .collect())
    }
}
