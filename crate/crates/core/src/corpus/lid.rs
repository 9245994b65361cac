use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::SentenceCounts;
use crate::error::{Error, Result};

/// Language-code → probability map for one sentence.
pub type SentenceLid = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidRecord {
    pub doc_id: String,
    pub probs: Vec<SentenceLid>,
}

impl LidRecord {
    /// Probability that sentence `idx` is in `lang`, or `default` when the
    /// record has no entry for that language (or that sentence).
    pub fn prob(&self, idx: usize, lang: &str, default: f64) -> f64 {
        self.probs
            .get(idx)
            .and_then(|p| p.get(lang))
            .copied()
            .unwrap_or(default)
    }
}

/// LID records keyed by doc_id.
pub type LidTable = HashMap<String, LidRecord>;

/// Load per-sentence LID probabilities from JSONL. When `expected` is given,
/// every record must match the corpus sentence count of its document.
pub fn load_lid(path: impl AsRef<Path>, expected: Option<&SentenceCounts>) -> Result<LidTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = LidTable::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LidRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        for value in rec.probs.iter().flat_map(|p| p.values()) {
            if !(0.0..=1.0).contains(value) {
                return Err(Error::ProbabilityRange {
                    doc_id: rec.doc_id.clone(),
                    value: *value,
                });
            }
        }
        if let Some(expected) = expected {
            match expected.get(&rec.doc_id) {
                None => {
                    return Err(Error::Missing {
                        what: "corpus document",
                        id: rec.doc_id,
                    })
                }
                Some(&n) if n != rec.probs.len() => {
                    return Err(Error::CountMismatch {
                        doc_id: rec.doc_id,
                        expected: n,
                        found: rec.probs.len(),
                    })
                }
                _ => {}
            }
        }
        if table.contains_key(&rec.doc_id) {
            return Err(Error::DuplicateId(rec.doc_id));
        }
        table.insert(rec.doc_id.clone(), rec);
    }
    Ok(table)
}

/// Write records in the given order, one JSON object per line.
pub fn store_lid<'a>(
    records: impl IntoIterator<Item = &'a LidRecord>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for rec in records {
        let line = serde_json::to_string(rec).map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
