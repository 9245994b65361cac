//! Ingestion of documents, sentence embeddings and language-ID
//! probabilities, plus the PCA projection applied to embeddings.

mod embeddings;
mod lid;
mod pca;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{
    load_embeddings, read_embeddings, store_embeddings, EmbeddingMatrix, EmbeddingSet,
};
pub use lid::{load_lid, store_lid, LidRecord, LidTable, SentenceLid};
pub use pca::{apply_pca, fit_pca, load_pca, sample_rows, store_pca, PcaModel, PCA_SAMPLE_CAP};

/// Sentence count per doc_id, used to cross-check embedding and LID files.
pub type SentenceCounts = HashMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub webdomain: String,
    pub lang: String,
    pub sentences: Vec<String>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Full document text: sentences joined by newlines.
    pub fn text(&self) -> String {
        self.sentences.join("\n")
    }
}

/// Read a JSONL corpus, one document per line. Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateId(doc.doc_id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn store_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for doc in docs {
        let line = serde_json::to_string(doc).map_err(|e| Error::Internal(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn sentence_counts(docs: &[Document]) -> SentenceCounts {
    docs.iter().map(|d| (d.doc_id.clone(), d.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn one_line_corpus() {
        let f = write_tmp(r#"{"doc_id":"a","webdomain":"x.org","lang":"en","sentences":["Hi."]}"#);
        let docs = load_corpus(f.path()).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].len(), 1);
        assert_eq!(docs[0].webdomain, "x.org");
    }

    #[test]
    fn empty_corpus() {
        let f = write_tmp("");
        assert!(load_corpus(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let line = r#"{"doc_id":"a","webdomain":"x.org","lang":"en","sentences":[]}"#;
        let f = write_tmp(&format!("{line}\n{line}\n"));
        assert!(matches!(load_corpus(f.path()), Err(Error::DuplicateId(id)) if id == "a"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_tmp(
            "{\"doc_id\":\"a\",\"webdomain\":\"x\",\"lang\":\"en\",\"sentences\":[]}\n{oops\n",
        );
        match load_corpus(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn order_and_empty_docs_preserved() {
        let docs = vec![
            Document {
                doc_id: "b".into(),
                webdomain: "w".into(),
                lang: "fr".into(),
                sentences: vec!["deux".into(), "un".into()],
            },
            Document {
                doc_id: "a".into(),
                webdomain: "w".into(),
                lang: "en".into(),
                sentences: vec![],
            },
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        store_corpus(&docs, f.path()).unwrap();
        assert_eq!(load_corpus(f.path()).unwrap(), docs);
    }
}
