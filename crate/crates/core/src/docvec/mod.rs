//! Order-aware document vectors.
//!
//! Each document is summarised by `J` sub-vectors. Sub-vector `j` is the sum
//! of the document's sentence embeddings weighted by a positional window
//! centred on region `j` and by a boilerplate weight; the document vector is
//! the concatenation of the L2-normalized sub-vectors.

mod boilerplate;
mod window;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::{Document, EmbeddingMatrix, EmbeddingSet};
use crate::error::{Error, Result};
use crate::vector::unit_normalize_f64;

pub use boilerplate::{
    boilerplate_weight, build_boilerplate_table, sentence_key, BoilerplateScheme, BoilerplateTable,
};
pub use window::{pert_window_weights, WindowConfig};

/// Concatenation of `windows` blocks of length `sub_dim`; every block is
/// either unit-norm or all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub sub_dim: usize,
    pub windows: usize,
    pub data: Vec<f32>,
}

impl DocVector {
    pub fn block(&self, j: usize) -> &[f32] {
        &self.data[j * self.sub_dim..(j + 1) * self.sub_dim]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn from_subvectors(sub_dim: usize, subs: Vec<Vec<f64>>) -> Self {
        let windows = subs.len();
        let data = subs
            .into_iter()
            .flat_map(|mut v| {
                unit_normalize_f64(&mut v);
                v.into_iter().map(|x| x as f32)
            })
            .collect();
        DocVector {
            sub_dim,
            windows,
            data,
        }
    }
}

/// `V_j = Σ_n emb(S_n) · H_j(n) · B(S_n)` for every window row `H_j`.
pub fn build_subvectors(
    emb: &EmbeddingMatrix,
    windows: &[Vec<f64>],
    bweights: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = emb.rows();
    if bweights.len() != n {
        return Err(Error::Dimension(format!(
            "{} boilerplate weights for {n} sentences",
            bweights.len()
        )));
    }
    if let Some(row) = windows.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "window row of length {} for {n} sentences",
            row.len()
        )));
    }
    let dim = emb.dim();
    Ok(windows
        .iter()
        .map(|h| {
            let mut v = vec![0f64; dim];
            for (i, row) in emb.iter_rows().enumerate() {
                let w = h[i] * bweights[i];
                if w == 0.0 {
                    continue;
                }
                for (acc, &x) in v.iter_mut().zip(row) {
                    *acc += x as f64 * w;
                }
            }
            v
        })
        .collect())
}

fn sentence_weights(
    doc: &Document,
    table: &BoilerplateTable,
    scheme: BoilerplateScheme,
) -> Result<Vec<f64>> {
    doc.sentences
        .iter()
        .map(|s| boilerplate_weight(s, table, scheme))
        .collect()
}

fn check_doc(doc: &Document, emb: &EmbeddingMatrix) -> Result<()> {
    if doc.is_empty() {
        return Err(Error::Invalid(format!(
            "document {:?} has no sentences",
            doc.doc_id
        )));
    }
    if emb.rows() != doc.len() {
        return Err(Error::CountMismatch {
            doc_id: doc.doc_id.clone(),
            expected: doc.len(),
            found: emb.rows(),
        });
    }
    Ok(())
}

/// Order-aware document vector of length `J · d`.
pub fn build_docvector(
    doc: &Document,
    emb: &EmbeddingMatrix,
    table: &BoilerplateTable,
    scheme: BoilerplateScheme,
    cfg: &WindowConfig,
) -> Result<DocVector> {
    check_doc(doc, emb)?;
    let windows = pert_window_weights(doc.len(), cfg)?;
    let bweights = sentence_weights(doc, table, scheme)?;
    let subs = build_subvectors(emb, &windows, &bweights)?;
    Ok(DocVector::from_subvectors(emb.dim(), subs))
}

/// Unordered baseline: boilerplate-weighted average of sentence embeddings,
/// normalized. Terms are summed in a canonical order so that the result is
/// bit-for-bit invariant to sentence order.
pub fn baseline_avg_docvector(
    doc: &Document,
    emb: &EmbeddingMatrix,
    table: &BoilerplateTable,
    scheme: BoilerplateScheme,
) -> Result<DocVector> {
    check_doc(doc, emb)?;
    let bweights = sentence_weights(doc, table, scheme)?;
    let mut order: Vec<usize> = (0..doc.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = emb.row(a).iter().map(|x| x.to_bits());
        let kb = emb.row(b).iter().map(|x| x.to_bits());
        ka.cmp(kb).then(bweights[a].total_cmp(&bweights[b]))
    });
    let mut v = vec![0f64; emb.dim()];
    for i in order {
        for (acc, &x) in v.iter_mut().zip(emb.row(i)) {
            *acc += x as f64 * bweights[i];
        }
    }
    Ok(DocVector::from_subvectors(emb.dim(), vec![v]))
}

/// How document vectors are built for a whole corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorKind {
    Windowed(WindowConfig),
    Average,
}

/// Vectorize every non-empty document. Boilerplate tables are built per
/// webdomain over all of that domain's documents.
pub fn vectorize_corpus(
    docs: &[Document],
    embeddings: &EmbeddingSet,
    scheme: BoilerplateScheme,
    kind: VectorKind,
) -> Result<BTreeMap<String, DocVector>> {
    let mut by_domain: HashMap<&str, Vec<&Document>> = HashMap::new();
    for doc in docs {
        by_domain
            .entry(doc.webdomain.as_str())
            .or_default()
            .push(doc);
    }
    let tables: HashMap<&str, BoilerplateTable> = by_domain
        .par_iter()
        .map(|(domain, ds)| (*domain, build_boilerplate_table(ds.iter().copied())))
        .collect();

    docs.par_iter()
        .filter(|d| !d.is_empty())
        .map(|doc| {
            let emb = embeddings.get(&doc.doc_id).ok_or_else(|| Error::Missing {
                what: "embeddings",
                id: doc.doc_id.clone(),
            })?;
            let table = &tables[doc.webdomain.as_str()];
            let v = match kind {
                VectorKind::Windowed(cfg) => build_docvector(doc, emb, table, scheme, &cfg)?,
                VectorKind::Average => baseline_avg_docvector(doc, emb, table, scheme)?,
            };
            Ok((doc.doc_id.clone(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::cosine;

    fn doc(n: usize) -> Document {
        Document {
            doc_id: "d".into(),
            webdomain: "w".into(),
            lang: "en".into(),
            sentences: (0..n).map(|i| format!("sentence {i}")).collect(),
        }
    }

    fn basis(n: usize, dim: usize) -> EmbeddingMatrix {
        let mut data = vec![0f32; n * dim];
        for i in 0..n {
            data[i * dim + i % dim] = 1.0;
        }
        EmbeddingMatrix::new(dim, data).unwrap()
    }

    #[test]
    fn single_sentence_subvectors() {
        let emb = EmbeddingMatrix::new(3, vec![1.0, 2.0, 3.0]).unwrap();
        let subs = build_subvectors(&emb, &[vec![0.5], vec![1.0]], &[2.0]).unwrap();
        assert_eq!(subs, vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
    }

    #[test]
    fn zero_boilerplate_weights_give_zero_subvectors() {
        let emb = basis(4, 4);
        let w = pert_window_weights(4, &WindowConfig::default()).unwrap();
        let subs = build_subvectors(&emb, &w, &[0.0; 4]).unwrap();
        assert!(subs.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn subvector_dimension_mismatch() {
        let emb = basis(2, 2);
        assert!(build_subvectors(&emb, &[vec![1.0, 0.0]], &[1.0]).is_err());
        assert!(build_subvectors(&emb, &[vec![1.0]], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn single_sentence_docvector_is_copies() {
        let d = doc(1);
        let emb = EmbeddingMatrix::new(2, vec![0.6, 0.8]).unwrap();
        let table = build_boilerplate_table([&d]);
        let v = build_docvector(
            &d,
            &emb,
            &table,
            BoilerplateScheme::None,
            &WindowConfig::default(),
        )
        .unwrap();
        assert_eq!(v.len(), 32);
        for j in 0..16 {
            assert!((v.block(j)[0] - 0.6).abs() < 1e-6);
            assert!((v.block(j)[1] - 0.8).abs() < 1e-6);
        }
    }

    #[test]
    fn default_windows_give_2048_dims() {
        let d = doc(5);
        let emb = EmbeddingMatrix::new(128, vec![0.1; 5 * 128]).unwrap();
        let table = build_boilerplate_table([&d]);
        let v = build_docvector(
            &d,
            &emb,
            &table,
            BoilerplateScheme::Lidf,
            &WindowConfig::default(),
        )
        .unwrap();
        assert_eq!(v.len(), 2048);
    }

    #[test]
    fn empty_document_rejected() {
        let d = doc(0);
        let table = BoilerplateTable::default();
        let emb = EmbeddingMatrix::empty(4);
        assert!(build_docvector(
            &d,
            &emb,
            &table,
            BoilerplateScheme::None,
            &WindowConfig::default()
        )
        .is_err());
        assert!(baseline_avg_docvector(&d, &emb, &table, BoilerplateScheme::None).is_err());
    }

    #[test]
    fn blocks_are_unit_or_zero() {
        let d = doc(20);
        let emb = basis(20, 8);
        let table = build_boilerplate_table([&d]);
        let v = build_docvector(
            &d,
            &emb,
            &table,
            BoilerplateScheme::Length,
            &WindowConfig::default(),
        )
        .unwrap();
        for j in 0..v.windows {
            let n: f64 = v
                .block(j)
                .iter()
                .map(|&x| (x as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((n - 1.0).abs() < 1e-6 || n == 0.0);
        }
    }

    #[test]
    fn baseline_single_sentence() {
        let d = doc(1);
        let emb = EmbeddingMatrix::new(2, vec![3.0, 4.0]).unwrap();
        let table = build_boilerplate_table([&d]);
        let v = baseline_avg_docvector(&d, &emb, &table, BoilerplateScheme::Lidf).unwrap();
        assert_eq!(v.windows, 1);
        assert!((v.data[0] - 0.6).abs() < 1e-7 && (v.data[1] - 0.8).abs() < 1e-7);
    }

    #[test]
    fn reversal_changes_windowed_vector_only() {
        let n = 16;
        let d = doc(n);
        let emb = basis(n, n);
        let rev_rows: Vec<Vec<f32>> = (0..n).rev().map(|i| emb.row(i).to_vec()).collect();
        let rev = EmbeddingMatrix::from_rows(n, &rev_rows).unwrap();
        let mut rev_doc = d.clone();
        rev_doc.sentences.reverse();
        let table = build_boilerplate_table([&d]);
        let cfg = WindowConfig::default();
        let a = build_docvector(&d, &emb, &table, BoilerplateScheme::Lidf, &cfg).unwrap();
        let b = build_docvector(&rev_doc, &rev, &table, BoilerplateScheme::Lidf, &cfg).unwrap();
        assert!(cosine(&a.data, &b.data) < 0.999);
        let a = baseline_avg_docvector(&d, &emb, &table, BoilerplateScheme::Lidf).unwrap();
        let b = baseline_avg_docvector(&rev_doc, &rev, &table, BoilerplateScheme::Lidf).unwrap();
        assert_eq!(a, b);
    }
}
