//! End-to-end orchestration. Every stage reads its inputs from files and
//! writes its outputs to files, so any stage can be rerun in isolation from
//! the intermediate files of the previous one.

mod config;
pub mod tsv;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{
    align_coarse_to_fine, extract_sentence_pairs, greedy_match, score_pair, AlignConfig,
    MatchedDocs, ScoredPair, SideLid,
};
use crate::corpus::{
    apply_pca, fit_pca, load_corpus, load_embeddings, load_lid, read_embeddings, sample_rows,
    sentence_counts, store_embeddings, store_pca, Document, EmbeddingMatrix, EmbeddingSet,
    LidTable, PCA_SAMPLE_CAP,
};
use crate::docvec::{vectorize_corpus, BoilerplateScheme, DocVector, VectorKind};
use crate::error::{Error, Result};
use crate::eval::{soft_recall, GoldPairs, RecallReport};
use crate::search::{generate_candidates, mine_margin, CandidateConfig};

pub use config::PipelineConfig;

/// File names used inside the pipeline output directory.
pub mod files {
    pub const PCA_MODEL: &str = "pca.bin";
    pub const PCA_EMBEDDINGS: &str = "embeddings.pca.emb";
    pub const DOCVECS: &str = "docvecs.emb";
    pub const CANDIDATES: &str = "candidates.tsv";
    pub const SCORED: &str = "scored.tsv";
    pub const MATCHES: &str = "matches.tsv";
    pub const SENTENCE_PAIRS: &str = "sentence_pairs.tsv";
    pub const MARGIN: &str = "margin.tsv";
}

/// Sidecar describing how a document-vector file was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVecManifest {
    #[serde(rename = "J")]
    pub windows: usize,
    pub gamma: f64,
    pub scheme: BoilerplateScheme,
    /// Dimension of the sentence embeddings the vectors were built from.
    pub sentence_dim: usize,
    /// `"windowed"` or `"average"`.
    pub kind: String,
}

pub fn manifest_path(docvecs: &Path) -> PathBuf {
    docvecs.with_extension("json")
}

/// Language and alignment settings shared by the re-scoring stages.
#[derive(Debug, Clone, Copy)]
pub struct ScoreParams<'a> {
    pub src_lang: &'a str,
    pub tgt_lang: &'a str,
    pub align: AlignConfig,
    pub lid_default: f64,
}

pub fn load_inputs(corpus: &Path, embeddings: &Path) -> Result<(Vec<Document>, EmbeddingSet)> {
    let docs = load_corpus(corpus)?;
    let emb = load_embeddings(embeddings, &sentence_counts(&docs))?;
    Ok((docs, emb))
}

fn load_lid_for(docs: &[Document], lid: Option<&Path>) -> Result<LidTable> {
    match lid {
        Some(path) => load_lid(path, Some(&sentence_counts(docs))),
        None => Ok(LidTable::new()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcaReport {
    pub input_dim: usize,
    pub output_dim: usize,
    pub sampled: usize,
}

/// Fit PCA on a seeded sample of sentence embeddings and write both the
/// model and the projected embeddings.
pub fn stage_pca(
    corpus: &Path,
    embeddings: &Path,
    pca_dim: usize,
    seed: u64,
    model_out: &Path,
    embeddings_out: &Path,
) -> Result<PcaReport> {
    let (_, emb) = load_inputs(corpus, embeddings)?;
    let sample = sample_rows(&emb, PCA_SAMPLE_CAP, seed);
    let model = fit_pca(&sample, pca_dim)?;
    let projected = emb
        .par_iter()
        .map(|(id, m)| Ok((id.clone(), apply_pca(&model, m)?)))
        .collect::<Result<EmbeddingSet>>()?;
    tsv::write_via_partial(model_out, |p| store_pca(&model, p))?;
    tsv::write_via_partial(embeddings_out, |p| store_embeddings(&projected, p))?;
    Ok(PcaReport {
        input_dim: model.input_dim,
        output_dim: model.output_dim,
        sampled: sample.len(),
    })
}

/// Vectorize every non-empty document and write the vectors plus manifest.
pub fn stage_docvec(
    corpus: &Path,
    embeddings: &Path,
    scheme: BoilerplateScheme,
    kind: VectorKind,
    out: &Path,
) -> Result<usize> {
    let (docs, emb) = load_inputs(corpus, embeddings)?;
    let vecs = vectorize_corpus(&docs, &emb, scheme, kind)?;
    let set = vecs
        .iter()
        .map(|(id, v)| Ok((id.clone(), EmbeddingMatrix::new(v.len(), v.data.clone())?)))
        .collect::<Result<EmbeddingSet>>()?;
    let (windows, gamma, kind_name) = match kind {
        VectorKind::Windowed(w) => (w.windows, w.gamma, "windowed"),
        VectorKind::Average => (1, 0.0, "average"),
    };
    let manifest = DocVecManifest {
        windows,
        gamma,
        scheme,
        sentence_dim: emb.values().next().map_or(0, |m| m.dim()),
        kind: kind_name.into(),
    };
    tsv::write_via_partial(out, |p| store_embeddings(&set, p))?;
    let json =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    let mpath = manifest_path(out);
    tsv::write_via_partial(&mpath, |p| {
        fs::write(p, json + "\n").map_err(|e| Error::io(p, e))
    })?;
    Ok(vecs.len())
}

/// Read document vectors; block layout comes from the manifest if present.
pub fn load_docvecs(path: &Path) -> Result<BTreeMap<String, DocVector>> {
    let set = read_embeddings(path)?;
    let mpath = manifest_path(path);
    let windows = if mpath.is_file() {
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let m: DocVecManifest =
            serde_json::from_str(&text).map_err(|e| Error::parse(&mpath, 1, e.to_string()))?;
        m.windows.max(1)
    } else {
        1
    };
    set.into_iter()
        .map(|(id, m)| {
            if m.rows() != 1 {
                return Err(Error::CountMismatch {
                    doc_id: id,
                    expected: 1,
                    found: m.rows(),
                });
            }
            let data = m.into_vec();
            if data.len() % windows != 0 {
                return Err(Error::Dimension(format!(
                    "document vector of length {} does not split into {windows} blocks",
                    data.len()
                )));
            }
            Ok((
                id,
                DocVector {
                    sub_dim: data.len() / windows,
                    windows,
                    data,
                },
            ))
        })
        .collect()
}

pub fn stage_candidates(
    corpus: &Path,
    docvecs: &Path,
    src_lang: &str,
    tgt_lang: &str,
    cfg: &CandidateConfig,
    out: &Path,
) -> Result<usize> {
    let docs = load_corpus(corpus)?;
    let vecs = load_docvecs(docvecs)?;
    let cands = generate_candidates(&docs, &vecs, src_lang, tgt_lang, cfg)?;
    tsv::write_candidates(out, &cands)?;
    Ok(cands.len())
}

struct ScoringContext {
    docs: HashMap<String, Document>,
    emb: EmbeddingSet,
    lid: LidTable,
}

impl ScoringContext {
    fn load(corpus: &Path, embeddings: &Path, lid: Option<&Path>) -> Result<Self> {
        let (docs, emb) = load_inputs(corpus, embeddings)?;
        let lid = load_lid_for(&docs, lid)?;
        let emb = emb
            .into_iter()
            .map(|(id, m)| (id, m.normalized()))
            .collect();
        Ok(ScoringContext {
            docs: docs.into_iter().map(|d| (d.doc_id.clone(), d)).collect(),
            emb,
            lid,
        })
    }

    fn pair<'a>(
        &'a self,
        src_id: &str,
        tgt_id: &str,
        params: &ScoreParams<'a>,
    ) -> Result<(
        &'a EmbeddingMatrix,
        &'a EmbeddingMatrix,
        SideLid<'a>,
        SideLid<'a>,
    )> {
        let get = |id: &str| {
            self.emb.get(id).ok_or_else(|| Error::Missing {
                what: "embeddings",
                id: id.to_string(),
            })
        };
        Ok((
            get(src_id)?,
            get(tgt_id)?,
            SideLid::new(self.lid.get(src_id), params.src_lang, params.lid_default),
            SideLid::new(self.lid.get(tgt_id), params.tgt_lang, params.lid_default),
        ))
    }

    fn sentence(&self, id: &str, idx: usize) -> String {
        self.docs[id].sentences[idx].clone()
    }
}

/// Sentence-align and re-score every candidate pair.
pub fn stage_align_score(
    corpus: &Path,
    embeddings: &Path,
    lid: Option<&Path>,
    candidates: &Path,
    params: &ScoreParams<'_>,
    out: &Path,
) -> Result<usize> {
    params.align.validate()?;
    let ctx = ScoringContext::load(corpus, embeddings, lid)?;
    let cands = tsv::read_candidates(candidates)?;
    let scored = cands
        .par_iter()
        .map(|c| {
            let (src, tgt, src_lid, tgt_lid) = ctx.pair(&c.src_id, &c.tgt_id, params)?;
            let alignment = align_coarse_to_fine(src, tgt, &params.align);
            Ok(ScoredPair {
                src_id: c.src_id.clone(),
                tgt_id: c.tgt_id.clone(),
                cosine: c.cosine,
                eq2_score: score_pair(&alignment, src, tgt, &src_lid, &tgt_lid),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    tsv::write_scored(out, &scored)?;
    Ok(scored.len())
}

pub fn stage_match(scored: &Path, out: &Path) -> Result<usize> {
    let matches = greedy_match(&tsv::read_scored(scored)?);
    tsv::write_matches(out, &matches)?;
    Ok(matches.len())
}

/// Re-align matched document pairs and write ranked sentence pairs.
pub fn stage_extract(
    corpus: &Path,
    embeddings: &Path,
    lid: Option<&Path>,
    matches: &Path,
    params: &ScoreParams<'_>,
    out: &Path,
) -> Result<usize> {
    params.align.validate()?;
    let ctx = ScoringContext::load(corpus, embeddings, lid)?;
    let matches = tsv::read_matches(matches)?;
    let aligned = matches
        .par_iter()
        .map(|m| {
            let (src, tgt, src_lid, tgt_lid) = ctx.pair(&m.src_id, &m.tgt_id, params)?;
            Ok((
                m,
                align_coarse_to_fine(src, tgt, &params.align),
                src,
                tgt,
                src_lid,
                tgt_lid,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs =
        extract_sentence_pairs(aligned.iter().map(|(m, a, src, tgt, sl, tl)| MatchedDocs {
            src_id: &m.src_id,
            tgt_id: &m.tgt_id,
            alignment: a,
            src,
            tgt,
            src_lid: *sl,
            tgt_lid: *tl,
        }));
    tsv::write_sentence_pairs(out, &pairs, |id, idx| ctx.sentence(id, idx))?;
    Ok(pairs.len())
}

/// Soft recall of predicted pairs against gold pairs, with document texts
/// taken from the corpus.
pub fn evaluate(corpus: &Path, gold: &Path, predictions: &Path) -> Result<RecallReport> {
    let docs = load_corpus(corpus)?;
    let gold = GoldPairs::from_corpus(tsv::read_pairs(gold)?, &docs);
    soft_recall(&tsv::read_pairs(predictions)?, &gold)
}

pub fn stage_mine_margin(
    corpus: &Path,
    embeddings: &Path,
    src_lang: &str,
    tgt_lang: &str,
    k: usize,
    out: &Path,
) -> Result<usize> {
    let (docs, emb) = load_inputs(corpus, embeddings)?;
    let records = mine_margin(&docs, &emb, src_lang, tgt_lang, k)?;
    tsv::write_margin(out, &records)?;
    Ok(records.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub seconds: f64,
    pub outputs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub documents: usize,
    pub pca: Option<PcaReport>,
    pub docvecs: usize,
    pub candidates: usize,
    pub scored: usize,
    pub matches: usize,
    pub sentence_pairs: usize,
    pub recall: Option<RecallReport>,
    pub stages: Vec<StageReport>,
}

struct Stages {
    reports: Vec<StageReport>,
}

impl Stages {
    fn run<T>(
        &mut self,
        stage: &'static str,
        count: impl Fn(&T) -> usize,
        f: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })?;
        log::info!(
            "stage {stage} finished in {:.3}s",
            start.elapsed().as_secs_f64()
        );
        self.reports.push(StageReport {
            stage,
            seconds: start.elapsed().as_secs_f64(),
            outputs: count(&out),
        });
        Ok(out)
    }
}

/// Run PCA (when it reduces dimension) → document vectors → candidates →
/// alignment re-scoring → greedy matching → sentence-pair extraction, and
/// optionally soft recall against gold pairs.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| run_stages(cfg))
}

fn run_stages(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = |name: &str| out.join(name);
    let mut stages = Stages {
        reports: Vec::new(),
    };

    let (documents, input_dim, sentences) = stages.run(
        "load",
        |r: &(usize, usize, usize)| r.0,
        || {
            let (docs, emb) = load_inputs(&cfg.corpus, &cfg.embeddings)?;
            load_lid_for(&docs, cfg.lid.as_deref())?;
            let dim = emb.values().find(|m| m.rows() > 0).map_or(0, |m| m.dim());
            let sentences = emb.values().map(|m| m.rows()).sum();
            Ok((docs.len(), dim, sentences))
        },
    )?;

    let use_pca = cfg.pca_dim > 0 && cfg.pca_dim < input_dim && sentences >= cfg.pca_dim;
    let (embeddings, pca) = if use_pca {
        let report = stages.run(
            "pca",
            |r: &PcaReport| r.sampled,
            || {
                stage_pca(
                    &cfg.corpus,
                    &cfg.embeddings,
                    cfg.pca_dim,
                    cfg.seed,
                    &path(files::PCA_MODEL),
                    &path(files::PCA_EMBEDDINGS),
                )
            },
        )?;
        (path(files::PCA_EMBEDDINGS), Some(report))
    } else {
        (cfg.embeddings.clone(), None)
    };

    let docvecs = stages.run(
        "docvec",
        |n| *n,
        || {
            stage_docvec(
                &cfg.corpus,
                &embeddings,
                cfg.scheme,
                VectorKind::Windowed(cfg.window),
                &path(files::DOCVECS),
            )
        },
    )?;

    let cand_cfg = CandidateConfig {
        k: cfg.k,
        mode: cfg.search_mode,
        ..CandidateConfig::default()
    };
    let candidates = stages.run(
        "candidates",
        |n| *n,
        || {
            stage_candidates(
                &cfg.corpus,
                &path(files::DOCVECS),
                &cfg.src_lang,
                &cfg.tgt_lang,
                &cand_cfg,
                &path(files::CANDIDATES),
            )
        },
    )?;

    let params = ScoreParams {
        src_lang: &cfg.src_lang,
        tgt_lang: &cfg.tgt_lang,
        align: cfg.align,
        lid_default: cfg.lid_default,
    };
    let scored = stages.run(
        "align-score",
        |n| *n,
        || {
            stage_align_score(
                &cfg.corpus,
                &embeddings,
                cfg.lid.as_deref(),
                &path(files::CANDIDATES),
                &params,
                &path(files::SCORED),
            )
        },
    )?;

    let matches = stages.run(
        "match",
        |n| *n,
        || stage_match(&path(files::SCORED), &path(files::MATCHES)),
    )?;

    let sentence_pairs = stages.run(
        "extract",
        |n| *n,
        || {
            stage_extract(
                &cfg.corpus,
                &embeddings,
                cfg.lid.as_deref(),
                &path(files::MATCHES),
                &params,
                &path(files::SENTENCE_PAIRS),
            )
        },
    )?;

    let recall = match &cfg.gold {
        Some(gold) => Some(stages.run(
            "eval",
            |r: &RecallReport| r.credited,
            || evaluate(&cfg.corpus, gold, &path(files::MATCHES)),
        )?),
        None => None,
    };

    Ok(PipelineSummary {
        documents,
        pca,
        docvecs,
        candidates,
        scored,
        matches,
        sentence_pairs,
        recall,
        stages: stages.reports,
    })
}
