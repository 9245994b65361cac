//! Synthetic bilingual corpora in embedding space.
//!
//! Sentence meanings are random unit vectors mapped into the shared space by
//! one fixed random orthogonal matrix. A source document's rows are its
//! mapped meanings; its translation carries the same meanings, in the same
//! order, plus Gaussian noise, renormalized. Distractors are unrelated
//! documents and, optionally, sentence-shuffled copies of true translations.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{
    store_corpus, store_embeddings, store_lid, Document, EmbeddingMatrix, EmbeddingSet, LidRecord,
};
use crate::error::{Error, Result};
use crate::vector::unit_normalize_in_place;

/// Boilerplate sentences available to each webdomain and language.
const BOILERPLATE_POOL: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_pairs: usize,
    /// Unrelated target-language documents.
    pub n_distractors: usize,
    /// Inclusive range of content sentences per document.
    pub sentence_range: (usize, usize),
    pub dim: usize,
    pub noise_sigma: f64,
    pub shuffle_distractors: bool,
    /// How many true targets receive a shuffled copy (capped at `n_pairs`).
    pub n_shuffled: usize,
    /// Probability of inserting a boilerplate line before each sentence.
    pub boilerplate_rate: f64,
    pub n_domains: usize,
    pub src_lang: String,
    pub tgt_lang: String,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_pairs: 10,
            n_distractors: 0,
            sentence_range: (5, 15),
            dim: 16,
            noise_sigma: 0.1,
            shuffle_distractors: false,
            n_shuffled: usize::MAX,
            boilerplate_rate: 0.0,
            n_domains: 1,
            src_lang: "en".into(),
            tgt_lang: "fr".into(),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::Invalid(format!(
                "synthetic dim must be at least 8, got {}",
                self.dim
            )));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::Invalid("noise sigma must be non-negative".into()));
        }
        let (lo, hi) = self.sentence_range;
        if lo == 0 || lo > hi {
            return Err(Error::Invalid(format!("bad sentence range {lo}..={hi}")));
        }
        if !(0.0..=1.0).contains(&self.boilerplate_rate) {
            return Err(Error::Invalid("boilerplate rate must be in [0, 1]".into()));
        }
        if self.n_domains == 0 {
            return Err(Error::Invalid("need at least one webdomain".into()));
        }
        if self.src_lang == self.tgt_lang {
            return Err(Error::Invalid(
                "source and target languages must differ".into(),
            ));
        }
        Ok(())
    }
}

/// Role of a generated document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthRole {
    Source,
    Target,
    ShuffledCopy,
    Unrelated,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub docs: Vec<Document>,
    pub roles: BTreeMap<String, SynthRole>,
    pub embeddings: EmbeddingSet,
    pub lid: Vec<LidRecord>,
    pub gold: Vec<(String, String)>,
    /// Shuffled copy id → id of the true target it copies.
    pub shuffled_of: BTreeMap<String, String>,
}

struct Generator<'a> {
    spec: &'a SynthSpec,
    rng: ChaCha8Rng,
    rotation: DMatrix<f64>,
    ids: HashSet<String>,
    boilerplate: Vec<Vec<Vec<f32>>>,
    out: SynthCorpus,
}

/// Generated document before boilerplate insertion.
struct Draft {
    rows: Vec<Vec<f32>>,
    /// Per-row text suffix; combined with the doc id.
    tags: Vec<usize>,
}

impl Generator<'_> {
    fn gaussian(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.rng.sample(StandardNormal)).collect()
    }

    /// A random meaning mapped into the shared space.
    fn meaning(&mut self) -> Vec<f32> {
        let mut g = self.gaussian(self.spec.dim);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        g.iter_mut().for_each(|x| *x /= norm);
        let v = &self.rotation * nalgebra::DVector::from_vec(g);
        v.iter().map(|&x| x as f32).collect()
    }

    fn noisy(&mut self, row: &[f32]) -> Vec<f32> {
        let sigma = self.spec.noise_sigma;
        let mut out: Vec<f32> = row
            .iter()
            .map(|&x| (x as f64 + sigma * self.rng.sample::<f64, _>(StandardNormal)) as f32)
            .collect();
        unit_normalize_in_place(&mut out);
        out
    }

    fn fresh_id(&mut self, lang: &str) -> String {
        loop {
            let id = format!("{lang}-{:08x}", self.rng.random::<u32>());
            if self.ids.insert(id.clone()) {
                return id;
            }
        }
    }

    fn length(&mut self) -> usize {
        let (lo, hi) = self.spec.sentence_range;
        self.rng.random_range(lo..=hi)
    }

    fn emit(&mut self, domain: usize, lang: &str, role: SynthRole, draft: Draft) -> String {
        let id = self.fresh_id(lang);
        let mut rows = Vec::new();
        let mut sentences = Vec::new();
        for (row, tag) in draft.rows.into_iter().zip(draft.tags) {
            if self.spec.boilerplate_rate > 0.0 && self.rng.random_bool(self.spec.boilerplate_rate)
            {
                let k = self.rng.random_range(0..BOILERPLATE_POOL);
                rows.push(self.boilerplate[domain][k].clone());
                sentences.push(format!("site{domain} {lang} menu {k}"));
            }
            rows.push(row);
            sentences.push(format!("{id} {lang} sentence {tag}"));
        }
        let emb = EmbeddingMatrix::from_rows(self.spec.dim, &rows).expect("finite synthetic rows");
        self.out.lid.push(LidRecord {
            doc_id: id.clone(),
            probs: vec![BTreeMap::from([(lang.to_string(), 1.0)]); sentences.len()],
        });
        self.out.embeddings.insert(id.clone(), emb);
        self.out.roles.insert(id.clone(), role);
        self.out.docs.push(Document {
            doc_id: id.clone(),
            webdomain: domain_name(domain),
            lang: lang.to_string(),
            sentences,
        });
        id
    }
}

pub fn domain_name(domain: usize) -> String {
    format!("site{domain}.example")
}

fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // fix column signs so the factorization is unique
    for c in 0..dim {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Generate a synthetic corpus. Output is a pure function of `spec`.
pub fn synth_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rotation = random_orthogonal(spec.dim, &mut rng);
    let mut g = Generator {
        spec,
        rng,
        rotation,
        ids: HashSet::new(),
        boilerplate: Vec::new(),
        out: SynthCorpus {
            docs: Vec::new(),
            roles: BTreeMap::new(),
            embeddings: EmbeddingSet::new(),
            lid: Vec::new(),
            gold: Vec::new(),
            shuffled_of: BTreeMap::new(),
        },
    };
    g.boilerplate = (0..spec.n_domains)
        .map(|_| (0..BOILERPLATE_POOL).map(|_| g.meaning()).collect())
        .collect();

    let n_shuffled = if spec.shuffle_distractors {
        spec.n_shuffled.min(spec.n_pairs)
    } else {
        0
    };
    for p in 0..spec.n_pairs {
        let domain = p % spec.n_domains;
        let len = g.length();
        let meanings: Vec<Vec<f32>> = (0..len).map(|_| g.meaning()).collect();
        let translated: Vec<Vec<f32>> = meanings.iter().map(|m| g.noisy(m)).collect();
        let src_id = g.emit(
            domain,
            &spec.src_lang,
            SynthRole::Source,
            Draft {
                rows: meanings,
                tags: (0..len).collect(),
            },
        );
        let tgt_id = g.emit(
            domain,
            &spec.tgt_lang,
            SynthRole::Target,
            Draft {
                rows: translated.clone(),
                tags: (0..len).collect(),
            },
        );
        g.out.gold.push((src_id, tgt_id.clone()));

        if p < n_shuffled {
            let mut perm: Vec<usize> = (0..len).collect();
            if len > 1 {
                while perm.iter().enumerate().all(|(i, &v)| i == v) {
                    perm.shuffle(&mut g.rng);
                }
            }
            let copy_id = g.emit(
                domain,
                &spec.tgt_lang,
                SynthRole::ShuffledCopy,
                Draft {
                    rows: perm.iter().map(|&i| translated[i].clone()).collect(),
                    tags: perm.clone(),
                },
            );
            g.out.shuffled_of.insert(copy_id, tgt_id);
        }
    }
    for d in 0..spec.n_distractors {
        let domain = d % spec.n_domains;
        let len = g.length();
        let rows: Vec<Vec<f32>> = (0..len)
            .map(|_| {
                let m = g.meaning();
                g.noisy(&m)
            })
            .collect();
        g.emit(
            domain,
            &spec.tgt_lang,
            SynthRole::Unrelated,
            Draft {
                rows,
                tags: (0..len).collect(),
            },
        );
    }
    Ok(g.out)
}

/// Paths written by [`write_synth`].
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    pub lid: PathBuf,
    pub gold: PathBuf,
}

impl SynthFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SynthFiles {
            corpus: dir.join("corpus.jsonl"),
            embeddings: dir.join("embeddings.emb"),
            lid: dir.join("lid.jsonl"),
            gold: dir.join("gold.tsv"),
        }
    }
}

/// Write corpus, embeddings, LID and gold pairs into `dir`.
pub fn write_synth(corpus: &SynthCorpus, dir: &Path) -> Result<SynthFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = SynthFiles::in_dir(dir);
    store_corpus(&corpus.docs, &files.corpus)?;
    store_embeddings(&corpus.embeddings, &files.embeddings)?;
    store_lid(&corpus.lid, &files.lid)?;
    let mut gold = Vec::new();
    for (s, t) in &corpus.gold {
        writeln!(gold, "{s}\t{t}").expect("write to vec");
    }
    fs::write(&files.gold, gold).map_err(|e| Error::io(&files.gold, e))?;
    Ok(files)
}
