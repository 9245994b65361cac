use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use docalign::pipeline::{self, files, ScoreParams};
use docalign::search::{recall_at_k, CandidateConfig, MARGIN_NEIGHBORS};
use docalign::synth::{write_synth, SynthFiles};
use docalign::{synth_corpus, Error, PipelineConfig, Result, SynthSpec, VectorKind};

#[derive(Parser, Debug)]
#[command(
    name = "docalign",
    version,
    about = "Align translated documents in bilingual web crawls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit PCA on sentence embeddings and write projected embeddings.
    Pca(Common),
    /// Build document vectors.
    Docvec {
        #[command(flatten)]
        common: Common,
        /// Plain weighted average instead of positional windows.
        #[arg(long)]
        baseline: bool,
    },
    /// Nearest-neighbour candidate generation per webdomain.
    Candidates {
        #[command(flatten)]
        common: Common,
        /// Document vectors [default: <out-dir>/docvecs.emb]
        #[arg(long)]
        docvecs: Option<PathBuf>,
    },
    /// Sentence-align and re-score candidate pairs.
    AlignScore {
        #[command(flatten)]
        common: Common,
        /// [default: <out-dir>/candidates.tsv]
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Greedy one-to-one matching of scored pairs.
    Match {
        #[command(flatten)]
        common: Common,
        /// [default: <out-dir>/scored.tsv]
        #[arg(long)]
        scored: Option<PathBuf>,
    },
    /// Extract aligned sentence pairs from matched documents.
    Extract {
        #[command(flatten)]
        common: Common,
        /// [default: <out-dir>/matches.tsv]
        #[arg(long)]
        matches: Option<PathBuf>,
    },
    /// Soft recall of predicted document pairs against gold pairs.
    EvalRecall {
        #[command(flatten)]
        common: Common,
        /// [default: <out-dir>/matches.tsv]
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Margin-based mutual-best sentence mining (baseline).
    MineMargin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = MARGIN_NEIGHBORS)]
        neighbors: usize,
    },
    /// Generate a synthetic bilingual corpus.
    Synth(SynthArgs),
    /// Run the whole pipeline.
    Run(Common),
}

/// Options shared by every pipeline subcommand. Values given here override
/// those read from `--config`.
#[derive(Args, Debug, Default)]
struct Common {
    /// key = value file with any of the options below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    embeddings: Option<String>,
    #[arg(long)]
    lid: Option<String>,
    #[arg(long)]
    gold: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    tgt_lang: Option<String>,
    /// Number of positional windows J
    #[arg(long)]
    windows: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, value_parser = ["idf", "lidf", "length", "none"])]
    scheme: Option<String>,
    #[arg(long)]
    pca_dim: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    skip_cost: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    min_size: Option<String>,
    #[arg(long, value_parser = ["exact", "approx"])]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    lid_default: Option<String>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("corpus", &self.corpus),
            ("embeddings", &self.embeddings),
            ("lid", &self.lid),
            ("gold", &self.gold),
            ("out-dir", &self.out_dir),
            ("src-lang", &self.src_lang),
            ("tgt-lang", &self.tgt_lang),
            ("windows", &self.windows),
            ("gamma", &self.gamma),
            ("scheme", &self.scheme),
            ("pca-dim", &self.pca_dim),
            ("k", &self.k),
            ("skip-cost", &self.skip_cost),
            ("radius", &self.radius),
            ("min-size", &self.min_size),
            ("mode", &self.mode),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("lid-default", &self.lid_default),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    distractors: usize,
    #[arg(long, default_value_t = 5)]
    min_sentences: usize,
    #[arg(long, default_value_t = 15)]
    max_sentences: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Add permuted-order copies of true targets.
    #[arg(long)]
    shuffle: bool,
    /// Number of true targets that get a shuffled copy [default: all]
    #[arg(long)]
    shuffled: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    boilerplate_rate: f64,
    #[arg(long, default_value_t = 1)]
    domains: usize,
    #[arg(long, default_value = "en")]
    src_lang: String,
    #[arg(long, default_value = "fr")]
    tgt_lang: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::Invalid(format!("--{what} is required")));
    }
    if !path.is_file() {
        return Err(Error::Invalid(format!("{} does not exist", path.display())));
    }
    Ok(())
}

fn out_dir(cfg: &PipelineConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::Io {
        path: cfg.out_dir.clone(),
        source: e,
    })?;
    Ok(&cfg.out_dir)
}

fn params(cfg: &PipelineConfig) -> ScoreParams<'_> {
    ScoreParams {
        src_lang: &cfg.src_lang,
        tgt_lang: &cfg.tgt_lang,
        align: cfg.align,
        lid_default: cfg.lid_default,
    }
}

fn path_json(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let summary = pipeline::run_pipeline(&cfg)?;
            serde_json::to_value(summary).map_err(|e| Error::Internal(e.to_string()))
        }
        Command::Synth(a) => {
            let spec = SynthSpec {
                n_pairs: a.pairs,
                n_distractors: a.distractors,
                sentence_range: (a.min_sentences, a.max_sentences),
                dim: a.dim,
                noise_sigma: a.noise,
                shuffle_distractors: a.shuffle,
                n_shuffled: a.shuffled.unwrap_or(usize::MAX),
                boilerplate_rate: a.boilerplate_rate,
                n_domains: a.domains,
                src_lang: a.src_lang,
                tgt_lang: a.tgt_lang,
                seed: a.seed,
            };
            let corpus = synth_corpus(&spec)?;
            std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::Io {
                path: a.out_dir.clone(),
                source: e,
            })?;
            let SynthFiles {
                corpus: c,
                embeddings,
                lid,
                gold,
            } = write_synth(&corpus, &a.out_dir)?;
            Ok(json!({
                "documents": corpus.docs.len(),
                "gold_pairs": corpus.gold.len(),
                "corpus": path_json(&c),
                "embeddings": path_json(&embeddings),
                "lid": path_json(&lid),
                "gold": path_json(&gold),
            }))
        }
        command => run_stage(command),
    }
}

fn run_stage(command: Command) -> Result<Value> {
    let common = match &command {
        Command::Pca(c) => c,
        Command::Docvec { common, .. }
        | Command::Candidates { common, .. }
        | Command::AlignScore { common, .. }
        | Command::Match { common, .. }
        | Command::Extract { common, .. }
        | Command::EvalRecall { common, .. }
        | Command::MineMargin { common, .. } => common,
        Command::Run(_) | Command::Synth(_) => unreachable!("handled by run"),
    };
    let cfg = common.config()?;
    let pool = rayon_pool(cfg.threads)?;
    pool.install(|| stage(command, &cfg))
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn stage(command: Command, cfg: &PipelineConfig) -> Result<Value> {
    let needs_embeddings = !matches!(
        command,
        Command::Candidates { .. } | Command::Match { .. } | Command::EvalRecall { .. }
    );
    if !matches!(command, Command::Match { .. }) {
        require(&cfg.corpus, "corpus")?;
    }
    if needs_embeddings {
        require(&cfg.embeddings, "embeddings")?;
    }
    let out = out_dir(cfg)?;
    let or_default = |p: Option<PathBuf>, name: &str| p.unwrap_or_else(|| out.join(name));
    match command {
        Command::Pca(_) => {
            let report = pipeline::stage_pca(
                &cfg.corpus,
                &cfg.embeddings,
                cfg.pca_dim,
                cfg.seed,
                &out.join(files::PCA_MODEL),
                &out.join(files::PCA_EMBEDDINGS),
            )?;
            Ok(json!({
                "input_dim": report.input_dim,
                "output_dim": report.output_dim,
                "sampled": report.sampled,
                "model": path_json(&out.join(files::PCA_MODEL)),
                "embeddings": path_json(&out.join(files::PCA_EMBEDDINGS)),
            }))
        }
        Command::Docvec { baseline, .. } => {
            cfg.window.validate()?;
            let kind = if baseline {
                VectorKind::Average
            } else {
                VectorKind::Windowed(cfg.window)
            };
            let path = out.join(files::DOCVECS);
            let n = pipeline::stage_docvec(&cfg.corpus, &cfg.embeddings, cfg.scheme, kind, &path)?;
            Ok(json!({"docvecs": n, "output": path_json(&path)}))
        }
        Command::Candidates { docvecs, .. } => {
            let docvecs = or_default(docvecs, files::DOCVECS);
            require(&docvecs, "docvecs")?;
            let cand_cfg = CandidateConfig {
                k: cfg.k,
                mode: cfg.search_mode,
                ..CandidateConfig::default()
            };
            let path = out.join(files::CANDIDATES);
            let n = pipeline::stage_candidates(
                &cfg.corpus,
                &docvecs,
                &cfg.src_lang,
                &cfg.tgt_lang,
                &cand_cfg,
                &path,
            )?;
            let mut summary = json!({"candidates": n, "output": path_json(&path)});
            if let Some(gold) = &cfg.gold {
                let gold = pipeline::tsv::read_pairs(gold)?;
                let cands = pipeline::tsv::read_candidates(&path)?;
                let ks: Vec<usize> = std::iter::successors(Some(1), |k| Some(k * 2))
                    .take_while(|&k| k < cfg.k)
                    .chain([cfg.k])
                    .collect();
                let recall: serde_json::Map<String, Value> = recall_at_k(&cands, &gold, &ks)
                    .into_iter()
                    .map(|(k, r)| (k.to_string(), json!(r)))
                    .collect();
                summary["recall_at_k"] = Value::Object(recall);
            }
            Ok(summary)
        }
        Command::AlignScore { candidates, .. } => {
            let candidates = or_default(candidates, files::CANDIDATES);
            require(&candidates, "candidates")?;
            let path = out.join(files::SCORED);
            let n = pipeline::stage_align_score(
                &cfg.corpus,
                &cfg.embeddings,
                cfg.lid.as_deref(),
                &candidates,
                &params(cfg),
                &path,
            )?;
            Ok(json!({"scored": n, "output": path_json(&path)}))
        }
        Command::Match { scored, .. } => {
            let scored = or_default(scored, files::SCORED);
            require(&scored, "scored")?;
            let path = out.join(files::MATCHES);
            let n = pipeline::stage_match(&scored, &path)?;
            Ok(json!({"matches": n, "output": path_json(&path)}))
        }
        Command::Extract { matches, .. } => {
            let matches = or_default(matches, files::MATCHES);
            require(&matches, "matches")?;
            let path = out.join(files::SENTENCE_PAIRS);
            let n = pipeline::stage_extract(
                &cfg.corpus,
                &cfg.embeddings,
                cfg.lid.as_deref(),
                &matches,
                &params(cfg),
                &path,
            )?;
            Ok(json!({"sentence_pairs": n, "output": path_json(&path)}))
        }
        Command::EvalRecall { predictions, .. } => {
            let gold = cfg
                .gold
                .as_deref()
                .ok_or_else(|| Error::Invalid("--gold is required".into()))?;
            require(gold, "gold")?;
            let predictions = or_default(predictions, files::MATCHES);
            require(&predictions, "predictions")?;
            let report = pipeline::evaluate(&cfg.corpus, gold, &predictions)?;
            serde_json::to_value(report).map_err(|e| Error::Internal(e.to_string()))
        }
        Command::MineMargin { neighbors, .. } => {
            let path = out.join(files::MARGIN);
            let n = pipeline::stage_mine_margin(
                &cfg.corpus,
                &cfg.embeddings,
                &cfg.src_lang,
                &cfg.tgt_lang,
                neighbors,
                &path,
            )?;
            Ok(json!({"pairs": n, "output": path_json(&path)}))
        }
        Command::Run(_) | Command::Synth(_) => unreachable!("handled by run"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary:#}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
