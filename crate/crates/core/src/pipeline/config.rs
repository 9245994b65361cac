use std::fs;
use std::path::{Path, PathBuf};

use crate::align::AlignConfig;
use crate::docvec::{BoilerplateScheme, WindowConfig};
use crate::error::{Error, Result};
use crate::search::SearchMode;

/// Everything needed to run the full pipeline. Parameter defaults are
/// `J = 16`, `gamma = 20`, LIDF weighting, 128-dimensional PCA, `K = 32`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    pub lid: Option<PathBuf>,
    /// Optional gold pairs; when present the summary includes soft recall.
    pub gold: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub src_lang: String,
    pub tgt_lang: String,
    pub window: WindowConfig,
    pub scheme: BoilerplateScheme,
    /// Target PCA dimension; 0 disables projection. Projection is also
    /// skipped when embeddings are already this small.
    pub pca_dim: usize,
    pub k: usize,
    pub align: AlignConfig,
    pub search_mode: SearchMode,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    /// LID probability assumed when a sentence has no entry for a language.
    pub lid_default: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::new(),
            embeddings: PathBuf::new(),
            lid: None,
            gold: None,
            out_dir: PathBuf::from("out"),
            src_lang: "en".into(),
            tgt_lang: "fr".into(),
            window: WindowConfig::default(),
            scheme: BoilerplateScheme::default(),
            pca_dim: 128,
            k: 32,
            align: AlignConfig::default(),
            search_mode: SearchMode::Exact,
            seed: 0,
            threads: 0,
            lid_default: 1.0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Invalid(format!("invalid value {value:?} for {key}")))
}

impl PipelineConfig {
    /// Set one option by its command-line name (without the leading `--`;
    /// underscores are accepted in place of dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "corpus" => self.corpus = value.into(),
            "embeddings" => self.embeddings = value.into(),
            "lid" => self.lid = Some(value.into()),
            "gold" => self.gold = Some(value.into()),
            "out-dir" => self.out_dir = value.into(),
            "src-lang" => self.src_lang = value.into(),
            "tgt-lang" => self.tgt_lang = value.into(),
            "windows" | "j" => self.window.windows = num(&key, value)?,
            "gamma" => self.window.gamma = num(&key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "pca-dim" => self.pca_dim = num(&key, value)?,
            "k" => self.k = num(&key, value)?,
            "skip-cost" => self.align.skip_cost = num(&key, value)?,
            "radius" => self.align.radius = num(&key, value)?,
            "min-size" => self.align.min_size = num(&key, value)?,
            "mode" => self.search_mode = value.parse()?,
            "seed" => self.seed = num(&key, value)?,
            "threads" => self.threads = num(&key, value)?,
            "lid-default" => self.lid_default = num(&key, value)?,
            other => return Err(Error::Invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file. `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected key = value"))?;
            self.set(key, value).map_err(|e| match e {
                Error::Invalid(msg) => Error::parse(path, idx + 1, msg),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.align.validate()?;
        if self.k == 0 {
            return Err(Error::Invalid("K must be at least 1".into()));
        }
        if self.src_lang == self.tgt_lang {
            return Err(Error::Invalid(
                "source and target languages must differ".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.lid_default) {
            return Err(Error::Invalid("lid default must be in [0, 1]".into()));
        }
        for (what, path) in [
            ("corpus", Some(&self.corpus)),
            ("embeddings", Some(&self.embeddings)),
        ]
        .into_iter()
        .chain([("lid", self.lid.as_ref()), ("gold", self.gold.as_ref())])
        {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::Missing {
                        what,
                        id: p.display().to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}
