//! Parallel document alignment from sentence embeddings.
//!
//! Documents are turned into order-aware vectors, candidate translation
//! pairs are retrieved per web domain by nearest-neighbour search, and
//! candidates are re-scored with a fast sentence alignment before a greedy
//! one-to-one match.

pub mod align;
pub mod corpus;
pub mod docvec;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod search;
pub mod synth;
pub mod vector;

pub use align::{
    align_coarse_to_fine, align_exact, extract_sentence_pairs, greedy_match, score_pair,
    AlignConfig, Alignment, AlignmentLink, ScoredPair, SentencePair, SideLid,
};
pub use corpus::{
    apply_pca, fit_pca, load_corpus, load_embeddings, load_lid, store_corpus, store_embeddings,
    Document, EmbeddingMatrix, EmbeddingSet, LidRecord, LidTable, PcaModel,
};
pub use docvec::{
    baseline_avg_docvector, boilerplate_weight, build_boilerplate_table, build_docvector,
    build_subvectors, pert_window_weights, BoilerplateScheme, BoilerplateTable, DocVector,
    VectorKind, WindowConfig,
};
pub use error::{Error, Result};
pub use eval::{levenshtein, near_duplicate, soft_recall, GoldPairs, RecallReport};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineSummary};
pub use search::{
    build_index, generate_candidates, margin_score_pairs, mine_margin, CandidateConfig,
    CandidatePair, Hit, QuerySide, SearchIndex, SearchMode,
};
pub use synth::{synth_corpus, SynthCorpus, SynthSpec};
