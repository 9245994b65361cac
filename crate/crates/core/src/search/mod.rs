//! Per-webdomain nearest-neighbour search over document vectors, candidate
//! generation, recall@K, and the margin-based sentence miner.

mod candidates;
mod index;
mod margin;

pub use candidates::{generate_candidates, recall_at_k, CandidateConfig, CandidatePair, QuerySide};
pub use index::{build_index, Hit, SearchIndex, SearchMode};
pub use margin::{margin_score_pairs, mine_margin, MarginPair, MarginRecord, MARGIN_NEIGHBORS};
