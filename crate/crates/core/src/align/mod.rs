//! Sentence alignment of candidate document pairs and alignment-based
//! re-scoring.

mod dp;
mod fast;
mod score;

use std::collections::HashSet;

use crate::error::{Error, Result};

pub use dp::align_exact;
pub use fast::{align_coarse_to_fine, downsample};
pub use score::{
    extract_sentence_pairs, greedy_match, score_pair, MatchedDocs, ScoredPair, SentencePair,
    SideLid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlignmentLink {
    /// Source sentence aligned to target sentence.
    Match(usize, usize),
    /// Source sentence left unaligned.
    Del(usize),
    /// Target sentence left unaligned.
    Ins(usize),
}

/// Monotonic 1-1/1-0/0-1 alignment covering every sentence of both sides
/// exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub links: Vec<AlignmentLink>,
    /// Sum of link costs along the path.
    pub cost: f64,
}

impl Alignment {
    pub fn matches(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().filter_map(|l| match *l {
            AlignmentLink::Match(i, j) => Some((i, j)),
            _ => None,
        })
    }

    /// Check coverage and monotonicity against document lengths.
    pub fn validate(&self, n_src: usize, n_tgt: usize) -> Result<()> {
        let (mut next_src, mut next_tgt) = (0, 0);
        for link in &self.links {
            let ok = match *link {
                AlignmentLink::Match(i, j) => {
                    let ok = i == next_src && j == next_tgt;
                    next_src += 1;
                    next_tgt += 1;
                    ok
                }
                AlignmentLink::Del(i) => {
                    let ok = i == next_src;
                    next_src += 1;
                    ok
                }
                AlignmentLink::Ins(j) => {
                    let ok = j == next_tgt;
                    next_tgt += 1;
                    ok
                }
            };
            if !ok {
                return Err(Error::Internal(format!(
                    "non-monotone alignment link {link:?}"
                )));
            }
        }
        if next_src != n_src || next_tgt != n_tgt {
            return Err(Error::Internal(format!(
                "alignment covers {next_src}x{next_tgt} sentences, expected {n_src}x{n_tgt}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    /// Cost of leaving one sentence unaligned.
    pub skip_cost: f64,
    /// Half-width of the search band around the projected coarse path.
    pub radius: usize,
    /// Documents at most this long are aligned with the full DP.
    pub min_size: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            skip_cost: 0.5,
            radius: 5,
            min_size: 10,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.skip_cost <= 0.0 || !self.skip_cost.is_finite() {
            return Err(Error::Invalid(format!(
                "skip cost must be positive, got {}",
                self.skip_cost
            )));
        }
        if self.radius < 1 {
            return Err(Error::Invalid("band radius must be at least 1".into()));
        }
        if self.min_size < 2 {
            return Err(Error::Invalid("min size must be at least 2".into()));
        }
        Ok(())
    }
}

/// Link-level F1 between two alignments (all link kinds count).
pub fn link_f1(predicted: &Alignment, reference: &Alignment) -> f64 {
    let a: HashSet<_> = predicted.links.iter().collect();
    let b: HashSet<_> = reference.links.iter().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let common = a.intersection(&b).count() as f64;
    2.0 * common / (a.len() + b.len()) as f64
}
