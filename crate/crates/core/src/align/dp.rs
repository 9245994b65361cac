use crate::align::{AlignConfig, Alignment, AlignmentLink};
use crate::corpus::EmbeddingMatrix;
use crate::vector::dot;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Start,
    Match,
    Del,
    Ins,
}

/// Inclusive column range allowed in each DP row (`n_src + 1` rows).
pub(crate) type Band = [(usize, usize)];

/// Full O(N·M) dynamic program over 1-1 matches and indels. Match cost is
/// `1 - cos`, each indel costs `skip_cost`; ties are resolved in the order
/// match, deletion, insertion.
pub fn align_exact(src: &EmbeddingMatrix, tgt: &EmbeddingMatrix, cfg: &AlignConfig) -> Alignment {
    let band: Vec<(usize, usize)> = vec![(0, tgt.rows()); src.rows() + 1];
    align_in_band(src, tgt, &band, cfg)
}

/// The same dynamic program restricted to the cells of `band`. The band must
/// contain (0, 0) and (N, M) and connect them.
pub(crate) fn align_in_band(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    band: &Band,
    cfg: &AlignConfig,
) -> Alignment {
    let (n, m) = (src.rows(), tgt.rows());
    debug_assert_eq!(band.len(), n + 1);
    let skip = cfg.skip_cost;

    let mut cost: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut step: Vec<Vec<Step>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (lo, hi) = band[i];
        let width = hi + 1 - lo;
        let mut crow = vec![f64::INFINITY; width];
        let mut srow = vec![Step::Start; width];
        for j in lo..=hi {
            if i == 0 && j == 0 {
                crow[0] = 0.0;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut how = Step::Start;
            if i > 0 && j > 0 {
                if let Some(prev) = lookup(&cost[i - 1], band[i - 1], j - 1) {
                    let c = prev + (1.0 - dot(src.row(i - 1), tgt.row(j - 1)));
                    if c < best {
                        best = c;
                        how = Step::Match;
                    }
                }
            }
            if i > 0 {
                if let Some(prev) = lookup(&cost[i - 1], band[i - 1], j) {
                    let c = prev + skip;
                    if c < best {
                        best = c;
                        how = Step::Del;
                    }
                }
            }
            if j > lo {
                let c = crow[j - 1 - lo] + skip;
                if c < best {
                    best = c;
                    how = Step::Ins;
                }
            }
            crow[j - lo] = best;
            srow[j - lo] = how;
        }
        cost.push(crow);
        step.push(srow);
    }

    let total = lookup(&cost[n], band[n], m).unwrap_or(f64::INFINITY);
    let mut links = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match step[i][j - band[i].0] {
            Step::Match => {
                links.push(AlignmentLink::Match(i - 1, j - 1));
                i -= 1;
                j -= 1;
            }
            Step::Del => {
                links.push(AlignmentLink::Del(i - 1));
                i -= 1;
            }
            Step::Ins => {
                links.push(AlignmentLink::Ins(j - 1));
                j -= 1;
            }
            Step::Start => unreachable!("band does not connect the corners"),
        }
    }
    links.reverse();
    Alignment { links, cost: total }
}

fn lookup(row: &[f64], range: (usize, usize), j: usize) -> Option<f64> {
    if j < range.0 || j > range.1 {
        return None;
    }
    let v = row[j - range.0];
    v.is_finite().then_some(v)
}
