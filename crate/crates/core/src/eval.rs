//! Document-pair recall with near-duplicate ("soft") credit.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Relative edit distance below which two documents count as the same.
pub const NEAR_DUPLICATE_THRESHOLD: f64 = 0.05;

/// Character-level Levenshtein distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `levenshtein(a, b) < 0.05 · max(|a|, |b|)`; two empty strings match.
pub fn near_duplicate(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return true;
    }
    let limit = NEAR_DUPLICATE_THRESHOLD * longest as f64;
    // the length difference is a lower bound on the distance
    if (a.len().abs_diff(b.len()) as f64) >= limit {
        return false;
    }
    (levenshtein_chars(&a, &b) as f64) < limit
}

/// Gold document pairs and the text of every document they mention.
#[derive(Debug, Clone, Default)]
pub struct GoldPairs {
    pub pairs: Vec<(String, String)>,
    pub texts: HashMap<String, String>,
}

impl GoldPairs {
    /// Texts are taken from `docs` (sentences joined by newlines).
    pub fn from_corpus(pairs: Vec<(String, String)>, docs: &[Document]) -> Self {
        GoldPairs {
            pairs,
            texts: docs.iter().map(|d| (d.doc_id.clone(), d.text())).collect(),
        }
    }

    fn text(&self, id: &str) -> Result<&str> {
        self.texts
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::Missing {
                what: "document text",
                id: id.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallReport {
    pub gold: usize,
    pub credited: usize,
    pub recall: f64,
}

/// A gold pair `(e*, f*)` is credited when some prediction `(e, f)` has
/// `e = e*` and `f` equal to or a near duplicate of `f*`, or `f = f*` and
/// `e` a near duplicate of `e*`. Each gold pair is credited at most once.
pub fn soft_recall(pred: &[(String, String)], gold: &GoldPairs) -> Result<RecallReport> {
    let mut by_src: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut by_tgt: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut exact: HashSet<(&str, &str)> = HashSet::new();
    for (s, t) in pred {
        by_src.entry(s).or_default().push(t);
        by_tgt.entry(t).or_default().push(s);
        exact.insert((s, t));
    }
    for (s, t) in pred {
        gold.text(s)?;
        gold.text(t)?;
    }

    let mut credited = 0;
    for (gs, gt) in &gold.pairs {
        let hit = if exact.contains(&(gs.as_str(), gt.as_str())) {
            true
        } else {
            let gold_tgt = gold.text(gt)?;
            let gold_src = gold.text(gs)?;
            let via_src = match by_src.get(gs.as_str()) {
                Some(ts) => ts
                    .iter()
                    .any(|t| near_duplicate(gold.texts[*t].as_str(), gold_tgt)),
                None => false,
            };
            via_src
                || by_tgt.get(gt.as_str()).is_some_and(|ss| {
                    ss.iter()
                        .any(|s| near_duplicate(gold.texts[*s].as_str(), gold_src))
                })
        };
        if hit {
            credited += 1;
        }
    }
    let recall = if gold.pairs.is_empty() {
        0.0
    } else {
        credited as f64 / gold.pairs.len() as f64
    };
    Ok(RecallReport {
        gold: gold.pairs.len(),
        credited,
        recall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct recursive definition, exponential; only for short strings.
    fn levenshtein_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((ca, ra)), Some((cb, rb))) => {
                let sub = levenshtein_oracle(ra, rb) + usize::from(ca != cb);
                sub.min(levenshtein_oracle(ra, b) + 1)
                    .min(levenshtein_oracle(a, rb) + 1)
            }
        }
    }

    #[test]
    fn classic_values() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("héllo", "hello"), 1);
        let k: Vec<char> = "kitten".chars().collect();
        let s: Vec<char> = "sitting".chars().collect();
        assert_eq!(levenshtein_oracle(&k, &s), 3);
    }

    #[test]
    fn near_duplicate_threshold() {
        let base: String = (0..100)
            .map(|i| char::from(b'a' + (i % 26) as u8))
            .collect();
        let edit = |n: usize| -> String {
            base.chars()
                .enumerate()
                .map(|(i, c)| if i % 20 == 0 && i / 20 < n { 'Z' } else { c })
                .collect()
        };
        assert!(near_duplicate(&base, &base));
        assert_eq!(levenshtein(&base, &edit(4)), 4);
        assert!(near_duplicate(&base, &edit(4)));
        assert_eq!(levenshtein(&base, &edit(5)), 5);
        assert!(!near_duplicate(&base, &edit(5)));
        assert!(near_duplicate("", ""));
        assert!(!near_duplicate("", "a"));
    }

    fn gold(pairs: &[(&str, &str)], texts: &[(&str, &str)]) -> GoldPairs {
        GoldPairs {
            pairs: pairs
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            texts: texts
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }

    fn p(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn soft_credit_rules() {
        let long: String = "x".repeat(200);
        let variant = format!("y{}", &long[1..]);
        let g = gold(
            &[("e1", "f1")],
            &[
                ("e1", "aaa"),
                ("f1", &long),
                ("f1b", &variant),
                ("e2", "zzz"),
                ("f2", "qqq"),
            ],
        );
        assert_eq!(soft_recall(&p(&[("e1", "f1")]), &g).unwrap().recall, 1.0);
        assert_eq!(soft_recall(&p(&[("e1", "f1b")]), &g).unwrap().recall, 1.0);
        assert_eq!(soft_recall(&p(&[("e2", "f2")]), &g).unwrap().recall, 0.0);
        // both sides different, even if one is a near duplicate
        assert_eq!(soft_recall(&p(&[("e2", "f1b")]), &g).unwrap().recall, 0.0);
    }

    #[test]
    fn credited_once() {
        let g = gold(&[("e", "f")], &[("e", "a"), ("f", "b"), ("g", "b")]);
        let r = soft_recall(&p(&[("e", "f"), ("e", "g")]), &g).unwrap();
        assert_eq!((r.gold, r.credited), (1, 1));
    }

    #[test]
    fn missing_text_is_error() {
        let g = gold(&[("e", "f")], &[("e", "a")]);
        assert!(soft_recall(&p(&[("e", "f")]), &g).is_err());
    }

    fn short_string() -> impl Strategy<Value = String> {
        "[abc]{0,6}"
    }

    proptest! {
        #[test]
        fn matches_recursive_definition(a in short_string(), b in short_string()) {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein(&a, &b), levenshtein_oracle(&ac, &bc));
        }

        #[test]
        fn metric_axioms(a in "[a-d]{0,12}", b in "[a-d]{0,12}", c in "[a-d]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
            prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
        }

        #[test]
        fn soft_recall_monotone_and_above_exact(
            preds in proptest::collection::vec((0usize..5, 0usize..5), 0..8),
            extra in (0usize..5, 0usize..5),
        ) {
            let texts: Vec<(String, String)> = (0..5)
                .flat_map(|i| [(format!("e{i}"), format!("src {}", i % 3)), (format!("f{i}"), format!("tgt {}", i % 2))])
                .collect();
            let g = GoldPairs {
                pairs: (0..5).map(|i| (format!("e{i}"), format!("f{i}"))).collect(),
                texts: texts.into_iter().collect(),
            };
            let pred: Vec<(String, String)> = preds.iter().map(|(a, b)| (format!("e{a}"), format!("f{b}"))).collect();
            let base = soft_recall(&pred, &g).unwrap().recall;
            let exact = g.pairs.iter().filter(|gp| pred.contains(gp)).count() as f64 / 5.0;
            prop_assert!(base >= exact);
            let mut more = pred.clone();
            more.push((format!("e{}", extra.0), format!("f{}", extra.1)));
            prop_assert!(soft_recall(&more, &g).unwrap().recall >= base);
        }
    }
}
