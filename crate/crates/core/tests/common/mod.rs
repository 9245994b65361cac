//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use docalign::corpus::EmbeddingMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Beta, Continuous};

pub fn normalize(v: &mut [f32]) {
    let n = v.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x = (*x as f64 / n) as f32);
    }
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let mut v: Vec<f32> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    normalize(&mut v);
    v
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n).map(|_| random_unit(rng, dim)).collect()
}

pub fn matrix(dim: usize, rows: &[Vec<f32>]) -> EmbeddingMatrix {
    EmbeddingMatrix::from_rows(dim, rows).unwrap()
}

pub fn noisy(rng: &mut ChaCha8Rng, v: &[f32], sigma: f64) -> Vec<f32> {
    let mut out: Vec<f32> = v
        .iter()
        .map(|&x| x + (sigma * rng.sample::<f64, _>(StandardNormal)) as f32)
        .collect();
    normalize(&mut out);
    out
}

/// A plausible translated document: noisy copies of `src` with random
/// sentence drops and unrelated insertions.
pub fn edited_copy(
    rng: &mut ChaCha8Rng,
    src: &[Vec<f32>],
    sigma: f64,
    p_drop: f64,
    p_insert: f64,
) -> Vec<Vec<f32>> {
    let dim = src.first().map_or(8, |r| r.len());
    let mut out = Vec::new();
    for row in src {
        if rng.random_bool(p_insert) {
            out.push(random_unit(rng, dim));
        }
        if !rng.random_bool(p_drop) {
            out.push(noisy(rng, row, sigma));
        }
    }
    if out.is_empty() {
        out.push(random_unit(rng, dim));
    }
    out
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    let mut s = 0.0f64;
    for k in 0..a.len() {
        s += a[k] as f64 * b[k] as f64;
    }
    s
}

/// Minimum alignment cost over every monotone sequence of match / skip
/// steps, by explicit enumeration.
pub fn brute_force_min_cost(src: &[Vec<f32>], tgt: &[Vec<f32>], skip: f64) -> f64 {
    fn go(
        src: &[Vec<f32>],
        tgt: &[Vec<f32>],
        i: usize,
        j: usize,
        acc: f64,
        skip: f64,
        best: &mut f64,
    ) {
        if i == src.len() && j == tgt.len() {
            *best = best.min(acc);
            return;
        }
        if i < src.len() && j < tgt.len() {
            go(
                src,
                tgt,
                i + 1,
                j + 1,
                acc + (1.0 - dot(&src[i], &tgt[j])),
                skip,
                best,
            );
        }
        if i < src.len() {
            go(src, tgt, i + 1, j, acc + skip, skip, best);
        }
        if j < tgt.len() {
            go(src, tgt, i, j + 1, acc + skip, skip, best);
        }
    }
    let mut best = f64::INFINITY;
    go(src, tgt, 0, 0, 0.0, skip, &mut best);
    best
}

/// Best one-to-one assignment total over all permutations of a square matrix.
pub fn optimal_assignment(scores: &[Vec<f64>]) -> f64 {
    fn go(scores: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == scores.len() {
            *best = best.max(acc);
            return;
        }
        for c in 0..scores.len() {
            if !used[c] {
                used[c] = true;
                go(scores, row + 1, used, acc + scores[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(scores, 0, &mut vec![false; scores.len()], 0.0, &mut best);
    best
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// in decreasing order.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Population covariance of the rows, computed directly.
pub fn covariance(rows: &[Vec<f32>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..d)
        .map(|k| rows.iter().map(|r| r[k] as f64).sum::<f64>() / n)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] as f64 - mean[i]) * (r[j] as f64 - mean[j]);
            }
        }
    }
    cov.iter_mut().flatten().for_each(|c| *c /= n);
    cov
}

/// Positional window weights computed from a Beta density on the unit
/// interval, evaluated at sentence centres and normalized per window.
pub fn window_oracle(n: usize, windows: usize, gamma: f64) -> Vec<Vec<f64>> {
    (0..windows)
        .map(|j| {
            let mode = (j as f64 + 0.5) / windows as f64;
            let dist = Beta::new(1.0 + gamma * mode, 1.0 + gamma * (1.0 - mode)).unwrap();
            let raw: Vec<f64> = (0..n)
                .map(|i| dist.pdf((i as f64 + 0.5) / n as f64))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        })
        .collect()
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &w) in row.iter().enumerate() {
        if w > row[best] {
            best = i;
        }
    }
    best
}

/// Generator settings of the bundled `fixtures/mini` corpus.
pub fn mini_spec() -> docalign::SynthSpec {
    docalign::SynthSpec {
        n_pairs: 10,
        n_distractors: 5,
        sentence_range: (8, 20),
        dim: 32,
        noise_sigma: 0.1,
        shuffle_distractors: true,
        n_shuffled: 5,
        boilerplate_rate: 0.1,
        seed: 7,
        ..docalign::SynthSpec::default()
    }
}

pub fn mini_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

/// Run every pipeline stage by hand through its file interface, reading
/// each stage's input from `dir`. PCA runs first when `pca` is set.
pub fn run_stages(cfg: &docalign::PipelineConfig, dir: &std::path::Path, pca: bool) {
    use docalign::docvec::VectorKind;
    use docalign::pipeline::{self, files, ScoreParams};
    use docalign::search::CandidateConfig;

    std::fs::create_dir_all(dir).unwrap();
    let at = |n: &str| dir.join(n);
    let emb = if pca {
        pipeline::stage_pca(
            &cfg.corpus,
            &cfg.embeddings,
            cfg.pca_dim,
            cfg.seed,
            &at(files::PCA_MODEL),
            &at(files::PCA_EMBEDDINGS),
        )
        .unwrap();
        at(files::PCA_EMBEDDINGS)
    } else {
        cfg.embeddings.clone()
    };
    pipeline::stage_docvec(
        &cfg.corpus,
        &emb,
        cfg.scheme,
        VectorKind::Windowed(cfg.window),
        &at(files::DOCVECS),
    )
    .unwrap();
    let cands = CandidateConfig {
        k: cfg.k,
        mode: cfg.search_mode,
        ..CandidateConfig::default()
    };
    pipeline::stage_candidates(
        &cfg.corpus,
        &at(files::DOCVECS),
        &cfg.src_lang,
        &cfg.tgt_lang,
        &cands,
        &at(files::CANDIDATES),
    )
    .unwrap();
    let params = ScoreParams {
        src_lang: &cfg.src_lang,
        tgt_lang: &cfg.tgt_lang,
        align: cfg.align,
        lid_default: cfg.lid_default,
    };
    pipeline::stage_align_score(
        &cfg.corpus,
        &emb,
        cfg.lid.as_deref(),
        &at(files::CANDIDATES),
        &params,
        &at(files::SCORED),
    )
    .unwrap();
    pipeline::stage_match(&at(files::SCORED), &at(files::MATCHES)).unwrap();
    pipeline::stage_extract(
        &cfg.corpus,
        &emb,
        cfg.lid.as_deref(),
        &at(files::MATCHES),
        &params,
        &at(files::SENTENCE_PAIRS),
    )
    .unwrap();
}

/// `n` proptest cases unless `PROPTEST_CASES` asks for a different count.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    let cases = std::env::var("PROPTEST_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(n);
    proptest::test_runner::Config::with_cases(cases)
}
