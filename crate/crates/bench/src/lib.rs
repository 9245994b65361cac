//! Input generators shared by the benchmarks.

use docalign::{Document, EmbeddingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let mut v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n).map(|_| unit(rng, dim)).collect()
}

/// A sentence-embedding matrix and a noisy copy of it.
pub fn noisy_pair(seed: u64, n: usize, dim: usize) -> (EmbeddingMatrix, EmbeddingMatrix) {
    let mut rng = rng(seed);
    let src = rows(&mut rng, n, dim);
    let tgt: Vec<Vec<f32>> = src
        .iter()
        .map(|r| {
            let noise = unit(&mut rng, dim);
            r.iter().zip(&noise).map(|(a, b)| a + 0.1 * b).collect()
        })
        .collect();
    (
        EmbeddingMatrix::from_rows(dim, &src).unwrap(),
        EmbeddingMatrix::from_rows(dim, &tgt).unwrap(),
    )
}

/// One document of `n` distinct sentences with random embeddings.
pub fn document(seed: u64, n: usize, dim: usize) -> (Document, EmbeddingMatrix) {
    let mut rng = rng(seed);
    let doc = Document {
        doc_id: format!("doc{seed}"),
        webdomain: "bench.example".into(),
        lang: "en".into(),
        sentences: (0..n).map(|i| format!("sentence {i}")).collect(),
    };
    let emb = EmbeddingMatrix::from_rows(dim, &rows(&mut rng, n, dim)).unwrap();
    (doc, emb)
}
