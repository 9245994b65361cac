use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EmbeddingMatrix, EmbeddingSet};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PCA1";

/// Upper bound on the number of sentence embeddings used to fit PCA.
pub const PCA_SAMPLE_CAP: usize = 100_000;

/// Rows processed per covariance accumulation step.
const COV_CHUNK: usize = 4096;

/// Linear projection onto the top principal directions of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub input_dim: usize,
    pub output_dim: usize,
    pub mean: Vec<f32>,
    /// `output_dim` rows of length `input_dim`, row-major.
    pub components: Vec<f32>,
    /// Fraction of total sample variance captured by each component. Only
    /// known for freshly fit models; empty after [`load_pca`].
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn component(&self, k: usize) -> &[f32] {
        &self.components[k * self.input_dim..(k + 1) * self.input_dim]
    }

    pub fn project(&self, row: &[f32]) -> Vec<f32> {
        let centered: Vec<f64> = row
            .iter()
            .zip(&self.mean)
            .map(|(&x, &m)| x as f64 - m as f64)
            .collect();
        (0..self.output_dim)
            .map(|k| {
                self.component(k)
                    .iter()
                    .zip(&centered)
                    .map(|(&c, &x)| c as f64 * x)
                    .sum::<f64>() as f32
            })
            .collect()
    }

    /// Map a projected vector back into the input space.
    pub fn reconstruct(&self, projected: &[f32]) -> Vec<f32> {
        let mut out: Vec<f64> = self.mean.iter().map(|&m| m as f64).collect();
        for (k, &coef) in projected.iter().enumerate() {
            for (o, &c) in out.iter_mut().zip(self.component(k)) {
                *o += coef as f64 * c as f64;
            }
        }
        out.into_iter().map(|x| x as f32).collect()
    }
}

/// Fit a centered (non-whitened) PCA. Components are ordered by decreasing
/// explained variance and signed so that their first nonzero coordinate is
/// positive.
pub fn fit_pca<R: AsRef<[f32]>>(sample: &[R], output_dim: usize) -> Result<PcaModel> {
    let input_dim = sample.first().map(|r| r.as_ref().len()).unwrap_or(0);
    if let Some(bad) = sample.iter().find(|r| r.as_ref().len() != input_dim) {
        return Err(Error::Dimension(format!(
            "PCA sample rows have lengths {input_dim} and {}",
            bad.as_ref().len()
        )));
    }
    if output_dim == 0 {
        return Err(Error::Invalid("PCA output_dim must be positive".into()));
    }
    if sample.len() < output_dim {
        return Err(Error::Invalid(format!(
            "PCA needs at least {output_dim} samples, got {}",
            sample.len()
        )));
    }
    if output_dim > input_dim {
        return Err(Error::Invalid(format!(
            "PCA output_dim {output_dim} exceeds input_dim {input_dim}"
        )));
    }

    let n = sample.len();
    let mut mean = vec![0f64; input_dim];
    for row in sample {
        for (m, &x) in mean.iter_mut().zip(row.as_ref()) {
            *m += x as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = DMatrix::<f64>::zeros(input_dim, input_dim);
    for chunk in sample.chunks(COV_CHUNK) {
        let centered = DMatrix::<f64>::from_row_iterator(
            chunk.len(),
            input_dim,
            chunk
                .iter()
                .flat_map(|r| r.as_ref().iter().zip(&mean).map(|(&x, &m)| x as f64 - m)),
        );
        cov += centered.tr_mul(&centered);
    }
    cov /= n as f64;

    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..input_dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let total: f64 = eigen.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(output_dim * input_dim);
    let mut ratios = Vec::with_capacity(output_dim);
    for &col in order.iter().take(output_dim) {
        let v = eigen.eigenvectors.column(col);
        let sign = v
            .iter()
            .find(|x| x.abs() > 1e-12)
            .map(|x| x.signum())
            .unwrap_or(1.0);
        components.extend(v.iter().map(|&x| (x * sign) as f32));
        let lambda = eigen.eigenvalues[col].max(0.0);
        ratios.push(if total > 0.0 { lambda / total } else { 0.0 });
    }

    Ok(PcaModel {
        input_dim,
        output_dim,
        mean: mean.into_iter().map(|m| m as f32).collect(),
        components,
        explained_variance_ratio: ratios,
    })
}

pub fn apply_pca(model: &PcaModel, m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if m.rows() > 0 && m.dim() != model.input_dim {
        return Err(Error::Dimension(format!(
            "embedding dim {} does not match PCA input dim {}",
            m.dim(),
            model.input_dim
        )));
    }
    let data: Vec<f32> = m.iter_rows().flat_map(|r| model.project(r)).collect();
    EmbeddingMatrix::new(model.output_dim, data)
}

/// Uniform random sample (without replacement) of up to `cap` sentence
/// embeddings, returned in corpus order.
pub fn sample_rows(set: &EmbeddingSet, cap: usize, seed: u64) -> Vec<Vec<f32>> {
    let total: usize = set.values().map(|m| m.rows()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, total, cap.min(total)).into_vec();
    picked.sort_unstable();

    let mut out = Vec::with_capacity(picked.len());
    let mut next = picked.into_iter().peekable();
    let mut offset = 0;
    for m in set.values() {
        while let Some(&g) = next.peek() {
            if g >= offset + m.rows() {
                break;
            }
            out.push(m.row(g - offset).to_vec());
            next.next();
        }
        offset += m.rows();
    }
    out
}

pub fn store_pca(model: &PcaModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&(model.input_dim as u32).to_le_bytes())
        .map_err(io)?;
    out.write_all(&(model.output_dim as u32).to_le_bytes())
        .map_err(io)?;
    for x in model.mean.iter().chain(&model.components) {
        out.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn load_pca(path: impl AsRef<Path>) -> Result<PcaModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::parse(path, 0, "bad magic, expected PCA1"));
    }
    let input_dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let output_dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let floats = input_dim * (1 + output_dim);
    if bytes.len() != 12 + 4 * floats {
        return Err(Error::parse(path, 0, "PCA file has the wrong length"));
    }
    if output_dim > input_dim {
        return Err(Error::parse(path, 0, "PCA output_dim exceeds input_dim"));
    }
    let values: Vec<f32> = bytes[12..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("PCA model".into()));
    }
    Ok(PcaModel {
        input_dim,
        output_dim,
        mean: values[..input_dim].to_vec(),
        components: values[input_dim..].to_vec(),
        explained_variance_ratio: Vec::new(),
    })
}
