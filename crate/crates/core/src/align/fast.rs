use crate::align::dp::{align_exact, align_in_band};
use crate::align::{AlignConfig, Alignment, AlignmentLink};
use crate::corpus::EmbeddingMatrix;
use crate::vector::unit_normalize_in_place;

/// Halve the resolution: row `i` is the normalized sum of rows `2i` and
/// `2i + 1` (an odd trailing row is just normalized).
pub fn downsample(emb: &EmbeddingMatrix) -> EmbeddingMatrix {
    let dim = emb.dim();
    let rows = emb.rows();
    let mut data = Vec::with_capacity(rows.div_ceil(2) * dim);
    for i in (0..rows).step_by(2) {
        let mut v = emb.row(i).to_vec();
        if i + 1 < rows {
            for (a, &b) in v.iter_mut().zip(emb.row(i + 1)) {
                *a += b;
            }
        }
        unit_normalize_in_place(&mut v);
        data.extend(v);
    }
    EmbeddingMatrix::new(dim, data).expect("downsampled rows stay finite")
}

/// Linear-time approximation of [`align_exact`]: align half-resolution
/// copies recursively, project the coarse path to full resolution, and run
/// the DP only within `radius` cells of the projection.
pub fn align_coarse_to_fine(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &AlignConfig,
) -> Alignment {
    let (n, m) = (src.rows(), tgt.rows());
    if n.max(m) <= cfg.min_size || n == 0 || m == 0 {
        return align_exact(src, tgt, cfg);
    }
    let coarse = align_coarse_to_fine(&downsample(src), &downsample(tgt), cfg);
    let band = project_band(&coarse, n, m, cfg.radius);
    align_in_band(src, tgt, &band, cfg)
}

/// Per-row inclusive column range around the projected coarse path.
fn project_band(coarse: &Alignment, n: usize, m: usize, radius: usize) -> Vec<(usize, usize)> {
    let mut lo = vec![usize::MAX; n + 1];
    let mut hi = vec![0usize; n + 1];
    let mut mark = |ci: usize, cj: usize| {
        for r in [2 * ci, 2 * ci + 1] {
            if r > n {
                continue;
            }
            lo[r] = lo[r].min((2 * cj).min(m));
            hi[r] = hi[r].max((2 * cj + 1).min(m));
        }
    };
    let (mut ci, mut cj) = (0, 0);
    mark(ci, cj);
    for link in &coarse.links {
        match link {
            AlignmentLink::Match(..) => {
                ci += 1;
                cj += 1;
            }
            AlignmentLink::Del(_) => ci += 1,
            AlignmentLink::Ins(_) => cj += 1,
        }
        mark(ci, cj);
    }

    // widen by `radius` in both directions
    let mut band: Vec<(usize, usize)> = (0..=n)
        .map(|r| {
            let from = r.saturating_sub(radius);
            let to = (r + radius).min(n);
            let l = lo[from..=to].iter().copied().min().unwrap_or(0);
            let h = hi[from..=to].iter().copied().max().unwrap_or(m);
            (l.saturating_sub(radius), (h + radius).min(m))
        })
        .collect();

    // make ranges monotone so consecutive rows overlap and the corners connect
    band[0].0 = 0;
    band[n].1 = m;
    for r in 1..=n {
        band[r].1 = band[r].1.max(band[r - 1].1);
    }
    for r in (0..n).rev() {
        band[r].0 = band[r].0.min(band[r + 1].0);
    }
    band
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_unit(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f32>> {
        (0..rows)
            .map(|_| {
                let mut v: Vec<f32> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                unit_normalize_in_place(&mut v);
                v
            })
            .collect()
    }

    #[test]
    fn downsample_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m4 = EmbeddingMatrix::from_rows(3, &random_unit(4, 3, &mut rng)).unwrap();
        assert_eq!(downsample(&m4).rows(), 2);
        let rows = random_unit(5, 3, &mut rng);
        let m5 = EmbeddingMatrix::from_rows(3, &rows).unwrap();
        let d = downsample(&m5);
        assert_eq!(d.rows(), 3);
        assert_eq!(d.row(2), rows[4].as_slice());
    }

    #[test]
    fn downsample_identical_rows() {
        let v = vec![0.6f32, 0.8];
        let m = EmbeddingMatrix::from_rows(2, &[v.clone(), v.clone()]).unwrap();
        let d = downsample(&m);
        assert!((d.row(0)[0] - 0.6).abs() < 1e-7 && (d.row(0)[1] - 0.8).abs() < 1e-7);
    }

    #[test]
    fn small_inputs_delegate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = AlignConfig::default();
        for (n, m) in [(10, 10), (3, 9), (0, 7), (10, 1)] {
            let a = EmbeddingMatrix::from_rows(8, &random_unit(n, 8, &mut rng)).unwrap();
            let b = EmbeddingMatrix::from_rows(8, &random_unit(m, 8, &mut rng)).unwrap();
            assert_eq!(
                align_coarse_to_fine(&a, &b, &cfg),
                align_exact(&a, &b, &cfg)
            );
        }
    }

    #[test]
    fn band_contains_corners_and_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = EmbeddingMatrix::from_rows(8, &random_unit(37, 8, &mut rng)).unwrap();
        let b = EmbeddingMatrix::from_rows(8, &random_unit(23, 8, &mut rng)).unwrap();
        let cfg = AlignConfig::default();
        let coarse = align_exact(&downsample(&a), &downsample(&b), &cfg);
        let band = project_band(&coarse, 37, 23, 1);
        assert_eq!(band[0].0, 0);
        assert_eq!(band[37].1, 23);
        for w in band.windows(2) {
            assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            assert!(w[1].0 <= w[0].1 + 1);
        }
    }

    #[test]
    fn lopsided_lengths_are_covered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = AlignConfig::default();
        for (n, m) in [(1, 200), (200, 1), (11, 90), (64, 13)] {
            let a = EmbeddingMatrix::from_rows(8, &random_unit(n, 8, &mut rng)).unwrap();
            let b = EmbeddingMatrix::from_rows(8, &random_unit(m, 8, &mut rng)).unwrap();
            align_coarse_to_fine(&a, &b, &cfg).validate(n, m).unwrap();
        }
    }
}
