//! Small dense-vector helpers shared by every stage.

use std::cmp::Ordering;

/// Norms at or below this are treated as zero.
pub const NORM_EPSILON: f64 = 1e-12;

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // `+ 0.0` turns a negative zero into positive zero
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x as f64 * y as f64)
        .sum::<f64>()
        + 0.0
}

/// Descending order on scores, treating `-0.0` and `0.0` as equal.
pub(crate) fn desc(a: f64, b: f64) -> Ordering {
    (b + 0.0).total_cmp(&(a + 0.0))
}

pub fn l2_norm(v: &[f32]) -> f64 {
    dot(v, v).sqrt()
}

/// Scale `v` to unit L2 norm. Vectors with norm at or below
/// [`NORM_EPSILON`] are returned unchanged.
pub fn unit_normalize(v: &[f32]) -> Vec<f32> {
    let mut out = v.to_vec();
    unit_normalize_in_place(&mut out);
    out
}

pub fn unit_normalize_in_place(v: &mut [f32]) {
    let norm = l2_norm(v);
    if norm > NORM_EPSILON {
        for x in v.iter_mut() {
            *x = (*x as f64 / norm) as f32;
        }
    }
}

/// f64 variant used where the accumulation happens in double precision.
pub fn unit_normalize_f64(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > NORM_EPSILON {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Cosine similarity; zero when either side is a zero vector.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let na = l2_norm(a);
    let nb = l2_norm(b);
    if na <= NORM_EPSILON || nb <= NORM_EPSILON {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}
