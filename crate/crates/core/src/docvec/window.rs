use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positional window layout: `windows` overlapping modified-PERT bumps with
/// peakedness `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub windows: usize,
    pub gamma: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            windows: 16,
            gamma: 20.0,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.windows == 0 {
            return Err(Error::Invalid("window count must be at least 1".into()));
        }
        if self.gamma <= 0.0 || !self.gamma.is_finite() {
            return Err(Error::Invalid(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// `windows × n` weight matrix. Row `j` is a modified-PERT density on
/// `[0, n]` with mode `((j + 0.5) / J) · n`, sampled at sentence midpoints
/// `x = i + 0.5` and normalized to sum to one.
pub fn pert_window_weights(n: usize, cfg: &WindowConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Invalid(
            "cannot build windows for an empty document".into(),
        ));
    }
    let len = n as f64;
    let j_count = cfg.windows as f64;
    let rows = (0..cfg.windows)
        .map(|j| {
            let mode = (j as f64 + 0.5) / j_count * len;
            let alpha = 1.0 + cfg.gamma * mode / len;
            let beta = 1.0 + cfg.gamma * (len - mode) / len;
            // log-density up to a constant; shifted by its max before exp
            let log_density: Vec<f64> = (0..n)
                .map(|i| {
                    let x = i as f64 + 0.5;
                    (alpha - 1.0) * x.ln() + (beta - 1.0) * (len - x).ln()
                })
                .collect();
            let peak = log_density
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut row: Vec<f64> = log_density.iter().map(|l| (l - peak).exp()).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|w| *w /= total);
            row
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argmax(row: &[f64]) -> usize {
        row.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0
    }

    #[test]
    fn single_sentence_rows_are_one() {
        for cfg in [
            WindowConfig::default(),
            WindowConfig {
                windows: 3,
                gamma: 0.5,
            },
        ] {
            let w = pert_window_weights(1, &cfg).unwrap();
            assert_eq!(w.len(), cfg.windows);
            assert!(w.iter().all(|r| r == &vec![1.0]));
        }
    }

    #[test]
    fn empty_document_rejected() {
        assert!(pert_window_weights(0, &WindowConfig::default()).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(pert_window_weights(
            5,
            &WindowConfig {
                windows: 0,
                gamma: 20.0
            }
        )
        .is_err());
        assert!(pert_window_weights(
            5,
            &WindowConfig {
                windows: 2,
                gamma: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn first_peak_before_last_peak() {
        for n in 16..80 {
            let w = pert_window_weights(n, &WindowConfig::default()).unwrap();
            assert!(argmax(&w[0]) < argmax(&w[15]));
        }
    }
}
