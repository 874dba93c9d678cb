//! Sample summaries with a fixed summation order.

use serde::Serialize;

/// Mean, standard error (sample std over `sqrt(n)`) and count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, count: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, count: n }
    }

    /// Summary of 0/1 outcomes.
    pub fn of_indicators(flags: &[bool]) -> Self {
        let v: Vec<f64> = flags.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::of(&v)
    }
}

/// Standard error of a statistic from its values on equal-size batches.
pub fn batch_stderr(batch_values: &[f64]) -> f64 {
    Summary::of(batch_values).stderr
}
