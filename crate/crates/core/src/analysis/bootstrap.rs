//! Bootstrap resampling over disorder samples.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A value with a one-sigma error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    /// Number of standard errors separating two independent estimates.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let combined = (self.error * self.error + other.error * other.error).sqrt();
        if combined == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / combined
        }
    }
}

pub const MIN_RESAMPLES: usize = 100;

/// Draws `n_resamples` datasets of the original size with replacement and
/// evaluates `statistic` on each. Returns the mean `q_bar` of the resampled
/// statistics and `sqrt(sum (q_bar - q_i)^2 / (n - 1))`.
pub fn bootstrap<T, F, R>(data: &[T], statistic: F, n_resamples: usize, rng: &mut R) -> Result<Estimate>
where
    T: Clone,
    F: Fn(&[T]) -> f64,
    R: Rng + ?Sized,
{
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bootstrap needs at least 2 samples, got {}",
            data.len()
        )));
    }
    if n_resamples < MIN_RESAMPLES {
        return Err(Error::InvalidParameter(format!(
            "bootstrap needs at least {MIN_RESAMPLES} resamples, got {n_resamples}"
        )));
    }
    let n = data.len();
    let mut buf: Vec<T> = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        buf.clear();
        buf.extend((0..n).map(|_| data[rng.gen_range(0..n)].clone()));
        q.push(statistic(&buf));
    }
    let mean = q.iter().sum::<f64>() / n_resamples as f64;
    let var = q.iter().map(|x| (mean - x).powi(2)).sum::<f64>() / (n_resamples - 1) as f64;
    Ok(Estimate {
        value: mean,
        error: var.sqrt(),
    })
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn constant_data_has_zero_error() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        let e = bootstrap(&[2.5; 40], mean, 200, &mut rng).unwrap();
        assert_eq!(e.value, 2.5);
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn standard_error_of_normal_mean() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        let data: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = bootstrap(&data, mean, 2000, &mut rng).unwrap();
        let expected = 1.0 / 500f64.sqrt();
        assert!((e.error - expected).abs() < 0.2 * expected, "{}", e.error);
    }

    #[test]
    fn preconditions() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        assert!(bootstrap(&[1.0], mean, 200, &mut rng).is_err());
        assert!(bootstrap(&[1.0, 2.0], mean, 99, &mut rng).is_err());
    }
}
