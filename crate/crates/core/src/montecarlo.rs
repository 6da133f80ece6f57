//! Seeded Monte Carlo averaging.
//!
//! Samples are evaluated in parallel but reduced in index order with a
//! compensated sum, so results do not depend on the number of worker threads.

use crate::error::{Error, Result};
use crate::quadrature::compensated_sum;
use crate::scalar::Real;
use num_complex::Complex;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloSpec {
    samples: usize,
    seed: u64,
}

impl MonteCarloSpec {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::param("samples", "need at least one sample"));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: Complex<T>,
    /// `max(se_re, se_im)`.
    pub standard_error: T,
    pub se_re: T,
    pub se_im: T,
}

impl<T: Real> McEstimate<T> {
    /// True if both components of `value` lie within `k` standard errors.
    pub fn agrees_with(&self, value: Complex<T>, k: T) -> bool {
        let d = self.mean - value;
        d.re.abs() <= k * self.standard_error && d.im.abs() <= k * self.standard_error
    }
}

/// Mean and standard error of `statistic(sampler(seed, i))` for `i < N`.
pub fn mc_mean<T, S, F, G>(spec: &MonteCarloSpec, sampler: F, statistic: G) -> Result<McEstimate<T>>
where
    T: Real,
    F: Fn(u64, usize) -> S + Sync,
    G: Fn(&S) -> Complex<T> + Sync,
{
    let v = mc_mean_vec(spec, sampler, |s| vec![statistic(s)])?;
    Ok(v[0])
}

/// Vector-valued variant of [`mc_mean`]: every sample yields one value per output
/// slot; the estimate is formed slot by slot.
pub fn mc_mean_vec<T, S, F, G>(
    spec: &MonteCarloSpec,
    sampler: F,
    statistic: G,
) -> Result<Vec<McEstimate<T>>>
where
    T: Real,
    F: Fn(u64, usize) -> S + Sync,
    G: Fn(&S) -> Vec<Complex<T>> + Sync,
{
    let n = spec.samples;
    if n < 2 {
        return Err(Error::param("samples", "a standard error needs at least two samples"));
    }
    let values: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|i| statistic(&sampler(spec.seed, i)))
        .collect();
    let slots = values[0].len();
    if values.iter().any(|v| v.len() != slots) {
        return Err(Error::param("statistic", "inconsistent output length across samples"));
    }
    Ok((0..slots).map(|k| estimate(values.iter().map(|v| v[k]), n)).collect())
}

fn estimate<T: Real>(xs: impl Iterator<Item = Complex<T>> + Clone, n: usize) -> McEstimate<T> {
    let nf = T::from_usize_lossy(n);
    let mean = Complex::new(
        compensated_sum(xs.clone().map(|z| z.re)) / nf,
        compensated_sum(xs.clone().map(|z| z.im)) / nf,
    );
    let var_re = compensated_sum(xs.clone().map(|z| (z.re - mean.re).powi(2))) / (nf - T::one());
    let var_im = compensated_sum(xs.map(|z| (z.im - mean.im).powi(2))) / (nf - T::one());
    let se_re = (var_re / nf).sqrt();
    let se_im = (var_im / nf).sqrt();
    McEstimate {
        mean,
        standard_error: se_re.max(se_im),
        se_re,
        se_im,
    }
}
