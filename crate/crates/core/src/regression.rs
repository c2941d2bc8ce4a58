//! Fréchet regression over time-indexed graph samples.
//!
//! Each query time weights the dataset with the linear kernel
//! `w_i = 1 + (t_i - t_bar) vhat^{-1} (t - t_bar)` and solves the weighted
//! fit. The block count is estimated once from the pooled dataset and held
//! fixed across query times.

use crate::community::{estimate_c, DEFAULT_CAP, DEFAULT_K};
use crate::error::{Error, Result};
use crate::graph::{Graph, Spectrum};
use crate::optimizer::{full_mean_spectrum, run_weighted_fit, FitConfig, FitResult};
use crate::spectral::monte_carlo_mean_spectrum;
use rayon::prelude::*;

/// Time-indexed graph sample with cached spectra and density summaries.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    samples: Vec<(f64, Graph)>,
    t_bar: f64,
    v_hat: f64,
    spectra: Vec<Spectrum>,
    densities: Vec<f64>,
    pooled_c: usize,
    n: usize,
}

impl RegressionDataset {
    pub fn new(samples: Vec<(f64, Graph)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParams {
                reason: format!("need at least two samples, got {}", samples.len()),
            });
        }
        let n = samples[0].1.n();
        for (_, g) in &samples {
            if g.n() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: g.n(),
                });
            }
        }
        let count = samples.len() as f64;
        let t_bar = samples.iter().map(|(t, _)| t).sum::<f64>() / count;
        let v_hat = samples
            .iter()
            .map(|(t, _)| (t - t_bar) * (t - t_bar))
            .sum::<f64>()
            / count;
        if v_hat <= 0.0 {
            return Err(Error::ZeroVariance);
        }
        let spectra: Vec<Spectrum> = samples.par_iter().map(|(_, g)| g.spectrum()).collect();
        let densities = samples
            .iter()
            .map(|(_, g)| g.density())
            .collect::<Result<Vec<f64>>>()?;
        let pooled = Spectrum::new(full_mean_spectrum(&spectra));
        let pooled_c = estimate_c(&pooled, DEFAULT_K, DEFAULT_CAP)?.effective_c();
        Ok(RegressionDataset {
            samples,
            t_bar,
            v_hat,
            spectra,
            densities,
            pooled_c,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_bar(&self) -> f64 {
        self.t_bar
    }

    /// Biased (1/N) sample variance of the time points.
    pub fn v_hat(&self) -> f64 {
        self.v_hat
    }

    pub fn graph_size(&self) -> usize {
        self.n
    }

    /// Block count estimated from the pooled mean spectrum.
    pub fn pooled_c(&self) -> usize {
        self.pooled_c
    }

    pub fn samples(&self) -> &[(f64, Graph)] {
        &self.samples
    }

    /// Linear kernel weights at query time t; their mean is 1.
    pub fn regression_weights(&self, t: f64) -> Vec<f64> {
        self.samples
            .iter()
            .map(|(ti, _)| 1.0 + (ti - self.t_bar) * (t - self.t_bar) / self.v_hat)
            .collect()
    }

    /// Weighted average of the top-c spectra: the spectrum-space solution of
    /// the weighted Fréchet problem at time t.
    pub fn weighted_target_spectrum(&self, t: f64, c: usize) -> Result<Vec<f64>> {
        let weights = self.regression_weights(t);
        let wsum: f64 = weights.iter().sum();
        if wsum <= 0.0 {
            return Err(Error::DegenerateWeights { sum: wsum });
        }
        if c == 0 || c > self.n {
            return Err(Error::TruncationOutOfRange { c, n: self.n });
        }
        let mut mean = vec![0.0; c];
        for (s, &w) in self.spectra.iter().zip(&weights) {
            for (m, v) in mean.iter_mut().zip(&s.values()[..c]) {
                *m += w * v;
            }
        }
        for m in &mut mean {
            *m /= wsum;
        }
        Ok(mean)
    }

    /// Weighted average density at query time t.
    pub fn weighted_density(&self, t: f64) -> Result<f64> {
        let weights = self.regression_weights(t);
        let wsum: f64 = weights.iter().sum();
        if wsum <= 0.0 {
            return Err(Error::DegenerateWeights { sum: wsum });
        }
        Ok(self
            .densities
            .iter()
            .zip(&weights)
            .map(|(d, w)| d * w)
            .sum::<f64>()
            / wsum)
    }

    /// Weighted Fréchet-mean fit at query time t. The block count comes from
    /// the pooled estimate unless the config overrides it.
    pub fn fit_regression_point(&self, t: f64, cfg: &FitConfig) -> Result<FitResult> {
        cfg.validate()?;
        let weights = self.regression_weights(t);
        let wsum: f64 = weights.iter().sum();
        if wsum <= 0.0 {
            return Err(Error::DegenerateWeights { sum: wsum });
        }
        let c_star = cfg.c_override.unwrap_or(self.pooled_c);
        let rho_t = self.weighted_density(t)?;
        if !(rho_t > 0.0 && rho_t < 1.0) {
            return Err(Error::DensityOutOfRange { value: rho_t });
        }
        let spectra_c: Vec<Vec<f64>> = self
            .spectra
            .iter()
            .map(|s| Ok(s.truncate(c_star)?.values().to_vec()))
            .collect::<Result<_>>()?;
        run_weighted_fit(self.n, c_star, rho_t, &spectra_c, &weights, cfg)
    }
}

/// Sum of squared truncated distances between the fits at the sample times
/// and the samples. The second entry evaluates the fitted measures through
/// the same predicted spectra, so the pair coincides by construction.
pub fn regression_error(
    ds: &RegressionDataset,
    fits: &[(f64, FitResult)],
) -> Result<(f64, f64)> {
    let e = error_against_fits(ds, fits, |fit| Ok(fit.fitted_spectrum.clone()))?;
    Ok((e, e))
}

/// Like [`regression_error`] but evaluates each fitted measure's mean
/// spectrum by Monte Carlo instead of the root-finder prediction.
pub fn regression_error_with_mc(
    ds: &RegressionDataset,
    fits: &[(f64, FitResult)],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let e = error_against_fits(ds, fits, |fit| Ok(fit.fitted_spectrum.clone()))?;
    let mut mc_spectra = Vec::with_capacity(fits.len());
    for (idx, (_, fit)) in fits.iter().enumerate() {
        let mc = monte_carlo_mean_spectrum(&fit.params, fit.c_star, samples, seed + idx as u64)?;
        mc_spectra.push(mc.mean);
    }
    let mut e_mc = 0.0;
    for (ti, g) in ds.samples() {
        let pos = find_fit(fits, *ti)?;
        let spec = &mc_spectra[pos];
        let observed = g.truncated_spectrum(spec.len())?;
        e_mc += spec
            .iter()
            .zip(observed.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok((e, e_mc))
}

fn find_fit(fits: &[(f64, FitResult)], t: f64) -> Result<usize> {
    fits.iter()
        .position(|(tf, _)| tf.total_cmp(&t).is_eq())
        .ok_or(Error::MissingFit { t })
}

fn error_against_fits(
    ds: &RegressionDataset,
    fits: &[(f64, FitResult)],
    spectrum_of: impl Fn(&FitResult) -> Result<Vec<f64>>,
) -> Result<f64> {
    let mut total = 0.0;
    for (ti, g) in ds.samples() {
        let pos = find_fit(fits, *ti)?;
        let spec = spectrum_of(&fits[pos].1)?;
        let observed = g.truncated_spectrum(spec.len())?;
        total += spec
            .iter()
            .zip(observed.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total)
}
