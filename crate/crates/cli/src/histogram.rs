//! Spectral histogram overlays: averaged per-bin counts of the observed
//! spectra next to the counts of a fitted representative's spectrum on the
//! same bin edges.

use anyhow::{bail, Result};
use graph_frechet::Spectrum;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct HistogramData {
    /// bins + 1 edges; the final bin is closed.
    pub bin_edges: Vec<f64>,
    /// Average counts across the observed spectra; sums to n.
    pub mean_observed: Vec<f64>,
    /// Counts of the fitted spectrum; sums to n.
    pub fitted: Vec<f64>,
}

pub fn emit_histogram(
    spectra: &[Spectrum],
    fitted: &Spectrum,
    bins: usize,
) -> Result<HistogramData> {
    if spectra.is_empty() {
        bail!("no observed spectra");
    }
    if bins < 2 {
        bail!("need at least two bins, got {bins}");
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in spectra.iter().chain(std::iter::once(fitted)) {
        for &v in s.values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        bail!("non-finite spectrum values");
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let bin_of = |v: f64| -> usize {
        let idx = ((v - lo) / width) as usize;
        idx.min(bins - 1)
    };
    let mut mean_observed = vec![0.0; bins];
    for s in spectra {
        for &v in s.values() {
            mean_observed[bin_of(v)] += 1.0;
        }
    }
    for c in &mut mean_observed {
        *c /= spectra.len() as f64;
    }
    let mut fitted_counts = vec![0.0; bins];
    for &v in fitted.values() {
        fitted_counts[bin_of(v)] += 1.0;
    }
    Ok(HistogramData {
        bin_edges,
        mean_observed,
        fitted: fitted_counts,
    })
}

impl HistogramData {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,observed_mean,fitted\n");
        for i in 0..self.mean_observed.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                self.mean_observed[i],
                self.fitted[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_conserved() {
        let s1 = Spectrum::new(vec![3.0, 1.0, -1.0, -3.0]);
        let s2 = Spectrum::new(vec![2.0, 0.5, -0.5, -2.0]);
        let fitted = Spectrum::new(vec![2.5, 0.0, -0.5, -2.5]);
        let h = emit_histogram(&[s1, s2], &fitted, 5).unwrap();
        assert_eq!(h.bin_edges.len(), 6);
        assert!((h.mean_observed.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        assert!((h.fitted.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn identical_inputs_identical_series() {
        let s = Spectrum::new(vec![1.0, 0.0, -1.0]);
        let h = emit_histogram(&[s.clone(), s.clone()], &s, 4).unwrap();
        for (a, b) in h.mean_observed.iter().zip(&h.fitted) {
            assert_eq!(a, b);
        }
        assert!(emit_histogram(&[s.clone()], &s, 1).is_err());
    }
}
