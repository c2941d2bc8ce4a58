//! Estimating the number of communities from a mean spectrum.
//!
//! The mean spectrum is scanned from the top: at step i the i-th entry is
//! taken as the semicircle bulk radius, and the next K entries are compared
//! against the means and standard deviations of the K largest order
//! statistics of n - i i.i.d. semicircle draws. The scan stops at the first
//! i where all K comparisons fall within one standard deviation; the entries
//! above that point are the extremal eigenvalues.

use crate::error::{Error, Result};
use crate::graph::Spectrum;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::sync::OnceLock;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_CAP: usize = 20;
const QUADRATURE_NODES: usize = 2048;

/// Semicircle bulk hypothesis: radius r, sample size m, K order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkModel {
    pub r: f64,
    pub m: usize,
    pub k: usize,
}

impl BulkModel {
    pub fn new(r: f64, m: usize, k: usize) -> Result<Self> {
        if r <= 0.0 {
            return Err(Error::InvalidParams {
                reason: format!("semicircle radius {r} must be positive"),
            });
        }
        if k == 0 || k > m {
            return Err(Error::InvalidParams {
                reason: format!("need 1 <= K <= m, got K = {k}, m = {m}"),
            });
        }
        Ok(BulkModel { r, m, k })
    }
}

/// Semicircle density (2 / (pi r^2)) sqrt(r^2 - x^2) on [-r, r].
pub fn semicircle_pdf(lambda: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::InvalidParams {
            reason: format!("semicircle radius {r} must be positive"),
        });
    }
    if lambda.abs() > r {
        return Ok(0.0);
    }
    Ok(2.0 / (std::f64::consts::PI * r * r) * (r * r - lambda * lambda).sqrt())
}

/// Semicircle distribution function.
pub fn semicircle_cdf(lambda: f64, r: f64) -> f64 {
    let x = (lambda / r).clamp(-1.0, 1.0);
    0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre_nodes(QUADRATURE_NODES))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Mean and standard deviation of the j-th largest of m i.i.d. semicircle
/// draws, by Gauss-Legendre quadrature of the order-statistic density with
/// log-space weights.
pub fn order_statistic_moments(model: &BulkModel, j: usize) -> Result<(f64, f64)> {
    if j == 0 || j > model.k {
        return Err(Error::InvalidParams {
            reason: format!("order statistic index {j} outside 1..={}", model.k),
        });
    }
    let (nodes, weights) = gauss_legendre();
    let r = model.r;
    let m = model.m as f64;
    let jf = j as f64;
    let log_comb = ln_gamma(m + 1.0) - ln_gamma(m - jf + 1.0) - ln_gamma(jf);
    let mut z = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        let lam = x * r;
        let wl = w * r;
        let f = semicircle_cdf(lam, r);
        let s = semicircle_pdf(lam, r)?;
        if s <= 0.0 || f <= 0.0 || (jf > 1.0 && f >= 1.0) {
            continue;
        }
        let log_pdf = log_comb + (m - jf) * f.ln() + (jf - 1.0) * (1.0 - f).ln() + s.ln();
        let g = log_pdf.exp();
        z += wl * g;
        mean += wl * lam * g;
        second += wl * lam * lam * g;
    }
    let defect = (z - 1.0).abs();
    if defect > 1e-6 {
        return Err(Error::QuadratureNonconvergence {
            nodes: QUADRATURE_NODES,
            defect,
        });
    }
    mean /= z;
    second /= z;
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

/// One comparison row of the community scan.
#[derive(Debug, Clone, Serialize)]
pub struct OrderStatComparison {
    pub observed: f64,
    pub expected: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanIteration {
    pub i: usize,
    pub radius: f64,
    pub bulk_size: usize,
    pub comparisons: Vec<OrderStatComparison>,
    pub accepted: bool,
}

/// Result of the community count scan.
#[derive(Debug, Clone, Serialize)]
pub struct CommunityEstimate {
    /// Estimated number of extremal eigenvalues, clamped to [0, cap].
    pub c_star: usize,
    /// Set when the spectrum was exhausted (or the cap reached) before the
    /// bulk test passed.
    pub exhausted: bool,
    pub iterations: Vec<ScanIteration>,
}

impl CommunityEstimate {
    /// Block count for downstream fitting: at least one.
    pub fn effective_c(&self) -> usize {
        self.c_star.max(1)
    }
}

/// Scans a descending mean spectrum for the first index whose trailing
/// values look like semicircle bulk order statistics.
pub fn estimate_c(mean_spectrum: &Spectrum, k: usize, c_cap: usize) -> Result<CommunityEstimate> {
    let lam = mean_spectrum.values();
    let n = lam.len();
    if k == 0 {
        return Err(Error::InvalidParams {
            reason: "K must be at least 1".into(),
        });
    }
    if n < k + 1 {
        return Err(Error::InvalidParams {
            reason: format!("spectrum length {n} too short for K = {k}"),
        });
    }
    let mut iterations = Vec::new();
    let mut i = 1usize;
    loop {
        let r = lam[i - 1];
        if r <= 0.0 {
            return Ok(CommunityEstimate {
                c_star: c_cap,
                exhausted: true,
                iterations,
            });
        }
        let m = n - i;
        let model = BulkModel::new(r, m, k)?;
        let mut comparisons = Vec::with_capacity(k);
        let mut accepted = true;
        for j in 1..=k {
            let (mean, sd) = order_statistic_moments(&model, j)?;
            let observed = lam[i + j - 1];
            if (observed - mean).abs() > sd {
                accepted = false;
            }
            comparisons.push(OrderStatComparison {
                observed,
                expected: mean,
                std_dev: sd,
            });
        }
        iterations.push(ScanIteration {
            i,
            radius: r,
            bulk_size: m,
            comparisons,
            accepted,
        });
        if accepted {
            return Ok(CommunityEstimate {
                c_star: (i - 1).min(c_cap),
                exhausted: false,
                iterations,
            });
        }
        if i - 1 >= c_cap || i + k >= n {
            return Ok(CommunityEstimate {
                c_star: c_cap.min(i),
                exhausted: true,
                iterations,
            });
        }
        i += 1;
    }
}
