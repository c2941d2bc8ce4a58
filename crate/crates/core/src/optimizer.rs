//! Fitting SBM parameters whose expected sample spectrum matches the mean
//! truncated spectrum of a graph dataset.
//!
//! The descent works on the within-block densities p only: the across-block
//! density q is eliminated through the average-density constraint after
//! every candidate step, and the block sizes are fixed to the equal-split
//! layout (one block absorbs the remainder). Gradients are centered
//! differences with q re-solved inside each perturbed evaluation, so the
//! constraint is part of the objective.

use crate::community::{estimate_c, DEFAULT_CAP, DEFAULT_K};
use crate::error::{Error, Result};
use crate::graph::{Graph, Spectrum};
use crate::models::SbmParams;
use crate::spectral::{expected_sample_spectrum, RootFindConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stream id offset separating representative sampling from moment
/// estimation when both derive from the same seed.
const REPRESENTATIVE_STREAM_BASE: u64 = 1 << 32;

/// Hyperparameters of the projected gradient fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Initial gradient step, reset at every iteration.
    pub step_size: f64,
    /// Centered-difference step.
    pub fd_step: f64,
    /// Box margin delta: p stays in [delta, 1 - delta].
    pub box_margin: f64,
    /// Stop when the relative change of (p, q) drops below this.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Fixed block count, skipping the community estimate.
    pub c_override: Option<usize>,
    pub rootfind: RootFindConfig,
    /// Seed for sampling the representative graph.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            step_size: 0.05,
            fd_step: 1e-3,
            box_margin: 1e-4,
            rel_tol: 1e-4,
            max_iter: 500,
            c_override: None,
            rootfind: RootFindConfig::default(),
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_size <= 0.0 || self.fd_step <= 0.0 || self.rel_tol <= 0.0 {
            return Err(Error::InvalidParams {
                reason: "step sizes and tolerances must be positive".into(),
            });
        }
        if !(self.box_margin > 0.0 && self.box_margin < 0.5) {
            return Err(Error::InvalidParams {
                reason: format!("box margin {} outside (0, 0.5)", self.box_margin),
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams {
                reason: "max_iter must be positive".into(),
            });
        }
        self.rootfind.validate()
    }
}

/// One record per descent iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitIteration {
    pub p: Vec<f64>,
    pub q: f64,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step_accepted: bool,
}

pub type FitTrace = Vec<FitIteration>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FitStatus {
    Converged,
    MaxIterations,
    Aborted { reason: String },
}

/// Outcome of a fit: parameters, their predicted top-c spectrum, a sampled
/// representative graph, and the full iteration trace.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: SbmParams,
    pub c_star: usize,
    pub final_objective: f64,
    pub fitted_spectrum: Vec<f64>,
    pub representative: Graph,
    pub trace: FitTrace,
    pub status: FitStatus,
    /// Target average density the constraint was solved against.
    pub rho_bar: f64,
    /// Set when the across-block density had to be clamped into the box.
    pub density_clamped: bool,
}

/// Entrywise average of the top-c spectra of the dataset.
pub fn mean_spectrum(dataset: &[Graph], c: usize) -> Result<Vec<f64>> {
    let spectra = dataset_spectra(dataset)?;
    truncated_mean(&spectra, &vec![1.0; dataset.len()], c)
}

fn dataset_spectra(dataset: &[Graph]) -> Result<Vec<Spectrum>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset[0].n();
    for g in dataset {
        if g.n() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: g.n(),
            });
        }
    }
    Ok(dataset.par_iter().map(|g| g.spectrum()).collect())
}

fn truncated_mean(spectra: &[Spectrum], weights: &[f64], c: usize) -> Result<Vec<f64>> {
    let n = spectra[0].len();
    if c == 0 || c > n {
        return Err(Error::TruncationOutOfRange { c, n });
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::DegenerateWeights { sum: wsum });
    }
    let mut mean = vec![0.0; c];
    for (s, &w) in spectra.iter().zip(weights) {
        for (m, v) in mean.iter_mut().zip(&s.values()[..c]) {
            *m += w * v;
        }
    }
    for m in &mut mean {
        *m /= wsum;
    }
    Ok(mean)
}

/// Equal-split block sizes with the remainder folded into the first block:
/// for n = c w + r, s_1 = (w + r)/n and s_i = w/n for i >= 2.
pub fn build_s_star(n: usize, c: usize) -> Result<Vec<f64>> {
    if c == 0 || c > n {
        return Err(Error::InvalidParams {
            reason: format!("need 1 <= c <= n, got c = {c}, n = {n}"),
        });
    }
    let w = n / c;
    let r = n % c;
    let mut s = vec![w as f64 / n as f64; c];
    s[0] = (w + r) as f64 / n as f64;
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
pub struct QSolution {
    pub q: f64,
    pub clamped: bool,
}

/// Across-block density solving `E[rho | f] = rho_bar` for fixed p, clamped
/// into [margin, 1 - margin] with a flag when the constraint is infeasible.
pub fn solve_q_for_density(
    p: &[f64],
    s: &[f64],
    n: usize,
    rho_bar: f64,
    margin: f64,
) -> Result<QSolution> {
    if p.len() < 2 {
        return Err(Error::QUndefinedForSingleBlock);
    }
    if p.len() != s.len() {
        return Err(Error::InvalidParams {
            reason: format!("p has {} entries but s has {}", p.len(), s.len()),
        });
    }
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Err(Error::DensityOutOfRange { value: rho_bar });
    }
    let blocks = crate::models::BlockStructure::new(s, n);
    let t = n as f64 * (n as f64 - 1.0) / 2.0;
    let mut within = 0.0;
    let mut within_pairs = 0.0;
    for (k, &ct) in blocks.counts.iter().enumerate() {
        let w = ct as f64 * (ct as f64 - 1.0) / 2.0;
        within += w * p[k];
        within_pairs += w;
    }
    let x = t - within_pairs;
    if x <= 0.0 {
        return Err(Error::InvalidParams {
            reason: "no across-block vertex pairs".into(),
        });
    }
    let q = (rho_bar * t - within) / x;
    let clamped = !(q >= margin && q <= 1.0 - margin);
    Ok(QSolution {
        q: q.clamp(margin, 1.0 - margin),
        clamped,
    })
}

/// Weighted objective on precomputed top-c spectra.
pub fn objective_on_spectra(lambda: &[f64], spectra_c: &[Vec<f64>], weights: &[f64]) -> f64 {
    spectra_c
        .iter()
        .zip(weights)
        .map(|(s, &w)| {
            w * lambda
                .iter()
                .zip(s)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum()
}

/// Sum of squared truncated spectral distances between the measure's
/// predicted Frechet-mean spectrum and the dataset.
pub fn objective(params: &SbmParams, dataset: &[Graph], c: usize, cfg: &FitConfig) -> Result<f64> {
    if params.c() != c {
        return Err(Error::InvalidParams {
            reason: format!("params have {} blocks, objective expects {c}", params.c()),
        });
    }
    let spectra = dataset_spectra(dataset)?;
    let spectra_c: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| Ok(s.truncate(c)?.values().to_vec()))
        .collect::<Result<_>>()?;
    let lambda = expected_sample_spectrum(params, &cfg.rootfind)?;
    Ok(objective_on_spectra(
        &lambda,
        &spectra_c,
        &vec![1.0; dataset.len()],
    ))
}

struct Evaluation {
    objective: f64,
    lambda: Vec<f64>,
    q: f64,
    clamped: bool,
}

struct Problem<'a> {
    n: usize,
    c: usize,
    s: Vec<f64>,
    rho_bar: f64,
    spectra_c: &'a [Vec<f64>],
    weights: &'a [f64],
    cfg: &'a FitConfig,
}

impl Problem<'_> {
    fn evaluate(&self, p: &[f64]) -> Result<Evaluation> {
        let (q, clamped) = if self.c == 1 {
            (p[0], false)
        } else {
            let sol = solve_q_for_density(p, &self.s, self.n, self.rho_bar, self.cfg.box_margin)?;
            (sol.q, sol.clamped)
        };
        let params = SbmParams::new(p.to_vec(), q, self.s.clone(), self.n)?;
        let lambda = expected_sample_spectrum(&params, &self.cfg.rootfind)?;
        let objective = objective_on_spectra(&lambda, self.spectra_c, self.weights);
        Ok(Evaluation {
            objective,
            lambda,
            q,
            clamped,
        })
    }

    /// Centered differences on p; the step shrinks near the open (0, 1)
    /// boundary so both perturbed points remain evaluable.
    fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        let per_component: Vec<Result<f64>> = (0..self.c)
            .into_par_iter()
            .map(|k| {
                let h = self.cfg.fd_step.min(p[k] - 1e-6).min(1.0 - 1e-6 - p[k]);
                if h < 1e-8 {
                    return Err(Error::GradientEvaluation {
                        component: k,
                        reason: format!("no room for a centered step at p[{k}] = {}", p[k]),
                    });
                }
                let mut plus = p.to_vec();
                plus[k] += h;
                let mut minus = p.to_vec();
                minus[k] -= h;
                let op = self.evaluate(&plus).map_err(|e| Error::GradientEvaluation {
                    component: k,
                    reason: e.to_string(),
                })?;
                let om = self.evaluate(&minus).map_err(|e| Error::GradientEvaluation {
                    component: k,
                    reason: e.to_string(),
                })?;
                Ok((op.objective - om.objective) / (2.0 * h))
            })
            .collect();
        per_component.into_iter().collect()
    }
}

/// Centered-difference gradient of the constrained objective at `params`,
/// with the across-block density re-solved inside every perturbed
/// evaluation.
pub fn gradient_estimate(
    params: &SbmParams,
    dataset: &[Graph],
    c: usize,
    cfg: &FitConfig,
) -> Result<Vec<f64>> {
    if params.c() != c {
        return Err(Error::InvalidParams {
            reason: format!("params have {} blocks, gradient expects {c}", params.c()),
        });
    }
    cfg.validate()?;
    let spectra = dataset_spectra(dataset)?;
    let spectra_c: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| Ok(s.truncate(c)?.values().to_vec()))
        .collect::<Result<_>>()?;
    let weights = vec![1.0; dataset.len()];
    let rho_bar = mean_density(dataset)?;
    let problem = Problem {
        n: params.n,
        c,
        s: params.s.clone(),
        rho_bar,
        spectra_c: &spectra_c,
        weights: &weights,
        cfg,
    };
    problem.gradient(&params.p)
}

pub fn mean_density(dataset: &[Graph]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut acc = 0.0;
    for g in dataset {
        acc += g.density()?;
    }
    Ok(acc / dataset.len() as f64)
}

/// The dataset element minimising the summed squared truncated distance to
/// the rest of the dataset; ties break to the lowest index.
pub fn sample_frechet_statistic(dataset: &[Graph], c: usize) -> Result<(usize, Graph)> {
    let spectra = dataset_spectra(dataset)?;
    let spectra_c: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| Ok(s.truncate(c)?.values().to_vec()))
        .collect::<Result<_>>()?;
    let idx = medoid_index(&spectra_c);
    Ok((idx, dataset[idx].clone()))
}

fn medoid_index(spectra_c: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, si) in spectra_c.iter().enumerate() {
        let cost: f64 = spectra_c
            .iter()
            .map(|sj| {
                si.iter()
                    .zip(sj)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best = i;
        }
    }
    best
}

/// Fits the SBM whose Frechet mean approximates the empirical Frechet mean
/// of the dataset under the truncated pseudometric.
pub fn fit_frechet_mean(dataset: &[Graph], cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let spectra = dataset_spectra(dataset)?;
    let n = dataset[0].n();
    let rho_bar = mean_density(dataset)?;
    let c_star = match cfg.c_override {
        Some(c) => c,
        None => {
            let full_mean = Spectrum::new(full_mean_spectrum(&spectra));
            estimate_c(&full_mean, DEFAULT_K, DEFAULT_CAP)?.effective_c()
        }
    };
    let weights = vec![1.0; dataset.len()];
    let spectra_c: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| Ok(s.truncate(c_star)?.values().to_vec()))
        .collect::<Result<_>>()?;
    run_weighted_fit(n, c_star, rho_bar, &spectra_c, &weights, cfg)
}

/// Entrywise average of full spectra.
pub fn full_mean_spectrum(spectra: &[Spectrum]) -> Vec<f64> {
    let n = spectra[0].len();
    let mut mean = vec![0.0; n];
    for s in spectra {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= spectra.len() as f64;
    }
    mean
}

/// Shared descent core for the unweighted and regression-weighted fits.
pub(crate) fn run_weighted_fit(
    n: usize,
    c_star: usize,
    rho_bar: f64,
    spectra_c: &[Vec<f64>],
    weights: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult> {
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Err(Error::DensityOutOfRange { value: rho_bar });
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::DegenerateWeights { sum: wsum });
    }
    let s = build_s_star(n, c_star)?;
    let margin = cfg.box_margin;
    let problem = Problem {
        n,
        c: c_star,
        s: s.clone(),
        rho_bar,
        spectra_c,
        weights,
        cfg,
    };

    let mut trace: FitTrace = Vec::new();
    let mut status = FitStatus::Converged;

    // a single block is pinned by the density constraint
    if c_star == 1 {
        let p = vec![rho_bar.clamp(margin, 1.0 - margin)];
        let eval = problem.evaluate(&p)?;
        trace.push(FitIteration {
            p: p.clone(),
            q: eval.q,
            objective: eval.objective,
            gradient_norm: 0.0,
            step_accepted: false,
        });
        return finish_fit(
            n, c_star, rho_bar, &s, &p, eval, trace, status, cfg, weights,
        );
    }

    let p0 = (2.0 * rho_bar).clamp(margin, 1.0 - margin);
    let mut p = vec![p0; c_star];
    let mut current = problem.evaluate(&p)?;
    for _ in 0..cfg.max_iter {
        let gradient = match problem.gradient(&p) {
            Ok(g) => g,
            Err(e) => {
                status = FitStatus::Aborted {
                    reason: e.to_string(),
                };
                break;
            }
        };
        let gradient_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut alpha = cfg.step_size;
        let mut accepted: Option<(Vec<f64>, Evaluation)> = None;
        let mut root_failure: Option<String> = None;
        for _ in 0..=20 {
            let candidate: Vec<f64> = p
                .iter()
                .zip(&gradient)
                .map(|(pk, gk)| (pk - alpha * gk).clamp(margin, 1.0 - margin))
                .collect();
            match problem.evaluate(&candidate) {
                Ok(eval) if eval.objective <= current.objective => {
                    accepted = Some((candidate, eval));
                    break;
                }
                Ok(_) => {}
                // candidates whose extremal eigenvalues the root finder
                // cannot bracket are rejected like an objective increase
                Err(e) => root_failure = Some(e.to_string()),
            }
            alpha *= 0.5;
        }
        trace.push(FitIteration {
            p: p.clone(),
            q: current.q,
            objective: current.objective,
            gradient_norm,
            step_accepted: accepted.is_some(),
        });
        match accepted {
            Some((p_new, eval)) => {
                let delta_p: f64 = p_new
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let delta_q = (eval.q - current.q).abs();
                let scale = p.iter().map(|v| v * v).sum::<f64>().sqrt() + current.q.abs();
                p = p_new;
                current = eval;
                if (delta_p + delta_q) / scale < cfg.rel_tol {
                    status = FitStatus::Converged;
                    break;
                }
                status = FitStatus::MaxIterations;
            }
            None => {
                status = match root_failure {
                    Some(reason) => FitStatus::Aborted { reason },
                    None => FitStatus::Converged,
                };
                break;
            }
        }
    }
    finish_fit(
        n, c_star, rho_bar, &s, &p, current, trace, status, cfg, weights,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish_fit(
    n: usize,
    c_star: usize,
    rho_bar: f64,
    s: &[f64],
    p: &[f64],
    eval: Evaluation,
    trace: FitTrace,
    status: FitStatus,
    cfg: &FitConfig,
    weights: &[f64],
) -> Result<FitResult> {
    let params = SbmParams::new(p.to_vec(), eval.q, s.to_vec(), n)?;
    let representative = representative_sample(&params, c_star, weights.len().max(1), cfg.seed)?;
    Ok(FitResult {
        params,
        c_star,
        final_objective: eval.objective,
        fitted_spectrum: eval.lambda,
        representative,
        trace,
        status,
        rho_bar,
        density_clamped: eval.clamped,
    })
}

/// Realises the finite-sample statistic for the fitted measure: draws
/// `count` graphs and returns the medoid under the truncated pseudometric.
fn representative_sample(
    params: &SbmParams,
    c: usize,
    count: usize,
    seed: u64,
) -> Result<Graph> {
    let graphs: Vec<Graph> = (0..count)
        .into_par_iter()
        .map(|j| {
            let mut rng = crate::models::stream_rng(seed, REPRESENTATIVE_STREAM_BASE + j as u64);
            sample_with_rng(params, &mut rng)
        })
        .collect();
    let spectra_c: Vec<Vec<f64>> = graphs
        .par_iter()
        .map(|g| g.truncated_spectrum(c).map(|s| s.values().to_vec()))
        .collect::<Result<_>>()?;
    Ok(graphs[medoid_index(&spectra_c)].clone())
}

fn sample_with_rng(params: &SbmParams, rng: &mut rand_chacha::ChaCha8Rng) -> Graph {
    use rand::Rng;
    let blocks = params.blocks();
    let n = params.n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>()
                < params.kernel_block(blocks.membership[i], blocks.membership[j])
            {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Graph::new(n, edges).expect("sampler produces a valid simple graph")
}
