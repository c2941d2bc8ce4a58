//! Spectra of expected adjacency matrices and prediction of the expected
//! sample spectrum.
//!
//! For a block-constant kernel on the grid, the expected adjacency matrix
//! `F = E[A]` decomposes exactly: block-constant vectors reduce it to a
//! c x c problem while zero-sum vectors inside block k are eigenvectors with
//! eigenvalue `-p_k`. The top-c expected eigenvalues of a *sampled* adjacency
//! matrix are then located as roots of the resolvent-series equation
//! `f_k(z) = 1 + lambda_E(k) R(v_k, v_k, z) = 0`, with moments of
//! `W = A - E[A]` supplying the series coefficients. The second moment is
//! analytic; higher moments come from seeded Monte Carlo.

use crate::error::{Error, Result};
use crate::graph::Spectrum;
use crate::models::{stream_rng, KernelGrid, SbmParams, MAX_BLOCKS};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Settings for the expected-eigenvalue root finder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootFindConfig {
    /// Highest moment order in the resolvent series (2..=6).
    pub l_max: usize,
    /// Bracket width factor, in (0, 1).
    pub c0: f64,
    /// Monte Carlo samples for moments of order >= 3.
    pub mc_moment_samples: usize,
    /// Tolerance on |f_k(z)|.
    pub tol: f64,
    pub max_iter: usize,
    /// Use the eigenvector-coupling correction instead of the asymptotic form.
    pub full_correction: bool,
    /// Base seed for moment estimation.
    pub moment_seed: u64,
}

impl Default for RootFindConfig {
    fn default() -> Self {
        RootFindConfig {
            l_max: 4,
            c0: 0.5,
            mc_moment_samples: 50,
            tol: 1e-8,
            max_iter: 100,
            full_correction: false,
            moment_seed: 0,
        }
    }
}

impl RootFindConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=6).contains(&self.l_max) {
            return Err(Error::InvalidParams {
                reason: format!("l_max = {} outside 2..=6", self.l_max),
            });
        }
        if !(self.c0 > 0.0 && self.c0 <= 1.0) {
            return Err(Error::InvalidParams {
                reason: format!("c0 = {} outside (0, 1]", self.c0),
            });
        }
        if self.l_max >= 3 && self.mc_moment_samples == 0 {
            return Err(Error::InvalidParams {
                reason: "moment estimation needs at least one sample".into(),
            });
        }
        if self.tol <= 0.0 || self.max_iter == 0 {
            return Err(Error::InvalidParams {
                reason: "tolerance and iteration budget must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Spectral summary of an SBM measure.
#[derive(Debug, Clone)]
pub struct ExpectedSpectra {
    /// Spectrum of the deterministic matrix E[A], all n entries.
    pub lambda_e: Spectrum,
    /// Predicted top-c entries of E[sigma(A)].
    pub lambda_super_e: Vec<f64>,
    /// Nonzero spectrum of the limit integral operator, length c.
    pub operator_spectrum: Vec<f64>,
}

/// Exact eigendecomposition data of E[A] restricted to what the root finder
/// needs: all n eigenvalues plus orthonormal eigenvectors for the top c.
struct GridEigensystem {
    /// All n eigenvalues, descending.
    all: Vec<f64>,
    /// Top-c eigenvalues.
    top_values: Vec<f64>,
    /// n x c matrix of the matching orthonormal eigenvectors.
    top_vectors: DMatrix<f64>,
}

fn grid_eigensystem(params: &SbmParams, c_top: usize) -> Result<GridEigensystem> {
    let n = params.n;
    if c_top == 0 || c_top > n {
        return Err(Error::TruncationOutOfRange { c: c_top, n });
    }
    let blocks = params.blocks();
    let nonempty: Vec<usize> = (0..params.c()).filter(|&k| blocks.counts[k] > 0).collect();
    let cs = nonempty.len();
    // symmetrised reduced matrix over nonempty blocks
    let mut reduced = DMatrix::zeros(cs, cs);
    for (a, &k) in nonempty.iter().enumerate() {
        for (b, &l) in nonempty.iter().enumerate() {
            let scale = ((blocks.counts[k] * blocks.counts[l]) as f64).sqrt();
            reduced[(a, b)] = scale * params.kernel_block(k, l);
        }
        reduced[(a, a)] -= params.p[k];
    }
    let eig = SymmetricEigen::new(reduced);

    enum Vector {
        Structural(usize),
        // j-th orthonormal zero-sum vector inside a block
        Bulk { block: usize, j: usize },
    }
    let mut candidates: Vec<(f64, Vector)> = Vec::with_capacity(n);
    for i in 0..cs {
        candidates.push((eig.eigenvalues[i], Vector::Structural(i)));
    }
    for &k in &nonempty {
        for j in 1..blocks.counts[k] {
            candidates.push((-params.p[k], Vector::Bulk { block: k, j }));
        }
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalue"));
    let all: Vec<f64> = candidates.iter().map(|(v, _)| *v).collect();

    let mut top_vectors = DMatrix::zeros(n, c_top);
    let mut block_starts = vec![0usize; params.c()];
    {
        let mut seen = vec![0usize; params.c()];
        for (i, &b) in blocks.membership.iter().enumerate() {
            if seen[b] == 0 {
                block_starts[b] = i;
            }
            seen[b] += 1;
        }
    }
    // vertices of each block in grid order
    let mut block_vertices: Vec<Vec<usize>> = vec![Vec::new(); params.c()];
    for (i, &b) in blocks.membership.iter().enumerate() {
        block_vertices[b].push(i);
    }
    for (col, (_, vector)) in candidates.iter().take(c_top).enumerate() {
        match *vector {
            Vector::Structural(idx) => {
                for (a, &k) in nonempty.iter().enumerate() {
                    let coeff = eig.eigenvectors[(a, idx)] / (blocks.counts[k] as f64).sqrt();
                    for &v in &block_vertices[k] {
                        top_vectors[(v, col)] = coeff;
                    }
                }
            }
            Vector::Bulk { block, j } => {
                // Helmert vector: (e_0 + .. + e_{j-1} - j e_j) / sqrt(j(j+1))
                let verts = &block_vertices[block];
                let norm = (j as f64 * (j as f64 + 1.0)).sqrt();
                for &v in verts.iter().take(j) {
                    top_vectors[(v, col)] = 1.0 / norm;
                }
                top_vectors[(verts[j], col)] = -(j as f64) / norm;
            }
        }
    }
    Ok(GridEigensystem {
        all,
        top_values: candidates.iter().take(c_top).map(|(v, _)| *v).collect(),
        top_vectors,
    })
}

/// Spectrum of the expected adjacency matrix, all n eigenvalues descending.
/// Computed through the exact block reduction.
pub fn expected_adjacency_spectrum(params: &SbmParams) -> Result<Spectrum> {
    params.validate(MAX_BLOCKS)?;
    let sys = grid_eigensystem(params, 1)?;
    Ok(Spectrum::new(sys.all))
}

/// Nonzero eigenvalues of the limit integral operator for a block-constant
/// kernel, via the exact c x c reduction with the relative block sizes.
pub fn operator_spectrum(params: &SbmParams) -> Result<Vec<f64>> {
    params.validate(MAX_BLOCKS)?;
    let c = params.c();
    let mut m = DMatrix::zeros(c, c);
    for k in 0..c {
        for l in 0..c {
            m[(k, l)] = (params.s[k] * params.s[l]).sqrt() * params.kernel_block(k, l);
        }
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Quadratic-form moment matrices `M_l[i, j] = v_i^T E[W^l] v_j` for the
/// top-c eigenvectors. Index 1 is unused.
pub(crate) struct MomentMatrices {
    pub mats: Vec<DMatrix<f64>>,
    pub l_max: usize,
}

fn block_row_sums(params: &SbmParams, membership: &[usize], y: &DMatrix<f64>) -> DMatrix<f64> {
    // F y where F is the kernel grid with zero diagonal, in O(n c^2)
    let c_cols = y.ncols();
    let c = params.c();
    let n = params.n;
    let mut sums: DMatrix<f64> = DMatrix::zeros(c, c_cols);
    for i in 0..n {
        let b = membership[i];
        for col in 0..c_cols {
            sums[(b, col)] += y[(i, col)];
        }
    }
    let mut out: DMatrix<f64> = DMatrix::zeros(n, c_cols);
    for i in 0..n {
        let bi = membership[i];
        for col in 0..c_cols {
            let mut acc = 0.0;
            for l in 0..c {
                acc += params.kernel_block(bi, l) * sums[(l, col)];
            }
            out[(i, col)] = acc - params.kernel_block(bi, bi) * y[(i, col)];
        }
    }
    out
}

fn sample_edge_list(params: &SbmParams, membership: &[usize], rng: &mut impl Rng) -> Vec<(u32, u32)> {
    let n = params.n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < params.kernel_block(membership[i], membership[j]) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges
}

fn adjacency_times(edges: &[(u32, u32)], v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(v.nrows(), v.ncols());
    for &(i, j) in edges {
        let (i, j) = (i as usize, j as usize);
        for col in 0..v.ncols() {
            out[(i, col)] += v[(j, col)];
            out[(j, col)] += v[(i, col)];
        }
    }
    out
}

fn compute_moments(
    params: &SbmParams,
    sys: &GridEigensystem,
    cfg: &RootFindConfig,
) -> MomentMatrices {
    let c_top = sys.top_values.len();
    let blocks = params.blocks();
    let mut mats = vec![DMatrix::zeros(c_top, c_top); cfg.l_max + 1];
    // M0 = V^T V (identity for orthonormal vectors, kept for generality)
    mats[0] = sys.top_vectors.transpose() * &sys.top_vectors;
    // analytic second moment: E[W^2] is diagonal with
    // d_i = sum_{j != i} f_ij (1 - f_ij)
    if cfg.l_max >= 2 {
        let c = params.c();
        let mut d_block = vec![0.0; c];
        for k in 0..c {
            let mut acc = 0.0;
            for l in 0..c {
                let f = params.kernel_block(k, l);
                acc += blocks.counts[l] as f64 * f * (1.0 - f);
            }
            let fkk = params.kernel_block(k, k);
            d_block[k] = acc - fkk * (1.0 - fkk);
        }
        let mut m2 = DMatrix::zeros(c_top, c_top);
        for i in 0..params.n {
            let d = d_block[blocks.membership[i]];
            for a in 0..c_top {
                for b in 0..c_top {
                    m2[(a, b)] += d * sys.top_vectors[(i, a)] * sys.top_vectors[(i, b)];
                }
            }
        }
        mats[2] = m2;
    }
    if cfg.l_max >= 3 {
        let depth = cfg.l_max.div_ceil(2);
        let per_sample: Vec<Vec<DMatrix<f64>>> = (0..cfg.mc_moment_samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng = stream_rng(cfg.moment_seed, idx as u64);
                let edges = sample_edge_list(params, &blocks.membership, &mut rng);
                // Y_1 = W V = A V - V diag(lambda)
                let mut powers: Vec<DMatrix<f64>> = Vec::with_capacity(depth);
                let mut y = adjacency_times(&edges, &sys.top_vectors);
                for col in 0..c_top {
                    let lam = sys.top_values[col];
                    for i in 0..params.n {
                        y[(i, col)] -= lam * sys.top_vectors[(i, col)];
                    }
                }
                powers.push(y);
                for _ in 1..depth {
                    let prev = powers.last().unwrap();
                    let next =
                        adjacency_times(&edges, prev) - block_row_sums(params, &blocks.membership, prev);
                    powers.push(next);
                }
                (3..=cfg.l_max)
                    .map(|l| {
                        let a = l / 2;
                        let b = l - a;
                        powers[a - 1].transpose() * &powers[b - 1]
                    })
                    .collect()
            })
            .collect();
        for sample in per_sample {
            for (off, m) in sample.into_iter().enumerate() {
                mats[3 + off] += m;
            }
        }
        let scale = 1.0 / cfg.mc_moment_samples as f64;
        for l in 3..=cfg.l_max {
            mats[l] *= scale;
            // enforce exact symmetry of the quadratic forms
            let sym = (&mats[l] + mats[l].transpose()) * 0.5;
            mats[l] = sym;
        }
    }
    MomentMatrices {
        mats,
        l_max: cfg.l_max,
    }
}

/// `R(v_a, v_b, z) = -sum_{l in {0, 2..L}} z^{-(l+1)} M_l[a, b]`.
fn resolvent_entry(moments: &MomentMatrices, a: usize, b: usize, z: f64) -> f64 {
    let mut acc = -moments.mats[0][(a, b)] / z;
    for l in 2..=moments.l_max {
        acc -= moments.mats[l][(a, b)] / z.powi(l as i32 + 1);
    }
    acc
}

fn resolvent_entry_derivative(moments: &MomentMatrices, a: usize, b: usize, z: f64) -> f64 {
    let mut acc = moments.mats[0][(a, b)] / (z * z);
    for l in 2..=moments.l_max {
        acc += (l as f64 + 1.0) * moments.mats[l][(a, b)] / z.powi(l as i32 + 2);
    }
    acc
}

pub(crate) fn solve_extremal_root(
    k: usize,
    lambda_e: &[f64],
    moments: &MomentMatrices,
    cfg: &RootFindConfig,
) -> Result<f64> {
    let lam = lambda_e[k];
    if lam.abs() < 1e-10 {
        return Err(Error::DegenerateEigenvalue {
            index: k,
            value: lam,
        });
    }
    let factor = 1.0 + cfg.c0 / 2.0;
    let (a, b) = if lam > 0.0 {
        (lam / factor, lam * factor)
    } else {
        (lam * factor, lam / factor)
    };
    let c_top = lambda_e.len();
    let others: Vec<usize> = (0..c_top).filter(|&j| j != k).collect();
    let f = |z: f64| -> f64 {
        let r_kk = resolvent_entry(moments, k, k, z);
        if cfg.full_correction && !others.is_empty() {
            let m = others.len();
            let mut inner = DMatrix::zeros(m, m);
            for (ai, &oa) in others.iter().enumerate() {
                for (bi, &ob) in others.iter().enumerate() {
                    inner[(ai, bi)] = resolvent_entry(moments, oa, ob, z);
                }
                inner[(ai, ai)] += 1.0 / lambda_e[oa];
            }
            let mut corr = 0.0;
            if let Some(inv) = inner.try_inverse() {
                let row = DMatrix::from_fn(1, m, |_, bi| resolvent_entry(moments, k, others[bi], z));
                let col = DMatrix::from_fn(m, 1, |ai, _| resolvent_entry(moments, others[ai], k, z));
                corr = (&row * inv * col)[(0, 0)];
            }
            1.0 + lam * (r_kk - corr)
        } else {
            1.0 + lam * r_kk
        }
    };
    let df = |z: f64| -> f64 {
        if cfg.full_correction && c_top > 1 {
            let h = 1e-7 * z.abs().max(1.0);
            (f(z + h) - f(z - h)) / (2.0 * h)
        } else {
            lam * resolvent_entry_derivative(moments, k, k, z)
        }
    };

    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            index: k,
            a,
            b,
            fa,
            fb,
        });
    }
    let (mut lo, mut hi, mut flo) = (a, b, fa);
    let mut z = 0.5 * (a + b);
    for _ in 0..cfg.max_iter {
        let fz = f(z);
        if fz.abs() < cfg.tol {
            return Ok(z);
        }
        if fz.signum() == flo.signum() {
            lo = z;
            flo = fz;
        } else {
            hi = z;
        }
        let dz = df(z);
        let mut znew = if dz != 0.0 { z - fz / dz } else { f64::NAN };
        let (lo_b, hi_b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        if !znew.is_finite() || znew <= lo_b || znew >= hi_b {
            znew = 0.5 * (lo + hi);
        }
        z = znew;
    }
    Err(Error::NoConvergence {
        index: k,
        iterations: cfg.max_iter,
    })
}

/// Predicted top-c entries of the expected sample spectrum E[sigma(A)],
/// c being the number of blocks.
pub fn expected_sample_spectrum(params: &SbmParams, cfg: &RootFindConfig) -> Result<Vec<f64>> {
    params.validate(MAX_BLOCKS)?;
    cfg.validate()?;
    let c = params.c().min(params.n);
    let sys = grid_eigensystem(params, c)?;
    let moments = compute_moments(params, &sys, cfg);
    (0..c)
        .map(|k| solve_extremal_root(k, &sys.top_values, &moments, cfg))
        .collect()
}

/// All three spectral summaries of a measure in one struct.
pub fn expected_spectra(params: &SbmParams, cfg: &RootFindConfig) -> Result<ExpectedSpectra> {
    Ok(ExpectedSpectra {
        lambda_e: expected_adjacency_spectrum(params)?,
        lambda_super_e: expected_sample_spectrum(params, cfg)?,
        operator_spectrum: operator_spectrum(params)?,
    })
}

/// Per-index mean and standard error of top-c eigenvalues over independent
/// draws; the Monte Carlo oracle for the expected sample spectrum.
#[derive(Debug, Clone)]
pub struct MeanSpectrum {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

pub fn monte_carlo_mean_spectrum(
    params: &SbmParams,
    c: usize,
    samples: usize,
    seed: u64,
) -> Result<MeanSpectrum> {
    params.validate(MAX_BLOCKS)?;
    if samples < 2 {
        return Err(Error::InvalidParams {
            reason: "need at least two samples".into(),
        });
    }
    if c == 0 || c > params.n {
        return Err(Error::TruncationOutOfRange { c, n: params.n });
    }
    let blocks = params.blocks();
    let tops: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(seed, idx as u64);
            let edges = sample_edge_list(params, &blocks.membership, &mut rng);
            let mut a = DMatrix::zeros(params.n, params.n);
            for &(i, j) in &edges {
                a[(i as usize, j as usize)] = 1.0;
                a[(j as usize, i as usize)] = 1.0;
            }
            Spectrum::from_matrix(&a).values()[..c].to_vec()
        })
        .collect();
    let mut mean = vec![0.0; c];
    for t in &tops {
        for (m, v) in mean.iter_mut().zip(t) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= samples as f64;
    }
    let mut var = vec![0.0; c];
    for t in &tops {
        for (k, v) in t.iter().enumerate() {
            var[k] += (v - mean[k]) * (v - mean[k]);
        }
    }
    let std_error = var
        .iter()
        .map(|v| (v / (samples as f64 - 1.0)).sqrt() / (samples as f64).sqrt())
        .collect();
    Ok(MeanSpectrum {
        mean,
        std_error,
        samples,
    })
}

/// Checks that every eigenvalue of H + A lies within the operator norm of A
/// of some eigenvalue of H.
pub fn weyl_perturbation_bound_check(h: &DMatrix<f64>, a: &DMatrix<f64>) -> bool {
    assert_eq!(h.nrows(), h.ncols());
    assert_eq!(h.shape(), a.shape());
    let norm_a = a
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let base = h.clone().symmetric_eigenvalues();
    let shifted = (h + a).symmetric_eigenvalues();
    let slack = 1e-9 * (1.0 + norm_a + base.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
    shifted.iter().all(|&lam| {
        base.iter()
            .any(|&mu| (lam - mu).abs() <= norm_a + slack)
    })
}

/// Grid-discretised kernel distance and the l2 gap between the spectra of
/// the discretised operators.
pub fn kernel_spectrum_closeness_check(f1: &KernelGrid, f2: &KernelGrid) -> Result<(f64, f64)> {
    if f1.n() != f2.n() {
        return Err(Error::SizeMismatch {
            left: f1.n(),
            right: f2.n(),
        });
    }
    let n = f1.n() as f64;
    let diff = f1.values() - f2.values();
    let kernel_gap = diff.norm() / n;
    let s1 = Spectrum::from_matrix(&(f1.values() / n));
    let s2 = Spectrum::from_matrix(&(f2.values() / n));
    let spectrum_gap = s1.l2_distance(&s2)?;
    Ok((kernel_gap, spectrum_gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn er_params(n: usize, p: f64) -> SbmParams {
        SbmParams::new(vec![p], p, vec![1.0], n).unwrap()
    }

    #[test]
    fn expected_spectrum_single_block() {
        // E[A] = p (J - I): eigenvalues p(n-1) and -p
        let params = er_params(6, 0.3);
        let s = expected_adjacency_spectrum(&params).unwrap();
        assert_abs_diff_eq!(s.values()[0], 0.3 * 5.0, epsilon = 1e-12);
        for &v in &s.values()[1..] {
            assert_abs_diff_eq!(v, -0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_spectrum_two_equal_blocks_vs_dense() {
        let params = SbmParams::new(vec![0.6, 0.6], 0.2, vec![0.5, 0.5], 4).unwrap();
        let reduced = expected_adjacency_spectrum(&params).unwrap();
        let dense = Spectrum::from_matrix(
            crate::models::expected_adjacency(&params).unwrap().values(),
        );
        for (r, d) in reduced.values().iter().zip(dense.values()) {
            assert_abs_diff_eq!(r, d, epsilon = 1e-9);
        }
        // hand eigensolve: within-block rows sum to 0.6, across 0.4;
        // top eigenvalue (2x2 block form) = s(p + q) - p with s = 2
        assert_abs_diff_eq!(reduced.values()[0], 2.0 * (0.6 + 0.2) - 0.6, epsilon = 1e-9);
    }

    #[test]
    fn expected_spectrum_matches_dense_random_params() {
        let cases = [
            SbmParams::new(vec![0.3, 0.5, 0.7], 0.1, vec![0.3, 0.3, 0.4], 31).unwrap(),
            SbmParams::new(vec![0.8, 0.2], 0.4, vec![0.7, 0.3], 24).unwrap(),
        ];
        for params in cases {
            let reduced = expected_adjacency_spectrum(&params).unwrap();
            let dense = Spectrum::from_matrix(
                crate::models::expected_adjacency(&params).unwrap().values(),
            );
            for (r, d) in reduced.values().iter().zip(dense.values()) {
                assert_abs_diff_eq!(r, d, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn exactly_c_separated_eigenvalues() {
        // block-constant kernels put all but c eigenvalues in the {-p_k} cluster
        let params = SbmParams::new(vec![0.4, 0.6, 0.3], 0.1, vec![0.4, 0.3, 0.3], 60).unwrap();
        let s = expected_adjacency_spectrum(&params).unwrap();
        let cluster_max = 0.6;
        let outside = s
            .values()
            .iter()
            .filter(|&&v| v > cluster_max || v < -cluster_max - 1e-9)
            .count();
        assert_eq!(outside, 3);
    }

    #[test]
    fn operator_spectrum_closed_forms() {
        let er = er_params(10, 0.37);
        assert_abs_diff_eq!(operator_spectrum(&er).unwrap()[0], 0.37, epsilon = 1e-12);
        let two = SbmParams::new(vec![0.5, 0.5], 0.2, vec![0.5, 0.5], 10).unwrap();
        let spec = operator_spectrum(&two).unwrap();
        assert_abs_diff_eq!(spec[0], (0.5 + 0.2) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec[1], (0.5 - 0.2) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_spectrum_scale_equivariance() {
        let base = SbmParams::new(vec![0.5, 0.3], 0.1, vec![0.6, 0.4], 10).unwrap();
        let alpha = 0.37;
        let scaled = SbmParams::new(
            base.p.iter().map(|p| p * alpha).collect(),
            base.q * alpha,
            base.s.clone(),
            base.n,
        )
        .unwrap();
        let s1 = operator_spectrum(&base).unwrap();
        let s2 = operator_spectrum(&scaled).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert_abs_diff_eq!(a * alpha, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn hilbert_schmidt_identity() {
        // sum of squared operator eigenvalues equals the kernel L2 norm
        let params = SbmParams::new(vec![0.5, 0.3, 0.8], 0.12, vec![0.2, 0.45, 0.35], 10).unwrap();
        let spec = operator_spectrum(&params).unwrap();
        let lhs: f64 = spec.iter().map(|v| v * v).sum();
        let mut rhs = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                rhs += params.s[k] * params.s[l] * params.kernel_block(k, l).powi(2);
            }
        }
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn zero_fluctuation_root_is_lambda_e() {
        // with all W-moments zero, f_k(z) = 1 - lambda/z has root lambda
        let lambda_e = vec![7.5, -2.25];
        let mut cfg = RootFindConfig::default();
        cfg.tol = 1e-12;
        let mut mats = vec![DMatrix::zeros(2, 2); 5];
        mats[0] = DMatrix::identity(2, 2);
        let moments = MomentMatrices { mats, l_max: 4 };
        for k in 0..2 {
            let root = solve_extremal_root(k, &lambda_e, &moments, &cfg).unwrap();
            assert_abs_diff_eq!(root, lambda_e[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn root_stays_in_bracket_and_degenerate_errors() {
        let params = SbmParams::new(vec![0.3], 0.3, vec![1.0], 120).unwrap();
        let cfg = RootFindConfig {
            mc_moment_samples: 10,
            ..Default::default()
        };
        let pred = expected_sample_spectrum(&params, &cfg).unwrap();
        let lam = 0.3 * 119.0;
        assert!(pred[0] >= lam / 1.25 && pred[0] <= lam * 1.25);
        // prediction exceeds lambda_E by roughly (1 - p)
        assert!(pred[0] > lam);

        let mut mats = vec![DMatrix::zeros(1, 1); 5];
        mats[0] = DMatrix::identity(1, 1);
        let moments = MomentMatrices { mats, l_max: 4 };
        assert!(matches!(
            solve_extremal_root(0, &[0.0], &moments, &RootFindConfig::default()),
            Err(Error::DegenerateEigenvalue { .. })
        ));
    }

    #[test]
    fn no_sign_change_reports_bracket() {
        // huge second moment pushes the root far outside a narrow bracket
        let mut mats = vec![DMatrix::zeros(1, 1); 5];
        mats[0] = DMatrix::identity(1, 1);
        mats[2] = DMatrix::from_element(1, 1, 1e6);
        let moments = MomentMatrices { mats, l_max: 4 };
        let err = solve_extremal_root(0, &[5.0], &moments, &RootFindConfig::default()).unwrap_err();
        match err {
            Error::NoSignChange { a, b, .. } => {
                assert!(a < b);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_agrees_with_prediction_small() {
        let params = er_params(150, 0.2);
        let cfg = RootFindConfig::default();
        let pred = expected_sample_spectrum(&params, &cfg).unwrap();
        let mc = monte_carlo_mean_spectrum(&params, 1, 60, 17).unwrap();
        let z = (pred[0] - mc.mean[0]).abs() / mc.std_error[0];
        assert!(z < 4.0, "z = {z}, pred {} mc {}", pred[0], mc.mean[0]);
    }

    #[test]
    fn full_correction_close_to_asymptotic_when_separated() {
        let params = SbmParams::new(vec![0.5, 0.25], 0.08, vec![0.5, 0.5], 150).unwrap();
        let base = RootFindConfig {
            mc_moment_samples: 20,
            ..Default::default()
        };
        let full = RootFindConfig {
            full_correction: true,
            ..base.clone()
        };
        let a = expected_sample_spectrum(&params, &base).unwrap();
        let b = expected_sample_spectrum(&params, &full).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 0.2, "asymptotic {x} vs full {y}");
        }
    }

    #[test]
    fn weyl_bound_cases() {
        let h = DMatrix::from_fn(6, 6, |i, j| if i == j { i as f64 } else { 0.3 });
        let h = (&h + h.transpose()) * 0.5;
        let zero = DMatrix::zeros(6, 6);
        assert!(weyl_perturbation_bound_check(&h, &zero));
        let eps = 0.37;
        let shift = DMatrix::identity(6, 6) * eps;
        assert!(weyl_perturbation_bound_check(&h, &shift));
    }

    #[test]
    fn kernel_closeness_basic() {
        let p1 = er_params(40, 0.3);
        let g1 = crate::models::expected_adjacency(&p1).unwrap();
        let (kg, sg) = kernel_spectrum_closeness_check(&g1, &g1).unwrap();
        assert_abs_diff_eq!(kg, 0.0);
        assert_abs_diff_eq!(sg, 0.0);
        // rank-one constant kernels p vs p + delta: both gaps delta-proportional
        let delta = 0.05;
        let a = KernelGrid::from_fn(40, |_, _| 0.3);
        let b = KernelGrid::from_fn(40, |_, _| 0.3 + delta);
        let (kg, sg) = kernel_spectrum_closeness_check(&a, &b).unwrap();
        assert_abs_diff_eq!(kg, delta, epsilon = 1e-12);
        // spectra of the constant kernels: one eigenvalue p, rest zero
        assert_abs_diff_eq!(sg, delta, epsilon = 1e-9);
    }

    #[test]
    fn rootfind_config_json_round_trip() {
        let text = r#"{"l_max":4,"c0":0.5,"mc_moment_samples":50,"tol":1e-8,"max_iter":100,"full_correction":false}"#;
        let cfg: RootFindConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.l_max, 4);
        assert_eq!(cfg.moment_seed, 0);
        let back: RootFindConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
