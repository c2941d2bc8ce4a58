//! Kernel probability measures on the equispaced grid and graph samplers.
//!
//! Vertices map to grid points `xi_i = i/n` (0-based). A stochastic block
//! model is parameterised by within-block densities `p`, across-block
//! density `q`, and relative block sizes `s`; its canonical kernel is
//! piecewise constant over the half-open blocks of `[0, 1]` (the final block
//! is closed at 1).
//!
//! All samplers are deterministic per seed. The Bernoulli samplers visit
//! vertex pairs `(i, j)`, `i < j`, in lexicographic order and consume one
//! `f64` per pair from a ChaCha8 stream; seed splitting for independent
//! samples goes through [`stream_rng`].

use crate::error::{Error, Result};
use crate::graph::Graph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap on the number of blocks.
pub const MAX_BLOCKS: usize = 20;

/// Stochastic block model parameters (p, q, s, n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub p: Vec<f64>,
    pub q: f64,
    pub s: Vec<f64>,
    pub n: usize,
}

impl SbmParams {
    pub fn new(p: Vec<f64>, q: f64, s: Vec<f64>, n: usize) -> Result<Self> {
        let params = SbmParams { p, q, s, n };
        params.validate(MAX_BLOCKS)?;
        Ok(params)
    }

    pub fn validate(&self, cap: usize) -> Result<()> {
        let c = self.p.len();
        if c == 0 {
            return Err(Error::InvalidParams {
                reason: "at least one block required".into(),
            });
        }
        if c > cap {
            return Err(Error::InvalidParams {
                reason: format!("{c} blocks exceeds cap {cap}"),
            });
        }
        if self.s.len() != c {
            return Err(Error::InvalidParams {
                reason: format!("p has {c} entries but s has {}", self.s.len()),
            });
        }
        if self.n == 0 {
            return Err(Error::InvalidParams {
                reason: "graph size must be positive".into(),
            });
        }
        for (k, &pk) in self.p.iter().enumerate() {
            if !(pk > 0.0 && pk < 1.0) {
                return Err(Error::InvalidParams {
                    reason: format!("p[{k}] = {pk} outside (0, 1)"),
                });
            }
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParams {
                reason: format!("q = {} outside (0, 1)", self.q),
            });
        }
        let mut sum = 0.0;
        for (k, &sk) in self.s.iter().enumerate() {
            if !(sk > 0.0 && sk <= 1.0) {
                return Err(Error::InvalidParams {
                    reason: format!("s[{k}] = {sk} outside (0, 1]"),
                });
            }
            sum += sk;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams {
                reason: format!("block sizes sum to {sum}, expected 1"),
            });
        }
        Ok(())
    }

    /// Number of blocks c.
    pub fn c(&self) -> usize {
        self.p.len()
    }

    /// Kernel value for a pair of blocks.
    pub fn kernel_block(&self, k: usize, l: usize) -> f64 {
        if k == l {
            self.p[k]
        } else {
            self.q
        }
    }

    /// Block layout induced on the grid `xi_i = i/n`.
    pub fn blocks(&self) -> BlockStructure {
        BlockStructure::new(&self.s, self.n)
    }

    /// Expected edge density of the measure on the grid,
    /// `sum_{i>j} f(xi_i, xi_j) / (n(n-1)/2)`, computed from pair counts.
    pub fn expected_density(&self) -> f64 {
        let blocks = self.blocks();
        let t = self.n as f64 * (self.n as f64 - 1.0) / 2.0;
        let mut within = 0.0;
        let mut within_pairs = 0.0;
        for (k, &ct) in blocks.counts.iter().enumerate() {
            let w = ct as f64 * (ct as f64 - 1.0) / 2.0;
            within += w * self.p[k];
            within_pairs += w;
        }
        (within + (t - within_pairs) * self.q) / t
    }
}

/// Partition of the grid points into blocks.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    /// Cumulative sums of s.
    pub boundaries: Vec<f64>,
    /// Block of each vertex.
    pub membership: Vec<usize>,
    /// Vertices per block.
    pub counts: Vec<usize>,
}

impl BlockStructure {
    pub fn new(s: &[f64], n: usize) -> Self {
        let mut boundaries = Vec::with_capacity(s.len());
        let mut acc = 0.0;
        for &sk in s {
            acc += sk;
            boundaries.push(acc);
        }
        let mut membership = Vec::with_capacity(n);
        let mut counts = vec![0usize; s.len()];
        for i in 0..n {
            let xi = i as f64 / n as f64;
            let b = block_of(&boundaries, xi);
            membership.push(b);
            counts[b] += 1;
        }
        BlockStructure {
            boundaries,
            membership,
            counts,
        }
    }
}

/// Index of the half-open interval `[cum_{k-1}, cum_k)` containing `x`; the
/// final block is closed at 1.
fn block_of(boundaries: &[f64], x: f64) -> usize {
    let idx = boundaries.partition_point(|&b| x >= b);
    idx.min(boundaries.len() - 1)
}

/// Canonical SBM kernel evaluated at a point of the unit square.
pub fn sbm_kernel_eval(params: &SbmParams, x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::KernelArgOutOfRange { value: v });
        }
    }
    let mut boundaries = Vec::with_capacity(params.s.len());
    let mut acc = 0.0;
    for &sk in &params.s {
        acc += sk;
        boundaries.push(acc);
    }
    let bx = block_of(&boundaries, x);
    let by = block_of(&boundaries, y);
    Ok(params.kernel_block(bx, by))
}

/// Kernel values tabulated on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    values: DMatrix<f64>,
}

impl KernelGrid {
    /// Wraps a symmetric matrix of kernel values.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::InvalidParams {
                reason: "kernel grid must be square".into(),
            });
        }
        for i in 0..values.nrows() {
            for j in (i + 1)..values.ncols() {
                if (values[(i, j)] - values[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidParams {
                        reason: format!("kernel grid not symmetric at ({i}, {j})"),
                    });
                }
            }
        }
        Ok(KernelGrid { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = DMatrix::from_fn(n, n, |i, j| {
            let (xi, xj) = (i as f64 / n as f64, j as f64 / n as f64);
            0.5 * (f(xi, xj) + f(xj, xi))
        });
        KernelGrid { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Expected adjacency matrix: kernel on the grid with a zeroed diagonal.
pub fn expected_adjacency(params: &SbmParams) -> Result<KernelGrid> {
    params.validate(MAX_BLOCKS)?;
    if params.n < 2 {
        return Err(Error::InvalidParams {
            reason: "expected adjacency needs n >= 2".into(),
        });
    }
    let blocks = params.blocks();
    let n = params.n;
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[(i, j)] = params.kernel_block(blocks.membership[i], blocks.membership[j]);
            }
        }
    }
    Ok(KernelGrid { values })
}

/// ChaCha8 generator for sample `stream` of a base seed. Independent samples
/// use the same seed with distinct stream ids.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn bernoulli_graph(n: usize, prob: impl Fn(usize, usize) -> f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < prob(i, j) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Graph::new(n, edges).expect("sampler produces a valid simple graph")
}

/// Samples an SBM realisation.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> Result<Graph> {
    params.validate(MAX_BLOCKS)?;
    let blocks = params.blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(bernoulli_graph(
        params.n,
        |i, j| params.kernel_block(blocks.membership[i], blocks.membership[j]),
        &mut rng,
    ))
}

/// Samples G(n, p).
pub fn sample_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParams {
            reason: "graph size must be positive".into(),
        });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams {
            reason: format!("p = {p} outside (0, 1)"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(bernoulli_graph(n, |_, _| p, &mut rng))
}

/// Watts-Strogatz small world: ring lattice with K nearest neighbours, each
/// clockwise edge rewired with probability beta to a uniformly chosen
/// non-adjacent target. Edge count is exactly nK/2.
pub fn sample_small_world(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph> {
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(Error::InvalidParams {
            reason: format!("K = {k} must be even and in (0, n)"),
        });
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParams {
            reason: format!("beta = {beta} outside [0, 1]"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![std::collections::BTreeSet::new(); n];
    for i in 0..n {
        for step in 1..=(k / 2) {
            let j = (i + step) % n;
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    // rewire the original clockwise lattice edges in construction order
    for i in 0..n {
        for step in 1..=(k / 2) {
            let j = (i + step) % n;
            if rng.random::<f64>() >= beta {
                continue;
            }
            if !adj[i].contains(&j) {
                continue;
            }
            let candidates: Vec<usize> = (0..n)
                .filter(|&v| v != i && !adj[i].contains(&v))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let target = candidates[rng.random_range(0..candidates.len())];
            adj[i].remove(&j);
            adj[j].remove(&i);
            adj[i].insert(target);
            adj[target].insert(i);
        }
    }
    let mut edges = Vec::with_capacity(n * k / 2);
    for (i, neigh) in adj.iter().enumerate() {
        for &j in neigh.range(i + 1..) {
            edges.push((i as u32, j as u32));
        }
    }
    Graph::new(n, edges)
}

/// Barabasi-Albert preferential attachment: a complete seed on m0 vertices,
/// then each new vertex attaches to m distinct existing vertices sampled
/// proportionally to degree (repeated-node list, resampling duplicates).
pub fn sample_barabasi_albert(n: usize, m0: usize, m: usize, seed: u64) -> Result<Graph> {
    if m0 == 0 || m == 0 || m > m0 || m0 > n {
        return Err(Error::InvalidParams {
            reason: format!("need 1 <= m <= m0 <= n, got m = {m}, m0 = {m0}, n = {n}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut repeated: Vec<u32> = Vec::new();
    for i in 0..m0 as u32 {
        for j in (i + 1)..m0 as u32 {
            edges.push((i, j));
        }
        repeated.extend(std::iter::repeat(i).take(m0 - 1));
    }
    for v in m0 as u32..n as u32 {
        let mut targets: Vec<u32> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = repeated[rng.random_range(0..repeated.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            repeated.push(t);
            repeated.push(v);
        }
    }
    Graph::new(n, edges)
}

/// Model description as found in dataset manifests and experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelConfig {
    Sbm {
        n: usize,
        p: Vec<f64>,
        q: f64,
        s: Vec<f64>,
        seed: u64,
    },
    Er {
        n: usize,
        p: f64,
        seed: u64,
    },
    Ws {
        n: usize,
        k: usize,
        beta: f64,
        seed: u64,
    },
    Ba {
        n: usize,
        m0: usize,
        m: usize,
        seed: u64,
    },
}

impl ModelConfig {
    pub fn n(&self) -> usize {
        match *self {
            ModelConfig::Sbm { n, .. }
            | ModelConfig::Er { n, .. }
            | ModelConfig::Ws { n, .. }
            | ModelConfig::Ba { n, .. } => n,
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            ModelConfig::Sbm { seed, .. }
            | ModelConfig::Er { seed, .. }
            | ModelConfig::Ws { seed, .. }
            | ModelConfig::Ba { seed, .. } => seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            ModelConfig::Sbm { seed, .. }
            | ModelConfig::Er { seed, .. }
            | ModelConfig::Ws { seed, .. }
            | ModelConfig::Ba { seed, .. } => *seed = new_seed,
        }
        self
    }

    pub fn sample(&self) -> Result<Graph> {
        match self {
            ModelConfig::Sbm { n, p, q, s, seed } => {
                sample_sbm(&SbmParams::new(p.clone(), *q, s.clone(), *n)?, *seed)
            }
            ModelConfig::Er { n, p, seed } => sample_erdos_renyi(*n, *p, *seed),
            ModelConfig::Ws { n, k, beta, seed } => sample_small_world(*n, *k, *beta, *seed),
            ModelConfig::Ba { n, m0, m, seed } => sample_barabasi_albert(*n, *m0, *m, *seed),
        }
    }
}
