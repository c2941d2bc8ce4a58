//! Undirected simple graphs, adjacency spectra, and the adjacency spectral
//! pseudometrics.
//!
//! A [`Graph`] stores a canonical edge list (lexicographically sorted pairs
//! `(i, j)` with `i < j`). Spectra are computed with a dense symmetric
//! eigendecomposition and sorted in signed descending order.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Undirected simple graph on `n` labelled vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges may be given in any order and
    /// orientation; they are normalised to `i < j` and sorted. Self-loops,
    /// duplicates, and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph {
                reason: "vertex count must be positive".into(),
            });
        }
        let mut list: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph {
                    reason: format!("self-loop at vertex {a}"),
                });
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidGraph {
                    reason: format!("edge ({a}, {b}) outside vertex range 0..{n}"),
                });
            }
            list.push(if a < b { (a, b) } else { (b, a) });
        }
        list.sort_unstable();
        if list.windows(2).any(|w| w[0] == w[1]) {
            let dup = list.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
            return Err(Error::InvalidGraph {
                reason: format!("duplicate edge ({}, {})", dup.0, dup.1),
            });
        }
        Ok(Graph { n, edges: list })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                edges.push((i, j));
            }
        }
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges m.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list: lexicographically sorted, `i < j`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Edge density 2m / (n(n-1)).
    pub fn density(&self) -> Result<f64> {
        if self.n <= 1 {
            return Err(Error::DensityUndefined { n: self.n });
        }
        Ok(2.0 * self.edges.len() as f64 / (self.n as f64 * (self.n as f64 - 1.0)))
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i as usize, j as usize)] = 1.0;
            a[(j as usize, i as usize)] = 1.0;
        }
        a
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        deg
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`. `perm` must be a
    /// permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n {
            return Err(Error::InvalidGraph {
                reason: format!("permutation length {} != n {}", perm.len(), self.n),
            });
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(Error::InvalidGraph {
                    reason: "not a permutation".into(),
                });
            }
            seen[p] = true;
        }
        Graph::new(
            self.n,
            self.edges
                .iter()
                .map(|&(i, j)| (perm[i as usize] as u32, perm[j as usize] as u32)),
        )
    }

    /// All n adjacency eigenvalues, descending.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_matrix(&self.adjacency_matrix())
    }

    /// The c largest adjacency eigenvalues, descending.
    pub fn truncated_spectrum(&self, c: usize) -> Result<Spectrum> {
        self.spectrum().truncate(c)
    }
}

/// Real eigenvalue vector sorted in signed descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts `values` descending (stable, so exact ties keep their order).
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).expect("non-finite eigenvalue"));
        Spectrum { values }
    }

    /// Eigenvalues of a dense symmetric matrix, descending.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Spectrum::new(m.clone().symmetric_eigenvalues().as_slice().to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First `c` entries.
    pub fn truncate(&self, c: usize) -> Result<Spectrum> {
        if c == 0 || c > self.values.len() {
            return Err(Error::TruncationOutOfRange {
                c,
                n: self.values.len(),
            });
        }
        Ok(Spectrum {
            values: self.values[..c].to_vec(),
        })
    }

    /// l2 distance between two spectra of equal length.
    pub fn l2_distance(&self, other: &Spectrum) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Adjacency spectral pseudometric: l2 norm between full spectra.
pub fn d_a(g1: &Graph, g2: &Graph) -> Result<f64> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    g1.spectrum().l2_distance(&g2.spectrum())
}

/// Truncated adjacency spectral pseudometric over the top-c eigenvalues.
pub fn d_ac(g1: &Graph, g2: &Graph, c: usize) -> Result<f64> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    g1.truncated_spectrum(c)?
        .l2_distance(&g2.truncated_spectrum(c)?)
}

/// Density threshold ln^3(n)/n below which a graph does not qualify as
/// sparse-regime for the approximation machinery.
pub fn sparsity_threshold(n: usize) -> f64 {
    let ln = (n as f64).ln();
    ln * ln * ln / n as f64
}

/// Whether the edge density clears `kappa * ln^3(n)/n`.
pub fn is_sparse(g: &Graph, kappa: f64) -> Result<bool> {
    Ok(g.density()? >= kappa * sparsity_threshold(g.n()))
}

pub mod io {
    //! Text and JSON graph formats.
    //!
    //! Edge-list text: first line `n m`, then m lines `i j` with 0-based ids
    //! and `i < j`. JSON: `{"n": .., "edges": [[i, j], ..]}`. Writers emit
    //! the canonical sorted edge order, so write/parse round-trips are
    //! byte-stable.

    use super::Graph;
    use crate::error::{Error, Result};
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    struct GraphJson {
        n: usize,
        edges: Vec<(u32, u32)>,
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::GraphFormat {
            line: Some(1),
            reason: "missing header line".into(),
        })?;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), 1, "n")?;
        let m: usize = parse_field(parts.next(), 1, "m")?;
        if parts.next().is_some() {
            return Err(Error::GraphFormat {
                line: Some(1),
                reason: "expected exactly two header fields".into(),
            });
        }
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let i: u32 = parse_field(parts.next(), lineno, "i")?;
            let j: u32 = parse_field(parts.next(), lineno, "j")?;
            if parts.next().is_some() {
                return Err(Error::GraphFormat {
                    line: Some(lineno),
                    reason: "expected exactly two fields".into(),
                });
            }
            if i >= j {
                return Err(Error::GraphFormat {
                    line: Some(lineno),
                    reason: if i == j {
                        format!("self-loop {i} {j}")
                    } else {
                        format!("expected i < j, got {i} {j}")
                    },
                });
            }
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(Error::GraphFormat {
                line: None,
                reason: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, edges).map_err(|e| Error::GraphFormat {
            line: None,
            reason: e.to_string(),
        })
    }

    fn parse_field<T: std::str::FromStr>(
        field: Option<&str>,
        line: usize,
        name: &str,
    ) -> Result<T> {
        field
            .ok_or_else(|| Error::GraphFormat {
                line: Some(line),
                reason: format!("missing field {name}"),
            })?
            .parse()
            .map_err(|_| Error::GraphFormat {
                line: Some(line),
                reason: format!("cannot parse field {name}"),
            })
    }

    pub fn write_edge_list(g: &Graph) -> String {
        let mut out = format!("{} {}\n", g.n(), g.edge_count());
        for &(i, j) in g.edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn parse_json(text: &str) -> Result<Graph> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| Error::GraphFormat {
            line: None,
            reason: e.to_string(),
        })?;
        for &(i, j) in &raw.edges {
            if i >= j {
                return Err(Error::GraphFormat {
                    line: None,
                    reason: if i == j {
                        format!("self-loop {i} {j}")
                    } else {
                        format!("expected i < j, got {i} {j}")
                    },
                });
            }
        }
        Graph::new(raw.n, raw.edges).map_err(|e| Error::GraphFormat {
            line: None,
            reason: e.to_string(),
        })
    }

    pub fn write_json(g: &Graph) -> String {
        serde_json::to_string(&GraphJson {
            n: g.n(),
            edges: g.edges().to_vec(),
        })
        .expect("graph serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-9;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn spectrum_empty_graph() {
        let s = Graph::empty(3).unwrap().spectrum();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn spectrum_complete_k4() {
        let s = Graph::complete(4).unwrap().spectrum();
        let expect = [3.0, -1.0, -1.0, -1.0];
        for (v, e) in s.values().iter().zip(expect) {
            assert_abs_diff_eq!(v, &e, epsilon = TOL);
        }
    }

    #[test]
    fn spectrum_path3() {
        // roots of the characteristic polynomial lambda^3 - 2 lambda
        let s = path3().spectrum();
        let r = 2.0f64.sqrt();
        assert_abs_diff_eq!(s.values()[0], r, epsilon = TOL);
        assert_abs_diff_eq!(s.values()[1], 0.0, epsilon = TOL);
        assert_abs_diff_eq!(s.values()[2], -r, epsilon = TOL);
    }

    #[test]
    fn truncation() {
        let k4 = Graph::complete(4).unwrap();
        let t = k4.truncated_spectrum(1).unwrap();
        assert_abs_diff_eq!(t.values()[0], 3.0, epsilon = TOL);
        // c = n is the identity
        assert_eq!(
            k4.truncated_spectrum(4).unwrap().values(),
            k4.spectrum().values()
        );
        assert!(k4.truncated_spectrum(5).is_err());
        assert!(k4.truncated_spectrum(0).is_err());
    }

    #[test]
    fn distance_reflexive_and_k3_vs_empty() {
        let k3 = Graph::complete(3).unwrap();
        let e3 = Graph::empty(3).unwrap();
        assert_abs_diff_eq!(d_a(&k3, &k3).unwrap(), 0.0, epsilon = TOL);
        // spectra [2,-1,-1] vs [0,0,0]
        assert_abs_diff_eq!(d_a(&k3, &e3).unwrap(), 6.0f64.sqrt(), epsilon = TOL);
        assert_abs_diff_eq!(d_ac(&k3, &e3, 1).unwrap(), 2.0, epsilon = TOL);
        assert_abs_diff_eq!(
            d_ac(&k3, &e3, 3).unwrap(),
            d_a(&k3, &e3).unwrap(),
            epsilon = TOL
        );
    }

    #[test]
    fn distance_size_mismatch() {
        let k3 = Graph::complete(3).unwrap();
        let k4 = Graph::complete(4).unwrap();
        assert!(matches!(d_a(&k3, &k4), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn permutation_leaves_distance_zero() {
        let g = Graph::new(5, [(0, 1), (0, 4), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let p = g.permuted(&[2, 0, 4, 1, 3]).unwrap();
        assert!(d_a(&g, &p).unwrap() < TOL);
    }

    #[test]
    fn density_and_sparsity() {
        assert_abs_diff_eq!(
            Graph::complete(4).unwrap().density().unwrap(),
            1.0,
            epsilon = 0.0
        );
        assert_abs_diff_eq!(
            Graph::empty(4).unwrap().density().unwrap(),
            0.0,
            epsilon = 0.0
        );
        assert!(!is_sparse(&Graph::empty(4).unwrap(), 1.0).unwrap());
        assert!(matches!(
            Graph::empty(1).unwrap().density(),
            Err(Error::DensityUndefined { n: 1 })
        ));
        // recorded fixture: ln^3(600)/600
        assert_abs_diff_eq!(sparsity_threshold(600), 0.43627816167124006, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_trace_and_energy() {
        let g = Graph::new(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap();
        let s = g.spectrum();
        let trace: f64 = s.values().iter().sum();
        let energy: f64 = s.values().iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(trace, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(energy, 2.0 * g.edge_count() as f64, epsilon = 1e-9);
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new(4, [(2, 3), (0, 1), (0, 3)]).unwrap();
        let text = io::write_edge_list(&g);
        assert_eq!(text, "4 3\n0 1\n0 3\n2 3\n");
        assert_eq!(io::parse_edge_list(&text).unwrap(), g);
        let json = io::write_json(&g);
        assert_eq!(io::parse_json(&json).unwrap(), g);
        assert_eq!(io::write_json(&io::parse_json(&json).unwrap()), json);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = io::parse_edge_list("3 1\n0 0\n").unwrap_err();
        match err {
            Error::GraphFormat { line, reason } => {
                assert_eq!(line, Some(2));
                assert!(reason.contains("self-loop"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(io::parse_edge_list("3 2\n0 1\n").is_err());
        assert!(io::parse_edge_list("").is_err());
    }

    #[test]
    fn truncated_distance_monotone_in_c() {
        let g1 = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let g2 = Graph::new(5, [(0, 2), (1, 4), (0, 3)]).unwrap();
        let mut prev = 0.0;
        for c in 1..=5 {
            let d = d_ac(&g1, &g2, c).unwrap();
            assert!(d >= prev - 1e-12);
            prev = d;
        }
    }
}
