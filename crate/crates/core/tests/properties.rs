//! Property suites for graphs, pseudometrics, and samplers.

use graph_frechet::graph::io;
use graph_frechet::models::stream_rng;
use graph_frechet::{
    d_a, d_ac, sample_barabasi_albert, sample_erdos_renyi, sample_sbm, Graph, SbmParams,
};
use proptest::prelude::*;
use rand::Rng;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2usize..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
            .collect();
        let m = pairs.len();
        (Just(n), Just(pairs), prop::collection::vec(any::<bool>(), m))
    })
    .prop_map(|(n, pairs, mask)| {
        let edges = pairs
            .into_iter()
            .zip(mask)
            .filter_map(|(e, keep)| keep.then_some(e));
        Graph::new(n, edges).unwrap()
    })
}

proptest! {
    #[test]
    fn pseudometric_axioms(
        (g1, g2, g3) in (2usize..=12).prop_flat_map(|n| {
            let g = move || {
                let pairs: Vec<(u32, u32)> = (0..n as u32)
                    .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
                    .collect();
                let m = pairs.len();
                prop::collection::vec(any::<bool>(), m).prop_map(move |mask| {
                    Graph::new(
                        n,
                        pairs.iter().zip(mask).filter_map(|(e, keep)| keep.then_some(*e)),
                    )
                    .unwrap()
                })
            };
            (g(), g(), g())
        })
    ) {
        let d12 = d_a(&g1, &g2).unwrap();
        let d21 = d_a(&g2, &g1).unwrap();
        prop_assert_eq!(d12, d21);
        prop_assert_eq!(d_a(&g1, &g1).unwrap(), 0.0);
        let d13 = d_a(&g1, &g3).unwrap();
        let d23 = d_a(&g2, &g3).unwrap();
        prop_assert!(d13 <= d12 + d23 + 1e-9);
    }

    #[test]
    fn truncated_distance_monotone_and_caps_at_full(
        (g1, g2) in (2usize..=12).prop_flat_map(|n| {
            let g = move || {
                let pairs: Vec<(u32, u32)> = (0..n as u32)
                    .flat_map(|i| ((i + 1)..n as u32).map(move |j| (i, j)))
                    .collect();
                let m = pairs.len();
                prop::collection::vec(any::<bool>(), m).prop_map(move |mask| {
                    Graph::new(
                        n,
                        pairs.iter().zip(mask).filter_map(|(e, keep)| keep.then_some(*e)),
                    )
                    .unwrap()
                })
            };
            (g(), g())
        })
    ) {
        let n = g1.n();
        let full = d_a(&g1, &g2).unwrap();
        let mut prev = 0.0;
        for c in 1..=n {
            let d = d_ac(&g1, &g2, c).unwrap();
            prop_assert!(d + 1e-12 >= prev);
            prev = d;
        }
        prop_assert!((prev - full).abs() < 1e-9);
    }

    #[test]
    fn graph_io_round_trips(g in arb_graph(14)) {
        let text = io::write_edge_list(&g);
        prop_assert_eq!(io::parse_edge_list(&text).unwrap(), g.clone());
        prop_assert_eq!(io::write_edge_list(&io::parse_edge_list(&text).unwrap()), text);
        let json = io::write_json(&g);
        prop_assert_eq!(io::parse_json(&json).unwrap(), g);
    }

    #[test]
    fn spectrum_identities(g in arb_graph(14)) {
        let s = g.spectrum();
        let trace: f64 = s.values().iter().sum();
        let energy: f64 = s.values().iter().map(|v| v * v).sum();
        prop_assert!(trace.abs() < 1e-8);
        prop_assert!((energy - 2.0 * g.edge_count() as f64).abs() < 1e-8);
    }
}

#[test]
fn permutation_invariance_many_permutations() {
    let params = SbmParams::new(vec![0.5, 0.2], 0.1, vec![0.5, 0.5], 24).unwrap();
    let g = sample_sbm(&params, 3).unwrap();
    let mut rng = stream_rng(99, 0);
    for _ in 0..100 {
        let mut perm: Vec<usize> = (0..g.n()).collect();
        // Fisher-Yates
        for i in (1..perm.len()).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let permuted = g.permuted(&perm).unwrap();
        assert!(d_a(&g, &permuted).unwrap() <= 1e-9);
    }
}

#[test]
fn er_and_single_block_sbm_rates_agree() {
    // pinned-seed Monte Carlo: per-pair empirical rates of the two samplers
    // stay within 3 two-sample CLT standard errors over 600 draws
    let n = 20;
    let p = 0.3;
    let samples = 600;
    let params = SbmParams::new(vec![p], p, vec![1.0], n).unwrap();
    let mut er_counts = vec![0u32; n * n];
    let mut sbm_counts = vec![0u32; n * n];
    for i in 0..samples {
        let er = sample_erdos_renyi(n, p, 10_000 + i).unwrap();
        let sb = sample_sbm(&params, 20_000 + i).unwrap();
        for &(a, b) in er.edges() {
            er_counts[a as usize * n + b as usize] += 1;
        }
        for &(a, b) in sb.edges() {
            sbm_counts[a as usize * n + b as usize] += 1;
        }
    }
    let se = (2.0 * p * (1.0 - p) / samples as f64).sqrt();
    for i in 0..n {
        for j in (i + 1)..n {
            let ra = er_counts[i * n + j] as f64 / samples as f64;
            let rb = sbm_counts[i * n + j] as f64 / samples as f64;
            assert!(
                (ra - rb).abs() <= 3.0 * se,
                "pair ({i},{j}): er {ra} vs sbm {rb} (3se = {})",
                3.0 * se
            );
        }
    }
}

#[test]
fn er_degree_distribution_binomial_moments() {
    // aggregate mean and variance of degrees against Binomial(n-1, p)
    let n = 40;
    let p = 0.2;
    let samples = 400;
    let mut all_degrees = Vec::with_capacity(n * samples);
    for i in 0..samples {
        let g = sample_erdos_renyi(n, p, 31_000 + i as u64).unwrap();
        all_degrees.extend(g.degrees().into_iter().map(|d| d as f64));
    }
    let count = all_degrees.len() as f64;
    let mean: f64 = all_degrees.iter().sum::<f64>() / count;
    let var: f64 = all_degrees.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / count;
    let expect_mean = (n as f64 - 1.0) * p;
    let expect_var = (n as f64 - 1.0) * p * (1.0 - p);
    assert!((mean - expect_mean).abs() < 0.05, "degree mean {mean}");
    assert!((var / expect_var - 1.0).abs() < 0.15, "degree var {var}");
}

#[test]
fn sbm_block_rates_match_kernel() {
    // empirical within/across block rates vs (p, q) over 500 samples
    let params = SbmParams::new(vec![0.35, 0.15], 0.08, vec![0.5, 0.5], 30).unwrap();
    let blocks = params.blocks();
    let samples = 500;
    let mut within = [0u64; 2];
    let mut within_pairs = [0u64; 2];
    let mut across = 0u64;
    let mut across_pairs = 0u64;
    for i in 0..samples {
        let g = sample_sbm(&params, 50_000 + i).unwrap();
        let mut adj = vec![false; 30 * 30];
        for &(a, b) in g.edges() {
            adj[a as usize * 30 + b as usize] = true;
        }
        for a in 0..30 {
            for b in (a + 1)..30 {
                let (ba, bb) = (blocks.membership[a], blocks.membership[b]);
                let hit = adj[a * 30 + b] as u64;
                if ba == bb {
                    within[ba] += hit;
                    within_pairs[ba] += 1;
                } else {
                    across += hit;
                    across_pairs += 1;
                }
            }
        }
    }
    for k in 0..2 {
        let rate = within[k] as f64 / within_pairs[k] as f64;
        let se = (params.p[k] * (1.0 - params.p[k]) / within_pairs[k] as f64).sqrt();
        assert!(
            (rate - params.p[k]).abs() <= 3.0 * se,
            "block {k} rate {rate} vs p {}",
            params.p[k]
        );
    }
    let rate = across as f64 / across_pairs as f64;
    let se = (params.q * (1.0 - params.q) / across_pairs as f64).sqrt();
    assert!((rate - params.q).abs() <= 3.0 * se, "across rate {rate}");
}

#[test]
fn barabasi_albert_paper_scale_edge_count() {
    let g = sample_barabasi_albert(600, 5, 5, 7).unwrap();
    assert_eq!(g.edge_count(), 10 + 595 * 5);
    assert_eq!(g.n(), 600);
}
