//! Walk networks built from simulated trajectories.

use std::f64::consts::FRAC_PI_4;

use eqw_core::netmap::{assortativity, average_path_length};
use eqw_core::{
    build_graph, degree_stats, graph_timeseries, run_trajectory, structural_stats, CoinFamily,
    CoinParams, RunConfig, TrajectoryRecord, WalkGraph,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THRESHOLD: f64 = 1e-9;

fn record(q: f64, family: CoinFamily, t_max: usize, index: usize) -> TrajectoryRecord {
    let mut c = RunConfig::new(q, CoinParams::new(family, FRAC_PI_4))
        .t_max(t_max)
        .seed(17);
    c.keep_distributions = true;
    run_trajectory(&c, index).unwrap()
}

#[test]
fn standard_walk_builds_a_path_segment() {
    for family in [CoinFamily::H, CoinFamily::K] {
        let g = build_graph(&record(0.5, family, 15, 0), THRESHOLD).unwrap();
        assert!(g.edges().iter().all(|e| (e.a - e.b).abs() == 1));
        let mut sites = g.sites().to_vec();
        sites.sort_unstable();
        assert_eq!(sites, (-15..=15).collect::<Vec<i64>>());
        assert_eq!(g.edge_count(), 30);
    }
}

#[test]
fn two_step_standard_walk_is_bipartite() {
    let mut rec = record(0.5, CoinFamily::H, 2, 0);
    rec.jumps.truncate(2);
    let g = build_graph(&rec, THRESHOLD).unwrap();
    assert!(g.edges().iter().all(|e| (e.a - e.b).rem_euclid(2) == 1));
    assert!(g.has_edge(-2, -1) && g.has_edge(1, 2));
    assert_eq!(g.vertex_created(2), Some(2));
    assert_eq!(g.vertex_created(0), Some(0));
}

#[test]
fn every_edge_spans_its_step_jump() {
    for q in [1.0, 1.5, 1e6] {
        let rec = record(q, CoinFamily::K, 60, 2);
        let g = build_graph(&rec, THRESHOLD).unwrap();
        for e in g.edges() {
            assert_eq!(
                (e.a - e.b).unsigned_abs() as usize,
                rec.jumps[e.t_created - 1]
            );
        }
        let n = g.vertex_count();
        assert!(g.edge_count() <= n * (n - 1) / 2);
    }
}

#[test]
fn rebuilding_adds_nothing() {
    let rec = record(1.5, CoinFamily::H, 80, 1);
    let mut g = build_graph(&rec, THRESHOLD).unwrap();
    let (v, e) = (g.vertex_count(), g.edge_count());
    let d = rec.distributions.as_ref().unwrap();
    for (s, &dx) in rec.jumps.iter().enumerate() {
        g.grow(&d[s], &d[s + 1], dx, s + 1, THRESHOLD);
    }
    assert_eq!((g.vertex_count(), g.edge_count()), (v, e));
    assert_eq!(build_graph(&rec, THRESHOLD).unwrap().edges(), g.edges());
}

#[test]
fn final_snapshot_equals_one_shot_build() {
    let rec = record(1.3, CoinFamily::K, 90, 0);
    let g = build_graph(&rec, THRESHOLD).unwrap();
    let series = graph_timeseries(&rec, &[30, 90], THRESHOLD).unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series[1].degree, degree_stats(&g));
    assert_eq!(series[1].structure, structural_stats(&g));
    assert!(series[0].structure.n_vertices <= series[1].structure.n_vertices);
    assert!(graph_timeseries(&rec, &[91], THRESHOLD).is_err());
    assert!(graph_timeseries(&rec, &[0], THRESHOLD).is_err());
}

#[test]
fn records_without_history_are_rejected() {
    let c = RunConfig::new(1.5, CoinParams::new(CoinFamily::K, FRAC_PI_4)).t_max(10);
    let rec = run_trajectory(&c, 0).unwrap();
    assert!(build_graph(&rec, THRESHOLD).is_err());
}

#[test]
fn longer_memory_raises_mean_degree() {
    let mean_degree = |q: f64| {
        (0..5)
            .map(|i| {
                degree_stats(&build_graph(&record(q, CoinFamily::K, 200, i), THRESHOLD).unwrap())
                    .mean
            })
            .sum::<f64>()
            / 5.0
    };
    let short = mean_degree(0.7);
    let long = mean_degree(1.5);
    assert!(long > short, "{long} vs {short}");
}

fn random_graph(seed: u64, n: i64, p: f64) -> Vec<(i64, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    edges
}

fn adjacency_degrees(g: &WalkGraph) -> Vec<f64> {
    let sites = g.sites();
    sites
        .iter()
        .map(|&a| sites.iter().filter(|&&b| g.has_edge(a, b)).count() as f64)
        .collect()
}

#[test]
fn degree_moments_match_direct_sums_on_random_graphs() {
    for seed in 0..5 {
        let g = WalkGraph::from_edges(&random_graph(seed, 14, 0.3));
        let deg = adjacency_degrees(&g);
        let n = deg.len() as f64;
        let mean = deg.iter().sum::<f64>() / n;
        let m2 = deg.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        let m3 = deg.iter().map(|d| (d - mean).powi(3)).sum::<f64>() / n;
        let stats = degree_stats(&g);
        assert!((stats.mean - mean).abs() < 1e-12);
        assert!((stats.std - m2.sqrt()).abs() < 1e-12);
        assert!((stats.skewness.unwrap() - m3 / m2.powf(1.5)).abs() < 1e-12);
        let total: f64 = stats.histogram.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let entropy: f64 = -stats
            .histogram
            .iter()
            .map(|&(_, p)| p * p.ln())
            .sum::<f64>();
        assert!((stats.entropy - entropy).abs() < 1e-12);
    }
}

#[test]
fn assortativity_matches_pearson_over_edge_ends() {
    for seed in 10..15 {
        let g = WalkGraph::from_edges(&random_graph(seed, 16, 0.25));
        let sites = g.sites().to_vec();
        let deg = adjacency_degrees(&g);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, &a) in sites.iter().enumerate() {
            for (j, &b) in sites.iter().enumerate() {
                if g.has_edge(a, b) {
                    xs.push(deg[i]);
                    ys.push(deg[j]);
                }
            }
        }
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let r = assortativity(&g).unwrap();
        assert!((r - cov / (sx * sy).sqrt()).abs() < 1e-12);
        assert!((-1.0..=1.0).contains(&r));
    }
}

#[test]
fn path_length_uses_the_largest_component() {
    // a triangle and a separate path of four sites
    let g = WalkGraph::from_edges(&[(0, 1), (1, 2), (0, 2), (10, 11), (11, 12), (12, 13)]);
    // path 10-11-12-13: distances 1,2,3,1,2,1
    assert_eq!(average_path_length(&g), Some(10.0 / 6.0));
    assert_eq!(structural_stats(&g).n_edges, 6);
}
