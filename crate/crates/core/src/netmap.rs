//! Mapping a trajectory onto a growing network of visited sites.
//!
//! Starting from the origin, at every step `t` each site `i` occupied at `t`
//! is linked to `i ± dx` whenever that site was occupied at `t - 1`, where
//! `dx` is the jump sampled for step `t`. Links are undirected and never
//! removed, so the graph at time `t` is the union of everything built so far.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::observables::SpatialDistribution;

/// An undirected link between two sites, stamped with the step that made it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: i64,
    pub b: i64,
    pub t_created: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkGraph {
    sites: Vec<i64>,
    vertex_created: Vec<usize>,
    index: HashMap<i64, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    edge_set: HashSet<(usize, usize)>,
}

impl Default for WalkGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl WalkGraph {
    /// The initial network: the origin alone.
    pub fn new() -> Self {
        let mut g = Self {
            sites: Vec::new(),
            vertex_created: Vec::new(),
            index: HashMap::new(),
            adjacency: Vec::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
        };
        g.add_vertex(0, 0);
        g
    }

    /// Graph on the origin plus the given links, all stamped `t = 0`.
    pub fn from_edges(edges: &[(i64, i64)]) -> Self {
        let mut g = Self::new();
        for &(a, b) in edges {
            g.add_edge(a, b, 0);
        }
        g
    }

    fn add_vertex(&mut self, site: i64, t: usize) -> usize {
        if let Some(&v) = self.index.get(&site) {
            return v;
        }
        let v = self.sites.len();
        self.sites.push(site);
        self.vertex_created.push(t);
        self.adjacency.push(Vec::new());
        self.index.insert(site, v);
        v
    }

    /// Adds the link `a - b` unless present; self-loops are ignored.
    pub fn add_edge(&mut self, a: i64, b: i64, t: usize) -> bool {
        if a == b {
            return false;
        }
        let u = self.add_vertex(a, t);
        let v = self.add_vertex(b, t);
        let key = (u.min(v), u.max(v));
        if !self.edge_set.insert(key) {
            return false;
        }
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.edges.push(Edge { a, b, t_created: t });
        true
    }

    /// One growth step from `P_{t-1}` (`prev`) to `P_t` (`cur`) with jump `dx`.
    pub fn grow(
        &mut self,
        prev: &SpatialDistribution,
        cur: &SpatialDistribution,
        dx: usize,
        t: usize,
        threshold: f64,
    ) {
        let dx = dx as i64;
        for (i, p) in cur.iter() {
            if p <= threshold {
                continue;
            }
            self.add_vertex(i, t);
            for j in [i - dx, i + dx] {
                if prev.prob(j) > threshold {
                    self.add_edge(i, j, t);
                }
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.sites.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sites in order of first appearance.
    pub fn sites(&self) -> &[i64] {
        &self.sites
    }

    pub fn contains_site(&self, site: i64) -> bool {
        self.index.contains_key(&site)
    }

    pub fn vertex_created(&self, site: i64) -> Option<usize> {
        self.index.get(&site).map(|&v| self.vertex_created[v])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, a: i64, b: i64) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&u), Some(&v)) => self.edge_set.contains(&(u.min(v), u.max(v))),
            _ => false,
        }
    }

    /// Degrees in vertex order.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn neighbours(&self, site: i64) -> Vec<i64> {
        self.index
            .get(&site)
            .map(|&v| self.adjacency[v].iter().map(|&u| self.sites[u]).collect())
            .unwrap_or_default()
    }

    /// Writes one `i j t_created` line per link.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.a, e.b, e.t_created)?;
        }
        Ok(())
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &u in &self.adjacency[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

fn check_record(record: &TrajectoryRecord) -> Result<&[SpatialDistribution]> {
    let dists = record.distributions.as_deref().ok_or_else(|| {
        Error::MissingData("trajectory record carries no per-step distributions".into())
    })?;
    if record.jumps.len() + 1 != dists.len() {
        return Err(Error::MissingData(format!(
            "{} distributions but {} jumps",
            dists.len(),
            record.jumps.len()
        )));
    }
    Ok(dists)
}

/// The network of the whole trajectory.
pub fn build_graph(record: &TrajectoryRecord, threshold: f64) -> Result<WalkGraph> {
    let dists = check_record(record)?;
    let mut g = WalkGraph::new();
    for (s, &dx) in record.jumps.iter().enumerate() {
        g.grow(&dists[s], &dists[s + 1], dx, s + 1, threshold);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    /// `(k, P(k))` for every degree present, increasing in `k`.
    pub histogram: Vec<(usize, f64)>,
    pub mean: f64,
    pub std: f64,
    /// `None` when the degrees have zero spread.
    pub skewness: Option<f64>,
    /// Shannon entropy (natural log) of `P(k)`.
    pub entropy: f64,
}

pub fn degree_stats(graph: &WalkGraph) -> DegreeStats {
    let degrees = graph.degrees();
    let n = degrees.len() as f64;
    let mut counts = std::collections::BTreeMap::new();
    for &k in &degrees {
        *counts.entry(k).or_insert(0usize) += 1;
    }
    let histogram: Vec<(usize, f64)> = counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect();
    let mean = degrees.iter().sum::<usize>() as f64 / n;
    let central = |p: i32| {
        degrees
            .iter()
            .map(|&k| (k as f64 - mean).powi(p))
            .sum::<f64>()
            / n
    };
    let m2 = central(2);
    let std = m2.sqrt();
    let skewness = (m2 > 0.0).then(|| central(3) / m2.powf(1.5));
    let entropy = -histogram
        .iter()
        .map(|&(_, p)| if p > 0.0 { p * p.ln() } else { 0.0 })
        .sum::<f64>();
    DegreeStats {
        histogram,
        mean,
        std,
        skewness,
        entropy: entropy.max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralStats {
    pub n_vertices: usize,
    pub n_edges: usize,
    /// Mean shortest-path length over pairs of the largest component; `None`
    /// when that component has a single vertex.
    pub average_path_length: Option<f64>,
    /// Degree Pearson correlation across links; `None` when the endpoint
    /// degrees do not vary.
    pub assortativity: Option<f64>,
}

pub fn average_path_length(graph: &WalkGraph) -> Option<f64> {
    let comps = graph.components();
    // ties go to the component found first (earliest vertex)
    let largest = comps.iter().fold(
        &comps[0],
        |best, c| {
            if c.len() > best.len() {
                c
            } else {
                best
            }
        },
    );
    let n = largest.len();
    if n < 2 {
        return None;
    }
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    let mut total: u64 = 0;
    let mut queue = VecDeque::new();
    for &src in largest {
        for &v in largest {
            dist[v] = usize::MAX;
        }
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &u in &graph.adjacency[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    total += dist[u] as u64;
                    queue.push_back(u);
                }
            }
        }
    }
    // every unordered pair was counted from both ends
    let pairs = (n * (n - 1)) as u64;
    Some(total as f64 / pairs as f64)
}

pub fn assortativity(graph: &WalkGraph) -> Option<f64> {
    let degrees = graph.degrees();
    // Sums over both orientations of every link, in exact integer arithmetic.
    let (mut m, mut sx, mut sxx, mut sxy) = (0i128, 0i128, 0i128, 0i128);
    for e in graph.edges() {
        let a = degrees[graph.index[&e.a]] as i128;
        let b = degrees[graph.index[&e.b]] as i128;
        m += 2;
        sx += a + b;
        sxx += a * a + b * b;
        sxy += 2 * a * b;
    }
    let var = m * sxx - sx * sx;
    if var == 0 {
        return None;
    }
    Some((m * sxy - sx * sx) as f64 / var as f64)
}

pub fn structural_stats(graph: &WalkGraph) -> StructuralStats {
    StructuralStats {
        n_vertices: graph.vertex_count(),
        n_edges: graph.edge_count(),
        average_path_length: average_path_length(graph),
        assortativity: assortativity(graph),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub t: usize,
    pub degree: DegreeStats,
    pub structure: StructuralStats,
}

/// Statistics of the cumulative network at each requested time.
pub fn graph_timeseries(
    record: &TrajectoryRecord,
    sample_times: &[usize],
    threshold: f64,
) -> Result<Vec<GraphSnapshot>> {
    let dists = check_record(record)?;
    let t_max = record.jumps.len();
    if let Some(&bad) = sample_times.iter().find(|&&t| t < 1 || t > t_max) {
        return Err(Error::InvalidParameter(format!(
            "sample time {bad} outside 1..={t_max}"
        )));
    }
    let mut times = sample_times.to_vec();
    times.sort_unstable();
    times.dedup();
    let mut g = WalkGraph::new();
    let mut out = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();
    for (s, &dx) in record.jumps.iter().enumerate() {
        let t = s + 1;
        g.grow(&dists[s], &dists[t], dx, t, threshold);
        while next.peek() == Some(&&t) {
            next.next();
            out.push(GraphSnapshot {
                t,
                degree: degree_stats(&g),
                structure: structural_stats(&g),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> WalkGraph {
        WalkGraph::from_edges(&[(0, 1), (1, 2)])
    }

    fn k4() -> WalkGraph {
        WalkGraph::from_edges(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    fn star() -> WalkGraph {
        WalkGraph::from_edges(&[(0, 1), (0, 2), (0, 3), (0, 4)])
    }

    #[test]
    fn graph_is_simple() {
        let mut g = path();
        assert!(!g.add_edge(1, 0, 3));
        assert!(!g.add_edge(2, 2, 3));
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(2, 1));
        assert_eq!(g.vertex_created(0), Some(0));
    }

    #[test]
    fn initial_graph() {
        let g = WalkGraph::new();
        assert_eq!(g.sites(), &[0]);
        assert_eq!(g.edge_count(), 0);
        let s = structural_stats(&g);
        assert_eq!(s.average_path_length, None);
        assert_eq!(s.assortativity, None);
        assert_eq!(degree_stats(&g).skewness, None);
    }

    #[test]
    fn path_metrics() {
        let g = path();
        let d = degree_stats(&g);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert!((d.mean - 4.0 / 3.0).abs() < 1e-15);
        let s = structural_stats(&g);
        assert!((s.average_path_length.unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.assortativity, Some(-1.0));
    }

    #[test]
    fn complete_graph_metrics() {
        let g = k4();
        let d = degree_stats(&g);
        assert_eq!(d.std, 0.0);
        assert_eq!(d.skewness, None);
        assert_eq!(d.entropy, 0.0);
        let s = structural_stats(&g);
        assert_eq!(s.average_path_length, Some(1.0));
        assert_eq!(s.assortativity, None);
    }

    #[test]
    fn star_metrics() {
        let s = structural_stats(&star());
        assert!((s.average_path_length.unwrap() - 1.6).abs() < 1e-15);
        assert_eq!(s.assortativity, Some(-1.0));
    }

    #[test]
    fn path_length_uses_largest_component() {
        let mut g = path();
        g.add_edge(10, 11, 1);
        let s = structural_stats(&g);
        assert!((s.average_path_length.unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn edge_list_format() {
        let mut g = WalkGraph::new();
        g.add_edge(0, -3, 4);
        g.add_edge(-3, 2, 7);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 -3 4\n-3 2 7\n");
    }
}
