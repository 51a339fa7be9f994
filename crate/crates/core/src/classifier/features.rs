//! Structural and redirect features of an interaction graph.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKind, InteractionGraph, NodeKind};

pub const FEATURE_SCHEMA_VERSION: u32 = 1;
pub const FEATURE_COUNT: usize = 15;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "graph_density",
    "mean_degree_centrality",
    "max_betweenness_centrality",
    "avg_shortest_path_len",
    "node_count",
    "edge_count",
    "storage_node_count",
    "decoration_node_count",
    "redirect_chain_len",
    "total_query_param_count",
    "mean_query_params_per_network_node",
    "kv_shannon_entropy_bits",
    "distinct_origin_count",
    "access_edge_count",
    "modification_edge_count",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub link_id: String,
    pub schema_version: u32,
    pub values: [f64; FEATURE_COUNT],
}

macro_rules! accessors {
    ($($name:ident = $idx:expr),* $(,)?) => {
        impl FeatureVector {
            $(pub fn $name(&self) -> f64 { self.values[$idx] })*
        }
    };
}

accessors! {
    graph_density = 0,
    mean_degree_centrality = 1,
    max_betweenness_centrality = 2,
    avg_shortest_path_len = 3,
    node_count = 4,
    edge_count = 5,
    storage_node_count = 6,
    decoration_node_count = 7,
    redirect_chain_len = 8,
    total_query_param_count = 9,
    mean_query_params_per_network_node = 10,
    kv_shannon_entropy_bits = 11,
    distinct_origin_count = 12,
    access_edge_count = 13,
    modification_edge_count = 14,
}

impl FeatureVector {
    pub fn new(link_id: impl Into<String>, values: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            link_id: link_id.into(),
            schema_version: FEATURE_SCHEMA_VERSION,
            values,
        }
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

/// Base-2 entropy of the character distribution over all keys and values
/// concatenated. Zero for empty input.
pub fn shannon_entropy(kv_pairs: &[(String, String)]) -> f64 {
    let mut counts: HashMap<char, usize> = HashMap::new();
    let mut total = 0usize;
    for (k, v) in kv_pairs {
        for c in k.chars().chain(v.chars()) {
            *counts.entry(c).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let mut freqs: Vec<usize> = counts.into_values().collect();
    // fixed summation order regardless of hash iteration order
    freqs.sort_unstable();
    let n = total as f64;
    let h: f64 = freqs
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Directed simple-graph adjacency (no self loops, no parallel edges).
fn simple_adjacency(g: &InteractionGraph) -> Vec<Vec<usize>> {
    let n = g.nodes().len();
    let mut set = HashSet::new();
    let mut out = vec![Vec::new(); n];
    for e in g.edges() {
        if e.src != e.dst && set.insert((e.src, e.dst)) {
            out[e.src].push(e.dst);
        }
    }
    for list in &mut out {
        list.sort_unstable();
    }
    out
}

/// Brandes' algorithm on the directed simple graph, normalized by (n-1)(n-2).
fn betweenness(out: &[Vec<usize>]) -> Vec<f64> {
    let n = out.len();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &out[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    if n > 2 {
        let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
        for c in &mut cb {
            *c *= scale;
        }
    } else {
        cb.iter_mut().for_each(|c| *c = 0.0);
    }
    cb
}

/// Mean hop distance over connected ordered pairs of the undirected view.
fn average_shortest_path(out: &[Vec<usize>]) -> f64 {
    let n = out.len();
    let mut undirected = vec![Vec::new(); n];
    for (u, targets) in out.iter().enumerate() {
        for &v in targets {
            undirected[u].push(v);
            undirected[v].push(u);
        }
    }
    let mut total = 0u64;
    let mut pairs = 0u64;
    let mut dist = vec![usize::MAX; n];
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &undirected[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    total += dist[w] as u64;
                    pairs += 1;
                    queue.push_back(w);
                }
            }
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total as f64 / pairs as f64
    }
}

pub fn extract_features(g: &InteractionGraph) -> FeatureVector {
    let n = g.nodes().len();
    let out = simple_adjacency(g);
    let simple_edges: usize = out.iter().map(Vec::len).sum();
    let nf = n as f64;

    let density = if n > 1 {
        simple_edges as f64 / (nf * (nf - 1.0))
    } else {
        0.0
    };
    let mean_degree = if n > 1 {
        let mut degree = vec![0usize; n];
        for (u, targets) in out.iter().enumerate() {
            degree[u] += targets.len();
            for &v in targets {
                degree[v] += 1;
            }
        }
        degree.iter().map(|&d| d as f64 / (nf - 1.0)).sum::<f64>() / nf
    } else {
        0.0
    };
    let max_betweenness = betweenness(&out).into_iter().fold(0.0, f64::max);
    let avg_path = average_shortest_path(&out);

    let count_nodes = |k: NodeKind| g.nodes().iter().filter(|x| x.kind == k).count();
    let count_edges = |k: EdgeKind| g.edges().iter().filter(|e| e.kind == k).count();
    let network = count_nodes(NodeKind::Network);
    let query_params: usize = g
        .nodes()
        .iter()
        .filter(|x| x.kind == NodeKind::Network)
        .map(|x| x.query_params)
        .sum();

    FeatureVector::new(
        g.link_id(),
        [
            density,
            mean_degree,
            max_betweenness,
            avg_path,
            n as f64,
            g.edges().len() as f64,
            count_nodes(NodeKind::Storage) as f64,
            count_nodes(NodeKind::Decoration) as f64,
            (count_edges(EdgeKind::Redirect) + 1) as f64,
            query_params as f64,
            if network == 0 {
                0.0
            } else {
                query_params as f64 / network as f64
            },
            shannon_entropy(g.decorations()),
            network as f64,
            count_edges(EdgeKind::Access) as f64,
            count_edges(EdgeKind::Modification) as f64,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphEdge, GraphNode};

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&[]), 0.0);
        assert_eq!(shannon_entropy(&kv(&[("a", "aaa")])), 0.0);
        assert!((shannon_entropy(&kv(&[("ab", "ab")])) - 1.0).abs() < 1e-15);
        // "abcd": four equiprobable symbols
        assert!((shannon_entropy(&kv(&[("ab", "c"), ("", "d")])) - 2.0).abs() < 1e-15);
    }

    fn network(i: usize) -> GraphNode {
        GraphNode {
            node_id: i,
            kind: NodeKind::Network,
            label: format!("https://n{i}.com"),
            query_params: 0,
        }
    }

    #[test]
    fn single_node_conventions() {
        let g = InteractionGraph::from_parts("x", vec![network(0)], vec![], vec![]).unwrap();
        let f = extract_features(&g);
        assert_eq!(f.graph_density(), 0.0);
        assert_eq!(f.avg_shortest_path_len(), 0.0);
        assert_eq!(f.redirect_chain_len(), 1.0);
        assert_eq!(f.max_betweenness_centrality(), 0.0);
    }

    #[test]
    fn directed_three_path() {
        let edges = vec![
            GraphEdge {
                src: 0,
                dst: 1,
                kind: EdgeKind::Redirect,
                order_index: 0,
            },
            GraphEdge {
                src: 1,
                dst: 2,
                kind: EdgeKind::Redirect,
                order_index: 1,
            },
        ];
        let g = InteractionGraph::from_parts("x", (0..3).map(network).collect(), edges, vec![])
            .unwrap();
        let f = extract_features(&g);
        assert!((f.graph_density() - 2.0 / 6.0).abs() < 1e-15);
        assert!((f.avg_shortest_path_len() - 4.0 / 3.0).abs() < 1e-15);
        // middle node lies on the single 0 -> 2 path: 1 / ((3-1)(3-2))
        assert!((f.max_betweenness_centrality() - 0.5).abs() < 1e-15);
        assert_eq!(f.redirect_chain_len(), 3.0);
        assert!((f.mean_degree_centrality() - (0.5 + 1.0 + 0.5) / 3.0).abs() < 1e-15);
    }
}
