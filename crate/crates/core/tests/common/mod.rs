//! Oracles shared by the integration tests. Nothing here calls into the
//! code under test except to build inputs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use affaudit::classifier::features::FEATURE_COUNT;
use affaudit::graph::{EdgeKind, GraphEdge, GraphNode, InteractionGraph, NodeKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid interaction graph with at most `max_nodes` nodes. Parallel
/// edges and self loops on non-redirect edges are allowed on purpose.
pub fn random_graph(seed: u64, max_nodes: usize) -> InteractionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_nodes);
    let n_network = rng.random_range(1..=n.min(8));
    let kinds = [
        NodeKind::Dom,
        NodeKind::Decoration,
        NodeKind::Storage,
        NodeKind::Js,
    ];
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let kind = if i < n_network {
            NodeKind::Network
        } else {
            kinds[rng.random_range(0..kinds.len())]
        };
        nodes.push(GraphNode {
            node_id: i,
            kind,
            label: format!("{kind:?}-{i}"),
            query_params: if kind == NodeKind::Network {
                rng.random_range(0..6)
            } else {
                0
            },
        });
    }
    // shuffle positions so network nodes are not always the low ids
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut placed = vec![None; n];
    for (old, &new) in perm.iter().enumerate() {
        let mut node = nodes[old].clone();
        node.node_id = new;
        placed[new] = Some(node);
    }
    let nodes: Vec<GraphNode> = placed.into_iter().map(Option::unwrap).collect();

    let mut network: Vec<usize> = nodes
        .iter()
        .filter(|x| x.kind == NodeKind::Network)
        .map(|x| x.node_id)
        .collect();
    network.shuffle(&mut rng);
    let hops = rng.random_range(0..network.len());
    let mut edges = Vec::new();
    for w in network[..=hops].windows(2) {
        edges.push(GraphEdge {
            src: w[0],
            dst: w[1],
            kind: EdgeKind::Redirect,
            order_index: edges.len(),
        });
    }
    let extra = rng.random_range(0..=2 * n);
    for _ in 0..extra {
        let kind = if rng.random_bool(0.5) {
            EdgeKind::Access
        } else {
            EdgeKind::Modification
        };
        edges.push(GraphEdge {
            src: rng.random_range(0..n),
            dst: rng.random_range(0..n),
            kind,
            order_index: edges.len(),
        });
    }
    edges.shuffle(&mut rng);

    let alphabet: Vec<char> = "abcxyz0129_=é".chars().collect();
    let word = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(0..7);
        (0..len)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect()
    };
    let n_kv = rng.random_range(0..6);
    let decorations = (0..n_kv)
        .map(|_| (word(&mut rng), word(&mut rng)))
        .collect();
    InteractionGraph::from_parts(format!("g{seed}"), nodes, edges, decorations)
        .expect("valid random graph")
}

const INF: usize = usize::MAX / 4;

/// Directed 0/1 adjacency matrix ignoring self loops and edge multiplicity.
fn matrix(g: &InteractionGraph) -> Vec<Vec<bool>> {
    let n = g.nodes().len();
    let mut m = vec![vec![false; n]; n];
    for e in g.edges() {
        if e.src != e.dst {
            m[e.src][e.dst] = true;
        }
    }
    m
}

/// Floyd-Warshall hop distances.
fn distances(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Number of shortest paths from every s to every t, by layered counting.
fn path_counts(adj: &[Vec<bool>], d: &[Vec<usize>]) -> Vec<Vec<u128>> {
    let n = adj.len();
    let mut sigma = vec![vec![0u128; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&t| d[s][t] < INF).collect();
        order.sort_by_key(|&t| d[s][t]);
        sigma[s][s] = 1;
        for &t in &order {
            if t == s {
                continue;
            }
            sigma[s][t] = (0..n)
                .filter(|&u| adj[u][t] && d[s][u] + 1 == d[s][t])
                .map(|u| sigma[s][u])
                .sum();
        }
    }
    sigma
}

pub fn oracle_betweenness(g: &InteractionGraph) -> Vec<f64> {
    let adj = matrix(g);
    let n = adj.len();
    let d = distances(&adj);
    let sigma = path_counts(&adj, &d);
    let mut cb = vec![0.0; n];
    if n <= 2 {
        return cb;
    }
    for s in 0..n {
        for t in 0..n {
            if s == t || d[s][t] >= INF {
                continue;
            }
            for v in 0..n {
                if v != s && v != t && d[s][v] + d[v][t] == d[s][t] {
                    cb[v] += (sigma[s][v] * sigma[v][t]) as f64 / sigma[s][t] as f64;
                }
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as f64;
    cb.iter().map(|c| c / norm).collect()
}

pub fn oracle_entropy(pairs: &[(String, String)]) -> f64 {
    let mut hist: BTreeMap<char, f64> = BTreeMap::new();
    for (k, v) in pairs {
        for c in format!("{k}{v}").chars() {
            *hist.entry(c).or_default() += 1.0;
        }
    }
    let total: f64 = hist.values().sum();
    if total == 0.0 {
        return 0.0;
    }
    -hist
        .values()
        .map(|c| (c / total) * (c / total).log2())
        .sum::<f64>()
}

/// Every feature computed from first principles, in schema order.
pub fn oracle_features(g: &InteractionGraph) -> [f64; FEATURE_COUNT] {
    let adj = matrix(g);
    let n = adj.len();
    let nf = n as f64;
    let arcs = adj.iter().flatten().filter(|&&b| b).count() as f64;
    let density = if n > 1 { arcs / (nf * (nf - 1.0)) } else { 0.0 };
    let mean_degree = if n > 1 {
        (0..n)
            .map(|v| {
                let out = (0..n).filter(|&u| adj[v][u]).count();
                let inn = (0..n).filter(|&u| adj[u][v]).count();
                (out + inn) as f64 / (nf - 1.0)
            })
            .sum::<f64>()
            / nf
    } else {
        0.0
    };
    let max_bc = oracle_betweenness(g).into_iter().fold(0.0, f64::max);

    let mut und = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if adj[i][j] {
                und[i][j] = true;
                und[j][i] = true;
            }
        }
    }
    let ud = distances(&und);
    let (mut total, mut pairs) = (0usize, 0usize);
    for (i, row) in ud.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if i != j && d < INF {
                total += d;
                pairs += 1;
            }
        }
    }
    let avg_path = if pairs == 0 {
        0.0
    } else {
        total as f64 / pairs as f64
    };

    let nodes_of = |k: NodeKind| g.nodes().iter().filter(|x| x.kind == k).count();
    let edges_of = |k: EdgeKind| g.edges().iter().filter(|e| e.kind == k).count();
    let network: Vec<&GraphNode> = g
        .nodes()
        .iter()
        .filter(|x| x.kind == NodeKind::Network)
        .collect();
    let params: usize = network.iter().map(|x| x.query_params).sum();
    let origins: BTreeSet<&str> = network.iter().map(|x| x.label.as_str()).collect();
    [
        density,
        mean_degree,
        max_bc,
        avg_path,
        nf,
        g.edges().len() as f64,
        nodes_of(NodeKind::Storage) as f64,
        nodes_of(NodeKind::Decoration) as f64,
        (edges_of(EdgeKind::Redirect) + 1) as f64,
        params as f64,
        if network.is_empty() {
            0.0
        } else {
            params as f64 / network.len() as f64
        },
        oracle_entropy(g.decorations()),
        origins.len() as f64,
        edges_of(EdgeKind::Access) as f64,
        edges_of(EdgeKind::Modification) as f64,
    ]
}

// ---------------------------------------------------------------------------
// Statistics formulas

pub fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn t_two_sided(t: f64, df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let d = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * d.cdf(-t.abs())
}

/// (z, p) of the pooled two-proportion test.
pub fn ztest_formula(x1: u64, n1: u64, x2: u64, n2: u64) -> (f64, f64) {
    let (p1, p2) = (x1 as f64 / n1 as f64, x2 as f64 / n2 as f64);
    let p = (x1 + x2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    (z, normal_two_sided(z))
}

/// (t, df, p) of Welch's test, written out term by term.
pub fn welch_formula(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let s2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, s2)
    };
    let (na, ma, sa) = stats(a);
    let (nb, mb, sb) = stats(b);
    let t = (ma - mb) / (sa / na + sb / nb).sqrt();
    let df = (sa / na + sb / nb).powi(2)
        / ((sa / na).powi(2) / (na - 1.0) + (sb / nb).powi(2) / (nb - 1.0));
    (t, df, t_two_sided(t, df))
}

/// (r, p) via the raw-sums form of the correlation coefficient.
pub fn pearson_formula(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        t_two_sided(r * ((n - 2.0) / (1.0 - r * r)).sqrt(), n - 2.0)
    };
    (r, p)
}

/// Kappa from a square confusion matrix (rows: rater a, columns: rater b).
pub fn kappa_from_matrix(m: &[Vec<usize>]) -> f64 {
    let n: usize = m.iter().flatten().sum();
    let n = n as f64;
    let po = (0..m.len()).map(|i| m[i][i]).sum::<usize>() as f64 / n;
    let pe = (0..m.len())
        .map(|i| {
            let row: usize = m[i].iter().sum();
            let col: usize = m.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    if pe == 1.0 {
        1.0
    } else {
        (po - pe) / (1.0 - pe)
    }
}

// ---------------------------------------------------------------------------
// Bootstrap scenarios

/// Two groups of Bernoulli draws with the given success rates, redrawn
/// for every run index.
pub fn bernoulli_groups(
    p_a: f64,
    n_a: usize,
    p_b: f64,
    n_b: usize,
    run: u64,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + run);
    let mut draw = |p: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| if rng.random_bool(p) { 1.0 } else { 0.0 })
            .collect()
    };
    let a = draw(p_a, n_a);
    let b = draw(p_b, n_b);
    (a, b)
}
