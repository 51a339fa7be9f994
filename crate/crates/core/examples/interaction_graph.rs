//! Interaction graphs and their features for an affiliate and a plain link.

use affaudit::classifier::{extract_features, FEATURE_NAMES};
use affaudit::fixtures::{generate_corpus, GeneratorSpec};
use affaudit::graph::{build_graph, graph_stats};

fn main() {
    let g = generate_corpus(&GeneratorSpec {
        n_videos: 60,
        ..Default::default()
    })
    .unwrap();
    let pick = |affiliate: bool| {
        let t = g
            .link_truth
            .iter()
            .filter(|t| t.affiliate == affiliate && !t.unresolvable)
            .max_by_key(|t| {
                g.crawls
                    .iter()
                    .find(|c| c.link_id == t.link_id)
                    .unwrap()
                    .redirects
                    .len()
            })
            .unwrap();
        g.crawls.iter().find(|c| c.link_id == t.link_id).unwrap()
    };
    for (name, rec) in [("affiliate", pick(true)), ("non-affiliate", pick(false))] {
        let graph = build_graph(rec).unwrap();
        let stats = graph_stats(&graph);
        println!("{name}: {}", rec.original_url);
        println!("  chain length {}", stats.chain_length);
        for (k, n) in stats.nodes_by_kind.iter().filter(|(_, n)| *n > 0) {
            println!("  {n:>3} {k:?} nodes");
        }
        let fv = extract_features(&graph);
        for (n, v) in FEATURE_NAMES
            .iter()
            .zip(fv.values)
            .filter(|(_, v)| *v != 0.0)
        {
            println!("  {n:<34} {v:.4}");
        }
    }
}
