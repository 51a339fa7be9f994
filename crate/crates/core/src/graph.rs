//! Typed interaction graphs built from crawl records.
//!
//! Nodes come in five kinds (network origins, DOM elements, link-decoration
//! keys and values, storage items, JavaScript calls) and edges in three
//! (redirect, modification, access). Construction rules, applied in this
//! order so node ids follow first occurrence:
//!
//! 1. One `Network` node per distinct origin in the redirect chain. A
//!    `Redirect` edge joins the previously first-visited origin to each
//!    newly visited one, so redirect edges always form a single path.
//!    Hops that stay on, or return to, a known origin add no redirect edge.
//! 2. Every decoration `key=value` on a hop adds `Decoration` nodes for the
//!    key and the (non-empty) value, an `Access` edge from the hop's origin
//!    to the key, and an `Access` edge from the key to the value.
//! 3. A storage `Write` by origin O on key K adds `Modification` O -> K; a
//!    `Read` adds `Access` K -> O.
//! 4. When a written value reappears in a decoration value (exact match, or
//!    substring match of at least [`MIN_FLOW_MATCH_LEN`] characters) an
//!    `Access` edge runs from the storage node to the decoration key.
//! 5. DOM hooks and JS calls hang off the landing origin via `Access` edges.
//!
//! Parallel edges of the same kind between the same pair are collapsed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::crawl::{origin_key, CrawlRecord, StorageAction, ViolationKind};

pub const MIN_FLOW_MATCH_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Network,
    Dom,
    Decoration,
    Storage,
    Js,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::Network,
        NodeKind::Dom,
        NodeKind::Decoration,
        NodeKind::Storage,
        NodeKind::Js,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Redirect,
    Modification,
    Access,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::Redirect, EdgeKind::Modification, EdgeKind::Access];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub node_id: usize,
    pub kind: NodeKind,
    pub label: String,
    /// Decoration parameters attached to requests to this origin (network nodes only).
    #[serde(default)]
    pub query_params: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
    pub order_index: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("record {link_id}: {violation}")]
    InvalidRecord {
        link_id: String,
        violation: ViolationKind,
    },
    #[error("record {link_id}: unparseable URL {url:?}")]
    BadUrl { link_id: String, url: String },
    #[error("graph has no network node")]
    NoNetworkNode,
    #[error("node ids must be 0..n in order")]
    NodeIds,
    #[error("duplicate node ({0:?}, {1:?})")]
    DuplicateNode(NodeKind, String),
    #[error("edge references missing node {0}")]
    DanglingEdge(usize),
    #[error("redirect edge {0} -> {1} does not join two network nodes")]
    RedirectKind(usize, usize),
    #[error("redirect edges do not form a single path")]
    RedirectPath,
}

/// Interaction graph of one clicked link. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    link_id: String,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    /// Every decoration pair seen along the chain, in order, duplicates kept.
    decorations: Vec<(String, String)>,
}

impl InteractionGraph {
    /// Assembles a graph from parts, checking every structural invariant.
    pub fn from_parts(
        link_id: impl Into<String>,
        nodes: Vec<GraphNode>,
        edges: Vec<GraphEdge>,
        decorations: Vec<(String, String)>,
    ) -> Result<InteractionGraph, GraphError> {
        let g = InteractionGraph {
            link_id: link_id.into(),
            nodes,
            edges,
            decorations,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut seen = std::collections::HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.node_id != i {
                return Err(GraphError::NodeIds);
            }
            if !seen.insert((n.kind, n.label.as_str())) {
                return Err(GraphError::DuplicateNode(n.kind, n.label.clone()));
            }
        }
        if !self.nodes.iter().any(|n| n.kind == NodeKind::Network) {
            return Err(GraphError::NoNetworkNode);
        }
        let n = self.nodes.len();
        for e in &self.edges {
            for id in [e.src, e.dst] {
                if id >= n {
                    return Err(GraphError::DanglingEdge(id));
                }
            }
            if e.kind == EdgeKind::Redirect
                && (self.nodes[e.src].kind != NodeKind::Network
                    || self.nodes[e.dst].kind != NodeKind::Network)
            {
                return Err(GraphError::RedirectKind(e.src, e.dst));
            }
        }
        // Redirect edges in order must chain head-to-tail without revisiting.
        let mut redirects: Vec<&GraphEdge> = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Redirect)
            .collect();
        redirects.sort_by_key(|e| e.order_index);
        let mut visited = std::collections::HashSet::new();
        for (i, e) in redirects.iter().enumerate() {
            if i == 0 {
                visited.insert(e.src);
            } else if redirects[i - 1].dst != e.src {
                return Err(GraphError::RedirectPath);
            }
            if !visited.insert(e.dst) {
                return Err(GraphError::RedirectPath);
            }
        }
        Ok(())
    }

    pub fn link_id(&self) -> &str {
        &self.link_id
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn decorations(&self) -> &[(String, String)] {
        &self.decorations
    }

    pub fn node(&self, kind: NodeKind, label: &str) -> Option<&GraphNode> {
        self.nodes
            .iter()
            .find(|n| n.kind == kind && n.label == label)
    }

    pub fn has_edge(&self, src: usize, dst: usize, kind: EdgeKind) -> bool {
        self.edges
            .iter()
            .any(|e| e.src == src && e.dst == dst && e.kind == kind)
    }
}

pub fn decoration_key_label(key: &str) -> String {
    format!("key:{key}")
}

pub fn decoration_value_label(value: &str) -> String {
    format!("value:{value}")
}

#[derive(Default)]
struct Builder {
    nodes: Vec<GraphNode>,
    index: HashMap<(NodeKind, String), usize>,
    edges: Vec<GraphEdge>,
    edge_set: std::collections::HashSet<(usize, usize, EdgeKind)>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, label: String) -> (usize, bool) {
        if let Some(&id) = self.index.get(&(kind, label.clone())) {
            return (id, false);
        }
        let id = self.nodes.len();
        self.index.insert((kind, label.clone()), id);
        self.nodes.push(GraphNode {
            node_id: id,
            kind,
            label,
            query_params: 0,
        });
        (id, true)
    }

    fn edge(&mut self, src: usize, dst: usize, kind: EdgeKind) {
        if self.edge_set.insert((src, dst, kind)) {
            let order_index = self.edges.len();
            self.edges.push(GraphEdge {
                src,
                dst,
                kind,
                order_index,
            });
        }
    }
}

fn value_flows(stored: &str, decoration_value: &str) -> bool {
    !stored.is_empty()
        && (stored == decoration_value
            || (stored.chars().count() >= MIN_FLOW_MATCH_LEN && decoration_value.contains(stored)))
}

/// Builds the interaction graph of a validated crawl record.
pub fn build_graph(record: &CrawlRecord) -> Result<InteractionGraph, GraphError> {
    record
        .check_chain()
        .map_err(|violation| GraphError::InvalidRecord {
            link_id: record.link_id.clone(),
            violation,
        })?;
    let parse = |u: &str| {
        Url::parse(u).map_err(|_| GraphError::BadUrl {
            link_id: record.link_id.clone(),
            url: u.to_string(),
        })
    };

    // Hops: (url, decoration params on the request to it).
    let original = parse(&record.original_url)?;
    let mut hops: Vec<(Url, Vec<(String, String)>)> = vec![(
        original.clone(),
        original
            .query_pairs()
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect(),
    )];
    for ev in &record.redirects {
        let target = parse(&ev.target_url)?;
        let params = if ev.query_params.is_empty() {
            target
                .query_pairs()
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect()
        } else {
            ev.query_params.clone()
        };
        hops.push((target, params));
    }

    let mut b = Builder::default();
    let mut path_tail: Option<usize> = None;
    let mut hop_nodes = Vec::with_capacity(hops.len());
    for (url, params) in &hops {
        let (id, fresh) = b.node(NodeKind::Network, origin_key(url));
        if fresh {
            if let Some(tail) = path_tail {
                b.edge(tail, id, EdgeKind::Redirect);
            }
            path_tail = Some(id);
        }
        b.nodes[id].query_params += params.len();
        hop_nodes.push(id);
    }

    let mut decorations = Vec::new();
    let mut key_nodes: Vec<(usize, String)> = Vec::new();
    for ((_, params), &net) in hops.iter().zip(&hop_nodes) {
        for (k, v) in params {
            let (key_id, _) = b.node(NodeKind::Decoration, decoration_key_label(k));
            b.edge(net, key_id, EdgeKind::Access);
            if !v.is_empty() {
                let (val_id, _) = b.node(NodeKind::Decoration, decoration_value_label(v));
                b.edge(key_id, val_id, EdgeKind::Access);
            }
            key_nodes.push((key_id, v.clone()));
            decorations.push((k.clone(), v.clone()));
        }
    }

    for ev in &record.storage_events {
        let (net, _) = b.node(NodeKind::Network, ev.actor_origin.clone());
        let (store, _) = b.node(NodeKind::Storage, ev.storage_key.clone());
        match ev.action {
            StorageAction::Write => b.edge(net, store, EdgeKind::Modification),
            StorageAction::Read => b.edge(store, net, EdgeKind::Access),
        }
    }
    for ev in record
        .storage_events
        .iter()
        .filter(|e| e.action == StorageAction::Write)
    {
        let (store, _) = b.node(NodeKind::Storage, ev.storage_key.clone());
        for (key_id, value) in &key_nodes {
            if value_flows(&ev.storage_value, value) {
                b.edge(store, *key_id, EdgeKind::Access);
            }
        }
    }

    let landing = *hop_nodes.last().expect("at least the original hop");
    for hook in &record.dom_hooks {
        let (dom, _) = b.node(
            NodeKind::Dom,
            format!("{}.{}", hook.element_name, hook.class_id),
        );
        b.edge(landing, dom, EdgeKind::Access);
    }
    for call in &record.js_calls {
        let (js, _) = b.node(NodeKind::Js, call.clone());
        b.edge(landing, js, EdgeKind::Access);
    }

    Ok(InteractionGraph {
        link_id: record.link_id.clone(),
        nodes: b.nodes,
        edges: b.edges,
        decorations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes_by_kind: Vec<(NodeKind, usize)>,
    pub edges_by_kind: Vec<(EdgeKind, usize)>,
    pub chain_length: usize,
}

impl GraphStats {
    pub fn nodes(&self, kind: NodeKind) -> usize {
        self.nodes_by_kind
            .iter()
            .find(|(k, _)| *k == kind)
            .map_or(0, |(_, c)| *c)
    }

    pub fn edges(&self, kind: EdgeKind) -> usize {
        self.edges_by_kind
            .iter()
            .find(|(k, _)| *k == kind)
            .map_or(0, |(_, c)| *c)
    }
}

pub fn graph_stats(g: &InteractionGraph) -> GraphStats {
    let nodes_by_kind = NodeKind::ALL
        .iter()
        .map(|&k| (k, g.nodes.iter().filter(|n| n.kind == k).count()))
        .collect();
    let edges_by_kind: Vec<_> = EdgeKind::ALL
        .iter()
        .map(|&k| (k, g.edges.iter().filter(|e| e.kind == k).count()))
        .collect();
    let redirects = edges_by_kind[0].1;
    GraphStats {
        nodes_by_kind,
        edges_by_kind,
        chain_length: redirects + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crawl::{DomHook, OriginLocation, RedirectEvent, StatusClass, StorageEvent};

    pub(crate) fn record(chain: &[&str]) -> CrawlRecord {
        let redirects = chain
            .windows(2)
            .enumerate()
            .map(|(i, w)| RedirectEvent {
                sequence_index: i,
                source_url: w[0].to_string(),
                target_url: w[1].to_string(),
                status_class: StatusClass::HttpRedirect,
                query_params: vec![],
            })
            .collect();
        CrawlRecord {
            link_id: "l".into(),
            video_id: "v".into(),
            origin_location: OriginLocation::Description,
            original_url: chain[0].to_string(),
            redirects,
            storage_events: vec![],
            dom_hooks: vec![],
            js_calls: vec![],
            landing_url: chain.last().unwrap().to_string(),
        }
    }

    #[test]
    fn minimal_record() {
        let g = build_graph(&record(&["https://a.com/"])).unwrap();
        assert_eq!(g.nodes().len(), 1);
        assert!(g.edges().is_empty());
        assert_eq!(graph_stats(&g).chain_length, 1);
    }

    #[test]
    fn three_origin_chain() {
        let g = build_graph(&record(&[
            "https://a.com/",
            "https://b.com/",
            "https://c.com/",
        ]))
        .unwrap();
        let stats = graph_stats(&g);
        assert_eq!(stats.nodes(NodeKind::Network), 3);
        assert_eq!(stats.edges(EdgeKind::Redirect), 2);
        assert_eq!(stats.chain_length, 3);
        let labels: Vec<_> = g.nodes().iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, ["https://a.com", "https://b.com", "https://c.com"]);
        assert_eq!(g.edges()[0].src, 0);
        assert_eq!(g.edges()[0].dst, 1);
        assert_eq!(g.edges()[1].src, 1);
        assert_eq!(g.edges()[1].dst, 2);
    }

    #[test]
    fn cookie_flow_edges() {
        // b.com writes uid=42; the hop to c.com carries ref=42.
        let mut r = record(&["https://a.com/", "https://b.com/", "https://c.com/?ref=42"]);
        r.storage_events.push(StorageEvent {
            actor_origin: "https://b.com".into(),
            storage_key: "uid".into(),
            storage_value: "42".into(),
            action: StorageAction::Write,
        });
        let g = build_graph(&r).unwrap();
        let b = g.node(NodeKind::Network, "https://b.com").unwrap().node_id;
        let uid = g.node(NodeKind::Storage, "uid").unwrap().node_id;
        let key = g.node(NodeKind::Decoration, "key:ref").unwrap().node_id;
        let val = g.node(NodeKind::Decoration, "value:42").unwrap().node_id;
        let c = g.node(NodeKind::Network, "https://c.com").unwrap().node_id;
        assert!(g.has_edge(b, uid, EdgeKind::Modification));
        assert!(g.has_edge(uid, key, EdgeKind::Access));
        assert!(g.has_edge(key, val, EdgeKind::Access));
        assert!(g.has_edge(c, key, EdgeKind::Access));
        assert_eq!(
            g.node(NodeKind::Network, "https://c.com")
                .unwrap()
                .query_params,
            1
        );
        assert_eq!(g.edges().len(), 6);
    }

    #[test]
    fn short_substrings_do_not_flow() {
        assert!(value_flows("42", "42"));
        assert!(!value_flows("42", "x42y"));
        assert!(value_flows("abcd", "xxabcdxx"));
        assert!(!value_flows("", ""));
    }

    #[test]
    fn revisited_origin_keeps_path() {
        let g = build_graph(&record(&[
            "https://a.com/1",
            "https://b.com/",
            "https://a.com/2",
            "https://c.com/",
        ]))
        .unwrap();
        assert_eq!(graph_stats(&g).edges(EdgeKind::Redirect), 2);
        g.validate().unwrap();
    }

    #[test]
    fn dom_and_js_attach_to_landing() {
        let mut r = record(&["https://a.com/", "https://b.com/"]);
        r.dom_hooks.push(DomHook {
            element_name: "div".into(),
            class_id: "buy".into(),
        });
        r.js_calls.push("setCookie".into());
        let g = build_graph(&r).unwrap();
        let b = g.node(NodeKind::Network, "https://b.com").unwrap().node_id;
        let dom = g.node(NodeKind::Dom, "div.buy").unwrap().node_id;
        let js = g.node(NodeKind::Js, "setCookie").unwrap().node_id;
        assert!(g.has_edge(b, dom, EdgeKind::Access));
        assert!(g.has_edge(b, js, EdgeKind::Access));
    }

    #[test]
    fn broken_chain_rejected() {
        let mut r = record(&["https://a.com/", "https://b.com/"]);
        r.landing_url = "https://z.com/".into();
        assert!(matches!(
            build_graph(&r),
            Err(GraphError::InvalidRecord { .. })
        ));
    }

    #[test]
    fn from_parts_rejects_forked_redirects() {
        let nodes = (0..3)
            .map(|i| GraphNode {
                node_id: i,
                kind: NodeKind::Network,
                label: format!("n{i}"),
                query_params: 0,
            })
            .collect();
        let edges = vec![
            GraphEdge {
                src: 0,
                dst: 1,
                kind: EdgeKind::Redirect,
                order_index: 0,
            },
            GraphEdge {
                src: 0,
                dst: 2,
                kind: EdgeKind::Redirect,
                order_index: 1,
            },
        ];
        assert_eq!(
            InteractionGraph::from_parts("x", nodes, edges, vec![]).unwrap_err(),
            GraphError::RedirectPath
        );
    }
}
