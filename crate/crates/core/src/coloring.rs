//! Assignment of SOPIs to encoding nodes over a conflict graph, and the
//! client-side stream dedup rule.
//!
//! Nodes that some client might download from concurrently are joined by an
//! edge; giving edge endpoints different SOPIs (colors) guarantees such a
//! client never fetches two identically-permuted streams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::sopi::Sopi;

/// Conflict graph over named encoding nodes. Undirected, no self-loops,
/// edges deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

impl NodeGraph {
    pub fn new(nodes: Vec<String>, edges: &[(String, String)]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateNode(name.clone()));
            }
        }
        let mut resolved = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let ia = *index.get(a).ok_or_else(|| Error::UnknownNode(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownNode(b.clone()))?;
            if ia == ib {
                return Err(Error::SelfLoop(a.clone()));
            }
            resolved.push((ia.min(ib), ia.max(ib)));
        }
        resolved.sort_unstable();
        resolved.dedup();
        Ok(Self {
            nodes,
            edges: resolved,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.nodes.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Erdős–Rényi graph over `n` numbered nodes with edge probability
    /// `p`; handy for simulations and stress tests.
    pub fn random(n: usize, p: f64, rng: &mut SplitMix64) -> Self {
        let nodes: Vec<String> = (0..n).map(|i| format!("node{i:03}")).collect();
        let mut edges = Vec::new();
        let threshold = (p.clamp(0.0, 1.0) * (1u64 << 32) as f64) as u64;
        for a in 0..n {
            for b in a + 1..n {
                if rng.next_below(1 << 32) < threshold {
                    edges.push((a, b));
                }
            }
        }
        Self { nodes, edges }
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (self.nodes[a].clone(), self.nodes[b].clone()))
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
        Self::new(file.nodes, &file.edges)
    }
}

/// A SOPI per node plus the number of distinct SOPIs spent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub assignments: BTreeMap<String, Sopi>,
    pub colors_used: usize,
}

impl Assignment {
    pub fn get(&self, node: &str) -> Option<Sopi> {
        self.assignments.get(node).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("assignment serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))
    }
}

/// Greedy coloring in descending-degree order (ties broken by node name):
/// each node takes the lowest-index palette SOPI not used by an
/// already-colored neighbor. Needs at most max_degree + 1 colors.
pub fn greedy_color(graph: &NodeGraph, palette: &[Sopi]) -> Result<Assignment> {
    if palette.is_empty() {
        return Err(Error::EmptyPalette);
    }
    let degrees = graph.degrees();
    let adj = graph.neighbors();
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by(|&a, &b| {
        degrees[b]
            .cmp(&degrees[a])
            .then_with(|| graph.nodes[a].cmp(&graph.nodes[b]))
    });

    let mut color_of: Vec<Option<usize>> = vec![None; graph.node_count()];
    let mut max_color = 0usize;
    for &v in &order {
        let mut used = vec![false; max_color + 2];
        for &w in &adj[v] {
            if let Some(c) = color_of[w] {
                if c < used.len() {
                    used[c] = true;
                }
            }
        }
        let color = (0..).find(|&c| c >= used.len() || !used[c]).expect("unbounded");
        if color >= palette.len() {
            return Err(Error::InsufficientPalette {
                node: graph.nodes[v].clone(),
                have: palette.len(),
            });
        }
        color_of[v] = Some(color);
        max_color = max_color.max(color);
    }

    let mut assignments = BTreeMap::new();
    let mut seen = vec![false; palette.len()];
    for (v, c) in color_of.iter().enumerate() {
        let c = c.expect("all nodes colored");
        seen[c] = true;
        assignments.insert(graph.nodes[v].clone(), palette[c]);
    }
    Ok(Assignment {
        assignments,
        colors_used: seen.iter().filter(|&&s| s).count(),
    })
}

/// Edges whose endpoints hold the same SOPI; empty iff the assignment is a
/// proper coloring. Nodes missing from the assignment are reported too.
pub fn validate_assignment(graph: &NodeGraph, assignment: &Assignment) -> Vec<(String, String)> {
    let mut violations = Vec::new();
    for (a, b) in graph.edges() {
        match (assignment.assignments.get(a), assignment.assignments.get(b)) {
            (Some(sa), Some(sb)) if sa != sb => {}
            _ => violations.push((a.to_string(), b.to_string())),
        }
    }
    violations
}

/// Client dedup rule: keep the first offer per distinct SOPI, preserving
/// input order.
pub fn select_streams(offers: &[(String, Sopi)]) -> Vec<(String, Sopi)> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for (node, sopi) in offers {
        if !seen.contains(sopi) {
            seen.push(*sopi);
            out.push((node.clone(), *sopi));
        }
    }
    out
}
