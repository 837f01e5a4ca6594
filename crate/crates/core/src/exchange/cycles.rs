use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::Party;
use crate::model::Composition;
use crate::transform::STATE_TOLERANCE;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// `from` hands `item` to `to`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TradeEdge {
    pub from: String,
    pub to: String,
    pub item: String,
    /// Change in the giver's state from letting go of `item`.
    pub giver_delta: f64,
    /// Change in the receiver's state from gaining `item`.
    pub receiver_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TradeGraph {
    nodes: Vec<String>,
    edges: Vec<TradeEdge>,
}

impl TradeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(i) = self.nodes.iter().position(|n| n == id) {
            return i;
        }
        self.nodes.push(String::from(id));
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, edge: TradeEdge) {
        self.add_node(&edge.from);
        self.add_node(&edge.to);
        self.edges.push(edge);
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TradeEdge] {
        &self.edges
    }

    fn index(&self, id: &str) -> usize {
        self.nodes.iter().position(|n| n == id).expect("edge endpoints are nodes")
    }
}

/// A closed exchange loop.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Cycle {
    /// Members in traversal order, starting at the lowest node index.
    pub members: Vec<String>,
    pub edges: Vec<TradeEdge>,
    /// Each member's return: what it receives plus what it gives up.
    pub returns: BTreeMap<String, f64>,
    /// No member loses over the loop.
    pub self_sustaining: bool,
}

/// Every node-simple directed cycle of at most `max_len` edges. Parallel
/// edges yield distinct cycles. Cycles are listed by starting node, then in
/// edge insertion order.
pub fn detect_cycles(graph: &TradeGraph, max_len: usize) -> Vec<Cycle> {
    let n = graph.nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for (ei, e) in graph.edges.iter().enumerate() {
        let (f, t) = (graph.index(&e.from), graph.index(&e.to));
        if f != t {
            adj[f].push((t, ei));
        }
    }

    let mut found = Vec::new();
    let mut on_path = alloc::vec![false; n];
    let mut path_edges: Vec<usize> = Vec::new();
    for start in 0..n {
        on_path[start] = true;
        walk(graph, &adj, start, start, max_len, &mut on_path, &mut path_edges, &mut found);
        on_path[start] = false;
    }
    found
}

#[allow(clippy::too_many_arguments)]
fn walk(
    graph: &TradeGraph,
    adj: &[Vec<(usize, usize)>],
    start: usize,
    at: usize,
    max_len: usize,
    on_path: &mut [bool],
    path_edges: &mut Vec<usize>,
    found: &mut Vec<Cycle>,
) {
    if path_edges.len() >= max_len {
        return;
    }
    for &(next, ei) in &adj[at] {
        if next == start {
            path_edges.push(ei);
            found.push(build_cycle(graph, path_edges));
            path_edges.pop();
        } else if next > start && !on_path[next] {
            on_path[next] = true;
            path_edges.push(ei);
            walk(graph, adj, start, next, max_len, on_path, path_edges, found);
            path_edges.pop();
            on_path[next] = false;
        }
    }
}

fn build_cycle(graph: &TradeGraph, edge_ids: &[usize]) -> Cycle {
    let edges: Vec<TradeEdge> = edge_ids.iter().map(|&i| graph.edges[i].clone()).collect();
    let members: Vec<String> = edges.iter().map(|e| e.from.clone()).collect();
    let mut returns: BTreeMap<String, f64> = members.iter().map(|m| (m.clone(), 0.0)).collect();
    for e in &edges {
        *returns.get_mut(&e.from).expect("member") += e.giver_delta;
        *returns.get_mut(&e.to).expect("member") += e.receiver_delta;
    }
    let self_sustaining = returns.values().all(|r| *r >= -STATE_TOLERANCE);
    Cycle {
        members,
        edges,
        returns,
        self_sustaining,
    }
}

/// Possible single-composition hand-overs between parties: an edge for every
/// holding whose receiver would strictly gain from it.
pub fn trade_graph(parties: &[Party]) -> TradeGraph {
    let mut g = TradeGraph::new();
    for p in parties {
        g.add_node(&p.id);
    }
    for giver in parties {
        let before = giver.state();
        for (i, item) in giver.holdings.iter().enumerate() {
            let mut rest: Vec<Composition> = giver.holdings.clone();
            rest.remove(i);
            let giver_delta = giver.state_with(&rest) - before;
            for receiver in parties {
                if receiver.id == giver.id {
                    continue;
                }
                let mut more = receiver.holdings.clone();
                more.push(item.clone());
                let receiver_delta = receiver.state_with(&more) - receiver.state();
                if receiver_delta > STATE_TOLERANCE {
                    g.add_edge(TradeEdge {
                        from: giver.id.clone(),
                        to: receiver.id.clone(),
                        item: item.id.clone(),
                        giver_delta,
                        receiver_delta,
                    });
                }
            }
        }
    }
    g
}
