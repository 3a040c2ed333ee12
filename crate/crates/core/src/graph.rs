//! Directed-graph helpers over dense `0..n` node ids.

use std::collections::VecDeque;

use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components of the graph given by successor lists.
pub fn strongly_connected_components(successors: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut graph = DiGraph::<(), ()>::with_capacity(successors.len(), 0);
    for _ in 0..successors.len() {
        graph.add_node(());
    }
    for (u, succ) in successors.iter().enumerate() {
        for &v in succ {
            graph.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
        }
    }
    petgraph::algo::tarjan_scc(&graph)
        .into_iter()
        .map(|comp| {
            let mut ids: Vec<usize> = comp.into_iter().map(|n| n.index()).collect();
            ids.sort_unstable();
            ids
        })
        .collect()
}

/// Nodes reachable from any of `sources` (sources included).
pub fn reachable(successors: &[Vec<usize>], sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; successors.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &successors[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Nodes from which some node of `targets` is reachable (targets included).
pub fn can_reach(successors: &[Vec<usize>], targets: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut predecessors = vec![Vec::new(); successors.len()];
    for (u, succ) in successors.iter().enumerate() {
        for &v in succ {
            predecessors[v].push(u);
        }
    }
    reachable(&predecessors, targets)
}
