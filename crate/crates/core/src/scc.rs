//! Strongly connected components of a graph given as adjacency lists.

use petgraph::algo::kosaraju_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components in reverse topological order of the
/// condensation (sinks first), each sorted. The traversal is iterative, so
/// deep graphs do not exhaust the stack.
pub fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(adj.len(), 0);
    for _ in adj {
        g.add_node(());
    }
    for (v, succ) in adj.iter().enumerate() {
        for &w in succ {
            g.add_edge(NodeIndex::new(v), NodeIndex::new(w), ());
        }
    }
    kosaraju_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut comp: Vec<usize> = comp.into_iter().map(NodeIndex::index).collect();
            comp.sort_unstable();
            comp
        })
        .collect()
}

/// Components with no edge leaving them.
pub fn bottom_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = sccs(adj);
    let mut comp_of = vec![0; adj.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == *i)))
        .map(|(_, c)| c.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closure(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn small_graph() {
        // 0 <-> 1 -> 2 <-> 3, 4 isolated
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let mut comps = sccs(&adj);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3], vec![4]]);
        let mut bottom = bottom_sccs(&adj);
        bottom.sort();
        assert_eq!(bottom, vec![vec![2, 3], vec![4]]);
    }

    proptest! {
        #[test]
        fn matches_mutual_reachability(edges in proptest::collection::vec((0usize..8, 0usize..8), 0..20)) {
            let mut adj = vec![Vec::new(); 8];
            for (a, b) in edges {
                adj[a].push(b);
            }
            let reach: Vec<Vec<bool>> = (0..8).map(|v| closure(&adj, v)).collect();
            let comps = sccs(&adj);
            let mut comp_of = vec![0; 8];
            for (i, c) in comps.iter().enumerate() {
                for &v in c { comp_of[v] = i; }
            }
            for u in 0..8 {
                for v in 0..8 {
                    prop_assert_eq!(comp_of[u] == comp_of[v], reach[u][v] && reach[v][u]);
                }
            }
            let bottom: Vec<usize> = bottom_sccs(&adj).concat();
            for u in 0..8 {
                let is_bottom = (0..8).all(|v| !reach[u][v] || reach[v][u]);
                prop_assert_eq!(bottom.contains(&u), is_bottom);
            }
        }
    }
}
