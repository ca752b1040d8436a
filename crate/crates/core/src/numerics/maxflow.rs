use crate::rgg::Graph;

/// Edmonds-Karp max flow with unit capacities on an undirected edge list
/// (each undirected edge becomes a pair of unit-capacity arcs).
pub fn max_flow_unit(n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> usize {
    assert!(s < n && t < n && s != t);
    // arc lists: cap/flow per arc plus reverse index
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut to: Vec<usize> = Vec::with_capacity(edges.len() * 2);
    let mut cap: Vec<i32> = Vec::with_capacity(edges.len() * 2);
    let add_arc = |head: &mut Vec<Vec<usize>>,
                       to: &mut Vec<usize>,
                       cap: &mut Vec<i32>,
                       u: usize,
                       v: usize,
                       c: i32| {
        head[u].push(to.len());
        to.push(v);
        cap.push(c);
    };
    for &(u, v) in edges {
        // undirected unit edge: one unit each way, residuals interleaved
        add_arc(&mut head, &mut to, &mut cap, u, v, 1);
        add_arc(&mut head, &mut to, &mut cap, v, u, 1);
    }
    let mut flow = 0usize;
    loop {
        // BFS for a shortest augmenting path
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s);
        pred[s] = Some(usize::MAX);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &a in &head[u] {
                let v = to[a];
                if cap[a] > 0 && pred[v].is_none() {
                    pred[v] = Some(a);
                    queue.push_back(v);
                }
            }
        }
        if pred[t].is_none() {
            return flow;
        }
        // augment by one unit
        let mut v = t;
        while v != s {
            let a = pred[v].unwrap();
            cap[a] -= 1;
            cap[a ^ 1] += 1;
            v = to[a ^ 1];
        }
        flow += 1;
    }
}

/// Edge connectivity of an undirected graph: the minimum over all s-t
/// max-flow values with s fixed at node 0. Returns 0 for disconnected input.
pub fn edge_connectivity(graph: &Graph) -> usize {
    let n = graph.node_count();
    if n <= 1 {
        return 0;
    }
    let edges = graph.edges();
    let mut kappa = usize::MAX;
    for t in 1..n {
        kappa = kappa.min(max_flow_unit(n, edges, 0, t));
        if kappa == 0 {
            return 0;
        }
    }
    kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgg::{complete_graph, cycle_graph, path_graph};

    #[test]
    fn tree_has_connectivity_one() {
        assert_eq!(edge_connectivity(&path_graph(6)), 1);
    }

    #[test]
    fn cycle_has_connectivity_two() {
        assert_eq!(edge_connectivity(&cycle_graph(7)), 2);
    }

    #[test]
    fn complete_graph_k5() {
        // oracle: removing any 3 edges of K5 leaves it connected
        let k5 = complete_graph(5);
        assert_eq!(edge_connectivity(&k5), 4);
        let edges = k5.edges().to_vec();
        let m = edges.len();
        for a in 0..m {
            for b in (a + 1)..m {
                for c in (b + 1)..m {
                    let kept: Vec<(usize, usize)> = edges
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != a && *i != b && *i != c)
                        .map(|(_, e)| *e)
                        .collect();
                    let g = Graph::undirected(5, kept).unwrap();
                    assert!(crate::rgg::is_connected(&g).unwrap());
                }
            }
        }
    }

    #[test]
    fn disconnected_graph_is_zero() {
        let g = Graph::undirected(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(edge_connectivity(&g), 0);
    }
}
