use crate::capacity::{protocol_feasible, ProtocolParams, Slot, Transmission};
use crate::numerics::Pcg32;
use crate::rgg::{build_range_graph, is_connected, NodePlacement};
use crate::{Error, Result};

/// Outcome of the pipelined histogram aggregation experiment.
#[derive(Debug, Clone)]
pub struct HistogramRun {
    pub n: usize,
    pub alphabet: usize,
    pub blocks: usize,
    /// Bits per tree message: `|X| * ceil(log2(n+1))` (one count in 0..=n
    /// per letter).
    pub message_bits: usize,
    /// Spatial-reuse colors used by the edge schedule.
    pub colors: usize,
    /// Longest child chain under the collector.
    pub tree_depth: usize,
    /// Steady-state slots consumed per block: `colors * message_bits`.
    pub slots_per_block: u64,
    /// Total slots for the whole pipelined run.
    pub slots_used: u64,
    /// Blocks per slot; None for the degenerate single-node network.
    pub throughput: Option<f64>,
    /// Per block, per node measurement (regenerable from the seed).
    pub node_values: Vec<Vec<u8>>,
    /// Per block, the histogram decoded at the collector from the actual
    /// message flow.
    pub collector_histograms: Vec<Vec<usize>>,
}

/// Degree cap marking a placement sample as unusable for the log-degree
/// schedule: `6 (ln n + 4)` (the mean degree at the connectivity range is
/// `ln n + 4`).
fn degree_cap(n: usize) -> usize {
    (6.0 * ((n as f64).ln() + 4.0)).ceil() as usize
}

/// Histogram aggregation on a range graph: builds a BFS spanning tree to
/// the collector (node 0), colors tree edges under the protocol model for
/// spatial reuse, pipelines successive measurement blocks up the tree, and
/// checks the collector's decoded histogram block by block.
///
/// Placement samples that are disconnected at range `r` or that exceed the
/// O(log n) degree cap are rejected with a scheme-failure error so the
/// caller can resample.
pub fn histogram_aggregation(
    placement: &NodePlacement,
    r: f64,
    alphabet: usize,
    blocks: usize,
    delta: f64,
    seed: u64,
) -> Result<HistogramRun> {
    if alphabet < 2 {
        return Err(Error::InvalidArgument("alphabet must be >= 2".into()));
    }
    if blocks == 0 {
        return Err(Error::InvalidArgument("need at least one block".into()));
    }
    let n = placement.len();
    let graph = build_range_graph(placement, r)?;
    if !is_connected(&graph)? {
        return Err(Error::SchemeFailure(
            "placement is disconnected at this range; resample".into(),
        ));
    }
    let degrees = graph.degrees();
    let cap = degree_cap(n);
    if let Some((node, &d)) = degrees.iter().enumerate().find(|(_, &d)| d > cap) {
        return Err(Error::SchemeFailure(format!(
            "node {node} has degree {d} > cap {cap}; resample"
        )));
    }

    // BFS spanning tree from the collector; children transmit to parents
    let adj = graph.adjacency();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut order = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                order.push(v);
            }
        }
    }
    let tree_edges: Vec<(usize, usize)> = (1..n).map(|v| (v, parent[v].unwrap())).collect();

    // heights: leaves at 0; node u transmits block b in frame b + height(u)
    let mut height = vec![0usize; n];
    for &v in order.iter().rev() {
        if let Some(p) = parent[v] {
            height[p] = height[p].max(height[v] + 1);
        }
    }
    let tree_depth = height[0];

    // greedy conflict coloring of tree edges under the protocol model
    let guard = 1.0 + delta;
    let conflicts = |a: (usize, usize), b: (usize, usize)| -> bool {
        if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
            return true;
        }
        placement.distance(a.0, b.1) <= guard * placement.distance(a.0, a.1)
            || placement.distance(b.0, a.1) <= guard * placement.distance(b.0, b.1)
    };
    let mut color_of_edge = vec![0usize; tree_edges.len()];
    let mut colors = 0usize;
    for (i, &e) in tree_edges.iter().enumerate() {
        let mut used: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
        for (j, &f) in tree_edges.iter().enumerate().take(i) {
            if conflicts(e, f) {
                used.insert(color_of_edge[j]);
            }
        }
        let mut c = 0;
        while used.contains(&c) {
            c += 1;
        }
        color_of_edge[i] = c;
        colors = colors.max(c + 1);
    }

    // run-time verification: each full color class forms a feasible slot
    let params = ProtocolParams::new(delta, 1.0)?;
    for c in 0..colors {
        let txs: Vec<Transmission> = tree_edges
            .iter()
            .zip(&color_of_edge)
            .filter(|(_, &ec)| ec == c)
            .map(|(&(child, par), _)| Transmission::new(child, par))
            .collect();
        if txs.is_empty() {
            continue;
        }
        let slot = Slot::new(txs)?;
        let check = protocol_feasible(&slot, placement, &params)?;
        if !check.feasible {
            return Err(Error::SchemeFailure(format!(
                "color class {c} violates the protocol model: {:?}",
                check.violations
            )));
        }
    }

    // measurements: one symbol per node per block
    let mut rng = Pcg32::seeded(seed);
    let node_values: Vec<Vec<u8>> = (0..blocks)
        .map(|_| (0..n).map(|_| rng.next_below(alphabet as u64) as u8).collect())
        .collect();

    // pipelined message flow: subtree histogram messages, frame by frame
    let message_bits = alphabet * bits_for_counts(n);
    let mut collector_histograms = Vec::with_capacity(blocks);
    // subtree histogram per (block, node), built in arrival order
    let mut inbox: Vec<Vec<Vec<usize>>> =
        vec![vec![vec![0usize; alphabet]; n]; blocks];
    for (b, values) in node_values.iter().enumerate() {
        for (v, &x) in values.iter().enumerate() {
            inbox[b][v][x as usize] += 1;
        }
    }
    let max_child_height = tree_edges
        .iter()
        .map(|&(child, _)| height[child])
        .max()
        .unwrap_or(0);
    let frames = if tree_edges.is_empty() {
        0
    } else {
        blocks + max_child_height
    };
    for frame in 0..frames {
        // transmissions of this frame: node u sends block (frame - height(u))
        for &v in order.iter().rev() {
            if v == 0 {
                continue;
            }
            if frame < height[v] {
                continue;
            }
            let b = frame - height[v];
            if b >= blocks {
                continue;
            }
            let p = parent[v].unwrap();
            // children of v sent block b in earlier frames (height < h(v))
            let msg = inbox[b][v].clone();
            for (slot_count, add) in inbox[b][p].iter_mut().zip(&msg) {
                *slot_count += add;
            }
        }
    }
    for b in 0..blocks {
        collector_histograms.push(inbox[b][0].clone());
    }

    let slots_per_block = (colors * message_bits) as u64;
    let slots_used = frames as u64 * slots_per_block;
    let throughput = if tree_edges.is_empty() {
        None
    } else {
        Some(blocks as f64 / slots_used as f64)
    };
    Ok(HistogramRun {
        n,
        alphabet,
        blocks,
        message_bits,
        colors,
        tree_depth,
        slots_per_block,
        slots_used,
        throughput,
        node_values,
        collector_histograms,
    })
}

/// Bits per count in 0..=n: `ceil(log2(n+1))`.
fn bits_for_counts(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgg::{critical_range, place_uniform, Domain, NodePlacement};

    fn brute_histogram(values: &[u8], alphabet: usize) -> Vec<usize> {
        let mut h = vec![0usize; alphabet];
        for &v in values {
            h[v as usize] += 1;
        }
        h
    }

    fn usable_placement(n: usize, base_seed: u64) -> (NodePlacement, f64) {
        let r = critical_range(n, 4.0).unwrap();
        for attempt in 0..50 {
            let p = place_uniform(n, Domain::UnitSquare, base_seed + attempt).unwrap();
            if histogram_aggregation(&p, r, 2, 1, 1.0, 0).is_ok() {
                return (p, r);
            }
        }
        panic!("no usable placement found");
    }

    #[test]
    fn bits_per_count() {
        assert_eq!(bits_for_counts(3), 2);
        assert_eq!(bits_for_counts(4), 3);
        assert_eq!(bits_for_counts(1000), 10);
    }

    #[test]
    fn single_node_degenerate() {
        let p = place_uniform(1, Domain::UnitSquare, 3).unwrap();
        let run = histogram_aggregation(&p, 0.5, 2, 1, 1.0, 9).unwrap();
        assert_eq!(run.slots_used, 0);
        assert!(run.throughput.is_none());
        assert_eq!(run.collector_histograms[0], brute_histogram(&run.node_values[0], 2));
    }

    #[test]
    fn three_node_path_hand_count() {
        // line at x = 0.1, 0.3, 0.5 with r = 0.25: edges (0,1), (1,2) share
        // node 1, so 2 colors; |X| = 2, counts need ceil(log2 4) = 2 bits:
        // slots per block = 2 * 2 * 2 = 8
        let p = NodePlacement::from_points(
            vec![(0.1, 0.5), (0.3, 0.5), (0.5, 0.5)],
            Domain::UnitSquare,
        )
        .unwrap();
        let run = histogram_aggregation(&p, 0.25, 2, 3, 1.0, 5).unwrap();
        assert_eq!(run.colors, 2);
        assert_eq!(run.message_bits, 4);
        assert_eq!(run.slots_per_block, 8);
        for b in 0..3 {
            assert_eq!(
                run.collector_histograms[b],
                brute_histogram(&run.node_values[b], 2)
            );
        }
    }

    #[test]
    fn disconnected_placement_rejected() {
        let p = NodePlacement::from_points(
            vec![(0.1, 0.1), (0.9, 0.9)],
            Domain::UnitSquare,
        )
        .unwrap();
        assert!(matches!(
            histogram_aggregation(&p, 0.1, 2, 1, 1.0, 0),
            Err(Error::SchemeFailure(_))
        ));
    }

    #[test]
    fn collector_matches_brute_force_random_network() {
        let (p, r) = usable_placement(128, 70);
        let run = histogram_aggregation(&p, r, 3, 5, 1.0, 1234).unwrap();
        for b in 0..5 {
            assert_eq!(
                run.collector_histograms[b],
                brute_histogram(&run.node_values[b], 3),
                "block {b}"
            );
        }
        assert!(run.colors >= 1);
        assert!(run.throughput.unwrap() > 0.0);
        // pipelining: per-block steady-state cost matches colors * bits
        assert_eq!(run.slots_per_block, (run.colors * run.message_bits) as u64);
    }

    #[test]
    fn deterministic_per_seed() {
        let (p, r) = usable_placement(64, 500);
        let a = histogram_aggregation(&p, r, 2, 3, 1.0, 7).unwrap();
        let b = histogram_aggregation(&p, r, 2, 3, 1.0, 7).unwrap();
        assert_eq!(a.node_values, b.node_values);
        assert_eq!(a.slots_used, b.slots_used);
    }
}
