use super::tree_code::{tree_zero_error_codes, CodingMode};
use super::{FunctionTable, NetworkGraph, Partition};
use crate::numerics::{lp_solve, Constraint, ConstraintOp, LinearProgram, LpOutcome, LpSense};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// One cut inequality: the rates on `cut_edges` must sum to at least
/// `min_bits`.
#[derive(Debug, Clone)]
pub struct CutBound {
    pub cut_edges: Vec<(usize, usize)>,
    pub min_bits: f64,
    /// A node subset witnessing the bound.
    pub subset: Vec<usize>,
}

const MAX_CUT_NODES: usize = 20;

/// Disambiguation partition of the arguments in `args` against everything
/// else, plus the class probabilities when a distribution is given.
fn cut_partition(
    f: &FunctionTable,
    args: &[usize],
    dist: Option<&[f64]>,
) -> (Partition, Vec<f64>) {
    let q = f.alphabet();
    let m = f.n_args();
    let sub_total = q.pow(args.len() as u32);
    let mut signatures: Vec<Vec<i64>> = vec![Vec::new(); sub_total];
    let mut probs = vec![0.0f64; sub_total];
    let mut tuple = vec![0usize; m];
    for idx in 0..f.table_len() {
        let mut t = idx;
        for k in (0..m).rev() {
            tuple[k] = t % q;
            t /= q;
        }
        let mut sub = 0usize;
        for &a in args {
            sub = sub * q + tuple[a];
        }
        signatures[sub].push(f.value_by_index(idx));
        if let Some(p) = dist {
            probs[sub] += p[idx];
        }
    }
    let partition = Partition::from_signatures(signatures);
    let mut class_probs = vec![0.0f64; partition.num_classes];
    for (sub, &c) in partition.class_of.iter().enumerate() {
        class_probs[c] += probs[sub];
    }
    (partition, class_probs)
}

/// Cut-set outer bound on the rate region of a DAG: for every node subset S
/// avoiding the collector, the rates of the edges leaving S must cover the
/// bits needed to disambiguate S's joint inputs (log2 of the class count in
/// the worst case, the class-distribution entropy in the average case).
/// Bounds with identical edge sets are merged keeping the largest
/// requirement.
pub fn dag_cut_outer_bound(
    network: &NetworkGraph,
    f: &FunctionTable,
    mode: &CodingMode,
) -> Result<Vec<CutBound>> {
    if network.informed().len() != f.n_args() {
        return Err(Error::InvalidArgument("informed/arity mismatch".into()));
    }
    network.topo_order()?; // rejects cyclic input
    let n = network.n();
    if n > MAX_CUT_NODES {
        return Err(Error::ResourceLimit(format!(
            "cut enumeration caps at {MAX_CUT_NODES} nodes, got {n}"
        )));
    }
    mode.validate(f.table_len())?;
    let dist = match mode {
        CodingMode::Worst => None,
        CodingMode::Average(p) => Some(p.as_slice()),
    };
    let others: Vec<usize> = (0..n).filter(|&v| v != network.collector()).collect();
    let mut best: BTreeMap<Vec<(usize, usize)>, (f64, Vec<usize>)> = BTreeMap::new();
    for mask in 1u64..(1 << others.len()) {
        let subset: Vec<usize> = others
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let in_subset = |v: usize| subset.binary_search(&v).is_ok();
        let cut: Vec<(usize, usize)> = network
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| in_subset(a) && !in_subset(b))
            .collect();
        let args: Vec<usize> = network
            .informed()
            .iter()
            .enumerate()
            .filter(|(_, &v)| in_subset(v))
            .map(|(k, _)| k)
            .collect();
        let bits = if args.is_empty() {
            0.0
        } else {
            let (partition, class_probs) = cut_partition(f, &args, dist);
            match mode {
                CodingMode::Worst => (partition.num_classes as f64).log2(),
                CodingMode::Average(_) => class_probs
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * p.log2())
                    .sum(),
            }
        };
        match best.entry(cut) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert((bits, subset));
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                if bits > e.get().0 {
                    *e.get_mut() = (bits, subset);
                }
            }
        }
    }
    Ok(best
        .into_iter()
        .map(|(cut_edges, (min_bits, subset))| CutBound {
            cut_edges,
            min_bits,
            subset,
        })
        .collect())
}

/// Rate points achievable by activating tree subsets of a DAG's edges, plus
/// a hull membership test (time-sharing between trees; extra rate is always
/// allowed, so membership is against the upward closure of the hull).
#[derive(Debug, Clone)]
pub struct TreeRegion {
    /// Edge order shared by all rate points.
    pub edge_order: Vec<(usize, usize)>,
    /// One rate point per activated tree.
    pub points: Vec<Vec<f64>>,
    /// The activated edge subset behind each point.
    pub trees: Vec<Vec<(usize, usize)>>,
}

impl TreeRegion {
    /// Is `rates` achievable by time-sharing (allowing surplus rate)?
    pub fn hull_contains(&self, rates: &[f64], tol: f64) -> Result<bool> {
        if rates.len() != self.edge_order.len() {
            return Err(Error::InvalidArgument("rate vector arity mismatch".into()));
        }
        let t = self.points.len();
        let mut constraints = Vec::new();
        for (e, &r) in rates.iter().enumerate() {
            let coeffs: Vec<f64> = self.points.iter().map(|p| p[e]).collect();
            constraints.push(Constraint::new(coeffs, ConstraintOp::Le, r + tol));
        }
        constraints.push(Constraint::new(vec![1.0; t], ConstraintOp::Eq, 1.0));
        for k in 0..t {
            let mut coeffs = vec![0.0; t];
            coeffs[k] = 1.0;
            constraints.push(Constraint::new(coeffs, ConstraintOp::Ge, 0.0));
        }
        let lp = LinearProgram {
            num_vars: t,
            objective: vec![0.0; t],
            constraints,
        };
        match lp_solve(&lp, LpSense::Minimize)? {
            LpOutcome::Optimal { .. } => Ok(true),
            LpOutcome::Infeasible => Ok(false),
            LpOutcome::Unbounded => Ok(true),
        }
    }
}

const MAX_REGION_EDGES: usize = 20;

/// Enumerates all tree activations of a DAG (each active node forwards on
/// exactly one out-edge, every informed node reaches the collector, no
/// superfluous active edges) and prices each with the zero-error tree code.
pub fn tree_achievable_region(
    network: &NetworkGraph,
    f: &FunctionTable,
    mode: &CodingMode,
) -> Result<TreeRegion> {
    if network.informed().len() != f.n_args() {
        return Err(Error::InvalidArgument("informed/arity mismatch".into()));
    }
    network.topo_order()?;
    let edges = network.edges().to_vec();
    if edges.len() > MAX_REGION_EDGES {
        return Err(Error::ResourceLimit(format!(
            "tree enumeration caps at {MAX_REGION_EDGES} edges"
        )));
    }
    let n = network.n();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut trees: Vec<Vec<(usize, usize)>> = Vec::new();
    'subsets: for mask in 0u64..(1 << edges.len()) {
        let active: Vec<(usize, usize)> = edges
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        // each node at most one active out-edge
        let mut out: Vec<Option<usize>> = vec![None; n];
        for &(a, b) in &active {
            if out[a].replace(b).is_some() {
                continue 'subsets;
            }
        }
        if out[network.collector()].is_some() {
            continue;
        }
        // every informed node must reach the collector; track used edges
        let mut used: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
        for &v in network.informed() {
            let mut cur = v;
            let mut steps = 0;
            while cur != network.collector() {
                let Some(next) = out[cur] else {
                    continue 'subsets;
                };
                used.insert((cur, next));
                cur = next;
                steps += 1;
                if steps > n {
                    continue 'subsets; // cycle
                }
            }
        }
        // no superfluous edges
        if used.len() != active.len() {
            continue;
        }
        let tree = NetworkGraph::new(n, active.clone(), network.collector(),
                                     network.informed().to_vec())?;
        let code = tree_zero_error_codes(&tree, f, mode)?;
        let rate_by_edge: BTreeMap<(usize, usize), f64> = code
            .edges
            .iter()
            .map(|e| (e.edge, e.rate_bits))
            .collect();
        let point: Vec<f64> = edges
            .iter()
            .map(|e| rate_by_edge.get(e).copied().unwrap_or(0.0))
            .collect();
        if !points.contains(&point) {
            points.push(point);
            trees.push(active);
        }
    }
    if points.is_empty() {
        return Err(Error::Infeasible(
            "no tree activation spans the informed nodes".into(),
        ));
    }
    Ok(TreeRegion {
        edge_order: edges,
        points,
        trees,
    })
}

/// Outcome of running the block-splitting parity scheme on a DAG.
#[derive(Debug, Clone)]
pub struct DagParityOutcome {
    /// Bits sent per edge.
    pub edge_bits: BTreeMap<(usize, usize), usize>,
    /// The parity block computed at the collector.
    pub collector_block: Vec<u8>,
}

/// Block-splitting parity computation on a DAG: every node XORs, per block
/// instance, the bits it received with its own bit, then splits its active
/// instances into consecutive segments routed to its out-edges according to
/// the split plan (fractions per out-edge in sorted-target order; a node
/// with one out-edge may omit its entry). The collector must end up with
/// every instance; the result equals the parity of all informed blocks.
pub fn dag_parity_scheme(
    network: &NetworkGraph,
    blocks: &BTreeMap<usize, Vec<u8>>,
    split: &BTreeMap<usize, Vec<f64>>,
) -> Result<DagParityOutcome> {
    let order = network.topo_order()?;
    let informed: std::collections::BTreeSet<usize> = network.informed().iter().copied().collect();
    if blocks.keys().any(|v| !informed.contains(v)) || informed.iter().any(|v| !blocks.contains_key(v))
    {
        return Err(Error::InvalidArgument(
            "blocks must be given for exactly the informed nodes".into(),
        ));
    }
    let mut block_len = None;
    for (v, b) in blocks {
        if b.iter().any(|&bit| bit > 1) {
            return Err(Error::InvalidArgument(format!("non-binary block at node {v}")));
        }
        match block_len {
            None => block_len = Some(b.len()),
            Some(l) if l == b.len() => {}
            _ => return Err(Error::InvalidArgument("block lengths differ".into())),
        }
    }
    let n_inst = block_len.ok_or_else(|| Error::InvalidArgument("no informed node".into()))?;
    // accumulated (instance -> partial parity) per node
    let mut acc: Vec<BTreeMap<usize, u8>> = vec![BTreeMap::new(); network.n()];
    for (&v, b) in blocks {
        for (t, &bit) in b.iter().enumerate() {
            acc[v].insert(t, bit);
        }
    }
    let mut edge_bits: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(a, b) in network.edges() {
        edge_bits.insert((a, b), 0);
    }
    for &v in &order {
        if v == network.collector() {
            continue;
        }
        let mut outs = network.out_edges(v);
        outs.sort_unstable();
        let active: Vec<(usize, u8)> = acc[v].iter().map(|(&t, &bit)| (t, bit)).collect();
        if active.is_empty() {
            continue;
        }
        if outs.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "node {v} holds bits but has no out-edge"
            )));
        }
        let fractions: Vec<f64> = match split.get(&v) {
            Some(f) => f.clone(),
            None if outs.len() == 1 => vec![1.0],
            None => {
                return Err(Error::InvalidArgument(format!(
                    "node {v} has {} out-edges but no split entry",
                    outs.len()
                )))
            }
        };
        if fractions.len() != outs.len() {
            return Err(Error::InvalidArgument(format!(
                "split entry for node {v} has {} fractions for {} out-edges",
                fractions.len(),
                outs.len()
            )));
        }
        if fractions.iter().any(|&x| x < 0.0)
            || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidArgument(format!(
                "split fractions for node {v} must be nonnegative and sum to 1"
            )));
        }
        // integral consecutive segments over the active instance list
        let mut sizes = Vec::with_capacity(fractions.len());
        for &frac in &fractions {
            let exact = frac * active.len() as f64;
            let rounded = exact.round();
            if (exact - rounded).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "split {frac} of {} instances at node {v} is not integral",
                    active.len()
                )));
            }
            sizes.push(rounded as usize);
        }
        let mut cursor = 0usize;
        for (&edge, &size) in outs.iter().zip(&sizes) {
            for &(t, bit) in &active[cursor..cursor + size] {
                let dst = &mut acc[edge.1];
                match dst.entry(t) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(bit);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() ^= bit;
                    }
                }
            }
            *edge_bits.get_mut(&edge).unwrap() += size;
            cursor += size;
        }
        acc[v].clear();
    }
    let collector = network.collector();
    if acc[collector].len() != n_inst {
        return Err(Error::InvalidArgument(format!(
            "split plan delivered {} of {} instances to the collector",
            acc[collector].len(),
            n_inst
        )));
    }
    let collector_block: Vec<u8> = (0..n_inst).map(|t| acc[collector][&t]).collect();
    Ok(DagParityOutcome {
        edge_bits,
        collector_block,
    })
}

/// The canonical 3-node two-path DAG used by the arithmetic-sum rate-region
/// example: collector 0, informed nodes 1 and 2, edges 1->0, 2->0, 2->1.
pub fn counterexample_network() -> NetworkGraph {
    NetworkGraph::new(3, vec![(1, 0), (2, 0), (2, 1)], 0, vec![1, 2]).unwrap()
}
