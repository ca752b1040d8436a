use super::{FunctionTable, NetworkGraph};
use crate::{Error, Result};

/// Which argument of a two-argument function an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgSide {
    First,
    Second,
}

/// How codes are costed: worst case, or average case under a joint
/// distribution over all informed inputs (strictly positive, summing to 1).
#[derive(Debug, Clone)]
pub enum CodingMode {
    Worst,
    Average(Vec<f64>),
}

impl CodingMode {
    pub(crate) fn validate(&self, table_len: usize) -> Result<()> {
        if let CodingMode::Average(p) = self {
            if p.len() != table_len {
                return Err(Error::InvalidArgument(format!(
                    "distribution length {} does not match table {table_len}",
                    p.len()
                )));
            }
            if p.iter().any(|&q| q <= 0.0) {
                return Err(Error::InvalidArgument(
                    "average-case coding requires a strictly positive joint distribution \
                     (with zeros the optimal encoder is NP-hard)"
                        .into(),
                ));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "distribution sums to {s}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// A partition of `0..domain` into classes numbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub class_of: Vec<usize>,
    pub num_classes: usize,
}

impl Partition {
    pub(crate) fn from_signatures<T: Ord>(signatures: Vec<T>) -> Self {
        let mut seen: std::collections::BTreeMap<&T, usize> = std::collections::BTreeMap::new();
        let mut class_of = Vec::with_capacity(signatures.len());
        for sig in &signatures {
            let next = seen.len();
            let id = *seen.entry(sig).or_insert(next);
            class_of.push(id);
        }
        Partition {
            num_classes: seen.len(),
            class_of,
        }
    }

    /// Representative (smallest member) per class.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = vec![usize::MAX; self.num_classes];
        for (idx, &c) in self.class_of.iter().enumerate() {
            if reps[c] == usize::MAX {
                reps[c] = idx;
            }
        }
        reps
    }
}

/// The coarsest zero-error-feasible partition of one argument's alphabet of
/// a two-argument function: symbols are merged iff no value of the other
/// argument separates them.
pub fn greedy_reduce(f: &FunctionTable, side: ArgSide, mode: &CodingMode) -> Result<Partition> {
    if f.n_args() != 2 {
        return Err(Error::InvalidArgument("greedy_reduce needs a 2-argument function".into()));
    }
    mode.validate(f.table_len())?;
    let q = f.alphabet();
    let signatures: Vec<Vec<i64>> = (0..q)
        .map(|x| {
            (0..q)
                .map(|y| match side {
                    ArgSide::First => f.value(&[x, y]).unwrap(),
                    ArgSide::Second => f.value(&[y, x]).unwrap(),
                })
                .collect()
        })
        .collect();
    Ok(Partition::from_signatures(signatures))
}

/// The code on one tree edge: the partition of the subtree's joint input
/// alphabet plus concrete codewords (fixed-length in the worst case,
/// minimum-redundancy prefix code in the average case).
#[derive(Debug, Clone)]
pub struct EdgeCode {
    pub edge: (usize, usize),
    /// Argument positions (indices into `informed`) carried by this edge's
    /// subtree, ascending.
    pub subtree_args: Vec<usize>,
    /// Class id per joint subtree assignment (big-endian over
    /// `subtree_args`).
    pub partition: Partition,
    pub codewords: Vec<Vec<bool>>,
    /// Amortized rate in bits/instance: `log2(classes)` for worst case,
    /// expected prefix-code length for average case.
    pub rate_bits: f64,
    /// Single-shot fixed-length cost `ceil(log2(classes))`.
    pub fixed_len_bits: usize,
}

/// Zero-error codes for every edge of a directed tree with the collector as
/// root, built from the subtree disambiguation partitions.
#[derive(Debug, Clone)]
pub struct TreeCode {
    network: NetworkGraph,
    alphabet: usize,
    pub edges: Vec<EdgeCode>,
}

fn huffman_lengths(probs: &[f64]) -> Vec<usize> {
    let n = probs.len();
    if n <= 1 {
        return vec![0; n];
    }
    // deterministic Huffman: ties broken by insertion sequence
    #[derive(PartialEq)]
    struct Item(f64, usize, usize); // prob, seq, node id
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            other
                .0
                .partial_cmp(&self.0)
                .unwrap()
                .then(other.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    let mut heap = std::collections::BinaryHeap::new();
    let mut parent: Vec<Option<usize>> = vec![None; 2 * n - 1];
    for (i, &p) in probs.iter().enumerate() {
        heap.push(Item(p, i, i));
    }
    let mut seq = n;
    let mut next = n;
    while heap.len() > 1 {
        let a = heap.pop().unwrap();
        let b = heap.pop().unwrap();
        parent[a.2] = Some(next);
        parent[b.2] = Some(next);
        heap.push(Item(a.0 + b.0, seq, next));
        seq += 1;
        next += 1;
    }
    (0..n)
        .map(|i| {
            let mut len = 0;
            let mut cur = i;
            while let Some(p) = parent[cur] {
                len += 1;
                cur = p;
            }
            len
        })
        .collect()
}

/// Canonical prefix-free codewords for the given lengths (Kraft-feasible).
fn canonical_codewords(lengths: &[usize]) -> Vec<Vec<bool>> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let mut out = vec![Vec::new(); lengths.len()];
    let mut code: u64 = 0;
    let mut prev_len = 0usize;
    for &i in &order {
        let len = lengths[i];
        code <<= len - prev_len;
        out[i] = (0..len).rev().map(|b| (code >> b) & 1 == 1).collect();
        code += 1;
        prev_len = len;
    }
    out
}

fn fixed_codewords(count: usize) -> (Vec<Vec<bool>>, usize) {
    let bits = if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    };
    let words = (0..count)
        .map(|c| (0..bits).rev().map(|b| (c >> b) & 1 == 1).collect())
        .collect();
    (words, bits)
}

impl TreeCode {
    pub fn network(&self) -> &NetworkGraph {
        &self.network
    }

    /// Rate per edge in the network's edge order.
    pub fn rates(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.rate_bits).collect()
    }

    fn sub_index(&self, args: &[usize], inputs: &[usize]) -> usize {
        let mut idx = 0;
        for &a in args {
            idx = idx * self.alphabet + inputs[a];
        }
        idx
    }

    fn decode_sub(&self, args: &[usize], mut idx: usize, out: &mut [usize]) {
        for &a in args.iter().rev() {
            out[a] = idx % self.alphabet;
            idx /= self.alphabet;
        }
    }

    /// Runs the actual encode/forward/decode pipeline on one input tuple:
    /// every node encodes the class of its subtree assignment reconstructed
    /// from its children's messages and its own input; the collector
    /// decodes through nominal (representative) inputs. Returns the
    /// collector's function value.
    pub fn evaluate(&self, f: &FunctionTable, inputs: &[usize]) -> Result<i64> {
        if inputs.len() != self.network.informed().len() {
            return Err(Error::InvalidArgument("input arity mismatch".into()));
        }
        let arg_of_node = self.network.arg_of_node();
        let order = self.network.topo_order()?;
        let code_of_edge: std::collections::BTreeMap<(usize, usize), &EdgeCode> =
            self.edges.iter().map(|e| (e.edge, e)).collect();
        // message per edge: class id
        let mut msg: std::collections::BTreeMap<(usize, usize), usize> =
            std::collections::BTreeMap::new();
        let mut nominal = vec![0usize; self.network.informed().len()];
        for &v in &order {
            // reconstruct nominal inputs for v's subtree from child messages
            let mut local = vec![0usize; self.network.informed().len()];
            for (c, _) in self.network.in_edges(v) {
                let code = code_of_edge[&(c, v)];
                let class = msg[&(c, v)];
                let rep = code.partition.representatives()[class];
                self.decode_sub(&code.subtree_args, rep, &mut local);
            }
            if let Some(k) = arg_of_node[v] {
                local[k] = inputs[k];
            }
            if v == self.network.collector() {
                nominal = local;
                break;
            }
            let out = self.network.out_edges(v);
            if out.is_empty() {
                continue; // isolated uninformed node
            }
            let code = code_of_edge[&out[0]];
            let idx = self.sub_index(&code.subtree_args, &local);
            msg.insert(out[0], code.partition.class_of[idx]);
        }
        f.value(&nominal)
    }

    /// Exhaustively compares the decoded value against direct evaluation.
    pub fn verify_exhaustive(&self, f: &FunctionTable) -> Result<bool> {
        let m = self.network.informed().len();
        let q = self.alphabet;
        let total = q.pow(m as u32);
        let mut inputs = vec![0usize; m];
        for idx in 0..total {
            let mut t = idx;
            for k in (0..m).rev() {
                inputs[k] = t % q;
                t /= q;
            }
            if self.evaluate(f, &inputs)? != f.value(&inputs)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds zero-error codes for every edge of a tree network. Each edge
/// carries the equivalence class of its subtree's joint inputs, where two
/// joint inputs are merged iff no assignment of the remaining arguments
/// separates their function values. Worst-case codes are fixed-length;
/// average-case codes are Huffman over the class probabilities (the joint
/// distribution must be strictly positive).
pub fn tree_zero_error_codes(
    network: &NetworkGraph,
    f: &FunctionTable,
    mode: &CodingMode,
) -> Result<TreeCode> {
    if network.informed().len() != f.n_args() {
        return Err(Error::InvalidArgument(format!(
            "network has {} informed nodes but f takes {} arguments",
            network.informed().len(),
            f.n_args()
        )));
    }
    if !network.is_tree_to_collector() {
        return Err(Error::InvalidArgument(
            "network must be a directed tree into the collector".into(),
        ));
    }
    mode.validate(f.table_len())?;
    let q = f.alphabet();
    let m = f.n_args();
    let total = f.table_len();
    let arg_of_node = network.arg_of_node();

    // subtree argument sets via reverse topological sweep
    let order = network.topo_order()?;
    let mut subtree_args: Vec<Vec<usize>> = vec![Vec::new(); network.n()];
    for &v in &order {
        let mut args: Vec<usize> = network
            .in_edges(v)
            .iter()
            .flat_map(|&(c, _)| subtree_args[c].clone())
            .collect();
        if let Some(k) = arg_of_node[v] {
            args.push(k);
        }
        args.sort_unstable();
        subtree_args[v] = args;
    }

    let mut edges = Vec::with_capacity(network.edges().len());
    for &(child, parent) in network.edges() {
        let args = subtree_args[child].clone();
        let sub_total = q.pow(args.len() as u32);
        // signature of a subtree assignment: the function restricted to it
        let mut signatures: Vec<Vec<i64>> = vec![Vec::with_capacity(total / sub_total); sub_total];
        let mut probs = vec![0.0f64; sub_total];
        let mut tuple = vec![0usize; m];
        for idx in 0..total {
            let mut t = idx;
            for k in (0..m).rev() {
                tuple[k] = t % q;
                t /= q;
            }
            let mut sub = 0usize;
            for &a in &args {
                sub = sub * q + tuple[a];
            }
            signatures[sub].push(f.value_by_index(idx));
            if let CodingMode::Average(p) = mode {
                probs[sub] += p[idx];
            }
        }
        let partition = Partition::from_signatures(signatures);
        let (codewords, rate_bits, fixed_len_bits) = match mode {
            CodingMode::Worst => {
                let (words, bits) = fixed_codewords(partition.num_classes);
                (words, (partition.num_classes as f64).log2(), bits)
            }
            CodingMode::Average(_) => {
                let mut class_probs = vec![0.0f64; partition.num_classes];
                for (sub, &c) in partition.class_of.iter().enumerate() {
                    class_probs[c] += probs[sub];
                }
                let lengths = huffman_lengths(&class_probs);
                let words = canonical_codewords(&lengths);
                let expected: f64 = class_probs
                    .iter()
                    .zip(&lengths)
                    .map(|(p, &l)| p * l as f64)
                    .sum();
                let fixed = if partition.num_classes <= 1 {
                    0
                } else {
                    (usize::BITS - (partition.num_classes - 1).leading_zeros()) as usize
                };
                (words, expected, fixed)
            }
        };
        edges.push(EdgeCode {
            edge: (child, parent),
            subtree_args: args,
            partition,
            codewords,
            rate_bits,
            fixed_len_bits,
        });
    }
    Ok(TreeCode {
        network: network.clone(),
        alphabet: q,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Pcg32;

    fn uniform_dist(len: usize) -> CodingMode {
        CodingMode::Average(vec![1.0 / len as f64; len])
    }

    #[test]
    fn greedy_reduce_and_function() {
        // f(x,y) = x AND y: y = 1 separates x = 0 from x = 1
        let f = FunctionTable::and_fn(2).unwrap();
        let p = greedy_reduce(&f, ArgSide::First, &CodingMode::Worst).unwrap();
        assert_eq!(p.num_classes, 2);
        assert_eq!(p.class_of, vec![0, 1]);
    }

    #[test]
    fn greedy_reduce_constant_function() {
        let f = FunctionTable::constant(2, 3, 9).unwrap();
        let p = greedy_reduce(&f, ArgSide::First, &CodingMode::Worst).unwrap();
        assert_eq!(p.num_classes, 1);
    }

    #[test]
    fn greedy_reduce_ignored_argument() {
        // f(x,y) = y: the x side collapses to one class
        let f = FunctionTable::from_fn(2, 3, |x| x[1] as i64).unwrap();
        let p = greedy_reduce(&f, ArgSide::First, &CodingMode::Worst).unwrap();
        assert_eq!(p.num_classes, 1);
        let p2 = greedy_reduce(&f, ArgSide::Second, &CodingMode::Worst).unwrap();
        assert_eq!(p2.num_classes, 3);
    }

    #[test]
    fn greedy_reduce_rejects_zero_probabilities() {
        let f = FunctionTable::and_fn(2).unwrap();
        let mut p = vec![0.25; 4];
        p[0] = 0.0;
        p[1] = 0.5;
        assert!(greedy_reduce(&f, ArgSide::First, &CodingMode::Average(p)).is_err());
    }

    #[test]
    fn partition_is_equivalence_and_coarsest() {
        // merging any two classes of greedy_reduce breaks zero-error
        // feasibility: some y separates representatives (exhaustive check)
        let mut rng = Pcg32::seeded(6);
        for _ in 0..30 {
            let q = 2 + (rng.next_below(3) as usize); // 2..4
            let f = {
                let mut vals = Vec::new();
                for _ in 0..q * q {
                    vals.push(rng.next_below(3) as i64);
                }
                FunctionTable::from_fn(2, q, move |x| vals[x[0] * q + x[1]]).unwrap()
            };
            let part = greedy_reduce(&f, ArgSide::First, &CodingMode::Worst).unwrap();
            let reps = part.representatives();
            for c1 in 0..part.num_classes {
                for c2 in (c1 + 1)..part.num_classes {
                    let (x1, x2) = (reps[c1], reps[c2]);
                    let separated = (0..q).any(|y| {
                        f.value(&[x1, y]).unwrap() != f.value(&[x2, y]).unwrap()
                    });
                    assert!(separated, "classes {c1},{c2} mergeable: not coarsest");
                }
            }
            // members of one class are never separated
            for x1 in 0..q {
                for x2 in 0..q {
                    if part.class_of[x1] == part.class_of[x2] {
                        for y in 0..q {
                            assert_eq!(f.value(&[x1, y]).unwrap(), f.value(&[x2, y]).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_node_and_edge_rate() {
        // leaf node 1 sends to collector 0: 2 classes, 1 bit
        let net = NetworkGraph::new(2, vec![(1, 0)], 0, vec![1, 0]).unwrap();
        let f = FunctionTable::and_fn(2).unwrap();
        let code = tree_zero_error_codes(&net, &f, &CodingMode::Worst).unwrap();
        assert_eq!(code.edges.len(), 1);
        assert_eq!(code.edges[0].partition.num_classes, 2);
        assert!((code.edges[0].rate_bits - 1.0).abs() < 1e-12);
        assert!(code.verify_exhaustive(&f).unwrap());
    }

    #[test]
    fn parity_star_each_leaf_one_bit() {
        // collector 0 with leaves 1, 2, 3 over {0,1}: parity needs 1 bit/leaf
        let net = NetworkGraph::new(4, vec![(1, 0), (2, 0), (3, 0)], 0, vec![1, 2, 3]).unwrap();
        let f = FunctionTable::parity_fn(3, 2).unwrap();
        let code = tree_zero_error_codes(&net, &f, &CodingMode::Worst).unwrap();
        for e in &code.edges {
            assert_eq!(e.partition.num_classes, 2);
            assert!((e.rate_bits - 1.0).abs() < 1e-12);
        }
        assert!(code.verify_exhaustive(&f).unwrap());
    }

    #[test]
    fn constant_function_is_free() {
        let net = NetworkGraph::new(3, vec![(1, 0), (2, 1)], 0, vec![1, 2]).unwrap();
        let f = FunctionTable::constant(2, 3, 5).unwrap();
        let code = tree_zero_error_codes(&net, &f, &CodingMode::Worst).unwrap();
        for e in &code.edges {
            assert_eq!(e.partition.num_classes, 1);
            assert_eq!(e.rate_bits, 0.0);
            assert_eq!(e.fixed_len_bits, 0);
        }
        assert!(code.verify_exhaustive(&f).unwrap());
    }

    #[test]
    fn chain_max_aggregates() {
        // 2 -> 1 -> 0, Max over {0,1,2}: the middle edge carries the subtree
        // max (3 classes)
        let net = NetworkGraph::new(3, vec![(1, 0), (2, 1)], 0, vec![0, 1, 2]).unwrap();
        let f = FunctionTable::max_fn(3, 3).unwrap();
        let code = tree_zero_error_codes(&net, &f, &CodingMode::Worst).unwrap();
        let middle = code.edges.iter().find(|e| e.edge == (1, 0)).unwrap();
        assert_eq!(middle.partition.num_classes, 3);
        assert!(code.verify_exhaustive(&f).unwrap());
    }

    #[test]
    fn codewords_are_prefix_free_and_decodable() {
        let net = NetworkGraph::new(3, vec![(1, 0), (2, 1)], 0, vec![1, 2]).unwrap();
        let f = FunctionTable::sum_fn(2, 3).unwrap();
        for mode in [CodingMode::Worst, uniform_dist(9)] {
            let code = tree_zero_error_codes(&net, &f, &mode).unwrap();
            for e in &code.edges {
                for (i, a) in e.codewords.iter().enumerate() {
                    for (j, b) in e.codewords.iter().enumerate() {
                        if i != j && a.len() <= b.len() {
                            assert_ne!(&b[..a.len()], &a[..], "codeword {i} prefixes {j}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn average_rate_at_most_fixed_and_huffman_optimal_shape() {
        // skewed distribution: Huffman beats the fixed-length code
        let net = NetworkGraph::new(2, vec![(1, 0)], 0, vec![1, 0]).unwrap();
        let f = FunctionTable::from_fn(2, 4, |x| x[0] as i64).unwrap(); // identity: 4 classes
        let mut p = vec![0.0; 16];
        for x in 0..4 {
            for y in 0..4 {
                let px = [0.7, 0.1, 0.1, 0.1][x];
                p[x * 4 + y] = px * 0.25;
            }
        }
        let code = tree_zero_error_codes(&net, &f, &CodingMode::Average(p)).unwrap();
        let e = &code.edges[0];
        assert_eq!(e.partition.num_classes, 4);
        // expected length: 0.7*1 + 0.1*2 + 0.1*3 + 0.1*3 = 1.5
        assert!((e.rate_bits - 1.5).abs() < 1e-12);
        assert!(e.rate_bits <= e.fixed_len_bits as f64);
        assert!(code.verify_exhaustive(&f).unwrap());
    }

    #[test]
    fn random_trees_zero_error_and_single_edge_minimality() {
        let mut rng = Pcg32::seeded(77);
        for trial in 0..20 {
            // random tree on <= 5 nodes with collector 0
            let n = 2 + (rng.next_below(4) as usize);
            let mut edges = Vec::new();
            for v in 1..n {
                let parent = rng.next_below(v as u64) as usize;
                edges.push((v, parent));
            }
            let informed: Vec<usize> = (0..n).collect();
            let net = NetworkGraph::new(n, edges, 0, informed).unwrap();
            let q: usize = 2 + (trial % 2); // alphabets 2 and 3
            let vals: Vec<i64> = (0..q.pow(n as u32)).map(|_| rng.next_below(4) as i64).collect();
            let v2 = vals.clone();
            let qq = q;
            let f = FunctionTable::from_fn(n, q, move |x| {
                let mut idx = 0;
                for &xi in x {
                    idx = idx * qq + xi;
                }
                v2[idx]
            })
            .unwrap();
            let code = tree_zero_error_codes(&net, &f, &CodingMode::Worst).unwrap();
            assert!(code.verify_exhaustive(&f).unwrap(), "trial {trial}");
            // minimality oracle: merging any two classes on one edge (others
            // fixed) and decoding end-to-end must fail on some input
            for ei in 0..code.edges.len() {
                let k = code.edges[ei].partition.num_classes;
                for c1 in 0..k {
                    for c2 in (c1 + 1)..k {
                        let mut coarser = code.clone();
                        for cls in coarser.edges[ei].partition.class_of.iter_mut() {
                            if *cls == c2 {
                                *cls = c1;
                            }
                        }
                        assert!(
                            !coarser.verify_exhaustive(&f).unwrap(),
                            "edge {ei} classes {c1},{c2} mergeable in trial {trial}"
                        );
                    }
                }
            }
        }
    }
}
