//! In-network function computation: histogram tree aggregation with
//! pipelined scheduling, zero-error optimal encoders on trees, DAG
//! rate-region bounds, symmetric-function classification, fooling-set lower
//! bounds and exact Boolean complexity formulas.

mod aggregation;
mod boolean;
mod dag;
mod tree_code;

pub use aggregation::{histogram_aggregation, HistogramRun};
pub use boolean::{
    and_block_protocol, and_worst_case_bits, binomial, fooling_set_lower_bound,
    interval_complexity_bounds, log2_binomial, threshold_complexity, AndTranscript,
    FoolingSetResult,
};
pub use dag::{
    counterexample_network, dag_cut_outer_bound, dag_parity_scheme, tree_achievable_region,
    CutBound, DagParityOutcome, TreeRegion,
};
pub use tree_code::{
    greedy_reduce, tree_zero_error_codes, ArgSide, CodingMode, EdgeCode, Partition, TreeCode,
};

use crate::{Error, Result};

/// Hard cap on extensional table sizes (|X|^n), the desk-scale limit.
pub const MAX_TABLE: usize = 4_000_000;

/// Extensional representation of `f: X^n -> D` with a common finite
/// alphabet `X = {0..alphabet-1}` per argument and integer outputs.
/// Tuples index the value table in big-endian order (first argument most
/// significant), so table order is lexicographic tuple order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    n_args: usize,
    alphabet: usize,
    values: Vec<i64>,
}

impl FunctionTable {
    pub fn from_fn(
        n_args: usize,
        alphabet: usize,
        f: impl Fn(&[usize]) -> i64,
    ) -> Result<Self> {
        if n_args == 0 || alphabet < 1 {
            return Err(Error::InvalidArgument(
                "need n_args >= 1 and alphabet >= 1".into(),
            ));
        }
        let size = alphabet
            .checked_pow(n_args as u32)
            .filter(|&s| s <= MAX_TABLE)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "table {alphabet}^{n_args} exceeds the desk-scale cap"
                ))
            })?;
        let mut values = Vec::with_capacity(size);
        let mut tuple = vec![0usize; n_args];
        for idx in 0..size {
            Self::decode_tuple(idx, n_args, alphabet, &mut tuple);
            values.push(f(&tuple));
        }
        Ok(FunctionTable {
            n_args,
            alphabet,
            values,
        })
    }

    pub fn n_args(&self) -> usize {
        self.n_args
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn table_len(&self) -> usize {
        self.values.len()
    }

    pub fn index_of(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.n_args {
            return Err(Error::InvalidArgument(format!(
                "expected {} arguments, got {}",
                self.n_args,
                x.len()
            )));
        }
        let mut idx = 0usize;
        for &xi in x {
            if xi >= self.alphabet {
                return Err(Error::InvalidArgument(format!(
                    "symbol {xi} outside alphabet 0..{}",
                    self.alphabet
                )));
            }
            idx = idx * self.alphabet + xi;
        }
        Ok(idx)
    }

    fn decode_tuple(mut idx: usize, n_args: usize, alphabet: usize, out: &mut [usize]) {
        for k in (0..n_args).rev() {
            out[k] = idx % alphabet;
            idx /= alphabet;
        }
    }

    pub fn tuple_of(&self, idx: usize) -> Vec<usize> {
        let mut t = vec![0usize; self.n_args];
        Self::decode_tuple(idx, self.n_args, self.alphabet, &mut t);
        t
    }

    pub fn value(&self, x: &[usize]) -> Result<i64> {
        Ok(self.values[self.index_of(x)?])
    }

    pub fn value_by_index(&self, idx: usize) -> i64 {
        self.values[idx]
    }

    /// Symmetric iff the value depends only on the multiset of arguments.
    pub fn is_symmetric(&self) -> bool {
        let mut tuple = vec![0usize; self.n_args];
        for idx in 0..self.values.len() {
            Self::decode_tuple(idx, self.n_args, self.alphabet, &mut tuple);
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            let canon = self.index_of(&sorted).unwrap();
            if self.values[canon] != self.values[idx] {
                return false;
            }
        }
        true
    }

    // --- builtin families ---

    pub fn max_fn(n: usize, alphabet: usize) -> Result<Self> {
        Self::from_fn(n, alphabet, |x| *x.iter().max().unwrap() as i64)
    }

    pub fn min_fn(n: usize, alphabet: usize) -> Result<Self> {
        Self::from_fn(n, alphabet, |x| *x.iter().min().unwrap() as i64)
    }

    pub fn sum_fn(n: usize, alphabet: usize) -> Result<Self> {
        Self::from_fn(n, alphabet, |x| x.iter().sum::<usize>() as i64)
    }

    /// Sum modulo the alphabet size (finite-field parity for alphabet 2).
    pub fn parity_fn(n: usize, alphabet: usize) -> Result<Self> {
        Self::from_fn(n, alphabet, move |x| {
            (x.iter().sum::<usize>() % alphabet) as i64
        })
    }

    pub fn and_fn(n: usize) -> Result<Self> {
        Self::from_fn(n, 2, |x| x.iter().all(|&b| b == 1) as i64)
    }

    pub fn constant(n: usize, alphabet: usize, value: i64) -> Result<Self> {
        Self::from_fn(n, alphabet, |_| value)
    }

    /// Boolean threshold: 1 iff at least `theta` arguments are 1.
    pub fn boolean_threshold(n: usize, theta: usize) -> Result<Self> {
        Self::from_fn(n, 2, move |x| (x.iter().sum::<usize>() >= theta) as i64)
    }

    /// Boolean interval: 1 iff the number of ones lies in `[a, b]`.
    pub fn boolean_interval(n: usize, a: usize, b: usize) -> Result<Self> {
        if a > b || b > n {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= a <= b <= n, got a={a}, b={b}, n={n}"
            )));
        }
        Self::from_fn(n, 2, move |x| {
            let s = x.iter().sum::<usize>();
            (a <= s && s <= b) as i64
        })
    }

    /// Parses an extensional table: one line per tuple, `x1 x2 ... -> value`.
    /// The alphabet per argument is the largest symbol plus one; every tuple
    /// must be covered exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<(Vec<usize>, i64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: missing '->'", lineno + 1))
            })?;
            let tuple: Vec<usize> = lhs
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::InvalidArgument(format!("line {}: bad symbol '{t}'", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            let value: i64 = rhs.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("line {}: bad value '{}'", lineno + 1, rhs.trim()))
            })?;
            if tuple.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "line {}: empty tuple",
                    lineno + 1
                )));
            }
            rows.push((tuple, value));
        }
        if rows.is_empty() {
            return Err(Error::InvalidArgument("empty table".into()));
        }
        let n_args = rows[0].0.len();
        if rows.iter().any(|(t, _)| t.len() != n_args) {
            return Err(Error::InvalidArgument("inconsistent tuple arity".into()));
        }
        let alphabet = rows
            .iter()
            .flat_map(|(t, _)| t.iter())
            .max()
            .unwrap()
            + 1;
        let size = alphabet
            .checked_pow(n_args as u32)
            .filter(|&s| s <= MAX_TABLE)
            .ok_or_else(|| Error::ResourceLimit("parsed table too large".into()))?;
        let mut values: Vec<Option<i64>> = vec![None; size];
        let probe = FunctionTable {
            n_args,
            alphabet,
            values: vec![0; size],
        };
        for (tuple, value) in rows {
            let idx = probe.index_of(&tuple)?;
            if values[idx].replace(value).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate tuple {tuple:?}"
                )));
            }
        }
        let values: Vec<i64> = values
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                v.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "tuple {:?} missing from table",
                        probe.tuple_of(idx)
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Ok(FunctionTable {
            n_args,
            alphabet,
            values,
        })
    }
}

/// Histogram of a tuple's letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeVector {
    pub counts: Vec<usize>,
}

/// Type vector of a tuple over the alphabet `{0..alphabet-1}`.
pub fn type_vector(x: &[usize], alphabet: usize) -> Result<TypeVector> {
    let mut counts = vec![0usize; alphabet];
    for &xi in x {
        if xi >= alphabet {
            return Err(Error::InvalidArgument(format!(
                "symbol {xi} outside alphabet 0..{alphabet}"
            )));
        }
        counts[xi] += 1;
    }
    Ok(TypeVector { counts })
}

/// True iff the (symmetric) function depends only on the element-wise
/// minimum of its type vector with `theta`. Checked exhaustively.
pub fn is_type_threshold(f: &FunctionTable, theta: &[usize]) -> Result<bool> {
    if theta.len() != f.alphabet() {
        return Err(Error::InvalidArgument(format!(
            "theta must have length {}, got {}",
            f.alphabet(),
            theta.len()
        )));
    }
    if !f.is_symmetric() {
        return Err(Error::InvalidArgument(
            "type-threshold classification needs a symmetric function".into(),
        ));
    }
    let mut seen: std::collections::BTreeMap<Vec<usize>, i64> = std::collections::BTreeMap::new();
    for idx in 0..f.table_len() {
        let tuple = f.tuple_of(idx);
        let tau = type_vector(&tuple, f.alphabet())?;
        let capped: Vec<usize> = tau
            .counts
            .iter()
            .zip(theta)
            .map(|(&c, &t)| c.min(t))
            .collect();
        let v = f.value_by_index(idx);
        if let Some(&prev) = seen.get(&capped) {
            if prev != v {
                return Ok(false);
            }
        } else {
            seen.insert(capped, v);
        }
    }
    Ok(true)
}

/// Definitional type-sensitivity check at this fixed n: for every prefix of
/// length `j <= n - ceil(gamma n)` there must exist two completions with
/// different function values. Exhaustive.
pub fn is_type_sensitive(f: &FunctionTable, gamma: f64) -> Result<bool> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must lie in (0,1), got {gamma}"
        )));
    }
    if !f.is_symmetric() {
        return Err(Error::InvalidArgument(
            "type-sensitivity classification needs a symmetric function".into(),
        ));
    }
    let n = f.n_args();
    let q = f.alphabet();
    let j_max = n - ((gamma * n as f64).ceil() as usize).min(n);
    for j in 0..=j_max {
        let prefixes = q.checked_pow(j as u32).unwrap();
        let completions = q.checked_pow((n - j) as u32).unwrap();
        for p in 0..prefixes {
            // tuples sharing prefix p occupy a contiguous index range
            let base = p * completions;
            let first = f.value_by_index(base);
            let mut varies = false;
            for c in 1..completions {
                if f.value_by_index(base + c) != first {
                    varies = true;
                    break;
                }
            }
            if !varies {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Directed network with a collector node and an ordered list of informed
/// nodes (argument k of the function lives at `informed[k]`).
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    collector: usize,
    informed: Vec<usize>,
}

impl NetworkGraph {
    pub fn new(
        n: usize,
        mut edges: Vec<(usize, usize)>,
        collector: usize,
        informed: Vec<usize>,
    ) -> Result<Self> {
        if n == 0 || collector >= n {
            return Err(Error::InvalidArgument("bad node count or collector".into()));
        }
        for &(a, b) in &edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("bad edge ({a},{b})")));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut seen = std::collections::BTreeSet::new();
        for &v in &informed {
            if v >= n {
                return Err(Error::InvalidArgument(format!("informed node {v} out of range")));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidArgument(format!("informed node {v} repeated")));
            }
        }
        Ok(NetworkGraph {
            n,
            edges,
            collector,
            informed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn collector(&self) -> usize {
        self.collector
    }

    pub fn informed(&self) -> &[usize] {
        &self.informed
    }

    pub fn out_edges(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges.iter().copied().filter(|&(a, _)| a == v).collect()
    }

    pub fn in_edges(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges.iter().copied().filter(|&(_, b)| b == v).collect()
    }

    /// Topological order (sources first); fails on cyclic input.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let mut indeg = vec![0usize; self.n];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut queue: std::collections::BTreeSet<usize> = (0..self.n)
            .filter(|&v| indeg[v] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(&v) = queue.iter().next() {
            queue.remove(&v);
            order.push(v);
            for &(_, b) in &self.out_edges(v) {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    queue.insert(b);
                }
            }
        }
        if order.len() != self.n {
            return Err(Error::InvalidArgument("network graph is cyclic".into()));
        }
        Ok(order)
    }

    /// Tree toward the collector: the collector has no out-edge, every node
    /// that carries an edge or an input has a unique out-path to the
    /// collector; completely isolated uninformed nodes are allowed.
    pub fn is_tree_to_collector(&self) -> bool {
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            out[a].push(b);
        }
        if !out[self.collector].is_empty() {
            return false;
        }
        let mut active: std::collections::BTreeSet<usize> = self.informed.iter().copied().collect();
        for &(a, b) in &self.edges {
            active.insert(a);
            active.insert(b);
        }
        for &v in &active {
            if v != self.collector && out[v].len() != 1 {
                return false;
            }
            // walk to the collector, guarding against cycles
            let mut cur = v;
            let mut steps = 0;
            while cur != self.collector {
                if out[cur].len() != 1 || steps > self.n {
                    return false;
                }
                cur = out[cur][0];
                steps += 1;
            }
        }
        true
    }

    /// Argument indices (positions in `informed`) by node.
    pub fn arg_of_node(&self) -> Vec<Option<usize>> {
        let mut m = vec![None; self.n];
        for (k, &v) in self.informed.iter().enumerate() {
            m[v] = Some(k);
        }
        m
    }
}
