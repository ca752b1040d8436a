use super::FunctionTable;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    for i in 0..k {
        num = num * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    num
}

/// `log2 C(n, k)` with ~1e-15 relative accuracy even for huge coefficients
/// (top 64 bits plus the exponent).
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    let c = binomial(n, k);
    if c.is_zero() {
        return f64::NEG_INFINITY;
    }
    big_log2(&c)
}

fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Bits needed to index `count` distinct values: `ceil(log2 count)`.
fn bits_for_values(count: &BigUint) -> usize {
    if count <= &BigUint::one() {
        0
    } else {
        (count - 1u32).bits() as usize
    }
}

/// Rank of a sorted position set in the combinatorial number system
/// (colexicographic): `rank = sum_i C(p_i, i+1)`.
pub fn rank_subset(positions: &[usize]) -> BigUint {
    let mut rank = BigUint::zero();
    for (i, &p) in positions.iter().enumerate() {
        rank += binomial(p, i + 1);
    }
    rank
}

/// Inverse of [`rank_subset`] for subsets of size `k` drawn from `0..n`.
pub fn unrank_subset(n: usize, k: usize, mut rank: BigUint) -> Vec<usize> {
    let mut out = vec![0usize; k];
    let mut hi = n;
    for i in (0..k).rev() {
        // largest p with C(p, i+1) <= rank
        let mut p = hi;
        loop {
            let c = binomial(p, i + 1);
            if c <= rank {
                break;
            }
            p -= 1;
        }
        rank -= binomial(p, i + 1);
        out[i] = p;
        hi = p;
    }
    out
}

fn big_to_bits(x: &BigUint, width: usize) -> Vec<bool> {
    (0..width).rev().map(|b| x.bit(b as u64)).collect()
}

fn bits_to_big(bits: &[bool]) -> BigUint {
    let mut x = BigUint::zero();
    for &b in bits {
        x <<= 1;
        if b {
            x += 1u32;
        }
    }
    x
}

/// Transcript of the two-node block AND protocol.
///
/// Node 1 announces its zero count in `ceil(log2(N+1))` bits, then the
/// enumerative index of its zero-position set in `ceil(log2 C(N,k))` bits;
/// node 2 replies with its bits at the positions where node 1 holds ones.
/// Both endpoints reconstruct the AND block exactly.
#[derive(Debug, Clone)]
pub struct AndTranscript {
    pub block_len: usize,
    pub zero_count: usize,
    pub count_bits: usize,
    pub index_bits: usize,
    pub reply_bits: usize,
    pub total_bits: usize,
    pub and_block: Vec<u8>,
}

pub fn and_block_protocol(x1: &[u8], x2: &[u8]) -> Result<AndTranscript> {
    if x1.len() != x2.len() {
        return Err(Error::InvalidArgument(format!(
            "block lengths differ: {} vs {}",
            x1.len(),
            x2.len()
        )));
    }
    if x1.is_empty() {
        return Err(Error::InvalidArgument("empty blocks".into()));
    }
    if x1.iter().chain(x2).any(|&b| b > 1) {
        return Err(Error::InvalidArgument("blocks must be binary".into()));
    }
    let n = x1.len();
    // node 1 encodes
    let zeros: Vec<usize> = (0..n).filter(|&i| x1[i] == 0).collect();
    let k = zeros.len();
    let count_bits = bits_for_values(&BigUint::from(n + 1));
    let count_msg = big_to_bits(&BigUint::from(k), count_bits);
    let index_bits = bits_for_values(&binomial(n, k));
    let index_msg = big_to_bits(&rank_subset(&zeros), index_bits);
    // node 2 decodes node 1's support and replies on the one positions
    let k_decoded = bits_to_big(&count_msg).to_usize().unwrap();
    let zeros_decoded = unrank_subset(n, k_decoded, bits_to_big(&index_msg));
    if zeros_decoded != zeros {
        return Err(Error::NumericFailure("enumerative code round-trip failed".into()));
    }
    let zero_set: std::collections::BTreeSet<usize> = zeros_decoded.iter().copied().collect();
    let reply: Vec<u8> = (0..n)
        .filter(|i| !zero_set.contains(i))
        .map(|i| x2[i])
        .collect();
    // node 2's output: zero where node 1 is zero, else its own bit
    let node2_out: Vec<u8> = (0..n)
        .map(|i| if zero_set.contains(&i) { 0 } else { x2[i] })
        .collect();
    // node 1's output from the reply bits
    let mut node1_out = vec![0u8; n];
    let mut it = reply.iter();
    for (i, out) in node1_out.iter_mut().enumerate() {
        if x1[i] == 1 {
            *out = *it.next().unwrap();
        }
    }
    if node1_out != node2_out {
        return Err(Error::NumericFailure("endpoints disagree on the AND block".into()));
    }
    let reply_bits = reply.len();
    Ok(AndTranscript {
        block_len: n,
        zero_count: k,
        count_bits,
        index_bits,
        reply_bits,
        total_bits: count_bits + index_bits + reply_bits,
        and_block: node1_out,
    })
}

/// Worst-case total bits of the block AND protocol at block length `n`:
/// `max_k [ceil(log2 C(n,k)) + (n - k)] + ceil(log2(n+1))`.
pub fn and_worst_case_bits(n: usize) -> u64 {
    let header = bits_for_values(&BigUint::from(n + 1)) as u64;
    let body = (0..=n)
        .map(|k| bits_for_values(&binomial(n, k)) as u64 + (n - k) as u64)
        .max()
        .unwrap();
    header + body
}

/// Result of a fooling-set search: the witness set (lexicographically least
/// maximum when `exact`), and the implied communication lower bound
/// `log2 |E|` in bits.
#[derive(Debug, Clone)]
pub struct FoolingSetResult {
    pub set: Vec<Vec<usize>>,
    pub bound_bits: f64,
    pub exact: bool,
}

struct CliqueGraph {
    v: usize,
    adj: Vec<Vec<u64>>,
}

impl CliqueGraph {
    fn new(v: usize) -> Self {
        let words = v.div_ceil(64);
        CliqueGraph {
            v,
            adj: vec![vec![0u64; words]; v],
        }
    }

    fn connect(&mut self, a: usize, b: usize) {
        self.adj[a][b / 64] |= 1 << (b % 64);
        self.adj[b][a / 64] |= 1 << (a % 64);
    }

    fn connected(&self, a: usize, b: usize) -> bool {
        self.adj[a][b / 64] >> (b % 64) & 1 == 1
    }

    /// Max clique size within `cand` (as a bitset), via branch and bound
    /// with a greedy coloring bound.
    fn max_clique_size(&self, cand: &[u64]) -> usize {
        let mut best = 0usize;
        let verts: Vec<usize> = bitset_iter(cand, self.v).collect();
        self.expand(&verts, 0, &mut best);
        best
    }

    fn expand(&self, cand: &[usize], depth: usize, best: &mut usize) {
        if cand.is_empty() {
            *best = (*best).max(depth);
            return;
        }
        // greedy coloring bound: any clique uses distinct colors
        let mut colors: Vec<usize> = vec![0; cand.len()];
        for (i, &u) in cand.iter().enumerate() {
            let mut used = vec![false; i + 1];
            for (j, &w) in cand.iter().enumerate().take(i) {
                if self.connected(u, w) && colors[j] <= i {
                    used[colors[j]] = true;
                }
            }
            colors[i] = used.iter().position(|&b| !b).unwrap();
        }
        // candidates sorted by color so the per-vertex prune is sound
        let mut order: Vec<usize> = (0..cand.len()).collect();
        order.sort_by_key(|&i| (colors[i], i));
        let sorted: Vec<(usize, usize)> = order.iter().map(|&i| (cand[i], colors[i])).collect();
        for pos in (0..sorted.len()).rev() {
            let (u, color) = sorted[pos];
            if depth + color + 1 <= *best {
                return;
            }
            let next: Vec<usize> = sorted[..pos]
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| self.connected(u, w))
                .collect();
            self.expand(&next, depth + 1, best);
        }
    }
}

fn bitset_iter(set: &[u64], v: usize) -> impl Iterator<Item = usize> + '_ {
    (0..v).filter(move |&i| set[i / 64] >> (i % 64) & 1 == 1)
}

/// Finds a fooling set for `f`: a maximum one by branch and bound when the
/// input space is at most `budget` tuples, otherwise the greedy
/// lexicographic set (flagged as a lower bound on the maximum).
///
/// Fooling compatibility of two distinct tuples: different function values,
/// or some coordinate-wise mix attains a different value.
pub fn fooling_set_lower_bound(f: &FunctionTable, budget: usize) -> Result<FoolingSetResult> {
    let v = f.table_len();
    let n = f.n_args();
    if n > 20 {
        return Err(Error::ResourceLimit("fooling search caps at 20 arguments".into()));
    }
    let q = f.alphabet();
    let compatible = |ia: usize, ib: usize| -> bool {
        let fa = f.value_by_index(ia);
        if fa != f.value_by_index(ib) {
            return true;
        }
        let ta = f.tuple_of(ia);
        let tb = f.tuple_of(ib);
        // all coordinate-wise mixes
        for mask in 0usize..(1 << n) {
            let mut idx = 0usize;
            for k in 0..n {
                let sym = if mask >> k & 1 == 1 { tb[k] } else { ta[k] };
                idx = idx * q + sym;
            }
            if f.value_by_index(idx) != fa {
                return true;
            }
        }
        false
    };
    if v > budget {
        // greedy lexicographic augmentation
        let mut chosen: Vec<usize> = Vec::new();
        for cand in 0..v {
            if chosen.iter().all(|&c| compatible(c, cand)) {
                chosen.push(cand);
            }
        }
        let set: Vec<Vec<usize>> = chosen.iter().map(|&i| f.tuple_of(i)).collect();
        let bound_bits = (set.len() as f64).log2();
        return Ok(FoolingSetResult {
            set,
            bound_bits,
            exact: false,
        });
    }
    let mut graph = CliqueGraph::new(v);
    for a in 0..v {
        for b in (a + 1)..v {
            if compatible(a, b) {
                graph.connect(a, b);
            }
        }
    }
    let full: Vec<u64> = {
        let words = v.div_ceil(64);
        let mut s = vec![u64::MAX; words];
        if v % 64 != 0 {
            s[words - 1] = (1u64 << (v % 64)) - 1;
        }
        s
    };
    let target = graph.max_clique_size(&full);
    // lexicographically least maximum clique: certify one vertex at a time
    let words = v.div_ceil(64);
    let mut chosen: Vec<usize> = Vec::new();
    let mut cand: Vec<u64> = full;
    while chosen.len() < target {
        let mut advanced = false;
        for u in bitset_iter(&cand.clone(), v) {
            // candidates after including u: neighbors of u beyond u
            let mut next = vec![0u64; words];
            for w in bitset_iter(&cand, v) {
                if w > u && graph.connected(u, w) {
                    next[w / 64] |= 1 << (w % 64);
                }
            }
            if chosen.len() + 1 + graph.max_clique_size(&next) >= target {
                chosen.push(u);
                cand = next;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Err(Error::NumericFailure("clique certification failed".into()));
        }
    }
    let set: Vec<Vec<usize>> = chosen.iter().map(|&i| f.tuple_of(i)).collect();
    Ok(FoolingSetResult {
        bound_bits: (set.len() as f64).log2(),
        set,
        exact: true,
    })
}

/// Broadcast complexity of the Boolean threshold function:
/// `log2 C(n+1, theta)` bits per instance.
pub fn threshold_complexity(n: usize, theta: usize) -> Result<f64> {
    if theta > n + 1 {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= theta <= n+1, got theta={theta}, n={n}"
        )));
    }
    Ok(log2_binomial(n + 1, theta))
}

/// Bounds on the broadcast complexity of the Boolean interval function
/// `1[a <= sum x_i <= b]`, selected by whether `a+b <= n`:
///
/// - `a+b <= n`: `log2[C(n+1,b+1) + C(n,a-1)]` up to
///   `log2[C(n+1,b+1) + (b-a+1) C(n,a-1)]`;
/// - `a+b >= n`: `log2[C(n+1,a) + C(n,b+1)]` up to
///   `log2[C(n+1,a) + (b-a+1) C(n,b+1)]`
///
/// with `C(n,-1) = 0` and `C(n,k) = 0` for `k > n` (the two cases agree at
/// `a+b = n`).
pub fn interval_complexity_bounds(n: usize, a: usize, b: usize) -> Result<(f64, f64)> {
    if a > b || b > n {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= a <= b <= n, got a={a}, b={b}, n={n}"
        )));
    }
    let multiplier = BigUint::from(b - a + 1);
    let (main, side) = if a + b <= n {
        let side = if a == 0 {
            BigUint::zero()
        } else {
            binomial(n, a - 1)
        };
        (binomial(n + 1, b + 1), side)
    } else {
        (binomial(n + 1, a), binomial(n, b + 1))
    };
    let lower = big_log2(&(&main + &side));
    let upper = big_log2(&(&main + &multiplier * &side));
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Pcg32;
    use proptest::prelude::*;

    const LOG2_3: f64 = 1.584962500721156;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(5, 6), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(255, 1), BigUint::from(255u32));
    }

    #[test]
    fn log2_binomial_accuracy() {
        assert!((log2_binomial(3, 2) - LOG2_3).abs() < 1e-14);
        // huge coefficient: compare against the Stirling-free identity
        // log2 C(n,k) = sum log2((n-i)/(i+1))
        let (n, k) = (255, 85);
        let direct: f64 = (0..k)
            .map(|i| (((n - i) as f64) / ((i + 1) as f64)).log2())
            .sum();
        assert!((log2_binomial(n, k) - direct).abs() < 1e-9);
    }

    #[test]
    fn subset_rank_roundtrip_small() {
        for n in [5usize, 8] {
            for k in 0..=n {
                let total = binomial(n, k).to_usize().unwrap();
                for r in 0..total {
                    let set = unrank_subset(n, k, BigUint::from(r));
                    assert_eq!(set.len(), k);
                    assert!(set.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(rank_subset(&set), BigUint::from(r));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn subset_rank_roundtrip_random(seed in 0u64..5000) {
            let mut rng = Pcg32::seeded(seed);
            let n = 1 + (rng.next_below(200) as usize);
            let k = rng.next_below(n as u64 + 1) as usize;
            let mut positions: Vec<usize> = (0..n).collect();
            // draw k distinct positions
            for i in 0..k {
                let j = i + rng.next_below((n - i) as u64) as usize;
                positions.swap(i, j);
            }
            let mut set: Vec<usize> = positions[..k].to_vec();
            set.sort_unstable();
            let rank = rank_subset(&set);
            prop_assert!(rank < binomial(n, k).max(BigUint::one()));
            prop_assert_eq!(unrank_subset(n, k, rank), set);
        }
    }

    #[test]
    fn and_protocol_all_zero_first_block() {
        let x1 = vec![0u8; 12];
        let x2 = vec![1u8; 12];
        let t = and_block_protocol(&x1, &x2).unwrap();
        assert_eq!(t.reply_bits, 0);
        assert_eq!(t.and_block, vec![0u8; 12]);
        // C(12,12) = 1: the index costs nothing
        assert_eq!(t.index_bits, 0);
    }

    #[test]
    fn and_protocol_matches_direct_and() {
        let mut rng = Pcg32::seeded(31);
        for _ in 0..200 {
            let n = 1 + rng.next_below(40) as usize;
            let x1: Vec<u8> = (0..n).map(|_| (rng.next_u32() & 1) as u8).collect();
            let x2: Vec<u8> = (0..n).map(|_| (rng.next_u32() & 1) as u8).collect();
            let t = and_block_protocol(&x1, &x2).unwrap();
            let direct: Vec<u8> = x1.iter().zip(&x2).map(|(a, b)| a & b).collect();
            assert_eq!(t.and_block, direct);
            assert!(t.total_bits as u64 <= and_worst_case_bits(n));
        }
    }

    #[test]
    fn and_protocol_rejects_mismatch() {
        assert!(and_block_protocol(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn and_worst_case_frozen_values() {
        // oracle values computed independently (exhaustive max over k)
        assert_eq!(and_worst_case_bits(15), 26);
        assert_eq!(and_worst_case_bits(63), 103);
        assert_eq!(and_worst_case_bits(255), 408);
    }

    #[test]
    fn and_worst_case_normalized_bounds() {
        let w15 = and_worst_case_bits(15) as f64 / 15.0;
        let w63 = and_worst_case_bits(63) as f64 / 63.0;
        let w255 = and_worst_case_bits(255) as f64 / 255.0;
        assert!(w15 <= LOG2_3 + 0.4);
        assert!(w255 <= 1.05 * LOG2_3);
        assert!(w15 > w63 && w63 > w255, "normalized worst case must shrink");
        for w in [w15, w63, w255] {
            assert!(w >= LOG2_3 - 1e-6);
        }
    }

    #[test]
    fn fooling_set_two_node_and() {
        let f = FunctionTable::and_fn(2).unwrap();
        let res = fooling_set_lower_bound(&f, 4096).unwrap();
        assert!(res.exact);
        assert_eq!(res.set.len(), 3);
        assert_eq!(res.set, vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!((res.bound_bits - LOG2_3).abs() < 1e-12);
    }

    #[test]
    fn fooling_set_four_party_and() {
        let f = FunctionTable::and_fn(4).unwrap();
        let res = fooling_set_lower_bound(&f, 4096).unwrap();
        assert!(res.exact);
        assert_eq!(res.set.len(), 5);
        // all-ones plus the four single-zero vectors
        assert!(res.set.contains(&vec![1, 1, 1, 1]));
        for z in 0..4 {
            let mut v = vec![1usize; 4];
            v[z] = 0;
            assert!(res.set.contains(&v));
        }
    }

    #[test]
    fn fooling_set_threshold_matches_formula() {
        // maximum fooling set size for threshold theta equals C(n+1, theta)
        let f = FunctionTable::boolean_threshold(4, 2).unwrap();
        let res = fooling_set_lower_bound(&f, 4096).unwrap();
        assert!(res.exact);
        assert_eq!(res.set.len(), 10);
        assert!((res.bound_bits - threshold_complexity(4, 2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn greedy_flagged_when_over_budget() {
        let f = FunctionTable::and_fn(3).unwrap();
        let res = fooling_set_lower_bound(&f, 4).unwrap();
        assert!(!res.exact);
        assert!(res.set.len() >= 2);
    }

    #[test]
    fn threshold_complexity_values() {
        assert!((threshold_complexity(1, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((threshold_complexity(2, 2).unwrap() - LOG2_3).abs() < 1e-13);
        assert!((threshold_complexity(4, 2).unwrap() - 10f64.log2()).abs() < 1e-13);
        assert_eq!(threshold_complexity(3, 0).unwrap(), 0.0);
        assert_eq!(threshold_complexity(3, 4).unwrap(), 0.0);
        assert!(threshold_complexity(3, 5).is_err());
    }

    #[test]
    fn interval_bounds_examples() {
        // n=4, a=1, b=2: lower = log2 11, upper = log2 12
        let (lo, hi) = interval_complexity_bounds(4, 1, 2).unwrap();
        assert!((lo - 11f64.log2()).abs() < 1e-13);
        assert!((hi - 12f64.log2()).abs() < 1e-13);
        assert!(interval_complexity_bounds(4, 3, 2).is_err());
        assert!(interval_complexity_bounds(4, 1, 5).is_err());
    }

    #[test]
    fn interval_reduces_to_threshold_like_expression_at_a_eq_b() {
        // a = b = theta with a+b <= n: lower = log2[C(n+1,theta+1) + C(n,a-1)]
        let (lo, _) = interval_complexity_bounds(6, 2, 2).unwrap();
        let expect = big_log2(&(binomial(7, 3) + binomial(6, 1)));
        assert!((lo - expect).abs() < 1e-13);
    }

    #[test]
    fn interval_lower_never_exceeds_upper_exhaustive() {
        for n in 1..=12usize {
            for a in 0..=n {
                for b in a..=n {
                    let (lo, hi) = interval_complexity_bounds(n, a, b).unwrap();
                    assert!(lo <= hi + 1e-12, "n={n} a={a} b={b}: {lo} > {hi}");
                }
            }
        }
    }

    #[test]
    fn interval_cases_agree_on_the_seam() {
        // at a+b = n both displayed forms coincide by symmetry
        for n in 2..=10usize {
            for a in 0..=n / 2 {
                let b = n - a;
                if b < a || b > n {
                    continue;
                }
                let main_low = binomial(n + 1, b + 1)
                    + if a == 0 { BigUint::zero() } else { binomial(n, a - 1) };
                let alt_low = binomial(n + 1, a) + binomial(n, b + 1);
                assert_eq!(main_low, alt_low, "n={n} a={a} b={b}");
            }
        }
    }

    #[test]
    fn fooling_bound_never_exceeds_threshold_formula() {
        for n in 2..=4usize {
            for theta in 0..=n {
                let f = FunctionTable::boolean_threshold(n, theta).unwrap();
                let res = fooling_set_lower_bound(&f, 4096).unwrap();
                assert!(res.exact);
                let formula = threshold_complexity(n, theta).unwrap();
                assert!(res.bound_bits <= formula + 1e-9);
                assert!(
                    (res.bound_bits - formula).abs() < 1e-9,
                    "n={n} theta={theta}: fooling {} vs formula {formula}",
                    res.bound_bits
                );
            }
        }
    }
}
