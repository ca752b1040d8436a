//! Affine clock simulation and synchronization: time-stamped packet
//! exchanges over links with fixed unknown delays, skew/delay/offset
//! estimators, uncertainty sets, network least squares and spatial
//! smoothing.
//!
//! Conventions: node 0 is the reference clock (identity). Delays are
//! expressed in reference-clock time units; the simulator converts sender
//! stamps to reference time through the inverse affine map. A display
//! `tau_j(t) = a_j t + b_j` maps reference time to clock j's reading.

mod smoothing;
mod uncertainty;

pub use smoothing::{
    cheeger_bounds, consistent_measurements, estimator_variance, ls_offsets, noisy_measurements,
    settling_iterations, smoothing_async, smoothing_iteration_matrix, smoothing_spectral_radius,
    smoothing_sync, OffsetMeasurement, SmoothingState, SyncTrace,
};
pub use uncertainty::{
    offset_uncertainty_interval, offset_uncertainty_polyhedron, OffsetPolyhedron,
    OffsetUncertainty,
};

use crate::numerics::Pcg32;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Affine clock: display = skew * t + offset, with t in reference time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineClock {
    pub skew: f64,
    pub offset: f64,
}

impl AffineClock {
    pub fn new(skew: f64, offset: f64) -> Result<Self> {
        if skew <= 0.0 || !skew.is_finite() {
            return Err(Error::InvalidArgument(format!("skew must be > 0, got {skew}")));
        }
        Ok(AffineClock { skew, offset })
    }

    pub fn identity() -> Self {
        AffineClock {
            skew: 1.0,
            offset: 0.0,
        }
    }

    /// Reference time -> this clock's display.
    pub fn display(&self, t: f64) -> f64 {
        self.skew * t + self.offset
    }

    /// This clock's display -> reference time.
    pub fn to_reference(&self, display: f64) -> f64 {
        (display - self.offset) / self.skew
    }
}

/// Per-node affine clocks plus per-directed-link fixed delays.
#[derive(Debug, Clone)]
pub struct ClockWorld {
    clocks: Vec<AffineClock>,
    links: Vec<(usize, usize)>,
    delays: BTreeMap<(usize, usize), f64>,
}

impl ClockWorld {
    /// `link_delays` lists each directed link once as `(i, j, d_ij)`.
    /// Node 0 must be exactly the identity clock and delays nonnegative.
    pub fn new(clocks: Vec<AffineClock>, link_delays: Vec<(usize, usize, f64)>) -> Result<Self> {
        if clocks.is_empty() {
            return Err(Error::InvalidArgument("world needs at least one clock".into()));
        }
        if clocks[0] != AffineClock::identity() {
            return Err(Error::InvalidArgument(
                "node 0 must be the identity reference clock".into(),
            ));
        }
        let n = clocks.len();
        let mut links = Vec::with_capacity(link_delays.len());
        let mut delays = BTreeMap::new();
        for (i, j, d) in link_delays {
            if i == j || i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("bad link ({i},{j}) for n={n}")));
            }
            if d < 0.0 || !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "delay on ({i},{j}) must be >= 0, got {d}"
                )));
            }
            if delays.insert((i, j), d).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate link ({i},{j})")));
            }
            links.push((i, j));
        }
        links.sort_unstable();
        Ok(ClockWorld {
            clocks,
            links,
            delays,
        })
    }

    /// Random world on the given directed links: skews in [0.5, 2], offsets
    /// in [-10, 10], delays in [0, 2].
    pub fn random(n: usize, links: &[(usize, usize)], seed: u64) -> Result<Self> {
        let mut rng = Pcg32::seeded(seed);
        let mut clocks = vec![AffineClock::identity()];
        for _ in 1..n {
            clocks.push(AffineClock::new(rng.uniform(0.5, 2.0), rng.uniform(-10.0, 10.0))?);
        }
        let link_delays = links
            .iter()
            .map(|&(i, j)| (i, j, rng.uniform(0.0, 2.0)))
            .collect();
        ClockWorld::new(clocks, link_delays)
    }

    pub fn len(&self) -> usize {
        self.clocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clocks.is_empty()
    }

    pub fn clock(&self, i: usize) -> &AffineClock {
        &self.clocks[i]
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn delay(&self, i: usize, j: usize) -> Option<f64> {
        self.delays.get(&(i, j)).copied()
    }

    /// Display difference tau_j - tau_i at reference time t.
    pub fn display_difference(&self, i: usize, j: usize, t: f64) -> f64 {
        self.clocks[j].display(t) - self.clocks[i].display(t)
    }
}

/// One time-stamped packet: sent by `sender` at `send_stamp` (sender's
/// clock), received by `receiver` at `recv_stamp` (receiver's clock).
/// `index` counts packets per directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    pub sender: usize,
    pub receiver: usize,
    pub index: usize,
    pub send_stamp: f64,
    pub recv_stamp: f64,
}

/// Simulates noiseless exchanges: for each `(i, j, s)` the receive stamp is
/// `a_j ((s - b_i)/a_i + d_ij) + b_j` exactly. Send times must be strictly
/// increasing per sender and every link must exist in the world.
pub fn simulate_exchange(
    world: &ClockWorld,
    sends: &[(usize, usize, f64)],
) -> Result<Vec<PacketRecord>> {
    let mut last_send: BTreeMap<usize, f64> = BTreeMap::new();
    let mut per_link_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(sends.len());
    for &(i, j, s) in sends {
        let Some(d) = world.delay(i, j) else {
            return Err(Error::InvalidArgument(format!("link ({i},{j}) not in graph")));
        };
        if let Some(&prev) = last_send.get(&i) {
            if s <= prev {
                return Err(Error::InvalidArgument(format!(
                    "send times must be strictly increasing per sender (node {i}: {s} after {prev})"
                )));
            }
        }
        last_send.insert(i, s);
        let t_send = world.clock(i).to_reference(s);
        let r = world.clock(j).display(t_send + d);
        let k = per_link_count.entry((i, j)).or_insert(0);
        out.push(PacketRecord {
            sender: i,
            receiver: j,
            index: *k,
            send_stamp: s,
            recv_stamp: r,
        });
        *k += 1;
    }
    Ok(out)
}

/// Like [`simulate_exchange`] but adds zero-mean Gaussian jitter with the
/// given per-link standard deviation to each receive stamp.
pub fn simulate_exchange_noisy(
    world: &ClockWorld,
    sends: &[(usize, usize, f64)],
    jitter_std: &BTreeMap<(usize, usize), f64>,
    rng: &mut Pcg32,
) -> Result<Vec<PacketRecord>> {
    let mut records = simulate_exchange(world, sends)?;
    for rec in &mut records {
        if let Some(&std) = jitter_std.get(&(rec.sender, rec.receiver)) {
            if std < 0.0 {
                return Err(Error::InvalidArgument("negative jitter std".into()));
            }
            rec.recv_stamp += std * rng.next_gaussian();
        }
    }
    Ok(records)
}

/// Relative skew `a_j / a_i` from two packets on the same directed link:
/// the ratio of receive-stamp to send-stamp differences. Exact under fixed
/// delays, independent of the delay value.
pub fn estimate_relative_skew(p1: &PacketRecord, p2: &PacketRecord) -> Result<f64> {
    if p1.sender != p2.sender || p1.receiver != p2.receiver {
        return Err(Error::InvalidArgument("packets must share a directed link".into()));
    }
    if p1.index == p2.index {
        return Err(Error::InvalidArgument("need two distinct packets".into()));
    }
    let ds = p2.send_stamp - p1.send_stamp;
    if ds == 0.0 {
        return Err(Error::InvalidArgument("equal send stamps".into()));
    }
    Ok((p2.recv_stamp - p1.recv_stamp) / ds)
}

/// One completed round trip on a bidirectional pair: `forward` is i -> j,
/// `backward` is j -> i.
fn check_round(forward: &PacketRecord, backward: &PacketRecord) -> Result<()> {
    if forward.sender != backward.receiver || forward.receiver != backward.sender {
        return Err(Error::InvalidArgument(
            "forward/backward packets do not form a round trip".into(),
        ));
    }
    Ok(())
}

/// Delay and offset estimates from one ping-pong round.
///
/// With `s_i, r_ij` the forward stamps and `s_j, r_ji` the backward stamps,
/// and skew estimates `skew_ij ~ a_j/a_i`, `skew_ji ~ a_i/a_j`:
///
/// `d_hat = [(r_ji - s_j) + (r_ij - s_i) + (s_j - r_ij)(1 - skew_ji)] / 2`
/// is half the round-trip delay expressed in node i's clock units (so the
/// true one-way delay when delays are symmetric and node i is the
/// reference), and `tau_hat = -r_ji + s_j + skew_ij * d_hat` estimates the
/// display difference `tau_j - tau_i` at the receipt of the backward
/// packet (exact under symmetric delays).
pub fn estimate_delay_and_offset(
    forward: &PacketRecord,
    backward: &PacketRecord,
    skew_ij: f64,
    skew_ji: f64,
) -> Result<(f64, f64)> {
    check_round(forward, backward)?;
    if skew_ij <= 0.0 || skew_ji <= 0.0 {
        return Err(Error::InvalidArgument("skew estimates must be positive".into()));
    }
    let (s_i, r_ij) = (forward.send_stamp, forward.recv_stamp);
    let (s_j, r_ji) = (backward.send_stamp, backward.recv_stamp);
    let d_hat = 0.5 * ((r_ji - s_j) + (r_ij - s_i) + (s_j - r_ij) * (1.0 - skew_ji));
    let tau_hat = -r_ji + s_j + skew_ij * d_hat;
    Ok((d_hat, tau_hat))
}

/// Round-trip delay `d_ij + d_ji` from one ping-pong round, in node i's
/// clock units. Exact for any skews and any delay asymmetry once the
/// relative skew `skew_ji ~ a_i/a_j` is exact; independent of both offsets.
pub fn roundtrip_delay(
    forward: &PacketRecord,
    backward: &PacketRecord,
    skew_ji: f64,
) -> Result<f64> {
    check_round(forward, backward)?;
    if skew_ji <= 0.0 {
        return Err(Error::InvalidArgument("skew estimate must be positive".into()));
    }
    let (s_i, r_ij) = (forward.send_stamp, forward.recv_stamp);
    let (s_j, r_ji) = (backward.send_stamp, backward.recv_stamp);
    Ok((r_ji - s_j) + (r_ij - s_i) + (s_j - r_ij) * (1.0 - skew_ji))
}

/// Runs `rounds` ping-pong rounds i -> j -> i. The backward packet of each
/// round is sent one unit (j's clock) after the forward packet arrives.
/// Returns (forward, backward) record pairs with per-round indices.
pub fn ping_pong_rounds(
    world: &ClockWorld,
    i: usize,
    j: usize,
    rounds: usize,
    start: f64,
    spacing: f64,
) -> Result<Vec<(PacketRecord, PacketRecord)>> {
    if rounds == 0 || spacing <= 0.0 {
        return Err(Error::InvalidArgument("need rounds >= 1 and spacing > 0".into()));
    }
    let mut out = Vec::with_capacity(rounds);
    let mut s_i = start;
    for _ in 0..rounds {
        let fwd = simulate_exchange(world, &[(i, j, s_i)])?.pop().unwrap();
        let s_j = fwd.recv_stamp + 1.0;
        let bwd = simulate_exchange(world, &[(j, i, s_j)])?.pop().unwrap();
        out.push((fwd, bwd));
        s_i += spacing;
    }
    // per-link packet indices across rounds
    for (k, (fwd, bwd)) in out.iter_mut().enumerate() {
        fwd.index = k;
        bwd.index = k;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_world(skew: f64, offset: f64, d01: f64, d10: f64) -> ClockWorld {
        ClockWorld::new(
            vec![AffineClock::identity(), AffineClock::new(skew, offset).unwrap()],
            vec![(0, 1, d01), (1, 0, d10)],
        )
        .unwrap()
    }

    #[test]
    fn world_invariants() {
        assert!(ClockWorld::new(vec![AffineClock::new(2.0, 0.0).unwrap()], vec![]).is_err());
        assert!(ClockWorld::new(
            vec![AffineClock::identity(), AffineClock::identity()],
            vec![(0, 1, -1.0)]
        )
        .is_err());
        assert!(AffineClock::new(0.0, 1.0).is_err());
    }

    #[test]
    fn identity_clocks_zero_delay_echo() {
        let w = two_node_world(1.0, 0.0, 0.0, 0.0);
        let recs = simulate_exchange(&w, &[(0, 1, 5.0), (0, 1, 7.5)]).unwrap();
        for r in recs {
            assert_eq!(r.recv_stamp, r.send_stamp);
        }
    }

    #[test]
    fn affine_receive_stamp() {
        // a_j = 2, b_j = 3, d = 1, sender = reference, s = 10 -> r = 2*11 + 3
        let w = two_node_world(2.0, 3.0, 1.0, 0.0);
        let r = simulate_exchange(&w, &[(0, 1, 10.0)]).unwrap()[0];
        assert_eq!(r.recv_stamp, 25.0);
    }

    #[test]
    fn asymmetric_delays_produce_asymmetric_stamps() {
        let w = two_node_world(1.0, 0.0, 0.5, 2.5);
        let fwd = simulate_exchange(&w, &[(0, 1, 1.0)]).unwrap()[0];
        let bwd = simulate_exchange(&w, &[(1, 0, 1.0)]).unwrap()[0];
        assert!((fwd.recv_stamp - fwd.send_stamp) != (bwd.recv_stamp - bwd.send_stamp));
    }

    #[test]
    fn exchange_rejects_unknown_link_and_nonincreasing_sends() {
        let w = two_node_world(1.0, 0.0, 0.0, 0.0);
        assert!(simulate_exchange(&w, &[(1, 1, 0.0)]).is_err());
        assert!(simulate_exchange(&w, &[(0, 1, 1.0), (0, 1, 1.0)]).is_err());
    }

    #[test]
    fn skew_estimate_exact_and_delay_invariant() {
        for d in [0.0, 5.0] {
            let w = two_node_world(2.0, -4.0, d, 1.0);
            let recs = simulate_exchange(&w, &[(0, 1, 1.0), (0, 1, 3.0)]).unwrap();
            let a = estimate_relative_skew(&recs[0], &recs[1]).unwrap();
            assert!((a - 2.0).abs() < 1e-12);
        }
        let w = two_node_world(1.0, 0.0, 0.3, 0.3);
        let recs = simulate_exchange(&w, &[(0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        assert!((estimate_relative_skew(&recs[0], &recs[1]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skew_estimate_rejects_degenerate_pairs() {
        let w = two_node_world(1.5, 2.0, 0.1, 0.1);
        let recs = simulate_exchange(&w, &[(0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        assert!(estimate_relative_skew(&recs[0], &recs[0]).is_err());
        let bwd = simulate_exchange(&w, &[(1, 0, 9.0)]).unwrap()[0];
        assert!(estimate_relative_skew(&recs[0], &bwd).is_err());
    }

    #[test]
    fn delay_offset_identity_clocks_symmetric() {
        // identity clocks, d both ways: d_hat = d, tau_hat = 0
        let w = two_node_world(1.0, 0.0, 1.7, 1.7);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 2.0, 10.0).unwrap()[0];
        let (d_hat, tau_hat) = estimate_delay_and_offset(&fwd, &bwd, 1.0, 1.0).unwrap();
        assert!((d_hat - 1.7).abs() < 1e-12);
        assert!(tau_hat.abs() < 1e-12);
    }

    #[test]
    fn delay_offset_pure_offset_clock() {
        // a_j = 1, b_j = b, symmetric d: tau_hat = b exactly
        // (hand derivation: r_ji = s_j - b + d, r_ij = s_i + d + b)
        let b = -3.25;
        let w = two_node_world(1.0, b, 0.8, 0.8);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 0.0, 5.0).unwrap()[0];
        assert!((fwd.recv_stamp - (fwd.send_stamp + 0.8 + b)).abs() < 1e-12);
        assert!((bwd.recv_stamp - (bwd.send_stamp - b + 0.8)).abs() < 1e-12);
        let (d_hat, tau_hat) = estimate_delay_and_offset(&fwd, &bwd, 1.0, 1.0).unwrap();
        assert!((d_hat - 0.8).abs() < 1e-12);
        assert!((tau_hat - b).abs() < 1e-12);
    }

    #[test]
    fn delay_offset_skewed_clock_symmetric_delays() {
        // symmetric delays, node 0 reference: exact for any a_j once the
        // skew estimates are exact
        let w = two_node_world(1.7, 4.2, 0.6, 0.6);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 1.0, 5.0).unwrap()[0];
        let (d_hat, tau_hat) = estimate_delay_and_offset(&fwd, &bwd, 1.7, 1.0 / 1.7).unwrap();
        assert!((d_hat - 0.6).abs() < 1e-12);
        let t_receipt = bwd.recv_stamp; // node 0's display is reference time
        let truth = w.display_difference(0, 1, t_receipt);
        assert!((tau_hat - truth).abs() < 1e-12, "{tau_hat} vs {truth}");
    }

    #[test]
    fn delay_offset_asymmetry_residual() {
        // equal skews, asymmetric delays: |tau_hat - truth| = |d_ji - d_ij|/2
        let (d01, d10) = (0.4, 1.6);
        let w = two_node_world(1.0, 2.0, d01, d10);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 0.0, 5.0).unwrap()[0];
        let (_, tau_hat) = estimate_delay_and_offset(&fwd, &bwd, 1.0, 1.0).unwrap();
        let truth = 2.0;
        assert!(((tau_hat - truth).abs() - (d10 - d01).abs() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_exact_under_asymmetry_and_offsets() {
        for offset in [0.0, 13.5] {
            let w = two_node_world(1.0, offset, 1.0, 3.0);
            let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 0.0, 5.0).unwrap()[0];
            let rt = roundtrip_delay(&fwd, &bwd, 1.0).unwrap();
            assert!((rt - 4.0).abs() < 1e-12);
        }
        let w = two_node_world(1.0, 0.0, 0.0, 0.0);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 0.0, 5.0).unwrap()[0];
        assert!(roundtrip_delay(&fwd, &bwd, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn roundtrip_exact_with_skew() {
        let w = two_node_world(2.5, -7.0, 0.9, 2.1);
        let (fwd, bwd) = ping_pong_rounds(&w, 0, 1, 1, 0.0, 5.0).unwrap()[0];
        let rt = roundtrip_delay(&fwd, &bwd, 1.0 / 2.5).unwrap();
        assert!((rt - 3.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_exchange_perturbs_only_listed_links() {
        let w = two_node_world(1.0, 0.0, 1.0, 1.0);
        let mut jitter = BTreeMap::new();
        jitter.insert((0usize, 1usize), 0.5f64);
        let mut rng = Pcg32::seeded(4);
        let recs =
            simulate_exchange_noisy(&w, &[(0, 1, 1.0), (1, 0, 1.0)], &jitter, &mut rng).unwrap();
        assert!((recs[0].recv_stamp - 2.0).abs() > 1e-9);
        assert_eq!(recs[1].recv_stamp, 2.0);
    }
}
