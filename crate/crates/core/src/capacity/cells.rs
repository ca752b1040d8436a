use super::{
    protocol_feasible, DeliveryEntry, DeliveryLog, ProtocolParams, Slot, Transmission,
};
use crate::rgg::{Domain, NodePlacement};
use crate::{Error, Result};

/// One origin-destination flow routed through the cell grid: the sequence of
/// cells met by the straight src-dst segment and the concrete relay hops.
#[derive(Debug, Clone)]
pub struct RelayRoute {
    pub source: usize,
    pub dest: usize,
    pub cells: Vec<usize>,
    pub hops: Vec<(usize, usize)>,
}

/// Cell-based multihop relay scheme on the unit square: a grid of cells of
/// side `sqrt(kappa ln n / n)`, one designated relay per non-empty cell,
/// straight-line cell routes and a verified TDMA cell coloring.
#[derive(Debug, Clone)]
pub struct CellScheme {
    placement: NodePlacement,
    cell_side: f64,
    cells_per_axis: usize,
    cell_of_node: Vec<usize>,
    relay_of_cell: Vec<Option<usize>>,
    routes: Vec<RelayRoute>,
    reuse_distance: usize,
    color_of_cell: Vec<usize>,
    kappa: f64,
}

impl CellScheme {
    pub fn placement(&self) -> &NodePlacement {
        &self.placement
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn routes(&self) -> &[RelayRoute] {
        &self.routes
    }

    pub fn relay_of_cell(&self, cell: usize) -> Option<usize> {
        self.relay_of_cell[cell]
    }

    pub fn cell_of_node(&self, node: usize) -> usize {
        self.cell_of_node[node]
    }

    /// TDMA reuse distance in cells.
    pub fn reuse_distance(&self) -> usize {
        self.reuse_distance
    }

    /// TDMA cycle length: one slot per residue class of the reuse tiling.
    pub fn num_colors(&self) -> usize {
        self.reuse_distance * self.reuse_distance
    }

    pub fn color_of_cell(&self, cell: usize) -> usize {
        self.color_of_cell[cell]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest number of hops transmitting from any one cell: the TDMA
    /// service bottleneck, useful for sizing simulation windows.
    pub fn max_cell_load(&self) -> usize {
        let mut load = vec![0usize; self.cells_per_axis * self.cells_per_axis];
        for route in &self.routes {
            for &(tx, _) in &route.hops {
                load[self.cell_of_node[tx]] += 1;
            }
        }
        load.into_iter().max().unwrap_or(0)
    }
}

fn cell_index(g: usize, cx: usize, cy: usize) -> usize {
    cy * g + cx
}

fn cell_of_point(side: f64, g: usize, p: (f64, f64)) -> (usize, usize) {
    let cx = ((p.0 / side).floor() as isize).clamp(0, g as isize - 1) as usize;
    let cy = ((p.1 / side).floor() as isize).clamp(0, g as isize - 1) as usize;
    (cx, cy)
}

/// Grid cells crossed by the segment a -> b, in order, stepping one axis at
/// a time so consecutive cells share an edge.
fn segment_cells(side: f64, g: usize, a: (f64, f64), b: (f64, f64)) -> Result<Vec<(usize, usize)>> {
    let (mut cx, mut cy) = cell_of_point(side, g, a);
    let (ex, ey) = cell_of_point(side, g, b);
    let mut cells = vec![(cx, cy)];
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let step_x: isize = if dx > 0.0 { 1 } else { -1 };
    let step_y: isize = if dy > 0.0 { 1 } else { -1 };
    let mut t_max_x = if dx != 0.0 {
        let boundary = if dx > 0.0 { (cx as f64 + 1.0) * side } else { cx as f64 * side };
        (boundary - a.0) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        let boundary = if dy > 0.0 { (cy as f64 + 1.0) * side } else { cy as f64 * side };
        (boundary - a.1) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 { side / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { side / dy.abs() } else { f64::INFINITY };
    let mut guard = 4 * (g + 2);
    while (cx, cy) != (ex, ey) {
        if guard == 0 {
            return Err(Error::NumericFailure(
                "grid traversal missed the destination cell".into(),
            ));
        }
        guard -= 1;
        if t_max_x <= t_max_y {
            let nx = cx as isize + step_x;
            if nx < 0 || nx >= g as isize {
                return Err(Error::NumericFailure("grid traversal left the grid".into()));
            }
            cx = nx as usize;
            t_max_x += t_delta_x;
        } else {
            let ny = cy as isize + step_y;
            if ny < 0 || ny >= g as isize {
                return Err(Error::NumericFailure("grid traversal left the grid".into()));
            }
            cy = ny as usize;
            t_max_y += t_delta_y;
        }
        cells.push((cx, cy));
    }
    Ok(cells)
}

/// Builds the relay scheme. Cell side is `sqrt(kappa ln n / n)` (clamped so
/// a degenerate small-n grid collapses to a single cell); the relay of every
/// non-empty cell is its lowest node index; the reuse distance starts at
/// `ceil(2 (1 + delta)) + 1` and is incremented until every pair of hops
/// that the TDMA coloring could co-activate passes the protocol-model check.
pub fn build_cell_scheme(
    placement: &NodePlacement,
    od_pairs: &[(usize, usize)],
    kappa: f64,
    params: &ProtocolParams,
) -> Result<CellScheme> {
    if placement.domain() != Domain::UnitSquare {
        return Err(Error::InvalidArgument(
            "cell scheme requires a unit-square placement".into(),
        ));
    }
    if kappa < 1.0 || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be >= 1, got {kappa}")));
    }
    let n = placement.len();
    for &(s, d) in od_pairs {
        if s >= n || d >= n {
            return Err(Error::InvalidArgument(format!(
                "od pair ({s},{d}) out of range for n={n}"
            )));
        }
    }
    let raw_side = (kappa * (n as f64).ln() / n as f64).sqrt();
    let (side, g) = if n == 1 || !(raw_side > 0.0) || raw_side >= 1.0 {
        (1.0, 1usize)
    } else {
        let g = (1.0 / raw_side).ceil() as usize;
        (raw_side, g.max(1))
    };
    let pts = placement.points();
    let mut cell_of_node = Vec::with_capacity(n);
    let mut relay_of_cell: Vec<Option<usize>> = vec![None; g * g];
    for (i, &p) in pts.iter().enumerate() {
        let (cx, cy) = cell_of_point(side, g, p);
        let c = cell_index(g, cx, cy);
        cell_of_node.push(c);
        if relay_of_cell[c].is_none() {
            relay_of_cell[c] = Some(i); // lowest index wins: first visit
        }
    }

    let mut routes = Vec::with_capacity(od_pairs.len());
    for &(src, dst) in od_pairs {
        let cell_coords = segment_cells(side, g, pts[src], pts[dst])?;
        let cells: Vec<usize> = cell_coords
            .iter()
            .map(|&(cx, cy)| cell_index(g, cx, cy))
            .collect();
        let mut hops = Vec::new();
        if src != dst {
            // node chain: src, relays of the interior cells, dst
            let mut chain = Vec::with_capacity(cells.len() + 1);
            chain.push(src);
            for &c in cells.iter().skip(1).take(cells.len().saturating_sub(2)) {
                let relay = relay_of_cell[c].ok_or_else(|| {
                    Error::SchemeFailure(format!(
                        "route {src}->{dst} crosses empty cell {c}; raise kappa"
                    ))
                })?;
                chain.push(relay);
            }
            chain.push(dst);
            chain.dedup();
            for w in chain.windows(2) {
                hops.push((w[0], w[1]));
            }
        }
        routes.push(RelayRoute {
            source: src,
            dest: dst,
            cells,
            hops,
        });
    }

    // TDMA coloring: residue classes (cx mod m, cy mod m); verify that every
    // pair of hops the coloring could co-activate is protocol-feasible.
    let all_hops: Vec<(usize, usize)> = routes.iter().flat_map(|r| r.hops.iter().copied()).collect();
    let guard = 1.0 + params.delta;
    let mut m = (2.0 * guard).ceil() as usize + 1;
    let color_for = |m: usize, cell: usize| -> usize {
        let (cx, cy) = (cell % g, cell / g);
        (cy % m) * m + (cx % m)
    };
    loop {
        let mut by_color: std::collections::BTreeMap<usize, Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for &h in &all_hops {
            by_color
                .entry(color_for(m, cell_of_node[h.0]))
                .or_default()
                .push(h);
        }
        let mut ok = true;
        'outer: for hops in by_color.values() {
            for (ai, &(a_src, a_dst)) in hops.iter().enumerate() {
                let zone_a = guard * placement.distance(a_src, a_dst);
                for &(b_src, b_dst) in hops.iter().skip(ai + 1) {
                    if cell_of_node[a_src] == cell_of_node[b_src] {
                        continue; // same cell: serialized, never concurrent
                    }
                    let zone_b = guard * placement.distance(b_src, b_dst);
                    if placement.distance(a_src, b_dst) <= zone_a
                        || placement.distance(b_src, a_dst) <= zone_b
                    {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            break;
        }
        if m >= g {
            // distinct cells can no longer share a color; must be feasible
            return Err(Error::SchemeFailure(
                "reuse verification failed even with unique cell colors".into(),
            ));
        }
        m += 1;
    }

    let color_of_cell: Vec<usize> = (0..g * g).map(|c| color_for(m, c)).collect();
    Ok(CellScheme {
        placement: placement.clone(),
        cell_side: side,
        cells_per_axis: g,
        cell_of_node,
        relay_of_cell,
        routes,
        reuse_distance: m,
        color_of_cell,
        kappa,
    })
}

/// Outcome of a throughput simulation.
#[derive(Debug, Clone)]
pub struct ThroughputResult {
    /// Min over origin-destination pairs of delivered bits per second.
    pub lambda_hat: f64,
    /// Bits delivered inside the measurement window, per route.
    pub delivered: Vec<u64>,
    /// Slots in the measurement window (`rounds * num_colors`).
    pub total_slots: u64,
    /// Non-empty slots that were run through the protocol-model check.
    pub slots_checked: u64,
    pub log: DeliveryLog,
}

/// Discrete-time TDMA simulation of a cell scheme.
///
/// Each round cycles once through all color classes; a slot activates at
/// most one backlogged hop per cell of the active color (round-robin over
/// the cell's hops, FIFO within a route). Sources are saturated. One slot
/// moves one bit across one hop at rate W, so a slot lasts `1/W` seconds.
/// Every emitted slot is verified with `protocol_feasible`; a violation
/// aborts the simulation with a scheme-failure error.
pub fn simulate_throughput(
    scheme: &CellScheme,
    params: &ProtocolParams,
    rounds: u64,
) -> Result<ThroughputResult> {
    simulate_throughput_windowed(scheme, params, 0, rounds)
}

/// Like [`simulate_throughput`] but discards `warmup` rounds before the
/// measurement window so multi-hop pipelines fill before rates are read.
pub fn simulate_throughput_windowed(
    scheme: &CellScheme,
    params: &ProtocolParams,
    warmup: u64,
    rounds: u64,
) -> Result<ThroughputResult> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("need at least one round".into()));
    }
    let num_colors = scheme.num_colors();
    let g = scheme.cells_per_axis;
    // hop work items per transmitter cell
    let mut hops_of_cell: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g * g];
    for (ri, route) in scheme.routes.iter().enumerate() {
        for (hi, &(tx, _)) in route.hops.iter().enumerate() {
            hops_of_cell[scheme.cell_of_node[tx]].push((ri, hi));
        }
    }
    let cells_of_color: Vec<Vec<usize>> = {
        let mut v = vec![Vec::new(); num_colors];
        for c in 0..g * g {
            if !hops_of_cell[c].is_empty() {
                v[scheme.color_of_cell[c]].push(c);
            }
        }
        v
    };
    // queue[r][h] = bits waiting at hop h's transmitter (h = 0 reads the
    // saturated source instead)
    let mut queue: Vec<Vec<u64>> = scheme
        .routes
        .iter()
        .map(|r| vec![0u64; r.hops.len()])
        .collect();
    let mut cursor: Vec<usize> = vec![0; g * g];
    let mut delivered: Vec<u64> = vec![0; scheme.routes.len()];
    let mut slots_checked = 0u64;

    for round in 0..warmup + rounds {
        let measuring = round >= warmup;
        for color in 0..num_colors {
            let mut fired: Vec<(usize, usize)> = Vec::new();
            for &cell in &cells_of_color[color] {
                let hops = &hops_of_cell[cell];
                let len = hops.len();
                let start = cursor[cell];
                for k in 0..len {
                    let (ri, hi) = hops[(start + k) % len];
                    let backlogged = hi == 0 || queue[ri][hi] > 0;
                    if backlogged {
                        fired.push((ri, hi));
                        cursor[cell] = (start + k + 1) % len;
                        break;
                    }
                }
            }
            if fired.is_empty() {
                continue;
            }
            let txs: Vec<Transmission> = fired
                .iter()
                .map(|&(ri, hi)| {
                    let (s, d) = scheme.routes[ri].hops[hi];
                    Transmission::new(s, d)
                })
                .collect();
            let slot = Slot::new(txs)?;
            let check = protocol_feasible(&slot, &scheme.placement, params)?;
            if !check.feasible {
                return Err(Error::SchemeFailure(format!(
                    "emitted slot violates the protocol model: {:?}",
                    check.violations
                )));
            }
            slots_checked += 1;
            for &(ri, hi) in &fired {
                if hi > 0 {
                    queue[ri][hi] -= 1;
                }
                if hi + 1 < queue[ri].len() {
                    queue[ri][hi + 1] += 1;
                } else if measuring {
                    delivered[ri] += 1;
                }
            }
        }
    }

    let total_slots = rounds * num_colors as u64;
    let duration = total_slots as f64 / params.rate_w;
    let entries: Vec<DeliveryEntry> = scheme
        .routes
        .iter()
        .zip(&delivered)
        .map(|(r, &bits)| DeliveryEntry {
            source: r.source,
            destination: r.dest,
            bits,
            distance: scheme.placement.distance(r.source, r.dest),
        })
        .collect();
    let log = DeliveryLog::new(entries, duration)?;
    let eligible: Vec<u64> = scheme
        .routes
        .iter()
        .zip(&delivered)
        .filter(|(r, _)| !r.hops.is_empty())
        .map(|(_, &d)| d)
        .collect();
    if eligible.is_empty() {
        return Err(Error::InvalidArgument(
            "no route with at least one hop to measure".into(),
        ));
    }
    let lambda_hat =
        params.rate_w * (*eligible.iter().min().unwrap() as f64) / total_slots as f64;
    Ok(ThroughputResult {
        lambda_hat,
        delivered,
        total_slots,
        slots_checked,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{protocol_upper_bound, transport_capacity};
    use crate::numerics::Pcg32;
    use crate::rgg::place_uniform;

    fn random_od_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
        let mut rng = Pcg32::seeded(seed);
        (0..n)
            .map(|i| {
                let mut d = rng.next_below(n as u64) as usize;
                while d == i {
                    d = rng.next_below(n as u64) as usize;
                }
                (i, d)
            })
            .collect()
    }

    #[test]
    fn single_node_single_cell_route() {
        let p = place_uniform(1, Domain::UnitSquare, 3).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &[(0, 0)], 2.0, &params).unwrap();
        assert_eq!(scheme.routes()[0].cells.len(), 1);
        assert!(scheme.routes()[0].hops.is_empty());
    }

    #[test]
    fn same_cell_pair_is_one_hop() {
        let pts = vec![(0.51, 0.52), (0.52, 0.51)];
        let p = NodePlacement::from_points(pts, Domain::UnitSquare).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &[(0, 1)], 2.0, &params).unwrap();
        assert_eq!(scheme.routes()[0].cells.len(), 1);
        assert_eq!(scheme.routes()[0].hops, vec![(0, 1)]);
    }

    #[test]
    fn route_cells_are_edge_adjacent() {
        let p = place_uniform(512, Domain::UnitSquare, 11).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &random_od_pairs(512, 77), 2.0, &params).unwrap();
        let g = scheme.cells_per_axis();
        for route in scheme.routes() {
            for w in route.cells.windows(2) {
                let (ax, ay) = (w[0] % g, w[0] / g);
                let (bx, by) = (w[1] % g, w[1] / g);
                let dist = ax.abs_diff(bx) + ay.abs_diff(by);
                assert_eq!(dist, 1, "route cells must share an edge");
            }
            // hops must connect source to destination
            if route.source != route.dest {
                assert_eq!(route.hops.first().unwrap().0, route.source);
                assert_eq!(route.hops.last().unwrap().1, route.dest);
                for w in route.hops.windows(2) {
                    assert_eq!(w[0].1, w[1].0);
                }
            }
        }
    }

    #[test]
    fn relays_are_lowest_index_per_cell() {
        let p = place_uniform(200, Domain::UnitSquare, 5).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &[], 2.0, &params).unwrap();
        let g = scheme.cells_per_axis();
        for cell in 0..g * g {
            let members: Vec<usize> = (0..200).filter(|&i| scheme.cell_of_node(i) == cell).collect();
            match scheme.relay_of_cell(cell) {
                Some(r) => assert_eq!(r, *members.iter().min().unwrap()),
                None => assert!(members.is_empty()),
            }
        }
    }

    #[test]
    fn disk_placement_rejected() {
        let p = place_uniform(16, Domain::UnitAreaDisk, 1).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        assert!(build_cell_scheme(&p, &[], 2.0, &params).is_err());
    }

    #[test]
    fn single_pair_single_cell_throughput_is_w_over_colors() {
        let pts = vec![(0.41, 0.42), (0.42, 0.41)];
        let p = NodePlacement::from_points(pts, Domain::UnitSquare).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &[(0, 1)], 2.0, &params).unwrap();
        let res = simulate_throughput(&scheme, &params, 50).unwrap();
        let expect = params.rate_w / scheme.num_colors() as f64;
        assert!((res.lambda_hat - expect).abs() < 1e-12);
    }

    #[test]
    fn adding_pairs_does_not_raise_lambda() {
        let p = place_uniform(256, Domain::UnitSquare, 9).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let pairs = random_od_pairs(256, 123);
        let few = build_cell_scheme(&p, &pairs[..64], 2.0, &params).unwrap();
        let many = build_cell_scheme(&p, &pairs, 2.0, &params).unwrap();
        let lam_few = simulate_throughput(&few, &params, 400).unwrap().lambda_hat;
        let lam_many = simulate_throughput(&many, &params, 400).unwrap().lambda_hat;
        assert!(lam_many <= lam_few + 1e-12);
    }

    #[test]
    fn large_instance_all_cells_occupied_and_feasible() {
        // n = 1024, kappa = 2: every cell holds a relay and every scheduled
        // slot passes the protocol check (run-time verification)
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let mut seed = 7u64;
        let (scheme, res) = loop {
            let p = place_uniform(1024, Domain::UnitSquare, seed).unwrap();
            match build_cell_scheme(&p, &random_od_pairs(1024, seed), 2.0, &params) {
                Ok(s) => {
                    let r = simulate_throughput(&s, &params, 200).unwrap();
                    break (s, r);
                }
                Err(_) => seed += 1,
            }
        };
        let g = scheme.cells_per_axis();
        assert!((0..g * g).all(|c| scheme.relay_of_cell(c).is_some()));
        assert!(res.slots_checked > 0);
    }

    #[test]
    fn simulated_schedule_respects_upper_bound() {
        let p = place_uniform(256, Domain::UnitSquare, 21).unwrap();
        let params = ProtocolParams::new(1.0, 1.0).unwrap();
        let scheme = build_cell_scheme(&p, &random_od_pairs(256, 31), 2.0, &params).unwrap();
        let res = simulate_throughput(&scheme, &params, 500).unwrap();
        assert!(res.slots_checked > 0);
        let measured = transport_capacity(&res.log);
        let bound = protocol_upper_bound(256, 1.0, &params).unwrap();
        assert!(measured <= bound, "{measured} > {bound}");
    }
}
