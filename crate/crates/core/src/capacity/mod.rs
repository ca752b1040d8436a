//! Interference-model feasibility checking (protocol and physical models),
//! the cell-based multihop relay scheme for random networks, and
//! transport/throughput capacity accounting.

mod cells;

pub use cells::{
    build_cell_scheme, simulate_throughput, simulate_throughput_windowed, CellScheme, RelayRoute,
    ThroughputResult,
};

use crate::rgg::NodePlacement;
use crate::{Error, Result};

/// One point-to-point transmission. `power` is only meaningful under the
/// physical model; protocol-model checks ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub src: usize,
    pub dst: usize,
    pub power: Option<f64>,
}

impl Transmission {
    pub fn new(src: usize, dst: usize) -> Self {
        Transmission {
            src,
            dst,
            power: None,
        }
    }

    pub fn with_power(src: usize, dst: usize, power: f64) -> Self {
        Transmission {
            src,
            dst,
            power: Some(power),
        }
    }
}

/// Protocol interference model parameters: guard factor, per-node link rate
/// and an optional common transmission range.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolParams {
    pub delta: f64,
    pub rate_w: f64,
    pub common_range: Option<f64>,
}

impl ProtocolParams {
    pub fn new(delta: f64, rate_w: f64) -> Result<Self> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta must be > 0, got {delta}")));
        }
        if rate_w <= 0.0 || !rate_w.is_finite() {
            return Err(Error::InvalidArgument(format!("W must be > 0, got {rate_w}")));
        }
        Ok(ProtocolParams {
            delta,
            rate_w,
            common_range: None,
        })
    }

    pub fn with_common_range(mut self, r: f64) -> Self {
        self.common_range = Some(r);
        self
    }
}

/// Physical (SINR) model parameters.
///
/// `literal_interference` reproduces the unweighted interference sum as
/// displayed in the model definition (no per-interferer power factor); the
/// default weights each interferer by its transmit power.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
    pub p_ind: f64,
    pub literal_interference: bool,
}

impl PhysicalParams {
    pub fn new(alpha: f64, beta: f64, noise: f64, p_ind: f64) -> Result<Self> {
        if alpha <= 2.0 {
            return Err(Error::InvalidArgument(format!("alpha must be > 2, got {alpha}")));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidArgument(format!("beta must be > 0, got {beta}")));
        }
        if noise < 0.0 {
            return Err(Error::InvalidArgument(format!("noise must be >= 0, got {noise}")));
        }
        if p_ind <= 0.0 {
            return Err(Error::InvalidArgument(format!("p_ind must be > 0, got {p_ind}")));
        }
        Ok(PhysicalParams {
            alpha,
            beta,
            noise,
            p_ind,
            literal_interference: false,
        })
    }

    pub fn literal(mut self) -> Self {
        self.literal_interference = true;
        self
    }
}

/// A set of concurrently active transmissions.
#[derive(Debug, Clone)]
pub struct Slot {
    transmissions: Vec<Transmission>,
}

impl Slot {
    /// Validates the structural invariants: no node transmits twice, no node
    /// is both a source and a destination in the same slot.
    pub fn new(transmissions: Vec<Transmission>) -> Result<Self> {
        let mut sources = std::collections::BTreeSet::new();
        for t in &transmissions {
            if t.src == t.dst {
                return Err(Error::InvalidArgument(format!(
                    "transmission {} -> {} is a self-loop",
                    t.src, t.dst
                )));
            }
            if !sources.insert(t.src) {
                return Err(Error::InvalidArgument(format!(
                    "node {} transmits twice in one slot",
                    t.src
                )));
            }
            if let Some(p) = t.power {
                if p <= 0.0 {
                    return Err(Error::InvalidArgument(format!("nonpositive power {p}")));
                }
            }
        }
        for t in &transmissions {
            if sources.contains(&t.dst) {
                return Err(Error::InvalidArgument(format!(
                    "node {} is both source and destination in one slot",
                    t.dst
                )));
            }
        }
        Ok(Slot { transmissions })
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }
}

/// Why a slot failed the protocol-model check. Indices refer to positions in
/// the slot's transmission list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolViolation {
    /// The victim's receiver lies inside the closed interference disk of the
    /// interferer (radius `(1+delta) * interferer link length`, centered at
    /// the interfering transmitter).
    Interference { interferer: usize, victim: usize },
    /// The transmission is longer than the configured common range.
    RangeExceeded { tx: usize },
}

#[derive(Debug, Clone)]
pub struct ProtocolCheck {
    pub feasible: bool,
    pub violations: Vec<ProtocolViolation>,
}

fn check_indices(slot: &Slot, placement: &NodePlacement) -> Result<()> {
    let n = placement.len();
    for t in slot.transmissions() {
        if t.src >= n || t.dst >= n {
            return Err(Error::InvalidArgument(format!(
                "transmission {} -> {} out of range for n={n}",
                t.src, t.dst
            )));
        }
    }
    Ok(())
}

/// Protocol-model feasibility: receiver `j` of `i -> j` must satisfy
/// `dist(k, j) > (1+delta) * dist(k, l)` for every other active transmission
/// `k -> l`. The interference-zone boundary is closed: equality counts as
/// interference.
pub fn protocol_feasible(
    slot: &Slot,
    placement: &NodePlacement,
    params: &ProtocolParams,
) -> Result<ProtocolCheck> {
    check_indices(slot, placement)?;
    let txs = slot.transmissions();
    let mut violations = Vec::new();
    if let Some(range) = params.common_range {
        for (i, t) in txs.iter().enumerate() {
            if placement.distance(t.src, t.dst) > range {
                violations.push(ProtocolViolation::RangeExceeded { tx: i });
            }
        }
    }
    let guard = 1.0 + params.delta;
    for (k, interferer) in txs.iter().enumerate() {
        let zone = guard * placement.distance(interferer.src, interferer.dst);
        for (i, victim) in txs.iter().enumerate() {
            if i == k {
                continue;
            }
            if placement.distance(interferer.src, victim.dst) <= zone {
                violations.push(ProtocolViolation::Interference {
                    interferer: k,
                    victim: i,
                });
            }
        }
    }
    Ok(ProtocolCheck {
        feasible: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone)]
pub struct PhysicalCheck {
    pub feasible: bool,
    /// SINR per transmission, in slot order.
    pub sinr: Vec<f64>,
}

/// Physical-model feasibility: every receiver's SINR must reach `beta`.
/// Transmissions without an explicit power transmit at the cap `p_ind`.
pub fn physical_feasible(
    slot: &Slot,
    placement: &NodePlacement,
    params: &PhysicalParams,
) -> Result<PhysicalCheck> {
    check_indices(slot, placement)?;
    let txs = slot.transmissions();
    let powers: Vec<f64> = txs
        .iter()
        .map(|t| t.power.unwrap_or(params.p_ind))
        .collect();
    for (t, &p) in txs.iter().zip(&powers) {
        if p > params.p_ind + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "power {p} exceeds cap {} on {} -> {}",
                params.p_ind, t.src, t.dst
            )));
        }
    }
    let mut sinr = Vec::with_capacity(txs.len());
    for (i, t) in txs.iter().enumerate() {
        let rho = placement.distance(t.src, t.dst);
        if rho <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "coincident src/dst positions on {} -> {}",
                t.src, t.dst
            )));
        }
        let signal = powers[i] * rho.powf(-params.alpha);
        let mut interference = 0.0;
        for (k, other) in txs.iter().enumerate() {
            if k == i {
                continue;
            }
            let d = placement.distance(other.src, t.dst);
            if d <= 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "interferer {} collocated with receiver {}",
                    other.src, t.dst
                )));
            }
            let term = d.powf(-params.alpha);
            interference += if params.literal_interference {
                term
            } else {
                powers[k] * term
            };
        }
        let denom = params.noise + interference;
        sinr.push(if denom == 0.0 { f64::INFINITY } else { signal / denom });
    }
    let feasible = sinr.iter().all(|&s| s >= params.beta);
    Ok(PhysicalCheck { feasible, sinr })
}

/// One delivered flow: source, destination, bits carried and the end-to-end
/// source-destination distance.
#[derive(Debug, Clone, Copy)]
pub struct DeliveryEntry {
    pub source: usize,
    pub destination: usize,
    pub bits: u64,
    pub distance: f64,
}

/// Delivered traffic over a time window, the basis of transport capacity.
#[derive(Debug, Clone)]
pub struct DeliveryLog {
    pub entries: Vec<DeliveryEntry>,
    pub duration: f64,
}

impl DeliveryLog {
    pub fn new(entries: Vec<DeliveryEntry>, duration: f64) -> Result<Self> {
        if duration <= 0.0 || !duration.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "duration must be > 0, got {duration}"
            )));
        }
        if entries.iter().any(|e| e.distance < 0.0) {
            return Err(Error::InvalidArgument("negative distance in delivery log".into()));
        }
        Ok(DeliveryLog { entries, duration })
    }
}

/// Transport capacity in bit-meters/sec: `sum(bits * distance) / duration`.
pub fn transport_capacity(log: &DeliveryLog) -> f64 {
    log.entries
        .iter()
        .map(|e| e.bits as f64 * e.distance)
        .sum::<f64>()
        / log.duration
}

/// Closed-form protocol-model transport capacity upper bound
/// `sqrt(8/pi) * W * sqrt(A n) / sqrt((1+delta) sqrt(delta) sqrt(2+delta))`,
/// valid for any node placement and any feasible schedule.
pub fn protocol_upper_bound(n: usize, area: f64, params: &ProtocolParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1".into()));
    }
    if area <= 0.0 {
        return Err(Error::InvalidArgument(format!("area must be > 0, got {area}")));
    }
    let d = params.delta;
    let denom = ((1.0 + d) * d.sqrt() * (2.0 + d).sqrt()).sqrt();
    Ok((8.0 / std::f64::consts::PI).sqrt() * params.rate_w * (area * n as f64).sqrt() / denom)
}
