use super::{estimate_relative_skew, PacketRecord};
use crate::numerics::{lp_solve, Constraint, ConstraintOp, LinearProgram, LpOutcome, LpSense};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Uncertainty set for the pairwise (offset, delay) parameters of a node j
/// exchanging packets with the reference.
#[derive(Debug, Clone)]
pub enum OffsetUncertainty {
    /// Without causality the consistent parameter vectors form a line in
    /// `(b, d_0j, d_j0)` space: `base + t * direction`.
    Line {
        base: [f64; 3],
        direction: [f64; 3],
    },
    /// With causality (`d >= 0`, `a > 0`) the offset reduces to an interval
    /// that contains the true offset.
    Interval { lo: f64, hi: f64 },
}

fn split_pair_records(
    records: &[PacketRecord],
) -> Result<(usize, Vec<&PacketRecord>, Vec<&PacketRecord>)> {
    let mut j = None;
    for r in records {
        let other = match (r.sender, r.receiver) {
            (0, x) => x,
            (x, 0) => x,
            _ => {
                return Err(Error::InvalidArgument(
                    "pairwise log must involve the reference node 0".into(),
                ))
            }
        };
        match j {
            None => j = Some(other),
            Some(prev) if prev == other => {}
            Some(prev) => {
                return Err(Error::InvalidArgument(format!(
                    "log mixes nodes {prev} and {other}"
                )))
            }
        }
    }
    let Some(j) = j else {
        return Err(Error::InsufficientData("empty packet log".into()));
    };
    let fwd: Vec<&PacketRecord> = records.iter().filter(|r| r.sender == 0).collect();
    let bwd: Vec<&PacketRecord> = records.iter().filter(|r| r.receiver == 0).collect();
    if fwd.is_empty() || bwd.is_empty() {
        return Err(Error::InsufficientData(
            "need at least one packet in each direction".into(),
        ));
    }
    Ok((j, fwd, bwd))
}

/// Recovers `a_j` from the log: two packets on one direction of the pair.
fn recover_skew(fwd: &[&PacketRecord], bwd: &[&PacketRecord]) -> Result<f64> {
    if fwd.len() >= 2 {
        estimate_relative_skew(fwd[0], fwd[1])
    } else if bwd.len() >= 2 {
        Ok(1.0 / estimate_relative_skew(bwd[0], bwd[1])?)
    } else {
        Err(Error::InsufficientData(
            "need two packets on one direction to recover the skew".into(),
        ))
    }
}

/// Characterizes the uncertainty set for `(b_j, d_0j, d_j0)` from a packet
/// log between the reference and one node.
///
/// Every forward packet pins `b + a d_0j = r - a s`; every backward packet
/// pins `b - a d_j0 = s - a r`. Without causality that leaves the line with
/// direction `(-a, 1, -1)`; with causality the offset is the interval
/// obtained by minimizing/maximizing `b` subject to `d >= 0` (solved as two
/// linear programs), whose length is `a_j (d_0j + d_j0)` under exact skew
/// recovery.
pub fn offset_uncertainty_interval(
    records: &[PacketRecord],
    causality: bool,
) -> Result<OffsetUncertainty> {
    let (_, fwd, bwd) = split_pair_records(records)?;
    let skew = recover_skew(&fwd, &bwd)?;
    if !causality {
        // base point at d_0j = 0
        let f = fwd[0];
        let b0 = f.recv_stamp - skew * f.send_stamp;
        let r = bwd[0];
        let dj0 = (b0 - r.send_stamp) / skew + r.recv_stamp;
        return Ok(OffsetUncertainty::Line {
            base: [b0, 0.0, dj0],
            direction: [-skew, 1.0, -1.0],
        });
    }
    // variables (b, d_0j, d_j0)
    let mut constraints = Vec::new();
    for f in &fwd {
        constraints.push(Constraint::new(
            vec![1.0, skew, 0.0],
            ConstraintOp::Eq,
            f.recv_stamp - skew * f.send_stamp,
        ));
    }
    for r in &bwd {
        constraints.push(Constraint::new(
            vec![1.0, 0.0, -skew],
            ConstraintOp::Eq,
            r.send_stamp - skew * r.recv_stamp,
        ));
    }
    constraints.push(Constraint::new(vec![0.0, 1.0, 0.0], ConstraintOp::Ge, 0.0));
    constraints.push(Constraint::new(vec![0.0, 0.0, 1.0], ConstraintOp::Ge, 0.0));
    let lp = LinearProgram {
        num_vars: 3,
        objective: vec![1.0, 0.0, 0.0],
        constraints,
    };
    let lo = match lp_solve(&lp, LpSense::Minimize)? {
        LpOutcome::Optimal { value, .. } => value,
        other => {
            return Err(Error::NumericFailure(format!(
                "offset interval LP did not solve: {other:?}"
            )))
        }
    };
    let hi = match lp_solve(&lp, LpSense::Maximize)? {
        LpOutcome::Optimal { value, .. } => value,
        other => {
            return Err(Error::NumericFailure(format!(
                "offset interval LP did not solve: {other:?}"
            )))
        }
    };
    Ok(OffsetUncertainty::Interval { lo, hi })
}

/// The network-level uncertainty set: every consistent delay vector is a
/// known affine function of the free offsets `b_1..b_{n-1}`, and causality
/// (`d >= 0`) carves a compact polyhedron out of that space.
#[derive(Debug, Clone)]
pub struct OffsetPolyhedron {
    n: usize,
    skews: Vec<f64>,
    links: Vec<(usize, usize)>,
    /// d_ij = constant + sum_k coeff[k] * b_k (k = 1..n-1), per link row.
    constants: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl OffsetPolyhedron {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Recovered nodal skews (index 0 is 1 by convention).
    pub fn skews(&self) -> &[f64] {
        &self.skews
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    /// Delay vector implied by a full offset vector (entry 0 must be 0),
    /// link order as [`links`](Self::links).
    pub fn delays_for(&self, offsets: &[f64]) -> Result<Vec<f64>> {
        if offsets.len() != self.n || offsets[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "offsets must have length n with offsets[0] == 0".into(),
            ));
        }
        Ok(self
            .constants
            .iter()
            .zip(&self.coeffs)
            .map(|(c, row)| c + row.iter().zip(&offsets[1..]).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }

    /// Membership: all implied delays nonnegative (within tol).
    pub fn contains(&self, offsets: &[f64], tol: f64) -> Result<bool> {
        Ok(self.delays_for(offsets)?.iter().all(|&d| d >= -tol))
    }

    /// Strict feasibility via a perturbed feasibility LP: maximize t subject
    /// to every implied delay >= t. The interior is nonempty iff the
    /// optimum is strictly positive.
    pub fn interior_nonempty(&self) -> Result<bool> {
        let nv = self.n - 1 + 1; // free offsets + t
        let mut constraints = Vec::new();
        for (c, row) in self.constants.iter().zip(&self.coeffs) {
            // c + row.b - t >= 0
            let mut coeffs = row.clone();
            coeffs.push(-1.0);
            constraints.push(Constraint::new(coeffs, ConstraintOp::Ge, -c));
        }
        let mut objective = vec![0.0; nv];
        objective[nv - 1] = 1.0;
        let lp = LinearProgram {
            num_vars: nv,
            objective,
            constraints,
        };
        match lp_solve(&lp, LpSense::Maximize)? {
            LpOutcome::Optimal { value, .. } => Ok(value > 1e-9),
            LpOutcome::Infeasible => Ok(false),
            LpOutcome::Unbounded => Err(Error::NumericFailure(
                "uncertainty polyhedron unbounded; log is inconsistent".into(),
            )),
        }
    }
}

fn strongly_connected(n: usize, links: &[(usize, usize)]) -> bool {
    let reach = |forward: bool| -> usize {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in links {
            if forward {
                adj[a].push(b);
            } else {
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    n >= 1 && reach(true) == n && reach(false) == n
}

/// Builds the offset uncertainty polyhedron for an n-node world from a
/// packet log. Needs a strongly connected link set (otherwise skews are
/// unrecoverable) and at least two packets per directed link.
///
/// Each link contributes the affine row
/// `d_ij(b) = (r/a_j - s/a_i) + b_i/a_i - b_j/a_j` derived from its first
/// packet, with `b_0 = 0` pinned.
pub fn offset_uncertainty_polyhedron(
    n: usize,
    records: &[PacketRecord],
) -> Result<OffsetPolyhedron> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let mut per_link: BTreeMap<(usize, usize), Vec<&PacketRecord>> = BTreeMap::new();
    for r in records {
        if r.sender >= n || r.receiver >= n {
            return Err(Error::InvalidArgument(format!(
                "record {} -> {} out of range for n={n}",
                r.sender, r.receiver
            )));
        }
        per_link.entry((r.sender, r.receiver)).or_default().push(r);
    }
    let links: Vec<(usize, usize)> = per_link.keys().copied().collect();
    if !strongly_connected(n, &links) {
        return Err(Error::InvalidArgument(
            "skews unrecoverable: link graph is not strongly connected".into(),
        ));
    }
    let mut relative = BTreeMap::new();
    for (&link, recs) in &per_link {
        if recs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "link ({}, {}) needs two packets for skew recovery",
                link.0, link.1
            )));
        }
        relative.insert(link, estimate_relative_skew(recs[0], recs[1])?);
    }
    // propagate skews along directed links from the reference
    let mut skews = vec![f64::NAN; n];
    skews[0] = 1.0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for (&(a, b), &ratio) in &relative {
            if a == u && skews[b].is_nan() {
                skews[b] = skews[a] * ratio;
                queue.push_back(b);
            }
        }
    }
    if skews.iter().any(|s| s.is_nan()) {
        return Err(Error::NumericFailure("skew propagation failed".into()));
    }
    let mut constants = Vec::with_capacity(links.len());
    let mut coeffs = Vec::with_capacity(links.len());
    for &(i, j) in &links {
        let rec = per_link[&(i, j)][0];
        let (ai, aj) = (skews[i], skews[j]);
        constants.push(rec.recv_stamp / aj - rec.send_stamp / ai);
        let mut row = vec![0.0; n - 1];
        if i >= 1 {
            row[i - 1] += 1.0 / ai;
        }
        if j >= 1 {
            row[j - 1] -= 1.0 / aj;
        }
        coeffs.push(row);
    }
    Ok(OffsetPolyhedron {
        n,
        skews,
        links,
        constants,
        coeffs,
    })
}
