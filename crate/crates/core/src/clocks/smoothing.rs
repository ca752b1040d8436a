use crate::numerics::{
    edge_connectivity, solve_spd, spd_inverse_diagonal, spectral_radius, Matrix, Pcg32,
};
use crate::rgg::{is_connected, Graph};
use crate::{Error, Result};

/// Relative offset measurement on a directed link `(i, j)`: `offset`
/// estimates `tau_j - tau_i` with the given variance.
#[derive(Debug, Clone, Copy)]
pub struct OffsetMeasurement {
    pub link: (usize, usize),
    pub offset: f64,
    pub variance: f64,
}

impl OffsetMeasurement {
    pub fn new(link: (usize, usize), offset: f64, variance: f64) -> Result<Self> {
        if link.0 == link.1 {
            return Err(Error::InvalidArgument("measurement link is a self-loop".into()));
        }
        if variance <= 0.0 || !variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "variance must be > 0, got {variance}"
            )));
        }
        Ok(OffsetMeasurement {
            link,
            offset,
            variance,
        })
    }
}

fn measurement_graph(n: usize, measurements: &[OffsetMeasurement]) -> Result<Graph> {
    let edges: Vec<(usize, usize)> = measurements.iter().map(|m| m.link).collect();
    Graph::undirected(n, edges)
}

fn check_connected(n: usize, measurements: &[OffsetMeasurement]) -> Result<()> {
    let g = measurement_graph(n, measurements)?;
    if !is_connected(&g)? {
        return Err(Error::SingularSystem(
            "measurement graph is not connected; offsets are not identifiable".into(),
        ));
    }
    Ok(())
}

/// Weighted Laplacian restricted to nodes 1..n-1 (node 0 grounded), with
/// weights 1/variance, plus the matching right-hand side built from the
/// measurements.
fn normal_equations(n: usize, measurements: &[OffsetMeasurement]) -> (Matrix, Vec<f64>) {
    let mut l = Matrix::zeros(n - 1, n - 1);
    let mut rhs = vec![0.0; n - 1];
    for m in measurements {
        let (i, j) = m.link;
        let w = 1.0 / m.variance;
        if i >= 1 {
            l.add_at(i - 1, i - 1, w);
            rhs[i - 1] -= w * m.offset;
        }
        if j >= 1 {
            l.add_at(j - 1, j - 1, w);
            rhs[j - 1] += w * m.offset;
        }
        if i >= 1 && j >= 1 {
            l.add_at(i - 1, j - 1, -w);
            l.add_at(j - 1, i - 1, -w);
        }
    }
    (l, rhs)
}

/// Variance-weighted least-squares nodal offsets with node 0 pinned to 0.
/// For measurements that are exactly consistent the true offsets are
/// recovered exactly (zero residual).
pub fn ls_offsets(n: usize, measurements: &[OffsetMeasurement]) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    check_connected(n, measurements)?;
    let (l, rhs) = normal_equations(n, measurements);
    let x = solve_spd(&l, &rhs)?;
    let mut v = Vec::with_capacity(n);
    v.push(0.0);
    v.extend(x);
    Ok(v)
}

/// Per-node variance of the least-squares offset estimate, which equals the
/// two-terminal effective resistance between each node and the reference in
/// the network where each link is a resistor of its measurement variance.
/// Computed from the estimator covariance `(A W A^T)^{-1}` diagonal.
pub fn estimator_variance(n: usize, link_variances: &[((usize, usize), f64)]) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    let measurements: Vec<OffsetMeasurement> = link_variances
        .iter()
        .map(|&(link, var)| OffsetMeasurement::new(link, 0.0, var))
        .collect::<Result<_>>()?;
    check_connected(n, &measurements)?;
    let (l, _) = normal_equations(n, &measurements);
    let diag = spd_inverse_diagonal(&l)?;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    out.extend(diag);
    Ok(out)
}

/// State of the spatial smoothing iteration: per-node offset estimates with
/// the reference pinned at 0, plus the link measurements.
#[derive(Debug, Clone)]
pub struct SmoothingState {
    n: usize,
    pub v: Vec<f64>,
    measurements: Vec<OffsetMeasurement>,
    /// per node: (neighbor, additive offset term, weight); the node's local
    /// minimizer is the weighted mean of `v[neighbor] + term`
    nbrs: Vec<Vec<(usize, f64, f64)>>,
}

impl SmoothingState {
    /// Starts from the all-zero estimate.
    pub fn new(n: usize, measurements: Vec<OffsetMeasurement>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two nodes".into()));
        }
        check_connected(n, &measurements)?;
        let mut nbrs: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); n];
        for m in &measurements {
            let (i, j) = m.link;
            let w = 1.0 / m.variance;
            // offset measures tau_j - tau_i: node i averages v_j - o,
            // node j averages v_i + o
            nbrs[i].push((j, -m.offset, w));
            nbrs[j].push((i, m.offset, w));
        }
        Ok(SmoothingState {
            n,
            v: vec![0.0; n],
            measurements,
            nbrs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn measurements(&self) -> &[OffsetMeasurement] {
        &self.measurements
    }

    /// Least-squares objective `F(v) = ||o - A^T v||` (variance-weighted).
    pub fn objective(&self) -> f64 {
        self.measurements
            .iter()
            .map(|m| {
                let r = m.offset - (self.v[m.link.1] - self.v[m.link.0]);
                r * r / m.variance
            })
            .sum::<f64>()
            .sqrt()
    }

    /// One coordinate-descent update of node i: the weighted average of
    /// `v_neighbor + measured relative offset` oriented toward i. Node 0 is
    /// the reference and may not be updated.
    pub fn update_node(&mut self, i: usize) -> Result<()> {
        if i == 0 {
            return Err(Error::InvalidArgument("node 0 is the reference".into()));
        }
        if i >= self.n {
            return Err(Error::InvalidArgument(format!("node {i} out of range")));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for &(j, term, w) in &self.nbrs[i] {
            num += w * (self.v[j] + term);
            den += w;
        }
        self.v[i] = num / den;
        Ok(())
    }

    /// One synchronous sweep: all non-reference nodes update simultaneously.
    pub fn sync_step(&mut self) {
        let mut next = self.v.clone();
        for i in 1..self.n {
            let (mut num, mut den) = (0.0, 0.0);
            for &(j, term, w) in &self.nbrs[i] {
                num += w * (self.v[j] + term);
                den += w;
            }
            next[i] = num / den;
        }
        self.v = next;
    }
}

/// Asynchronous spatial smoothing along an explicit update order (which
/// makes the trajectory deterministic and replayable). Returns F(v) after
/// every single-node update; coordinate descent makes the sequence
/// nonincreasing.
pub fn smoothing_async(state: &mut SmoothingState, order: &[usize]) -> Result<Vec<f64>> {
    let mut trace = Vec::with_capacity(order.len());
    for &i in order {
        state.update_node(i)?;
        trace.push(state.objective());
    }
    Ok(trace)
}

/// Trace of a synchronous smoothing run.
#[derive(Debug, Clone)]
pub struct SyncTrace {
    /// `||v_k - v_ls||_2` for k = 0..iterations.
    pub error_norms: Vec<f64>,
    /// Per-step contraction `||e_{k+1}||/||e_k||` averaged over the last
    /// quartile of recorded steps; None when the error hits zero first.
    pub measured_rate: Option<f64>,
    pub iterations: usize,
    pub fixed_point: Vec<f64>,
}

fn error_norm(v: &[f64], fixed: &[f64]) -> f64 {
    v.iter()
        .zip(fixed)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Runs synchronous smoothing until the error to the least-squares fixed
/// point falls below `floor` (relative to the initial error) or `max_iters`
/// sweeps elapse.
pub fn smoothing_sync(
    state: &mut SmoothingState,
    max_iters: usize,
    floor: f64,
) -> Result<SyncTrace> {
    let fixed = ls_offsets(state.n, &state.measurements)?;
    let mut error_norms = vec![error_norm(&state.v, &fixed)];
    let initial = error_norms[0];
    let mut iterations = 0;
    for _ in 0..max_iters {
        state.sync_step();
        iterations += 1;
        let e = error_norm(&state.v, &fixed);
        error_norms.push(e);
        if e <= floor * initial.max(1e-300) || e == 0.0 {
            break;
        }
    }
    // contraction rate over the last quartile of steps
    let ratios: Vec<f64> = error_norms
        .windows(2)
        .filter(|w| w[0] > 0.0 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let measured_rate = if ratios.is_empty() {
        None
    } else {
        let q = (ratios.len() * 3) / 4;
        let tail = &ratios[q..];
        if tail.is_empty() {
            None
        } else {
            Some(tail.iter().sum::<f64>() / tail.len() as f64)
        }
    };
    Ok(SyncTrace {
        error_norms,
        measured_rate,
        iterations,
        fixed_point: fixed,
    })
}

/// Synchronous sweeps until `||v_k - v_ls||_2 <= eps`; returns the sweep
/// count. Errors out if `max_iters` sweeps do not settle.
pub fn settling_iterations(
    state: &mut SmoothingState,
    eps: f64,
    max_iters: usize,
) -> Result<usize> {
    let fixed = ls_offsets(state.n, &state.measurements)?;
    if error_norm(&state.v, &fixed) <= eps {
        return Ok(0);
    }
    for k in 1..=max_iters {
        state.sync_step();
        if error_norm(&state.v, &fixed) <= eps {
            return Ok(k);
        }
    }
    Err(Error::NumericFailure(format!(
        "did not settle to eps={eps} within {max_iters} sweeps"
    )))
}

/// Reduced unit-weight Laplacian (node 0 grounded) of an undirected graph.
fn reduced_laplacian(graph: &Graph) -> Matrix {
    let n = graph.node_count();
    let mut l = Matrix::zeros(n - 1, n - 1);
    for &(a, b) in graph.edges() {
        if a >= 1 {
            l.add_at(a - 1, a - 1, 1.0);
        }
        if b >= 1 {
            l.add_at(b - 1, b - 1, 1.0);
        }
        if a >= 1 && b >= 1 {
            l.add_at(a - 1, b - 1, -1.0);
            l.add_at(b - 1, a - 1, -1.0);
        }
    }
    l
}

/// The synchronous iteration matrix `M = I - D^{-1} A A^T` (unit weights)
/// over the non-reference nodes of an undirected graph.
pub fn smoothing_iteration_matrix(graph: &Graph) -> Result<Matrix> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    if !is_connected(graph)? {
        return Err(Error::SingularSystem("graph must be connected".into()));
    }
    let deg = graph.degrees();
    let l = reduced_laplacian(graph);
    let mut out = Matrix::identity(n - 1);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            out.add_at(i, j, -l.get(i, j) / deg[i + 1] as f64);
        }
    }
    Ok(out)
}

/// Spectral radius of the synchronous iteration matrix, computed on the
/// symmetric similarity transform `I - D^{-1/2} L D^{-1/2}` (same
/// spectrum).
pub fn smoothing_spectral_radius(graph: &Graph) -> Result<f64> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two nodes".into()));
    }
    if !is_connected(graph)? {
        return Err(Error::SingularSystem("graph must be connected".into()));
    }
    let deg = graph.degrees();
    let l = reduced_laplacian(graph);
    let mut sym = Matrix::identity(n - 1);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let scale = ((deg[i + 1] as f64) * (deg[j + 1] as f64)).sqrt();
            sym.add_at(i, j, -l.get(i, j) / scale);
        }
    }
    spectral_radius(&sym, 1e-12)
}

/// Cheeger-style bounds on the synchronous convergence rate:
/// `1 - 2 d_0 / S <= rho(M) <= 1 - (kappa / S)^2` with `S` the total degree
/// of the non-reference nodes and `kappa` the edge connectivity.
pub fn cheeger_bounds(graph: &Graph) -> Result<(f64, f64)> {
    if !is_connected(graph)? {
        return Err(Error::SingularSystem("graph must be connected".into()));
    }
    let deg = graph.degrees();
    let d0 = deg[0] as f64;
    let total: f64 = deg.iter().skip(1).map(|&d| d as f64).sum();
    let kappa = edge_connectivity(graph) as f64;
    Ok((1.0 - 2.0 * d0 / total, 1.0 - (kappa / total).powi(2)))
}

/// Exact measurements `tau_j - tau_i` from true offsets (unit variance).
pub fn consistent_measurements(graph: &Graph, offsets: &[f64]) -> Result<Vec<OffsetMeasurement>> {
    if offsets.len() != graph.node_count() {
        return Err(Error::InvalidArgument("offset vector length mismatch".into()));
    }
    graph
        .edges()
        .iter()
        .map(|&(i, j)| OffsetMeasurement::new((i, j), offsets[j] - offsets[i], 1.0))
        .collect()
}

/// Measurements with additive Gaussian noise of the given variance.
pub fn noisy_measurements(
    graph: &Graph,
    offsets: &[f64],
    noise_var: f64,
    rng: &mut Pcg32,
) -> Result<Vec<OffsetMeasurement>> {
    if noise_var < 0.0 {
        return Err(Error::InvalidArgument("negative noise variance".into()));
    }
    let clean = consistent_measurements(graph, offsets)?;
    clean
        .into_iter()
        .map(|m| {
            OffsetMeasurement::new(
                m.link,
                m.offset + noise_var.sqrt() * rng.next_gaussian(),
                if noise_var > 0.0 { noise_var } else { 1.0 },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen_symmetric;
    use crate::rgg::{complete_graph, lattice_graph, path_graph, star_graph};

    fn random_offsets(n: usize, rng: &mut Pcg32) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
        v[0] = 0.0;
        v
    }

    #[test]
    fn ls_exact_on_consistent_path() {
        // path 0-1-2 with offsets 1 and 1: v = (0, 1, 2)
        let g = path_graph(3);
        let ms = vec![
            OffsetMeasurement::new((0, 1), 1.0, 1.0).unwrap(),
            OffsetMeasurement::new((1, 2), 1.0, 1.0).unwrap(),
        ];
        let v = ls_offsets(3, &ms).unwrap();
        assert!((v[1] - 1.0).abs() < 1e-12 && (v[2] - 2.0).abs() < 1e-12);
        let _ = g;
    }

    #[test]
    fn ls_exact_recovery_random_graphs() {
        let mut rng = Pcg32::seeded(7);
        for trial in 0..20 {
            let n = 8 + (trial % 5);
            let g = crate::rgg::build_er_graph(n, 0.5, 1000 + trial as u64).unwrap();
            if !crate::rgg::is_connected(&g).unwrap() {
                continue;
            }
            let offsets = random_offsets(n, &mut rng);
            let ms = consistent_measurements(&g, &offsets).unwrap();
            let v = ls_offsets(n, &ms).unwrap();
            for (a, b) in v.iter().zip(&offsets) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ls_inconsistent_cycle_matches_normal_equation_oracle() {
        // triangle 0-1-2 with inconsistent measurements o01=1, o12=1, o02=3
        let ms = vec![
            OffsetMeasurement::new((0, 1), 1.0, 1.0).unwrap(),
            OffsetMeasurement::new((1, 2), 1.0, 1.0).unwrap(),
            OffsetMeasurement::new((0, 2), 3.0, 1.0).unwrap(),
        ];
        let v = ls_offsets(3, &ms).unwrap();
        // oracle: minimize (1-v1)^2 + (1-(v2-v1))^2 + (3-v2)^2 by hand:
        // dF/dv1 = 0 -> 2v1 - v2 = 0; dF/dv2 = 0 -> 2v2 - v1 = 4
        // v1 = 4/3, v2 = 8/3
        assert!((v[1] - 4.0 / 3.0).abs() < 1e-12);
        assert!((v[2] - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ls_rejects_disconnected() {
        let ms = vec![OffsetMeasurement::new((0, 1), 1.0, 1.0).unwrap()];
        assert!(matches!(ls_offsets(4, &ms), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn variance_path_is_distance() {
        let n = 7;
        let g = path_graph(n);
        let lv: Vec<((usize, usize), f64)> =
            g.edges().iter().map(|&e| (e, 1.0)).collect();
        let v = estimator_variance(n, &lv).unwrap();
        for (i, &var) in v.iter().enumerate() {
            assert!((var - i as f64).abs() < 1e-9, "node {i}: {var}");
        }
    }

    #[test]
    fn variance_complete_graph_two_over_n() {
        for n in [4usize, 6, 9] {
            let g = complete_graph(n);
            let lv: Vec<((usize, usize), f64)> =
                g.edges().iter().map(|&e| (e, 1.0)).collect();
            let v = estimator_variance(n, &lv).unwrap();
            for &var in v.iter().skip(1) {
                assert!((var - 2.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    /// Effective resistance oracle via the full-Laplacian pseudoinverse
    /// (eigendecomposition route, independent of the grounded Cholesky
    /// route used by the implementation).
    fn resistance_oracle(n: usize, lv: &[((usize, usize), f64)]) -> Vec<f64> {
        let mut l = Matrix::zeros(n, n);
        for &((i, j), var) in lv {
            let w = 1.0 / var;
            l.add_at(i, i, w);
            l.add_at(j, j, w);
            l.add_at(i, j, -w);
            l.add_at(j, i, -w);
        }
        let (eig, q) = eigen_symmetric(&l).unwrap();
        // pseudo-inverse: drop the null eigenvalue
        let mut pinv = Matrix::zeros(n, n);
        for k in 0..n {
            if eig[k].abs() < 1e-9 {
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    pinv.add_at(a, b, q.get(a, k) * q.get(b, k) / eig[k]);
                }
            }
        }
        (0..n)
            .map(|i| pinv.get(i, i) + pinv.get(0, 0) - 2.0 * pinv.get(i, 0))
            .collect()
    }

    #[test]
    fn variance_equals_effective_resistance_weighted() {
        let mut rng = Pcg32::seeded(41);
        for trial in 0..25 {
            let n = 6 + trial % 6;
            let g = crate::rgg::build_er_graph(n, 0.6, 50 + trial as u64).unwrap();
            if !crate::rgg::is_connected(&g).unwrap() {
                continue;
            }
            let lv: Vec<((usize, usize), f64)> = g
                .edges()
                .iter()
                .map(|&e| (e, rng.uniform(0.2, 3.0)))
                .collect();
            let got = estimator_variance(n, &lv).unwrap();
            let want = resistance_oracle(n, &lv);
            for (a, b) in got.iter().zip(&want) {
                let denom = b.abs().max(1e-12);
                assert!((a - b).abs() / denom < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn parallel_edge_never_raises_variance() {
        // Rayleigh monotonicity: adding a parallel measurement (conductance)
        // cannot increase any node's variance
        let mut rng = Pcg32::seeded(17);
        for trial in 0..10 {
            let n = 7;
            let g = crate::rgg::build_er_graph(n, 0.5, 900 + trial).unwrap();
            if !crate::rgg::is_connected(&g).unwrap() {
                continue;
            }
            let lv: Vec<((usize, usize), f64)> = g
                .edges()
                .iter()
                .map(|&e| (e, rng.uniform(0.5, 2.0)))
                .collect();
            let base = estimator_variance(n, &lv).unwrap();
            let mut plus = lv.clone();
            plus.push((g.edges()[0], 1.0));
            let tightened = estimator_variance(n, &plus).unwrap();
            for (b, t) in base.iter().zip(&tightened) {
                assert!(t <= &(b + 1e-12));
            }
        }
    }

    #[test]
    fn async_fixed_point_and_monotone_objective() {
        let mut rng = Pcg32::seeded(3);
        let g = crate::rgg::build_er_graph(9, 0.5, 77).unwrap();
        assert!(crate::rgg::is_connected(&g).unwrap());
        let offsets = random_offsets(9, &mut rng);
        let ms = noisy_measurements(&g, &offsets, 0.04, &mut rng).unwrap();
        let ls = ls_offsets(9, &ms).unwrap();
        // starting at the LS solution is a fixed point
        let mut state = SmoothingState::new(9, ms.clone()).unwrap();
        state.v = ls.clone();
        let before = state.v.clone();
        for i in 1..9 {
            state.update_node(i).unwrap();
        }
        for (a, b) in state.v.iter().zip(&before) {
            assert!((a - b).abs() < 1e-9);
        }
        // objective is nonincreasing along any update sequence
        let mut state = SmoothingState::new(9, ms).unwrap();
        let order: Vec<usize> = (0..60).map(|k| 1 + (k * 5 + 2) % 8).collect();
        let trace = smoothing_async(&mut state, &order).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn async_rejects_reference_updates() {
        let g = path_graph(3);
        let ms = consistent_measurements(&g, &[0.0, 1.0, 2.0]).unwrap();
        let mut state = SmoothingState::new(3, ms).unwrap();
        assert!(state.update_node(0).is_err());
    }

    #[test]
    fn async_converges_to_ls_on_path() {
        let g = path_graph(3);
        let ms = consistent_measurements(&g, &[0.0, 1.5, -0.5]).unwrap();
        let mut state = SmoothingState::new(3, ms).unwrap();
        for _ in 0..200 {
            for i in 1..3 {
                state.update_node(i).unwrap();
            }
        }
        assert!((state.v[1] - 1.5).abs() < 1e-12);
        assert!((state.v[2] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn sync_zero_error_stays_zero() {
        let g = path_graph(4);
        let ms = consistent_measurements(&g, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let mut state = SmoothingState::new(4, ms).unwrap();
        state.v = vec![0.0, 1.0, 2.0, 3.0];
        let trace = smoothing_sync(&mut state, 10, 1e-13).unwrap();
        assert!(trace.error_norms.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn star_converges_in_one_step() {
        let g = star_graph(6);
        let mut rng = Pcg32::seeded(8);
        let offsets = random_offsets(6, &mut rng);
        let ms = consistent_measurements(&g, &offsets).unwrap();
        let mut state = SmoothingState::new(6, ms).unwrap();
        state.sync_step();
        let ls = ls_offsets(6, state.measurements()).unwrap();
        for (a, b) in state.v.iter().zip(&ls) {
            assert!((a - b).abs() < 1e-12);
        }
        // rho(M) = 0 for the star with the reference at the center
        assert!(smoothing_spectral_radius(&g).unwrap() < 1e-9);
    }

    #[test]
    fn sync_rate_matches_spectral_radius() {
        let mut rng = Pcg32::seeded(23);
        let g = crate::rgg::build_er_graph(20, 0.25, 4242).unwrap();
        assert!(crate::rgg::is_connected(&g).unwrap());
        let offsets = random_offsets(20, &mut rng);
        let ms = noisy_measurements(&g, &offsets, 0.01, &mut rng).unwrap();
        let mut state = SmoothingState::new(20, ms).unwrap();
        let trace = smoothing_sync(&mut state, 4000, 1e-12).unwrap();
        let rho = smoothing_spectral_radius(&g).unwrap();
        let rate = trace.measured_rate.unwrap();
        assert!(
            (rate - rho).abs() / rho < 0.02,
            "measured {rate} vs rho {rho}"
        );
    }

    #[test]
    fn cheeger_bounds_contain_rho() {
        let graphs: Vec<Graph> = vec![
            path_graph(10),
            crate::rgg::cycle_graph(12),
            complete_graph(6),
            lattice_graph(4),
        ];
        for g in &graphs {
            let (lo, hi) = cheeger_bounds(g).unwrap();
            let rho = smoothing_spectral_radius(g).unwrap();
            assert!(lo <= rho + 1e-9, "lo {lo} rho {rho}");
            assert!(rho <= hi + 1e-9, "rho {rho} hi {hi}");
            // dense eigensolve oracle on the similarity transform
            // D^{1/2} M D^{-1/2} agrees with the power-iteration route
            let m = smoothing_iteration_matrix(g).unwrap();
            let n1 = m.rows();
            let deg = g.degrees();
            let mut sym = Matrix::zeros(n1, n1);
            for i in 0..n1 {
                for j in 0..n1 {
                    let scale = ((deg[i + 1] as f64) / (deg[j + 1] as f64)).sqrt();
                    sym.set(i, j, m.get(i, j) * scale);
                }
            }
            let eig = crate::numerics::eigenvalues_symmetric(&sym).unwrap();
            let max_abs = eig.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
            assert!((max_abs - rho).abs() < 1e-8);
        }
    }

    #[test]
    fn cheeger_ordering_when_kappa_small() {
        // lower <= upper whenever kappa^2 <= 2 d0 S
        for g in [path_graph(8), crate::rgg::cycle_graph(9), complete_graph(5)] {
            let deg = g.degrees();
            let d0 = deg[0] as f64;
            let s: f64 = deg.iter().skip(1).map(|&d| d as f64).sum();
            let kappa = crate::numerics::edge_connectivity(&g) as f64;
            let (lo, hi) = cheeger_bounds(&g).unwrap();
            if kappa * kappa <= 2.0 * d0 * s {
                assert!(lo <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn settling_counts_sweeps() {
        let g = lattice_graph(4);
        let mut rng = Pcg32::seeded(12);
        let offsets = random_offsets(16, &mut rng);
        let ms = consistent_measurements(&g, &offsets).unwrap();
        let mut state = SmoothingState::new(16, ms).unwrap();
        let iters = settling_iterations(&mut state, 1e-6, 100_000).unwrap();
        assert!(iters > 0);
        let fixed = ls_offsets(16, state.measurements()).unwrap();
        assert!(error_norm(&state.v, &fixed) <= 1e-6);
    }
}
