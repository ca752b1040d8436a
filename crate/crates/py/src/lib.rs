//! Python bindings for the sensornet toolkit: placements and random graph
//! models, interference checks, clock estimators, network least squares and
//! the function-computation complexity formulas.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sensornet::capacity::{
    physical_feasible, protocol_feasible, protocol_upper_bound as upper_bound_rs, PhysicalParams,
    ProtocolParams, Slot, Transmission,
};
use sensornet::clocks::{
    cheeger_bounds as cheeger_rs, estimate_delay_and_offset, estimate_relative_skew,
    estimator_variance as variance_rs, ls_offsets as ls_rs, offset_uncertainty_interval,
    ping_pong_rounds, roundtrip_delay, smoothing_spectral_radius, AffineClock, ClockWorld,
    OffsetMeasurement, OffsetUncertainty,
};
use sensornet::compute::{
    and_block_protocol as and_rs, and_worst_case_bits as and_worst_rs,
    fooling_set_lower_bound, interval_complexity_bounds as interval_rs,
    threshold_complexity as threshold_rs, type_vector as type_vector_rs, FunctionTable,
};
use sensornet::rgg::{
    build_er_graph, build_knn_graph, build_range_graph, connectivity_probability,
    critical_range as critical_range_rs, is_connected as is_connected_rs, place_uniform,
    ConnectivityModel, Domain, Graph, NodePlacement,
};

fn err(e: sensornet::Error) -> PyErr {
    match e {
        sensornet::Error::InvalidArgument(msg) => PyValueError::new_err(msg),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_domain(domain: &str) -> PyResult<Domain> {
    match domain {
        "disk" => Ok(Domain::UnitAreaDisk),
        "square" => Ok(Domain::UnitSquare),
        other => Err(PyValueError::new_err(format!(
            "domain must be 'disk' or 'square', got '{other}'"
        ))),
    }
}

fn placement(points: Vec<(f64, f64)>) -> PyResult<NodePlacement> {
    NodePlacement::from_points_unchecked(points).map_err(err)
}

fn graph(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
    Graph::undirected(n, edges).map_err(err)
}

fn builtin(function: &str, n: usize, alphabet: usize) -> PyResult<FunctionTable> {
    let f = match function {
        "max" => FunctionTable::max_fn(n, alphabet),
        "min" => FunctionTable::min_fn(n, alphabet),
        "sum" => FunctionTable::sum_fn(n, alphabet),
        "parity" => FunctionTable::parity_fn(n, alphabet),
        "and" => FunctionTable::and_fn(n),
        other => {
            if let Some(t) = other.strip_prefix("threshold:") {
                let theta: usize = t
                    .parse()
                    .map_err(|_| PyValueError::new_err(format!("bad spec '{other}'")))?;
                FunctionTable::boolean_threshold(n, theta)
            } else {
                return Err(PyValueError::new_err(format!("unknown function '{other}'")));
            }
        }
    };
    f.map_err(err)
}

/// Uniform points in the unit-area disk ('disk') or unit square ('square').
#[pyfunction]
fn place_uniform_points(n: usize, domain: &str, seed: u64) -> PyResult<Vec<(f64, f64)>> {
    let p = place_uniform(n, parse_domain(domain)?, seed).map_err(err)?;
    Ok(p.points().to_vec())
}

/// Critical connectivity range sqrt((ln n + c)/(pi n)).
#[pyfunction]
fn critical_range(n: usize, c: f64) -> PyResult<f64> {
    critical_range_rs(n, c).map_err(err)
}

/// Edges of the geometric range graph (distance strictly below r).
#[pyfunction]
fn range_graph_edges(points: Vec<(f64, f64)>, r: f64) -> PyResult<Vec<(usize, usize)>> {
    Ok(build_range_graph(&placement(points)?, r)
        .map_err(err)?
        .edges()
        .to_vec())
}

/// Edges of the symmetrized k-nearest-neighbor graph.
#[pyfunction]
fn knn_graph_edges(points: Vec<(f64, f64)>, k: usize) -> PyResult<Vec<(usize, usize)>> {
    Ok(build_knn_graph(&placement(points)?, k)
        .map_err(err)?
        .edges()
        .to_vec())
}

/// Edges of a seeded Erdos-Renyi graph.
#[pyfunction]
fn er_graph_edges(n: usize, p: f64, seed: u64) -> PyResult<Vec<(usize, usize)>> {
    Ok(build_er_graph(n, p, seed).map_err(err)?.edges().to_vec())
}

/// Connectivity of an undirected graph given as an edge list.
#[pyfunction]
fn is_connected(n: usize, edges: Vec<(usize, usize)>) -> PyResult<bool> {
    is_connected_rs(&graph(n, edges)?).map_err(err)
}

/// Monte Carlo connectivity estimate with a 95% Wilson interval.
/// `model` is 'range', 'knn' or 'er'; `param` is r, k or p.
#[pyfunction]
fn connectivity_estimate(
    py: Python<'_>,
    model: &str,
    n: usize,
    param: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let m = match model {
        "range" => ConnectivityModel::Range { r: param },
        "knn" => ConnectivityModel::Knn { k: param as usize },
        "er" => ConnectivityModel::Er { p: param },
        other => return Err(PyValueError::new_err(format!("unknown model '{other}'"))),
    };
    let e = connectivity_probability(m, n, trials, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("trials", e.trials)?;
    d.set_item("successes", e.successes)?;
    d.set_item("p_hat", e.p_hat)?;
    d.set_item("ci_low", e.ci_low)?;
    d.set_item("ci_high", e.ci_high)?;
    Ok(d.into())
}

/// Closed-form protocol-model transport capacity upper bound.
#[pyfunction]
fn protocol_upper_bound(n: usize, area: f64, rate_w: f64, delta: f64) -> PyResult<f64> {
    let params = ProtocolParams::new(delta, rate_w).map_err(err)?;
    upper_bound_rs(n, area, &params).map_err(err)
}

/// Protocol-model feasibility of concurrent transmissions (src, dst) pairs.
#[pyfunction]
fn protocol_slot_feasible(
    points: Vec<(f64, f64)>,
    transmissions: Vec<(usize, usize)>,
    delta: f64,
) -> PyResult<bool> {
    let p = placement(points)?;
    let slot = Slot::new(
        transmissions
            .into_iter()
            .map(|(s, d)| Transmission::new(s, d))
            .collect(),
    )
    .map_err(err)?;
    let params = ProtocolParams::new(delta, 1.0).map_err(err)?;
    Ok(protocol_feasible(&slot, &p, &params).map_err(err)?.feasible)
}

/// Per-receiver SINR of concurrent transmissions (src, dst, power) triples.
#[pyfunction]
#[pyo3(signature = (points, transmissions, alpha, beta, noise, p_ind, literal=false))]
#[allow(clippy::too_many_arguments)]
fn physical_slot_sinr(
    points: Vec<(f64, f64)>,
    transmissions: Vec<(usize, usize, f64)>,
    alpha: f64,
    beta: f64,
    noise: f64,
    p_ind: f64,
    literal: bool,
) -> PyResult<(bool, Vec<f64>)> {
    let p = placement(points)?;
    let slot = Slot::new(
        transmissions
            .into_iter()
            .map(|(s, d, w)| Transmission::with_power(s, d, w))
            .collect(),
    )
    .map_err(err)?;
    let mut params = PhysicalParams::new(alpha, beta, noise, p_ind).map_err(err)?;
    if literal {
        params = params.literal();
    }
    let check = physical_feasible(&slot, &p, &params).map_err(err)?;
    Ok((check.feasible, check.sinr))
}

/// Pairwise clock estimation against a simulated two-node world: returns
/// skew/round-trip/delay/offset estimates plus the causal offset interval.
#[pyfunction]
fn clock_pairwise(
    py: Python<'_>,
    skew: f64,
    offset: f64,
    d01: f64,
    d10: f64,
) -> PyResult<Py<PyDict>> {
    let world = ClockWorld::new(
        vec![
            AffineClock::identity(),
            AffineClock::new(skew, offset).map_err(err)?,
        ],
        vec![(0, 1, d01), (1, 0, d10)],
    )
    .map_err(err)?;
    let base =
        sensornet::clocks::simulate_exchange(&world, &[(0, 1, 0.0), (0, 1, 5.0)]).map_err(err)?;
    let skew_hat = estimate_relative_skew(&base[0], &base[1]).map_err(err)?;
    let (fwd, bwd) = ping_pong_rounds(&world, 0, 1, 1, 10.0, 5.0).map_err(err)?[0];
    let rt = roundtrip_delay(&fwd, &bwd, 1.0 / skew_hat).map_err(err)?;
    let (d_hat, tau_hat) =
        estimate_delay_and_offset(&fwd, &bwd, skew_hat, 1.0 / skew_hat).map_err(err)?;
    let log: Vec<_> = ping_pong_rounds(&world, 0, 1, 2, 40.0, 7.0)
        .map_err(err)?
        .into_iter()
        .flat_map(|(f, b)| [f, b])
        .collect();
    let d = PyDict::new(py);
    d.set_item("skew_hat", skew_hat)?;
    d.set_item("roundtrip_hat", rt)?;
    d.set_item("d_hat", d_hat)?;
    d.set_item("tau_hat", tau_hat)?;
    if let OffsetUncertainty::Interval { lo, hi } =
        offset_uncertainty_interval(&log, true).map_err(err)?
    {
        d.set_item("interval", (lo, hi))?;
    }
    Ok(d.into())
}

/// Variance-weighted least-squares nodal offsets (node 0 pinned to 0) from
/// measurements (i, j, offset, variance) with offset estimating tau_j - tau_i.
#[pyfunction]
fn ls_offsets(n: usize, measurements: Vec<(usize, usize, f64, f64)>) -> PyResult<Vec<f64>> {
    let ms: Vec<OffsetMeasurement> = measurements
        .into_iter()
        .map(|(i, j, o, v)| OffsetMeasurement::new((i, j), o, v))
        .collect::<sensornet::Result<_>>()
        .map_err(err)?;
    ls_rs(n, &ms).map_err(err)
}

/// Per-node estimator variance (= effective resistance to node 0) from
/// links (i, j, variance).
#[pyfunction]
fn estimator_variance(n: usize, links: Vec<(usize, usize, f64)>) -> PyResult<Vec<f64>> {
    let lv: Vec<((usize, usize), f64)> =
        links.into_iter().map(|(i, j, v)| ((i, j), v)).collect();
    variance_rs(n, &lv).map_err(err)
}

/// Cheeger-style bounds (lower, upper, rho) on the synchronous smoothing
/// convergence rate of an undirected graph with reference node 0.
#[pyfunction]
fn smoothing_rate_bounds(n: usize, edges: Vec<(usize, usize)>) -> PyResult<(f64, f64, f64)> {
    let g = graph(n, edges)?;
    let (lo, hi) = cheeger_rs(&g).map_err(err)?;
    let rho = smoothing_spectral_radius(&g).map_err(err)?;
    Ok((lo, hi, rho))
}

/// Histogram of a tuple's letters.
#[pyfunction]
fn type_vector(x: Vec<usize>, alphabet: usize) -> PyResult<Vec<usize>> {
    Ok(type_vector_rs(&x, alphabet).map_err(err)?.counts)
}

/// Broadcast complexity of the Boolean threshold function: log2 C(n+1, theta).
#[pyfunction]
fn threshold_complexity(n: usize, theta: usize) -> PyResult<f64> {
    threshold_rs(n, theta).map_err(err)
}

/// (lower, upper) bits/instance for the Boolean interval function.
#[pyfunction]
fn interval_complexity_bounds(n: usize, a: usize, b: usize) -> PyResult<(f64, f64)> {
    interval_rs(n, a, b).map_err(err)
}

/// Maximum fooling set of a builtin function over the binary alphabet:
/// returns (set, bound_bits, exact).
#[pyfunction]
fn fooling_set(function: &str, n: usize) -> PyResult<(Vec<Vec<usize>>, f64, bool)> {
    let f = builtin(function, n, 2)?;
    let res = fooling_set_lower_bound(&f, 4096).map_err(err)?;
    Ok((res.set, res.bound_bits, res.exact))
}

/// Runs the two-node block AND protocol: returns (and_block, total_bits).
#[pyfunction]
fn and_block(x1: Vec<u8>, x2: Vec<u8>) -> PyResult<(Vec<u32>, usize)> {
    let t = and_rs(&x1, &x2).map_err(err)?;
    Ok((
        t.and_block.iter().map(|&b| b as u32).collect(),
        t.total_bits,
    ))
}

/// Worst-case total bits of the block AND protocol at block length n.
#[pyfunction]
fn and_worst_case_bits(n: usize) -> u64 {
    and_worst_rs(n)
}

#[pymodule]
fn sensornet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(place_uniform_points, m)?)?;
    m.add_function(wrap_pyfunction!(critical_range, m)?)?;
    m.add_function(wrap_pyfunction!(range_graph_edges, m)?)?;
    m.add_function(wrap_pyfunction!(knn_graph_edges, m)?)?;
    m.add_function(wrap_pyfunction!(er_graph_edges, m)?)?;
    m.add_function(wrap_pyfunction!(is_connected, m)?)?;
    m.add_function(wrap_pyfunction!(connectivity_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_slot_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(physical_slot_sinr, m)?)?;
    m.add_function(wrap_pyfunction!(clock_pairwise, m)?)?;
    m.add_function(wrap_pyfunction!(ls_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(estimator_variance, m)?)?;
    m.add_function(wrap_pyfunction!(smoothing_rate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(type_vector, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_complexity, m)?)?;
    m.add_function(wrap_pyfunction!(interval_complexity_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(fooling_set, m)?)?;
    m.add_function(wrap_pyfunction!(and_block, m)?)?;
    m.add_function(wrap_pyfunction!(and_worst_case_bits, m)?)?;
    Ok(())
}
