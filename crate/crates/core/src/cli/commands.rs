use super::config::FileConfig;
use super::output::{csv_bytes, emit, fmt_f64};
use super::{CapacityArgs, ClocksArgs, Command, ComputeArgs, ConnectivityArgs, ReportArgs};
use crate::capacity::{
    build_cell_scheme, physical_feasible, protocol_upper_bound, simulate_throughput_windowed,
    transport_capacity, PhysicalParams, ProtocolParams, Slot, Transmission,
};
use crate::clocks::{
    estimate_delay_and_offset, estimate_relative_skew, estimator_variance, ls_offsets,
    offset_uncertainty_interval, offset_uncertainty_polyhedron, ping_pong_rounds,
    roundtrip_delay, settling_iterations, simulate_exchange, AffineClock, ClockWorld,
    OffsetUncertainty, SmoothingState,
};
use crate::compute::{
    and_block_protocol, and_worst_case_bits, counterexample_network, dag_cut_outer_bound,
    dag_parity_scheme, fooling_set_lower_bound, histogram_aggregation,
    interval_complexity_bounds, is_type_sensitive, is_type_threshold, threshold_complexity,
    tree_achievable_region, tree_zero_error_codes, CodingMode, FunctionTable, NetworkGraph,
};
use crate::numerics::Pcg32;
use crate::rgg::{
    complete_graph, connectivity_probability, critical_range, is_connected,
    lattice_graph, parse_grid, path_graph, place_uniform, star_graph, sweep_er_over_c,
    sweep_knn_over_k, sweep_range_over_c, ConnectivityModel, Domain, Graph,
};
use crate::{acceptance, Error};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    /// Schema/validation problem: exit code 2.
    Usage(String),
    /// Runtime failure: exit code 1.
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        // argument validation surfaced by library ops is a usage error
        match e {
            Error::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other),
        }
    }
}

type CResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn req<T>(v: Option<T>, name: &str) -> CResult<T> {
    v.ok_or_else(|| usage(format!("missing required option --{name} (or config key)")))
}

fn parse_triplet(spec: &str, name: &str) -> CResult<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--{name} expects lo:hi:step, got '{spec}'")));
    }
    let vals: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| usage(format!("--{name}: bad number '{p}'")))
        })
        .collect::<CResult<_>>()?;
    Ok((vals[0], vals[1], vals[2]))
}

fn parse_usize_list(spec: &str, name: &str) -> CResult<Vec<usize>> {
    spec.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("--{name}: bad count '{p}'")))
        })
        .collect()
}

/// Global --seed/--out flags, the lowest-priority layer below subcommand
/// config values.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn run(command: Command, cfg: FileConfig, globals: Globals) -> CResult<()> {
    match command {
        Command::Connectivity(args) => run_connectivity(args, &cfg, &globals),
        Command::Capacity(args) => run_capacity(args, &cfg, &globals),
        Command::Clocks(args) => run_clocks(args, &cfg, &globals),
        Command::Compute(args) => run_compute(args, &cfg, &globals),
        Command::Report(args) => run_report(args, &globals),
    }
}

// --- connectivity ---

fn run_connectivity(args: ConnectivityArgs, cfg: &FileConfig, g: &Globals) -> CResult<()> {
    let c = &cfg.connectivity;
    let model = req(args.model.or(c.model.clone()), "model")?;
    let n = req(args.n.or(c.n), "n")?;
    let trials = args.trials.or(c.trials).unwrap_or(100);
    let seed = g.seed.or(c.seed).or(cfg.global.seed).unwrap_or(0);
    let out = g.out.clone().or(c.out.clone()).or(cfg.global.out.clone());
    let c_grid = args.c_grid.or(c.c_grid.clone());
    let k_grid = args.k_grid.or(c.k_grid.clone());
    let param = args.param.or(c.param);

    let header = [
        "model", "n", "param", "c", "trials", "successes", "p_hat", "ci_low", "ci_high", "seed",
    ];
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push_row = |param: f64, c_val: Option<f64>, e: &crate::rgg::ConnectivityEstimate| {
        rows.push(vec![
            model.clone(),
            n.to_string(),
            fmt_f64(param),
            c_val.map(fmt_f64).unwrap_or_default(),
            e.trials.to_string(),
            e.successes.to_string(),
            fmt_f64(e.p_hat),
            fmt_f64(e.ci_low),
            fmt_f64(e.ci_high),
            seed.to_string(),
        ]);
    };

    match model.as_str() {
        "range" | "er" => {
            if let Some(grid) = &c_grid {
                let (lo, hi, step) = parse_triplet(grid, "c-grid")?;
                let cs = parse_grid(lo, hi, step)?;
                let ests = if model == "range" {
                    sweep_range_over_c(n, &cs, trials, seed)?
                } else {
                    sweep_er_over_c(n, &cs, trials, seed)?
                };
                let ln_n = (n as f64).ln();
                for (cv, e) in cs.iter().zip(&ests) {
                    let p = if model == "range" {
                        critical_range(n, *cv)?
                    } else {
                        ((ln_n + cv) / n as f64).clamp(0.0, 1.0)
                    };
                    push_row(p, Some(*cv), e);
                }
            } else {
                let p = req(param, "param")?;
                let m = if model == "range" {
                    ConnectivityModel::Range { r: p }
                } else {
                    ConnectivityModel::Er { p }
                };
                let e = connectivity_probability(m, n, trials, seed)?;
                push_row(p, None, &e);
            }
        }
        "knn" => {
            if let Some(grid) = &k_grid {
                let (lo, hi, step) = parse_triplet(grid, "k-grid")?;
                if step <= 0.0 || lo < 1.0 {
                    return Err(usage("--k-grid needs positive integer bounds"));
                }
                let ks: Vec<usize> = parse_grid(lo, hi, step)?
                    .into_iter()
                    .map(|v| v.round() as usize)
                    .collect();
                let ests = sweep_knn_over_k(n, &ks, trials, seed)?;
                for (k, e) in ks.iter().zip(&ests) {
                    push_row(*k as f64, None, e);
                }
            } else {
                let k = req(param, "param")? as usize;
                let e = connectivity_probability(
                    ConnectivityModel::Knn { k },
                    n,
                    trials,
                    seed,
                )?;
                push_row(k as f64, None, &e);
            }
        }
        other => return Err(usage(format!("unknown model '{other}' (range|knn|er)"))),
    }
    let bytes = csv_bytes(&header, &rows)?;
    emit(out.as_deref(), &bytes)?;
    Ok(())
}

// --- capacity ---

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

fn run_capacity(args: CapacityArgs, cfg: &FileConfig, g: &Globals) -> CResult<()> {
    let c = &cfg.capacity;
    let ns = parse_usize_list(
        &args.n_grid.or(c.n_grid.clone()).unwrap_or_else(|| "64,256,1024".into()),
        "n-grid",
    )?;
    let delta = args.delta.or(c.delta).unwrap_or(1.0);
    let kappa = args.kappa.or(c.kappa).unwrap_or(2.0);
    let rounds_opt = args.rounds.or(c.rounds);
    let seed = g.seed.or(c.seed).or(cfg.global.seed).unwrap_or(0);
    let out = g.out.clone().or(c.out.clone()).or(cfg.global.out.clone());
    let params = ProtocolParams::new(delta, 1.0)?;
    let physical = match (
        args.alpha.or(c.alpha),
        args.beta.or(c.beta),
        args.noise.or(c.noise),
        args.p_ind.or(c.p_ind),
    ) {
        (Some(a), Some(b), Some(nz), Some(p)) => {
            let mut ph = PhysicalParams::new(a, b, nz, p)?;
            if args.literal_eq1 || c.literal_eq1.unwrap_or(false) {
                ph = ph.literal();
            }
            Some(ph)
        }
        (None, None, None, None) => None,
        _ => {
            return Err(usage(
                "physical model needs all of --alpha --beta --noise --p-ind",
            ))
        }
    };

    let header = [
        "n",
        "model",
        "lambda_hat",
        "lambda_hat_scaled",
        "transport_capacity",
        "upper_bound",
        "colors",
        "kappa",
        "seed",
    ];
    let mut rows: Vec<Vec<String>> = Vec::new();
    for &n in &ns {
        let mut s = seed.wrapping_add(n as u64);
        let (scheme, result, used_seed) = loop {
            let placement = place_uniform(n, Domain::UnitSquare, s)?;
            let od = random_od_pairs(n, s ^ 0x0d);
            match build_cell_scheme(&placement, &od, kappa, &params) {
                Ok(scheme) => {
                    let load = scheme.max_cell_load() as u64;
                    let rounds = rounds_opt.unwrap_or(60 * load.max(1));
                    let res = simulate_throughput_windowed(&scheme, &params, 8 * load, rounds)
                        .map_err(CliError::Runtime)?;
                    break (scheme, res, s);
                }
                Err(Error::SchemeFailure(_)) => s = s.wrapping_add(1),
                Err(e) => return Err(e.into()),
            }
        };
        let scaled = result.lambda_hat * ((n as f64) * (n as f64).ln()).sqrt() / params.rate_w;
        let bound = protocol_upper_bound(n, 1.0, &params)?;
        let measured = transport_capacity(&result.log);
        rows.push(vec![
            n.to_string(),
            "protocol".into(),
            fmt_f64(result.lambda_hat),
            fmt_f64(scaled),
            fmt_f64(measured),
            fmt_f64(bound),
            scheme.num_colors().to_string(),
            fmt_f64(kappa),
            used_seed.to_string(),
        ]);
        if let Some(ph) = &physical {
            // conservative surrogate: per color class, every loaded cell
            // fires its longest hop; subsets only see less interference
            let g = scheme.cells_per_axis();
            let mut longest: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
            for route in scheme.routes() {
                for &(tx, rx) in &route.hops {
                    let cell = scheme.cell_of_node(tx);
                    let d = scheme.placement().distance(tx, rx);
                    let cur = longest.get(&cell).map(|&(a, b)| scheme.placement().distance(a, b));
                    if cur.map_or(true, |c| d > c) {
                        longest.insert(cell, (tx, rx));
                    }
                }
            }
            let mut all_ok = true;
            for color in 0..scheme.num_colors() {
                let txs: Vec<Transmission> = (0..g * g)
                    .filter(|&cell| scheme.color_of_cell(cell) == color)
                    .filter_map(|cell| longest.get(&cell))
                    .map(|&(a, b)| Transmission::new(a, b))
                    .collect();
                if txs.is_empty() {
                    continue;
                }
                let slot = Slot::new(txs).map_err(CliError::Runtime)?;
                let check =
                    physical_feasible(&slot, scheme.placement(), ph).map_err(CliError::Runtime)?;
                if !check.feasible {
                    all_ok = false;
                }
            }
            let lam = if all_ok { result.lambda_hat } else { 0.0 };
            rows.push(vec![
                n.to_string(),
                "physical".into(),
                fmt_f64(lam),
                fmt_f64(if all_ok { scaled } else { 0.0 }),
                fmt_f64(measured),
                fmt_f64(bound),
                scheme.num_colors().to_string(),
                fmt_f64(kappa),
                used_seed.to_string(),
            ]);
        }
    }
    let bytes = csv_bytes(&header, &rows)?;
    emit(out.as_deref(), &bytes)?;
    Ok(())
}

// --- clocks ---

fn topology_graph(name: &str, n: usize, seed: u64) -> CResult<Graph> {
    match name {
        "path" => Ok(path_graph(n)),
        "star" => Ok(star_graph(n)),
        "complete" => Ok(complete_graph(n)),
        "lattice" => {
            let side = (n as f64).sqrt().floor() as usize;
            if side * side != n {
                return Err(usage(format!("lattice needs a square n, got {n}")));
            }
            Ok(lattice_graph(side))
        }
        "rgg" => {
            let r = critical_range(n, 4.0)?;
            let mut s = seed;
            loop {
                let p = place_uniform(n, Domain::UnitAreaDisk, s)?;
                let g = crate::rgg::build_range_graph(&p, r)?;
                if is_connected(&g)? {
                    return Ok(g);
                }
                s = s.wrapping_add(1);
            }
        }
        other => Err(usage(format!(
            "unknown topology '{other}' (path|star|complete|lattice|rgg)"
        ))),
    }
}

fn measurements_for(
    graph: &Graph,
    noise_var: f64,
    seed: u64,
) -> CResult<(Vec<f64>, Vec<crate::clocks::OffsetMeasurement>)> {
    let n = graph.node_count();
    let mut rng = Pcg32::seeded(seed);
    let mut offsets: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
    offsets[0] = 0.0;
    let ms = if noise_var > 0.0 {
        crate::clocks::noisy_measurements(graph, &offsets, noise_var, &mut rng)?
    } else {
        crate::clocks::consistent_measurements(graph, &offsets)?
    };
    Ok((offsets, ms))
}

fn run_clocks(args: ClocksArgs, cfg: &FileConfig, g: &Globals) -> CResult<()> {
    let c = &cfg.clocks;
    let mode = req(args.mode.or(c.mode.clone()), "mode")?;
    let topology = args.topology.or(c.topology.clone()).unwrap_or_else(|| "path".into());
    let n = args.n.or(c.n).unwrap_or(16);
    let noise_var = args.noise_var.or(c.noise_var).unwrap_or(0.0);
    let trials = args.trials.or(c.trials).unwrap_or(100);
    let seed = g.seed.or(c.seed).or(cfg.global.seed).unwrap_or(0);
    let out = g.out.clone().or(c.out.clone()).or(cfg.global.out.clone());

    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match mode.as_str() {
        "pairwise" => {
            let header = vec![
                "trial", "skew_true", "skew_hat", "roundtrip_true", "roundtrip_hat", "d_hat",
                "tau_hat", "offset_true", "interval_lo", "interval_hi", "contains",
            ];
            let mut rows = Vec::new();
            let mut rng = Pcg32::seeded(seed);
            for trial in 0..trials {
                let skew = rng.uniform(0.5, 2.0);
                let offset = rng.uniform(-10.0, 10.0);
                let d01 = rng.uniform(0.0, 2.0);
                let d10 = rng.uniform(0.0, 2.0);
                let world = ClockWorld::new(
                    vec![AffineClock::identity(), AffineClock::new(skew, offset)?],
                    vec![(0, 1, d01), (1, 0, d10)],
                )?;
                let base = simulate_exchange(&world, &[(0, 1, 0.0), (0, 1, 5.0)])?;
                let skew_hat = estimate_relative_skew(&base[0], &base[1])?;
                let (fwd, bwd) = ping_pong_rounds(&world, 0, 1, 1, 10.0, 5.0)?[0];
                let rt = roundtrip_delay(&fwd, &bwd, 1.0 / skew_hat)?;
                let (d_hat, tau_hat) =
                    estimate_delay_and_offset(&fwd, &bwd, skew_hat, 1.0 / skew_hat)?;
                let log: Vec<_> = ping_pong_rounds(&world, 0, 1, 2, 40.0, 7.0)?
                    .into_iter()
                    .flat_map(|(f, b)| [f, b])
                    .collect();
                let (lo, hi) = match offset_uncertainty_interval(&log, true)? {
                    OffsetUncertainty::Interval { lo, hi } => (lo, hi),
                    OffsetUncertainty::Line { .. } => (f64::NAN, f64::NAN),
                };
                rows.push(vec![
                    trial.to_string(),
                    fmt_f64(skew),
                    fmt_f64(skew_hat),
                    fmt_f64(d01 + d10),
                    fmt_f64(rt),
                    fmt_f64(d_hat),
                    fmt_f64(tau_hat),
                    fmt_f64(offset),
                    fmt_f64(lo),
                    fmt_f64(hi),
                    (lo - 1e-9 <= offset && offset <= hi + 1e-9).to_string(),
                ]);
            }
            (header, rows)
        }
        "polyhedron" => {
            let graph = topology_graph(&topology, n, seed)?;
            let links: Vec<(usize, usize)> = graph
                .edges()
                .iter()
                .flat_map(|&(a, b)| [(a, b), (b, a)])
                .collect();
            let world = ClockWorld::random(n, &links, seed)?;
            let mut sends = Vec::new();
            let mut clocks_t = BTreeMap::new();
            for &(i, j) in world.links() {
                for _ in 0..2 {
                    let t = clocks_t.entry(i).or_insert(0.0f64);
                    *t += 1.0;
                    sends.push((i, j, *t));
                }
            }
            let records = simulate_exchange(&world, &sends)?;
            let poly = offset_uncertainty_polyhedron(n, &records)?;
            let truth: Vec<f64> = (0..n).map(|i| world.clock(i).offset).collect();
            let header = vec!["n", "links", "contains_truth", "interior_nonempty", "seed"];
            let rows = vec![vec![
                n.to_string(),
                poly.links().len().to_string(),
                poly.contains(&truth, 1e-7)?.to_string(),
                poly.interior_nonempty()?.to_string(),
                seed.to_string(),
            ]];
            (header, rows)
        }
        "ls" => {
            let graph = topology_graph(&topology, n, seed)?;
            let (offsets, ms) = measurements_for(&graph, noise_var, seed)?;
            let v = ls_offsets(n, &ms)?;
            let header = vec!["node", "offset_true", "offset_hat", "abs_err"];
            let rows = (0..n)
                .map(|i| {
                    vec![
                        i.to_string(),
                        fmt_f64(offsets[i]),
                        fmt_f64(v[i]),
                        fmt_f64((v[i] - offsets[i]).abs()),
                    ]
                })
                .collect();
            (header, rows)
        }
        "smooth-async" | "smooth-sync" => {
            let graph = topology_graph(&topology, n, seed)?;
            let (_, ms) = measurements_for(&graph, noise_var, seed)?;
            let fixed = ls_offsets(n, &ms)?;
            let mut state = SmoothingState::new(n, ms)?;
            let err_to = |v: &[f64]| -> f64 {
                v.iter()
                    .zip(&fixed)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            };
            let header = vec!["iteration", "error_norm", "f_value"];
            let mut rows = vec![vec![
                "0".into(),
                fmt_f64(err_to(&state.v)),
                fmt_f64(state.objective()),
            ]];
            let sweeps = 400usize;
            if mode == "smooth-async" {
                let mut it = 0usize;
                'outer: for _ in 0..sweeps {
                    for node in 1..n {
                        state.update_node(node)?;
                        it += 1;
                        rows.push(vec![
                            it.to_string(),
                            fmt_f64(err_to(&state.v)),
                            fmt_f64(state.objective()),
                        ]);
                        if err_to(&state.v) < 1e-10 {
                            break 'outer;
                        }
                    }
                }
            } else {
                for it in 1..=sweeps * 10 {
                    state.sync_step();
                    rows.push(vec![
                        it.to_string(),
                        fmt_f64(err_to(&state.v)),
                        fmt_f64(state.objective()),
                    ]);
                    if err_to(&state.v) < 1e-10 {
                        break;
                    }
                }
            }
            (header, rows)
        }
        "variance" => {
            let graph = topology_graph(&topology, n, seed)?;
            let var = if noise_var > 0.0 { noise_var } else { 1.0 };
            let lv: Vec<((usize, usize), f64)> =
                graph.edges().iter().map(|&e| (e, var)).collect();
            let vars = estimator_variance(n, &lv)?;
            let header = vec!["node", "variance"];
            let rows = (0..n)
                .map(|i| vec![i.to_string(), fmt_f64(vars[i])])
                .collect();
            (header, rows)
        }
        "settling" => {
            let graph = topology_graph(&topology, n, seed)?;
            let (_, ms) = measurements_for(&graph, noise_var, seed)?;
            let mut state = SmoothingState::new(n, ms)?;
            let iters = settling_iterations(&mut state, 1e-6, 10_000_000)?;
            let header = vec!["topology", "n", "eps", "iterations"];
            let rows = vec![vec![
                topology.clone(),
                n.to_string(),
                "1e-6".into(),
                iters.to_string(),
            ]];
            (header, rows)
        }
        other => {
            return Err(usage(format!(
                "unknown mode '{other}' (pairwise|polyhedron|ls|smooth-async|smooth-sync|variance|settling)"
            )))
        }
    };
    let bytes = csv_bytes(&header, &rows)?;
    emit(out.as_deref(), &bytes)?;
    Ok(())
}

// --- compute ---

fn builtin_function(spec: &str, n: usize, alphabet: usize) -> CResult<FunctionTable> {
    let f = match spec {
        "max" => FunctionTable::max_fn(n, alphabet)?,
        "min" => FunctionTable::min_fn(n, alphabet)?,
        "sum" => FunctionTable::sum_fn(n, alphabet)?,
        "parity" => FunctionTable::parity_fn(n, alphabet)?,
        "and" => {
            if alphabet != 2 {
                return Err(usage("and is only defined over the binary alphabet"));
            }
            FunctionTable::and_fn(n)?
        }
        other => {
            if let Some(t) = other.strip_prefix("threshold:") {
                let theta: usize = t
                    .parse()
                    .map_err(|_| usage(format!("bad threshold spec '{other}'")))?;
                FunctionTable::boolean_threshold(n, theta)?
            } else if let Some(ab) = other.strip_prefix("interval:") {
                let parts: Vec<&str> = ab.split(':').collect();
                if parts.len() != 2 {
                    return Err(usage(format!("bad interval spec '{other}'")));
                }
                let a = parts[0]
                    .parse()
                    .map_err(|_| usage(format!("bad interval spec '{other}'")))?;
                let b = parts[1]
                    .parse()
                    .map_err(|_| usage(format!("bad interval spec '{other}'")))?;
                FunctionTable::boolean_interval(n, a, b)?
            } else {
                return Err(usage(format!(
                    "unknown function '{other}' (max|min|parity|sum|and|threshold:t|interval:a:b)"
                )));
            }
        }
    };
    Ok(f)
}

fn load_function(
    function: Option<String>,
    table: Option<PathBuf>,
    n: Option<usize>,
    alphabet: usize,
) -> CResult<FunctionTable> {
    match (function, table) {
        (Some(_), Some(_)) => Err(usage("give either --function or --table, not both")),
        (Some(name), None) => builtin_function(&name, req(n, "n")?, alphabet),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read table {path:?}: {e}")))?;
            Ok(FunctionTable::parse(&text)?)
        }
        (None, None) => Err(usage("missing --function or --table")),
    }
}

fn star_network(m: usize) -> CResult<NetworkGraph> {
    // collector 0 is uninformed; arguments live at the leaves
    let edges: Vec<(usize, usize)> = (1..=m).map(|v| (v, 0)).collect();
    Ok(NetworkGraph::new(m + 1, edges, 0, (1..=m).collect())?)
}

fn json_out(out: Option<&std::path::Path>, value: serde_json::Value) -> CResult<()> {
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Runtime(Error::Io(e.to_string())))?;
    text.push('\n');
    emit(out, text.as_bytes())?;
    Ok(())
}

fn run_compute(args: ComputeArgs, cfg: &FileConfig, g: &Globals) -> CResult<()> {
    let c = &cfg.compute;
    let op = req(args.op.or(c.op.clone()), "op")?;
    let alphabet = args.alphabet.or(c.alphabet).unwrap_or(2);
    let n = args.n.or(c.n);
    let seed = g.seed.or(c.seed).or(cfg.global.seed).unwrap_or(0);
    let out = g.out.clone().or(c.out.clone()).or(cfg.global.out.clone());
    let function = args.function.or(c.function.clone());
    let table = args.table.or(c.table.clone());
    let mode = if args.avg || c.avg.unwrap_or(false) {
        None // filled per-op with the uniform distribution once sizes are known
    } else {
        Some(CodingMode::Worst)
    };
    let uniform = |len: usize| CodingMode::Average(vec![1.0 / len as f64; len]);

    match op.as_str() {
        "classify" => {
            let f = load_function(function.clone(), table, n, alphabet)?;
            let mut result = json!({
                "n": f.n_args(),
                "alphabet": f.alphabet(),
                "symmetric": f.is_symmetric(),
            });
            if let Some(theta_spec) = args.theta.or(c.theta.clone()) {
                let theta: Vec<usize> = theta_spec
                    .split(',')
                    .map(|p| p.trim().parse().map_err(|_| usage("bad --theta vector")))
                    .collect::<CResult<_>>()?;
                result["theta"] = json!(theta);
                result["type_threshold"] = json!(is_type_threshold(&f, &theta)?);
            }
            if let Some(gamma) = args.gamma.or(c.gamma) {
                result["gamma"] = json!(gamma);
                result["type_sensitive"] = json!(is_type_sensitive(&f, gamma)?);
            }
            json_out(out.as_deref(), result)
        }
        "tree-code" => {
            let f = load_function(function, table, n, alphabet)?;
            let net = if f.n_args() == 2 {
                // two-node network: leaf 1 holds x1, collector 0 holds x2
                NetworkGraph::new(2, vec![(1, 0)], 0, vec![1, 0])?
            } else {
                star_network(f.n_args())?
            };
            let m = mode.unwrap_or_else(|| uniform(f.table_len()));
            let code = tree_zero_error_codes(&net, &f, &m)?;
            let verified = code.verify_exhaustive(&f)?;
            let edges: Vec<serde_json::Value> = code
                .edges
                .iter()
                .map(|e| {
                    json!({
                        "edge": e.edge,
                        "classes": e.partition.num_classes,
                        "rate_bits": e.rate_bits,
                        "fixed_len_bits": e.fixed_len_bits,
                    })
                })
                .collect();
            json_out(
                out.as_deref(),
                json!({"edges": edges, "zero_error_verified": verified}),
            )
        }
        "dag-bounds" => {
            let f = match (function, n) {
                (Some(name), maybe_n) => builtin_function(&name, maybe_n.unwrap_or(2), alphabet)?,
                (None, _) => FunctionTable::sum_fn(2, 2)?,
            };
            if f.n_args() != 2 {
                return Err(usage("dag-bounds uses the canonical 3-node DAG: f must take 2 arguments"));
            }
            let net = counterexample_network();
            let m = mode.unwrap_or_else(|| uniform(f.table_len()));
            let bounds = dag_cut_outer_bound(&net, &f, &m)?;
            let region = tree_achievable_region(&net, &f, &m)?;
            json_out(
                out.as_deref(),
                json!({
                    "edges": region.edge_order,
                    "cut_bounds": bounds
                        .iter()
                        .map(|b| json!({"cut_edges": b.cut_edges, "min_bits": b.min_bits}))
                        .collect::<Vec<_>>(),
                    "tree_points": region.points,
                }),
            )
        }
        "parity" => {
            let block_n = args.block_n.or(c.block_n).unwrap_or(8);
            let split = args.split.or(c.split).unwrap_or(0.5);
            let net = counterexample_network();
            let mut rng = Pcg32::seeded(seed);
            let mut blocks = BTreeMap::new();
            for &node in net.informed() {
                blocks.insert(node, (0..block_n).map(|_| (rng.next_u32() & 1) as u8).collect());
            }
            let mut plan = BTreeMap::new();
            plan.insert(2usize, vec![split, 1.0 - split]);
            let outp = dag_parity_scheme(&net, &blocks, &plan)?;
            let brute: Vec<u8> = (0..block_n)
                .map(|t| blocks[&1][t] ^ blocks[&2][t])
                .collect();
            json_out(
                out.as_deref(),
                json!({
                    "block_n": block_n,
                    "split": split,
                    "edge_bits": outp
                        .edge_bits
                        .iter()
                        .map(|(e, bits)| json!({"edge": e, "bits": bits, "rate": *bits as f64 / block_n as f64}))
                        .collect::<Vec<_>>(),
                    "correct": outp.collector_block == brute,
                }),
            )
        }
        "histogram" => {
            let ns = parse_usize_list(
                &args.n_grid.or(c.n_grid.clone()).unwrap_or_else(|| "64,256,1024".into()),
                "n-grid",
            )?;
            let cval = args.c.or(c.c).unwrap_or(4.0);
            let delta = args.delta.or(c.delta).unwrap_or(1.0);
            let blocks = args.blocks.or(c.blocks).unwrap_or(4);
            let header = [
                "n", "seed", "colors", "message_bits", "slots_per_block", "slots_used",
                "throughput", "slots_per_block_over_ln_n",
            ];
            let mut rows = Vec::new();
            for &nn in &ns {
                let r = critical_range(nn, cval)?;
                let mut s = seed.wrapping_add(nn as u64);
                let run = loop {
                    let p = place_uniform(nn, Domain::UnitSquare, s)?;
                    match histogram_aggregation(&p, r, alphabet, blocks, delta, s) {
                        Ok(run) => break run,
                        Err(Error::SchemeFailure(_)) => s = s.wrapping_add(1),
                        Err(e) => return Err(e.into()),
                    }
                };
                rows.push(vec![
                    nn.to_string(),
                    s.to_string(),
                    run.colors.to_string(),
                    run.message_bits.to_string(),
                    run.slots_per_block.to_string(),
                    run.slots_used.to_string(),
                    run.throughput.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(run.slots_per_block as f64 / (nn as f64).ln()),
                ]);
            }
            let bytes = csv_bytes(&header, &rows)?;
            emit(out.as_deref(), &bytes)?;
            Ok(())
        }
        "fooling" => {
            let f = load_function(function, table, n, alphabet)?;
            let res = fooling_set_lower_bound(&f, 4096)?;
            json_out(
                out.as_deref(),
                json!({
                    "size": res.set.len(),
                    "bound_bits": res.bound_bits,
                    "exact_maximum": res.exact,
                    "set": res.set,
                }),
            )
        }
        "threshold" => {
            let nn = req(n, "n")?;
            let theta: usize = req(args.theta.or(c.theta.clone()), "theta")?
                .parse()
                .map_err(|_| usage("--theta must be an integer for op=threshold"))?;
            let bits = threshold_complexity(nn, theta)?;
            json_out(
                out.as_deref(),
                json!({"n": nn, "theta": theta, "bits_per_instance": bits}),
            )
        }
        "interval" => {
            let nn = req(n, "n")?;
            let a = req(args.a.or(c.a), "a")?;
            let b = req(args.b.or(c.b), "b")?;
            let (lower, upper) = interval_complexity_bounds(nn, a, b)?;
            json_out(
                out.as_deref(),
                json!({"n": nn, "a": a, "b": b, "lower_bits": lower, "upper_bits": upper}),
            )
        }
        "and-block" => {
            let block_n = args.block_n.or(c.block_n).unwrap_or(255);
            let worst = and_worst_case_bits(block_n);
            let mut rng = Pcg32::seeded(seed);
            let x1: Vec<u8> = (0..block_n).map(|_| (rng.next_u32() & 1) as u8).collect();
            let x2: Vec<u8> = (0..block_n).map(|_| (rng.next_u32() & 1) as u8).collect();
            let t = and_block_protocol(&x1, &x2)?;
            json_out(
                out.as_deref(),
                json!({
                    "block_n": block_n,
                    "worst_case_bits": worst,
                    "worst_case_bits_per_instance": worst as f64 / block_n as f64,
                    "log2_3": 1.584962500721156,
                    "example_total_bits": t.total_bits,
                }),
            )
        }
        other => Err(usage(format!(
            "unknown op '{other}' (classify|tree-code|dag-bounds|parity|histogram|fooling|threshold|interval|and-block)"
        ))),
    }
}

// --- report ---

fn run_report(args: ReportArgs, g: &Globals) -> CResult<()> {
    let _ = args;
    let reports = acceptance::run_all().map_err(CliError::Runtime)?;
    for r in &reports {
        eprintln!("{}", acceptance::render_line(r));
    }
    let markdown = acceptance::render_markdown(&reports);
    emit(g.out.as_deref(), markdown.as_bytes())?;
    if reports.iter().any(|r| !r.passed) {
        return Err(CliError::Runtime(Error::NumericFailure(
            "one or more acceptance criteria failed".into(),
        )));
    }
    Ok(())
}
