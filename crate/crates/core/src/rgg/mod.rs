//! Random graph models: geometric range graphs, k-nearest-neighbor graphs
//! and Erdos-Renyi graphs, plus connectivity testing and Monte Carlo
//! threshold experiments.

mod monte_carlo;

pub use monte_carlo::{
    connectivity_probability, parse_grid, sweep_er_over_c, sweep_knn_over_k,
    sweep_range_over_c, ConnectivityEstimate, ConnectivityModel,
};

use crate::numerics::{Pcg32, UnionFind};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Deployment region. Both have unit area: the disk has radius `1/sqrt(pi)`
/// centered at the origin, the square is `[0,1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    UnitAreaDisk,
    UnitSquare,
}

pub const DISK_RADIUS: f64 = 0.5641895835477563; // 1/sqrt(pi)

impl Domain {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        match self {
            Domain::UnitAreaDisk => p.0 * p.0 + p.1 * p.1 <= DISK_RADIUS * DISK_RADIUS,
            Domain::UnitSquare => (0.0..=1.0).contains(&p.0) && (0.0..=1.0).contains(&p.1),
        }
    }

    /// Largest distance between two points of the domain.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::UnitAreaDisk => 2.0 * DISK_RADIUS,
            Domain::UnitSquare => std::f64::consts::SQRT_2,
        }
    }
}

/// A seeded set of planar points in a unit-area domain.
#[derive(Debug, Clone)]
pub struct NodePlacement {
    points: Vec<(f64, f64)>,
    domain: Domain,
    seed: u64,
}

impl NodePlacement {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.points[i];
        let (xj, yj) = self.points[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    }
}

impl NodePlacement {
    /// Wraps explicit coordinates, validating domain membership.
    pub fn from_points(points: Vec<(f64, f64)>, domain: Domain) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("placement needs n >= 1".into()));
        }
        for (i, &p) in points.iter().enumerate() {
            if !domain.contains(p) {
                return Err(Error::InvalidArgument(format!(
                    "point {i} at ({}, {}) lies outside the domain",
                    p.0, p.1
                )));
            }
        }
        Ok(NodePlacement {
            points,
            domain,
            seed: 0,
        })
    }

    /// Wraps arbitrary coordinates without domain validation, for
    /// geometry-only operations (feasibility checks, distances). The domain
    /// tag is set to the unit square but carries no meaning here.
    pub fn from_points_unchecked(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("placement needs n >= 1".into()));
        }
        Ok(NodePlacement {
            points,
            domain: Domain::UnitSquare,
            seed: 0,
        })
    }
}

#[doc(hidden)]
pub mod test_support {
    //! Fixture constructor for geometry-only tests in other modules.
    use super::NodePlacement;

    pub fn placement_with_points(points: Vec<(f64, f64)>) -> NodePlacement {
        NodePlacement::from_points_unchecked(points).unwrap()
    }
}

/// Places `n` i.i.d.-uniform points in the domain. Identical
/// `(n, domain, seed)` gives bit-identical output. Disk points are drawn by
/// rejection from the bounding square.
pub fn place_uniform(n: usize, domain: Domain, seed: u64) -> Result<NodePlacement> {
    if n == 0 {
        return Err(Error::InvalidArgument("placement needs n >= 1".into()));
    }
    let mut rng = Pcg32::seeded(seed);
    let mut points = Vec::with_capacity(n);
    match domain {
        Domain::UnitSquare => {
            for _ in 0..n {
                let x = rng.next_f64();
                let y = rng.next_f64();
                points.push((x, y));
            }
        }
        Domain::UnitAreaDisk => {
            let r2 = DISK_RADIUS * DISK_RADIUS;
            for _ in 0..n {
                loop {
                    let x = rng.uniform(-DISK_RADIUS, DISK_RADIUS);
                    let y = rng.uniform(-DISK_RADIUS, DISK_RADIUS);
                    if x * x + y * y <= r2 {
                        points.push((x, y));
                        break;
                    }
                }
            }
        }
    }
    Ok(NodePlacement { points, domain, seed })
}

/// Adjacency structure over node indices. Undirected graphs store each edge
/// once as `(i, j)` with `i < j`; the edge list is sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn undirected(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            norm.push(if a < b { (a, b) } else { (b, a) });
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Graph {
            n,
            directed: false,
            edges: norm,
        })
    }

    pub fn directed(n: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph {
            n,
            directed: true,
            edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = if !self.directed && a > b { (b, a) } else { (a, b) };
        self.edges.binary_search(&key).is_ok()
    }

    /// Neighbor lists ignoring orientation, sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Total degree per node (in+out for directed graphs).
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }
}

/// True iff the graph has one connected component, ignoring edge orientation.
pub fn is_connected(graph: &Graph) -> Result<bool> {
    if graph.n == 0 {
        return Err(Error::InvalidArgument("connectivity needs n >= 1".into()));
    }
    let mut uf = UnionFind::new(graph.n);
    for &(a, b) in &graph.edges {
        uf.union(a, b);
    }
    Ok(uf.components() == 1)
}

/// Range graph: edge `(i, j)` iff the Euclidean distance is strictly below `r`.
pub fn build_range_graph(placement: &NodePlacement, r: f64) -> Result<Graph> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("range must be >= 0, got {r}")));
    }
    let n = placement.len();
    let r2 = r * r;
    let pts = placement.points();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            if dx * dx + dy * dy < r2 {
                edges.push((i, j));
            }
        }
    }
    Graph::undirected(n, edges)
}

/// Sorted nearest-neighbor lists: for each node, the other nodes ordered by
/// (distance, index), truncated to the closest `k`.
fn knn_lists(placement: &NodePlacement, k: usize) -> Vec<Vec<usize>> {
    let n = placement.len();
    let pts = placement.points();
    let mut lists = Vec::with_capacity(n);
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let dx = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                (dx * dx + dy * dy, j)
            })
            .collect();
        let key = |a: &(f64, usize)| (a.0, a.1);
        if k < others.len() {
            others.select_nth_unstable_by(k - 1, |a, b| key(a).partial_cmp(&key(b)).unwrap());
            others.truncate(k);
        }
        others.sort_unstable_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        lists.push(others.into_iter().map(|(_, j)| j).collect());
    }
    lists
}

/// k-nearest-neighbor graph: undirected union of directed k-nearest
/// relations. Distance ties are broken by smaller node index.
pub fn build_knn_graph(placement: &NodePlacement, k: usize) -> Result<Graph> {
    let n = placement.len();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(Error::InvalidArgument(format!(
            "knn needs 1 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let lists = knn_lists(placement, k);
    let mut edges = Vec::new();
    for (i, list) in lists.iter().enumerate() {
        for &j in list {
            edges.push((i, j));
        }
    }
    Graph::undirected(n, edges)
}

/// Erdos-Renyi graph: each of the `C(n,2)` edges present independently with
/// probability `p`; deterministic per seed.
pub fn build_er_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidArgument("er graph needs n >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability out of [0,1]: {p}")));
    }
    let mut rng = Pcg32::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::undirected(n, edges)
}

/// Critical connectivity range `r = sqrt((ln n + c) / (pi n))` from the
/// scaling `pi r^2(n) = (ln n + c)/n`.
pub fn critical_range(n: usize, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("critical_range needs n >= 1".into()));
    }
    let ln_n = (n as f64).ln();
    if ln_n + c <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ln n + c must be positive, got {}",
            ln_n + c
        )));
    }
    Ok(((ln_n + c) / (std::f64::consts::PI * n as f64)).sqrt())
}

// --- fixed topologies used by the clocks experiments and the CLI ---

pub fn path_graph(n: usize) -> Graph {
    Graph::undirected(n, (1..n).map(|i| (i - 1, i)).collect()).unwrap()
}

pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    edges.push((n - 1, 0));
    Graph::undirected(n, edges).unwrap()
}

pub fn star_graph(n: usize) -> Graph {
    Graph::undirected(n, (1..n).map(|i| (0, i)).collect()).unwrap()
}

pub fn complete_graph(n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Graph::undirected(n, edges).unwrap()
}

/// side x side grid with 4-neighbor edges; node (r, c) has index r*side + c.
pub fn lattice_graph(side: usize) -> Graph {
    assert!(side >= 1);
    let n = side * side;
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                edges.push((v, v + 1));
            }
            if r + 1 < side {
                edges.push((v, v + side));
            }
        }
    }
    Graph::undirected(n, edges).unwrap()
}
