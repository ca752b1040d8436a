use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintOp {
    Le,
    Ge,
    Eq,
}

/// One linear constraint `coeffs . x  op  rhs` over free variables.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub op: ConstraintOp,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, op: ConstraintOp, rhs: f64) -> Self {
        Constraint { coeffs, op, rhs }
    }
}

/// Small dense linear program over free (sign-unrestricted) variables.
/// Nonnegativity is expressed as an explicit `Ge` row when wanted.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { value: f64, solution: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// Checks a candidate solution against every constraint.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            match c.op {
                ConstraintOp::Le => lhs <= c.rhs + tol,
                ConstraintOp::Ge => lhs >= c.rhs - tol,
                ConstraintOp::Eq => (lhs - c.rhs).abs() <= tol,
            }
        })
    }
}

const EPS: f64 = 1e-9;

/// Solves a desk-scale LP with a two-phase dense simplex using Bland's rule
/// (termination over speed). Free variables are split internally.
pub fn lp_solve(lp: &LinearProgram, sense: LpSense) -> Result<LpOutcome> {
    if lp.num_vars == 0 || lp.num_vars > 1000 {
        return Err(Error::InvalidArgument(format!(
            "lp_solve supports 1..=1000 variables, got {}",
            lp.num_vars
        )));
    }
    for c in &lp.constraints {
        if c.coeffs.len() != lp.num_vars {
            return Err(Error::InvalidArgument("constraint arity mismatch".into()));
        }
    }
    if lp.objective.len() != lp.num_vars {
        return Err(Error::InvalidArgument("objective arity mismatch".into()));
    }

    // split x = u - w so all simplex variables are nonnegative
    let nsplit = lp.num_vars * 2;
    let m = lp.constraints.len();

    // per-row: normalized coefficients over split vars, rhs >= 0, op
    let mut rows: Vec<(Vec<f64>, f64, ConstraintOp)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut coeffs: Vec<f64> = Vec::with_capacity(nsplit);
        for &a in &c.coeffs {
            coeffs.push(a);
            coeffs.push(-a);
        }
        let (mut rhs, mut op) = (c.rhs, c.op);
        if rhs < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
            op = match op {
                ConstraintOp::Le => ConstraintOp::Ge,
                ConstraintOp::Ge => ConstraintOp::Le,
                ConstraintOp::Eq => ConstraintOp::Eq,
            };
        }
        rows.push((coeffs, rhs, op));
    }

    // column layout: split vars | slacks/surpluses | artificials
    let n_slack = rows
        .iter()
        .filter(|(_, _, op)| *op != ConstraintOp::Eq)
        .count();
    let mut ncols = nsplit + n_slack;
    let mut art_cols: Vec<usize> = Vec::new();
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut slack_idx = nsplit;
    // first pass: figure out which rows need artificials
    let mut needs_art: Vec<bool> = Vec::with_capacity(m);
    for (_, _, op) in &rows {
        needs_art.push(*op != ConstraintOp::Le);
    }
    let n_art = needs_art.iter().filter(|&&b| b).count();
    ncols += n_art;

    let mut art_idx = nsplit + n_slack;
    for (i, (coeffs, rhs, op)) in rows.iter().enumerate() {
        let mut row = vec![0.0; ncols + 1];
        row[..nsplit].copy_from_slice(coeffs);
        row[ncols] = *rhs;
        match op {
            ConstraintOp::Le => {
                row[slack_idx] = 1.0;
                basis.push(slack_idx);
                slack_idx += 1;
            }
            ConstraintOp::Ge => {
                row[slack_idx] = -1.0;
                slack_idx += 1;
                row[art_idx] = 1.0;
                basis.push(art_idx);
                art_cols.push(art_idx);
                art_idx += 1;
            }
            ConstraintOp::Eq => {
                row[art_idx] = 1.0;
                basis.push(art_idx);
                art_cols.push(art_idx);
                art_idx += 1;
            }
        }
        let _ = i;
        tableau.push(row);
    }

    let is_artificial = |j: usize| j >= nsplit + n_slack;

    // phase 1: minimize the artificial sum
    if !art_cols.is_empty() {
        let mut cost = vec![0.0; ncols];
        for &a in &art_cols {
            cost[a] = 1.0;
        }
        let allowed = vec![true; ncols];
        let obj = run_simplex(&mut tableau, &mut basis, &cost, &allowed, ncols)?;
        let obj = match obj {
            SimplexRun::Optimal(v) => v,
            SimplexRun::Unbounded => {
                return Err(Error::NumericFailure("phase-1 LP unbounded".into()))
            }
        };
        if obj > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // pivot any artificial still in the basis out where possible
        for i in 0..m {
            if is_artificial(basis[i]) {
                if let Some(j) = (0..nsplit + n_slack)
                    .find(|&j| tableau[i][j].abs() > EPS)
                {
                    pivot(&mut tableau, &mut basis, i, j);
                }
            }
        }
    }

    // phase 2: the real objective (as a minimization)
    let mut cost = vec![0.0; ncols];
    for v in 0..lp.num_vars {
        let c = match sense {
            LpSense::Minimize => lp.objective[v],
            LpSense::Maximize => -lp.objective[v],
        };
        cost[2 * v] = c;
        cost[2 * v + 1] = -c;
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_artificial(j)).collect();
    let outcome = run_simplex(&mut tableau, &mut basis, &cost, &allowed, ncols)?;
    match outcome {
        SimplexRun::Unbounded => Ok(LpOutcome::Unbounded),
        SimplexRun::Optimal(v) => {
            let mut split = vec![0.0; ncols];
            for (i, &b) in basis.iter().enumerate() {
                split[b] = tableau[i][ncols];
            }
            let solution: Vec<f64> = (0..lp.num_vars)
                .map(|k| split[2 * k] - split[2 * k + 1])
                .collect();
            let value = match sense {
                LpSense::Minimize => v,
                LpSense::Maximize => -v,
            };
            Ok(LpOutcome::Optimal { value, solution })
        }
    }
}

enum SimplexRun {
    Optimal(f64),
    Unbounded,
}

fn pivot(tableau: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let piv = tableau[row][col];
    let width = tableau[row].len();
    for j in 0..width {
        tableau[row][j] /= piv;
    }
    for i in 0..tableau.len() {
        if i == row {
            continue;
        }
        let factor = tableau[i][col];
        if factor.abs() < 1e-300 {
            continue;
        }
        for j in 0..width {
            tableau[i][j] -= factor * tableau[row][j];
        }
    }
    basis[row] = col;
}

fn run_simplex(
    tableau: &mut Vec<Vec<f64>>,
    basis: &mut Vec<usize>,
    cost: &[f64],
    allowed: &[bool],
    ncols: usize,
) -> Result<SimplexRun> {
    let m = tableau.len();
    let max_iters = 50_000usize;
    for _ in 0..max_iters {
        // reduced costs r_j = c_j - c_B . column_j
        let cb: Vec<f64> = basis.iter().map(|&b| cost[b]).collect();
        let mut entering: Option<usize> = None;
        for j in 0..ncols {
            if !allowed[j] || basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cb[i] * tableau[i][j];
            }
            if r < -EPS {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(col) = entering else {
            let mut obj = 0.0;
            for i in 0..m {
                obj += cost[basis[i]] * tableau[i][ncols];
            }
            return Ok(SimplexRun::Optimal(obj));
        };
        // ratio test, Bland tie-break on the smallest basis index
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tableau[i][col];
            if a > EPS {
                let ratio = tableau[i][ncols] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS
                            || ((ratio - lr).abs() <= EPS && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return Ok(SimplexRun::Unbounded);
        };
        pivot(tableau, basis, row, col);
    }
    Err(Error::NumericFailure("simplex cycling guard exceeded".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Pcg32;

    fn opt(outcome: LpOutcome) -> (f64, Vec<f64>) {
        match outcome {
            LpOutcome::Optimal { value, solution } => (value, solution),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn max_x_bounded() {
        // max x s.t. x <= 3, x >= 0
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            constraints: vec![
                Constraint::new(vec![1.0], ConstraintOp::Le, 3.0),
                Constraint::new(vec![1.0], ConstraintOp::Ge, 0.0),
            ],
        };
        let (v, x) = opt(lp_solve(&lp, LpSense::Maximize).unwrap());
        assert!((v - 3.0).abs() < 1e-9);
        assert!((x[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_system() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            constraints: vec![
                Constraint::new(vec![1.0], ConstraintOp::Le, -1.0),
                Constraint::new(vec![1.0], ConstraintOp::Ge, 0.0),
            ],
        };
        assert!(matches!(lp_solve(&lp, LpSense::Maximize).unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            constraints: vec![Constraint::new(vec![1.0], ConstraintOp::Ge, 0.0)],
        };
        assert!(matches!(lp_solve(&lp, LpSense::Maximize).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn equality_and_free_vars() {
        // min x + y s.t. x + y = 2, x - y <= 1 -> value 2 (x,y free)
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![1.0, 1.0],
            constraints: vec![
                Constraint::new(vec![1.0, 1.0], ConstraintOp::Eq, 2.0),
                Constraint::new(vec![1.0, -1.0], ConstraintOp::Le, 1.0),
            ],
        };
        let (v, x) = opt(lp_solve(&lp, LpSense::Minimize).unwrap());
        assert!((v - 2.0).abs() < 1e-9);
        assert!(lp.is_feasible(&x, 1e-9));
    }

    #[test]
    fn negative_optimum_free_variable() {
        // min x s.t. x >= -5 -> -5
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![1.0],
            constraints: vec![Constraint::new(vec![1.0], ConstraintOp::Ge, -5.0)],
        };
        let (v, x) = opt(lp_solve(&lp, LpSense::Minimize).unwrap());
        assert!((v + 5.0).abs() < 1e-9);
        assert!((x[0] + 5.0).abs() < 1e-9);
    }

    #[test]
    fn random_feasible_systems_verified_by_substitution() {
        let mut rng = Pcg32::seeded(101);
        for trial in 0..25 {
            let nv = 10;
            // build constraints satisfied by a known point
            let x0: Vec<f64> = (0..nv).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let mut cons = Vec::new();
            for _ in 0..12 {
                let a: Vec<f64> = (0..nv).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let lhs: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
                cons.push(Constraint::new(a, ConstraintOp::Le, lhs + rng.uniform(0.1, 2.0)));
            }
            // keep the region bounded
            for v in 0..nv {
                let mut a = vec![0.0; nv];
                a[v] = 1.0;
                cons.push(Constraint::new(a.clone(), ConstraintOp::Le, 10.0));
                cons.push(Constraint::new(a, ConstraintOp::Ge, -10.0));
            }
            let obj: Vec<f64> = (0..nv).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let lp = LinearProgram {
                num_vars: nv,
                objective: obj,
                constraints: cons,
            };
            let (_, x) = opt(lp_solve(&lp, LpSense::Maximize).unwrap());
            assert!(lp.is_feasible(&x, 1e-9), "trial {trial} witness infeasible");
        }
    }
}
