use crate::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols));
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cholesky factorization `M = L L^T`. Fails on non-SPD input.
fn cholesky(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("cholesky needs a square matrix".into()));
    }
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::SingularSystem(format!(
                        "nonpositive pivot {s:.3e} at row {i}; matrix is not positive definite"
                    )));
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves `M x = rhs` for symmetric positive definite `M` via Cholesky.
pub fn solve_spd(m: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if m.rows() != rhs.len() {
        return Err(Error::InvalidArgument("dimension mismatch in solve_spd".into()));
    }
    let l = cholesky(m)?;
    let n = m.rows();
    // forward: L y = rhs
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.get(i, k) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    // backward: L^T x = y
    let mut x = y;
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l.get(k, i) * x[k];
        }
        x[i] /= l.get(i, i);
    }
    Ok(x)
}

/// Diagonal of `M^{-1}` for SPD `M`.
///
/// Uses the identity `diag((L L^T)^{-1})_i = || L^{-1} e_i ||^2` and exploits
/// that the forward solve for `e_i` only touches rows `i..n`.
pub fn spd_inverse_diagonal(m: &Matrix) -> Result<Vec<f64>> {
    let l = cholesky(m)?;
    let n = m.rows();
    let mut diag = vec![0.0; n];
    let mut col = vec![0.0; n];
    for i in 0..n {
        col[i..n].iter_mut().for_each(|v| *v = 0.0);
        col[i] = 1.0;
        for r in i..n {
            let mut s = col[r];
            for k in i..r {
                s -= l.get(r, k) * col[k];
            }
            col[r] = s / l.get(r, r);
        }
        diag[i] = col[i..n].iter().map(|v| v * v).sum();
    }
    Ok(diag)
}

/// Full symmetric eigendecomposition `M = Q diag(eig) Q^T` via the cyclic
/// Jacobi rotation method, eigenvalues ascending. Desk scale (n up to a few
/// hundred).
pub fn eigen_symmetric(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("eigensolve needs a square matrix".into()));
    }
    if !m.is_symmetric(1e-9) {
        return Err(Error::InvalidArgument("eigensolve needs a symmetric matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut q = Matrix::identity(n);
    let off = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a.get(i, j) * a.get(i, j);
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| a.get(i, i).abs()).fold(1.0, f64::max);
    let tol = (1e-14 * scale).powi(2) * (n * n) as f64;
    for _sweep in 0..100 {
        if off(&a) <= tol {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&x, &y| a.get(x, x).partial_cmp(&a.get(y, y)).unwrap());
            let eig: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
            let mut vectors = Matrix::zeros(n, n);
            for (col, &src) in order.iter().enumerate() {
                for row in 0..n {
                    vectors.set(row, col, q.get(row, src));
                }
            }
            return Ok((eig, vectors));
        }
        for p in 0..n {
            for q_idx in (p + 1)..n {
                let apq = a.get(p, q_idx);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.get(q_idx, q_idx) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q_idx);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q_idx, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q_idx, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q_idx, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, q_idx);
                    q.set(k, p, c * qkp - s * qkq);
                    q.set(k, q_idx, s * qkp + c * qkq);
                }
            }
        }
    }
    Err(Error::NumericFailure("jacobi eigensolve did not converge".into()))
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues_symmetric(m: &Matrix) -> Result<Vec<f64>> {
    Ok(eigen_symmetric(m)?.0)
}

/// Dominant-eigenvalue magnitude.
///
/// Two-step power iteration: the estimate is `sqrt(||M(Mx)|| / ||x||)`, so a
/// dominant `+r/-r` eigenvalue pair (common for Jacobi-style smoothing
/// matrices on bipartite-like graphs) still converges. Falls back to a full
/// symmetric eigensolve for symmetric input up to n = 500 when the ratio
/// stalls.
pub fn spectral_radius(m: &Matrix, tol: f64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("spectral radius needs a square matrix".into()));
    }
    let n = m.rows();
    // deterministic start with all eigencomponents generically nonzero
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i as f64 + 1.0).sin()).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev_ratio = f64::NAN;
    let mut stable = 0usize;
    for it in 0..20_000 {
        let y = m.matvec(&m.matvec(&x));
        let ny = norm2(&y);
        if ny < 1e-300 {
            return Ok(0.0); // nilpotent direction: radius 0 for our uses
        }
        let ratio = ny.sqrt();
        if (ratio - prev_ratio).abs() <= tol * ratio.max(1e-30) {
            stable += 1;
            if stable >= 4 {
                return Ok(ratio);
            }
        } else {
            stable = 0;
        }
        prev_ratio = ratio;
        x = y;
        x.iter_mut().for_each(|v| *v /= ny);
        // stall check: switch to the dense path for symmetric input
        if it == 5_000 && m.is_symmetric(1e-9) && n <= 500 {
            let eig = eigenvalues_symmetric(m)?;
            return Ok(eig.iter().fold(0.0f64, |acc, &e| acc.max(e.abs())));
        }
    }
    if m.is_symmetric(1e-9) && n <= 500 {
        let eig = eigenvalues_symmetric(m)?;
        return Ok(eig.iter().fold(0.0f64, |acc, &e| acc.max(e.abs())));
    }
    Err(Error::NumericFailure("power iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Pcg32;

    #[test]
    fn solve_identity() {
        let m = Matrix::identity(4);
        let rhs = vec![1.0, -2.0, 3.0, 0.5];
        let x = solve_spd(&m, &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn solve_2x2_hand() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = solve_spd(&m, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_random_spd_residual() {
        let mut rng = Pcg32::seeded(13);
        let n = 50;
        // SPD via B^T B + n I
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b.set(i, j, rng.uniform(-1.0, 1.0));
            }
        }
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b.get(k, i) * b.get(k, j);
                }
                m.set(i, j, s + if i == j { n as f64 } else { 0.0 });
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.uniform(-5.0, 5.0)).collect();
        let x = solve_spd(&m, &rhs).unwrap();
        let res: Vec<f64> = m
            .matvec(&x)
            .iter()
            .zip(&rhs)
            .map(|(a, b)| a - b)
            .collect();
        assert!(norm2(&res) <= 1e-10 * norm2(&rhs));
    }

    #[test]
    fn non_spd_rejected() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(solve_spd(&m, &[1.0, 1.0]), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn inverse_diagonal_matches_solves() {
        let mut rng = Pcg32::seeded(3);
        let n = 20;
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                let v = rng.uniform(-0.5, 0.5) / n as f64;
                m.set(i, j, v);
                m.set(j, i, v);
            }
            m.add_at(i, i, 1.0 + rng.next_f64());
        }
        let diag = spd_inverse_diagonal(&m).unwrap();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let col = solve_spd(&m, &e).unwrap();
            assert!((diag[i] - col[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvalues_of_diag() {
        let m = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]);
        let eig = eigenvalues_symmetric(&m).unwrap();
        assert!((eig[0] - 0.25).abs() < 1e-12);
        assert!((eig[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_basics() {
        assert!((spectral_radius(&Matrix::identity(5), 1e-10).unwrap() - 1.0).abs() < 1e-8);
        let m = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]);
        assert!((spectral_radius(&m, 1e-10).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn spectral_radius_plus_minus_pair() {
        // eigenvalues +-1/sqrt(2): norm-ratio iteration must still settle
        let m = Matrix::from_rows(&[vec![0.0, 0.5], vec![1.0, 0.0]]);
        let r = spectral_radius(&m, 1e-10).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-6, "r = {r}");
    }

    #[test]
    fn eigen_vs_known_path_laplacian() {
        // eigenvalues of the P3 Laplacian are 0, 1, 3
        let m = Matrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ]);
        let eig = eigenvalues_symmetric(&m).unwrap();
        for (got, want) in eig.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }
}
