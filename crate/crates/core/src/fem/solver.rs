//! Linear solvers for the reduced (interior) stiffness system.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::sparse::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    /// One shared sparse Cholesky factor for several right-hand sides; Jacobi-PCG for a
    /// single one, falling back to Cholesky when the iteration budget runs out.
    Auto,
    Cg,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Relative residual target ‖f − Kx‖ / ‖f‖.
    pub rtol: f64,
    pub cg_max_iter: usize,
    /// Iterative-refinement passes after a direct solve.
    pub refine_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::Auto,
            rtol: 1e-10,
            cg_max_iter: 1500,
            refine_steps: 4,
        }
    }
}

/// Jacobi-preconditioned conjugate gradients. Returns (x, iterations, relative residual).
pub fn pcg(a: &CsrMatrix, f: &[f64], rtol: f64, max_iter: usize) -> (Vec<f64>, usize, f64) {
    let n = a.n;
    let fnorm = norm2(f);
    let mut x = vec![0.0; n];
    if fnorm == 0.0 {
        return (x, 0, 0.0);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = f.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return (x, it, rel);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / fnorm;
        if rel <= rtol {
            // Confirm with the true residual to avoid recurrence drift.
            let true_rel = residual(a, &x, f) / fnorm;
            if true_rel <= rtol {
                return (x, it, true_rel);
            }
            r = f.iter().zip(a.apply(&x)).map(|(f, ax)| f - ax).collect();
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let true_rel = residual(a, &x, f) / fnorm;
    (x, max_iter, true_rel)
}

pub fn residual(a: &CsrMatrix, x: &[f64], f: &[f64]) -> f64 {
    let ax = a.apply(x);
    let r: Vec<f64> = f.iter().zip(&ax).map(|(f, ax)| f - ax).collect();
    norm2(&r)
}

/// Sparse Cholesky factor of an SPD matrix.
pub struct Cholesky {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cholesky(n = {})", self.n)
    }
}

/// max/min diagonal ratio, a cheap lower bound for the condition number.
pub fn diagonal_condition_estimate(a: &CsrMatrix) -> f64 {
    let d = a.diagonal();
    let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

impl Cholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let mut trip = Vec::with_capacity(a.nnz() / 2 + a.n);
        for r in 0..a.n {
            for (c, v) in a.row(r) {
                if c <= r {
                    trip.push(Triplet::new(r, c, v));
                }
            }
        }
        let singular = || Error::Singular {
            condition_estimate: diagonal_condition_estimate(a),
        };
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &trip)
            .map_err(|_| singular())?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|_| singular())?;
        Ok(Self { llt, n: a.n })
    }

    /// Solves for every column of `rhs` (column-major, each of length n).
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if rhs.is_empty() {
            return Vec::new();
        }
        let mut b = Mat::<f64>::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        self.llt.solve_in_place(b.as_mut());
        (0..rhs.len())
            .map(|j| (0..self.n).map(|i| b[(i, j)]).collect())
            .collect()
    }
}

/// Direct solve with iterative refinement. Returns (solutions, refinement passes, worst relative residual).
pub fn direct_solve(
    a: &CsrMatrix,
    chol: &Cholesky,
    rhs: &[Vec<f64>],
    cfg: &SolverConfig,
) -> (Vec<Vec<f64>>, usize, f64) {
    let mut xs = chol.solve_many(rhs);
    let norms: Vec<f64> = rhs.iter().map(|f| norm2(f)).collect();
    let mut passes = 0;
    loop {
        let res: Vec<Vec<f64>> = rhs
            .iter()
            .zip(&xs)
            .map(|(f, x)| {
                let ax = a.apply(x);
                f.iter().zip(ax).map(|(f, ax)| f - ax).collect()
            })
            .collect();
        let worst = res
            .iter()
            .zip(&norms)
            .map(|(r, n)| if *n > 0.0 { norm2(r) / n } else { 0.0 })
            .fold(0.0f64, f64::max);
        if worst <= cfg.rtol || passes >= cfg.refine_steps {
            return (xs, passes, worst);
        }
        let corr = chol.solve_many(&res);
        for (x, c) in xs.iter_mut().zip(corr) {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi += ci;
            }
        }
        passes += 1;
    }
}
