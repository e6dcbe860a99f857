//! Sparse direct solve with a residual check.

use faer::linalg::solvers::Solve;
use faer::sparse::SparseColMat;
use faer::Mat;

use crate::sbm::AssembledSystem;
use crate::{Error, Result};

/// Relative residual accepted after the solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    /// `||A x - b|| / ||b||`
    pub relative_residual: f64,
    pub refinement_steps: usize,
}

/// `y = A x`
pub fn matvec(a: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let a = a.as_ref();
    let mut y = vec![0.0; a.nrows()];
    let cp = a.symbolic().col_ptr();
    let ri = a.symbolic().row_idx();
    let v = a.val();
    for j in 0..a.ncols() {
        let xj = x[j];
        for k in cp[j]..cp[j + 1] {
            y[ri[k]] += v[k] * xj;
        }
    }
    y
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Solves a general (nonsymmetric) sparse system by LU with partial pivoting,
/// followed by up to three steps of iterative refinement.
pub fn solve_sparse(a: &SparseColMat<usize, f64>, b: &[f64]) -> Result<Solution> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Solve(format!(
            "matrix is {}x{} but the right-hand side has {n} entries",
            a.nrows(),
            a.ncols()
        )));
    }
    let bnorm = norm2(b);
    if n == 0 || bnorm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            relative_residual: 0.0,
            refinement_steps: 0,
        });
    }
    // the factorisation runs on one thread so results do not depend on the pool size
    static SEQUENTIAL_FAER: std::sync::Once = std::sync::Once::new();
    SEQUENTIAL_FAER.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Solve(format!("LU factorisation failed ({e:?}); the system is singular")))?;
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    let mut x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = matvec(a, x);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    };
    let mut r = residual(&x);
    let mut rel = norm2(&r) / bnorm;
    let mut steps = 0;
    while rel > 1e-14 && steps < 3 && rel.is_finite() {
        let mut c = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
        lu.solve_in_place(c.as_mut());
        let cand: Vec<f64> = x.iter().enumerate().map(|(i, xi)| xi + c[(i, 0)]).collect();
        let rc = residual(&cand);
        let relc = norm2(&rc) / bnorm;
        steps += 1;
        if !(relc < rel) {
            break;
        }
        x = cand;
        r = rc;
        rel = relc;
    }
    if !(rel <= RESIDUAL_TOL) {
        return Err(Error::Solve(format!(
            "relative residual {rel:.3e} exceeds {RESIDUAL_TOL:e}; the matrix is numerically singular \
             (disconnected surrogate domain or missing boundary condition?)"
        )));
    }
    Ok(Solution {
        x,
        relative_residual: rel,
        refinement_steps: steps,
    })
}

/// Solves an assembled system.
pub fn solve(system: &AssembledSystem) -> Result<Solution> {
    solve_sparse(&system.matrix, &system.rhs)
}
