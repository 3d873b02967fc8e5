//! Ground state of the discrete single-particle Hamiltonian by shifted
//! inverse iteration. The matrix is tridiagonal (truncated grids) or
//! tridiagonal plus two corner entries (periodic grids).

use super::{
    apply_hamiltonian, hartree_potential, rayleigh, residual, Boundary, ContinuumModel, Grid1D, WaveFunctionSet,
};
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 10_000;

/// Solves `T x = rhs` for tridiagonal `T` with constant off-diagonal `off`
/// (Thomas algorithm, no pivoting; `T` is assumed diagonally dominant).
fn solve_tridiagonal(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for k in 1..n {
        let m = diag[k] - off * c[k - 1];
        c[k] = off / m;
        d[k] = (rhs[k] - off * d[k - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

/// Solves the cyclic system with `off` also in the two corners, by
/// Sherman-Morrison on the tridiagonal part.
fn solve_cyclic(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= off * off / gamma;
    let y = solve_tridiagonal(&b, off, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = solve_tridiagonal(&b, off, &u);
    let vy = y[0] + off / gamma * y[n - 1];
    let vz = z[0] + off / gamma * z[n - 1];
    let f = vy / (1.0 + vz);
    y.iter().zip(&z).map(|(yk, zk)| yk - f * zk).collect()
}

/// Lowest eigenpair of `-kinetic D^2 + diag(potential)` on `grid`.
///
/// The returned vector has unit norm and a positive maximum.
pub fn ground_state(grid: &Grid1D, kinetic: f64, potential: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = grid.points();
    let h2 = grid.h() * grid.h();
    // Gershgorin: every eigenvalue is >= min V, so this shift keeps H - sI
    // positive definite.
    let v_min = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = v_min - 1e-3 * v_min.abs().max(1.0);
    let diag: Vec<f64> = potential.iter().map(|v| 2.0 * kinetic / h2 + v - shift).collect();
    let off = -kinetic / h2;
    let solve = |rhs: &[f64]| match grid.boundary() {
        Boundary::Truncated => solve_tridiagonal(&diag, off, rhs),
        Boundary::Periodic => solve_cyclic(&diag, off, rhs),
    };

    let mut v = grid.normalized(&vec![1.0; n]).expect("non-empty grid");
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        v = grid.normalized(&solve(&v)).ok_or(Error::NoConvergence {
            what: "inverse iteration",
            iterations: 0,
            residual: f64::NAN,
        })?;
        let hv = apply_hamiltonian(grid, kinetic, potential, &v);
        let e = rayleigh(grid, &v, &hv);
        last = residual(grid, &v, &hv, e);
        if last <= RESIDUAL_TOL {
            let peak = v
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if peak < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok((e, v));
        }
    }
    Err(Error::NoConvergence {
        what: "inverse iteration",
        iterations: MAX_ITER,
        residual: last,
    })
}

/// Ground state of `H_i` with `V_i` built from the other functions in
/// `frozen`.
pub fn eigensolver_oracle(model: &ContinuumModel, i: usize, frozen: &WaveFunctionSet) -> Result<(f64, Vec<f64>)> {
    let v = hartree_potential(model, frozen, i);
    ground_state(model.grid(), model.kinetic_coefficient(i), &v)
}
