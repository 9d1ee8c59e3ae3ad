//! Shared helpers for the integration suites: a damped-Newton oracle for
//! critical points of the tilted algebraic system, operator/parameter
//! builders, and small numeric utilities.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use sgflow::coeffs::CoefficientField;
use sgflow::field::Field;
use sgflow::grid::{BoundaryCondition, Grid};
use sgflow::mather::{RotationVector, TiltedPotential};
use sgflow::operator::{Discretization, EllipticOperator};
use sgflow::potential::{FlowParams, Potential};

/// Render any error into the `Result<String, String>` plumbing of the suites.
pub fn es(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn fd_identity_op(d: usize, period: usize, n: usize) -> EllipticOperator {
    let grid = Grid::new(d, period, n, BoundaryCondition::Periodic).expect("grid");
    EllipticOperator::new(
        grid,
        CoefficientField::identity(),
        1.0,
        Discretization::FiniteDifference,
    )
    .expect("operator")
}

pub fn base_params(gamma: f64) -> FlowParams {
    FlowParams {
        gamma,
        beta: 0.5,
        dt: 1e-2,
        t_end: 5.0,
        tol_residual: 1e-12,
        max_picard: 8,
    }
}

/// Least-squares slope of y against 0, 1, 2, … — the growth-trend fit.
pub fn fit_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xbar = (n - 1.0) / 2.0;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - xbar;
        num += dx * (y - ybar);
        den += dx * dx;
    }
    num / den
}

/// Solve A p + g_ω + V₂(x, ω·x + p) = 0 by Tikhonov-damped Newton with
/// backtracking, starting from `start`. The assembled FD matrix is used
/// directly (no spectral transforms), so this is an independent oracle for the
/// descent flow. The damping floor 1e-8 keeps the near-null translation mode
/// of the Hessian (the Peierls–Nabarro-flat direction of the discrete
/// minimizer family) from amplifying roundoff-level gradient components into
/// O(1e-4) drifts along the family; with the floor the drift stays ≤ 1e-6.
pub fn newton_critical_point(
    start: &Field,
    op: &EllipticOperator,
    omega: RotationVector,
    potential: &Arc<dyn Potential>,
    tol: f64,
    max_iter: usize,
) -> Result<Field, String> {
    let tp = TiltedPotential::new(potential.clone(), omega, op).map_err(es)?;
    let grid = *op.grid();
    let d = grid.d();
    let m = grid.num_nodes();
    let a = op
        .fd_matrix()
        .ok_or_else(|| "Newton oracle needs the FD matrix path".to_string())?;
    let a_na = DMatrix::from_fn(m, m, |r, c| a[[r, c]]);
    let positions: Vec<[f64; 2]> = (0..m).map(|i| grid.position(i)).collect();
    let g_vec = |p: &DVector<f64>| -> DVector<f64> {
        let mut g = &a_na * p;
        for i in 0..m {
            g[i] += tp.v2(&positions[i][..d], p[i]);
        }
        g
    };
    let mut p = DVector::from_fn(m, |i, _| start.values()[i]);
    let mut g = g_vec(&p);
    let mut gnorm = g.amax();
    for _ in 0..max_iter {
        if gnorm <= tol {
            let vals = ndarray::Array1::from_iter(p.iter().copied());
            return Field::new(grid, vals).map_err(es);
        }
        let mut j = a_na.clone();
        for i in 0..m {
            j[(i, i)] += tp.v22(&positions[i][..d], p[i]);
        }
        let rho = (1e-2 * gnorm).max(1e-8);
        for i in 0..m {
            j[(i, i)] += rho;
        }
        let delta = j
            .lu()
            .solve(&(-&g))
            .ok_or_else(|| "Newton linear solve failed".to_string())?;
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &p + s * &delta;
            let gt = g_vec(&trial);
            let gt_norm = gt.amax();
            if gt_norm < gnorm {
                p = trial;
                g = gt;
                gnorm = gt_norm;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(format!("Newton line search stalled at |G| = {gnorm:.3e}"));
        }
    }
    Err(format!("Newton did not reach |G| <= {tol:.1e} (stopped at {gnorm:.3e})"))
}
