//! The descent flow Φₜ and its verification harness: trajectories with
//! per-step diagnostics, the energy functional, the elliptic residual, the
//! Sobolev gradient identity, and the comparison-principle checker.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::operator::EllipticOperator;
use crate::potential::{sup_v22, FlowParams, Potential};
use crate::scheme::TimeStepper;

/// Per-step record along a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub t: f64,
    pub energy: f64,
    pub residual: f64,
    pub max_norm: f64,
    pub picard_iters: usize,
}

/// The recorded outcome of `evolve`: snapshot states, diagnostics at every
/// step, and the termination condition.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Snapshot times, strictly increasing; first = 0 and last = final time.
    pub times: Vec<f64>,
    /// States at the snapshot times.
    pub states: Vec<Field>,
    /// One record per step boundary, including t = 0.
    pub diagnostics: Vec<StepDiagnostics>,
    /// True when ‖Au + V₂‖_∞ dropped below tol_residual before t_end.
    pub converged: bool,
    /// Flagged (not fatal) energy increases: (t, S_after − S_before).
    pub energy_violations: Vec<(f64, f64)>,
    /// Set when the state went non-finite; states/diagnostics keep the last
    /// good step so callers can dump it.
    pub nan_at: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &Field {
        self.states.last().expect("trajectory always stores at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory always stores at least the initial time")
    }

    /// Errors out if the run hit a non-finite state.
    pub fn ensure_clean(&self) -> Result<()> {
        match self.nan_at {
            Some(t) => Err(Error::NanState { t }),
            None => Ok(()),
        }
    }

    /// CSV rows `t,energy,residual,max_norm`, one per recorded step.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,energy,residual,max_norm\n");
        for d in &self.diagnostics {
            out.push_str(&format!("{},{},{},{}\n", d.t, d.energy, d.residual, d.max_norm));
        }
        out
    }
}

/// S(u) = ∫ ½ a∇u·∇u + V(x, u) dx, with the quadratic part evaluated as
/// ½⟨u, Au⟩_{L²} through the operator (for the divergence-form stencil this
/// is exactly the flux-form quadrature, by symmetry of the assembly) and the
/// potential term as the grid sum h^d Σ V.
pub fn energy(u: &Field, op: &EllipticOperator, potential: &dyn Potential) -> Result<f64> {
    let au = op.apply(u)?;
    let quadratic = 0.5 * u.inner_l2(&au)?;
    let grid = u.grid();
    let d = grid.d();
    let mut pot = 0.0;
    for i in 0..grid.num_nodes() {
        let p = grid.position(i);
        pot += potential.v(&p[..d], u.values()[i]);
    }
    Ok(quadratic + pot * grid.cell_volume())
}

/// ‖Au + V₂(x, u)‖_∞: the sup-norm defect of the semilinear elliptic equation.
pub fn residual(u: &Field, op: &EllipticOperator, potential: &dyn Potential) -> Result<f64> {
    let au = op.apply(u)?;
    let grid = u.grid();
    let d = grid.d();
    let mut worst = 0.0f64;
    for i in 0..grid.num_nodes() {
        let p = grid.position(i);
        let val = au.values()[i] + potential.v2(&p[..d], u.values()[i]);
        worst = worst.max(val.abs());
    }
    Ok(worst)
}

/// The H^β gradient ∇_β S(u) = (γ+A)^{1−β}u − (γ+A)^{−β}(γu − V₂(x,u)),
/// i.e. −(Lu + X(u)); spectrally identical to (γ+A)^{−β}(Au + V₂).
pub fn sobolev_gradient(
    u: &Field,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &dyn Potential,
) -> Result<Field> {
    params.validate()?;
    let lin = op.frac_power_apply(u, params.gamma, 1.0 - params.beta)?;
    let x = crate::potential::x_apply(op, params, u, potential)?;
    Ok(lin.sub(&x))
}

/// Evolve u0 under the flow until t_end or until the residual drops below
/// tol_residual. Diagnostics are recorded at every step; states are stored at
/// roughly 20 evenly spaced snapshots plus first and last. A non-finite state
/// aborts the run and is reported via `nan_at` with the last good state kept.
pub fn evolve(
    u0: &Field,
    scheme: &dyn TimeStepper,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &dyn Potential,
) -> Result<Trajectory> {
    params.validate()?;
    if !u0.values().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { index: 0, context: "initial state".into() });
    }
    // whole steps always use exactly params.dt (the remainder step exists
    // only when t_end is not a multiple of dt), so a run split at a multiple
    // of dt reproduces the unsplit run bit-for-bit
    let ratio = (params.t_end / params.dt).max(0.0);
    let near_multiple = (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0);
    let n_steps = if near_multiple { ratio.round() as usize } else { ratio.ceil() as usize };
    let snap_every = (n_steps / 19).max(1);
    let diag = |t: f64, u: &Field, iters: usize| -> Result<StepDiagnostics> {
        Ok(StepDiagnostics {
            t,
            energy: energy(u, op, potential)?,
            residual: residual(u, op, potential)?,
            max_norm: u.max_norm(),
            picard_iters: iters,
        })
    };
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        diagnostics: vec![diag(0.0, u0, 0)?],
        converged: false,
        energy_violations: Vec::new(),
        nan_at: None,
    };
    let mut u = u0.clone();
    let mut t = 0.0;
    if traj.diagnostics[0].residual < params.tol_residual {
        traj.converged = true;
        return Ok(traj);
    }
    for k in 0..n_steps {
        let dt = if k + 1 == n_steps && !near_multiple {
            (params.t_end - k as f64 * params.dt).clamp(0.0, params.dt)
        } else {
            params.dt
        };
        if dt == 0.0 {
            break;
        }
        let (next, iters) = scheme.step(&u, dt, op, params, potential)?;
        let t_next = if k + 1 == n_steps { params.t_end } else { t + dt };
        if !next.values().iter().all(|v| v.is_finite()) {
            traj.nan_at = Some(t_next);
            return Ok(traj);
        }
        let prev_energy = traj.diagnostics.last().unwrap().energy;
        let d = diag(t_next, &next, iters)?;
        if d.energy > prev_energy + 1e-8 * (1.0 + prev_energy.abs()) {
            traj.energy_violations.push((t_next, d.energy - prev_energy));
        }
        let done = d.residual < params.tol_residual || k + 1 == n_steps;
        traj.diagnostics.push(d);
        u = next;
        t = t_next;
        if (k + 1) % snap_every == 0 || done {
            traj.times.push(t);
            traj.states.push(u.clone());
        }
        if d.residual < params.tol_residual {
            traj.converged = true;
            break;
        }
    }
    Ok(traj)
}

/// Outcome of evolving an ordered pair with the same scheme and checking the
/// pointwise gap u − v after every step.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// min over recorded times of min over nodes of (u − v).
    pub min_gap: f64,
    /// First (t, node) where the gap dropped below the pass threshold.
    pub first_violation: Option<(f64, usize)>,
    /// −1e-8·(1 + ‖u0−v0‖_∞): the pass line for min_gap.
    pub threshold: f64,
    pub passed: bool,
    /// (t, min_x(u−v)) per step, including t = 0.
    pub gaps: Vec<(f64, f64)>,
}

impl ComparisonReport {
    /// CSV rows `t,min_gap`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,min_gap\n");
        for (t, g) in &self.gaps {
            out.push_str(&format!("{t},{g}\n"));
        }
        out
    }
}

/// Step u and v in lockstep and report the minimum pointwise gap over
/// t ∈ [0, horizon]. Preconditions: u0 ≥ v0 − 1e-12 elementwise and
/// γ > sup|V₂₂| (the hypothesis under which order preservation is claimed).
pub fn check_comparison(
    u0: &Field,
    v0: &Field,
    scheme: &dyn TimeStepper,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &dyn Potential,
    horizon: f64,
) -> Result<ComparisonReport> {
    params.validate()?;
    let initial_gap = u0.sub(v0);
    if initial_gap.min() < -1e-12 {
        return Err(Error::Precondition(format!(
            "u0 must dominate v0 elementwise; worst gap {:.3e}",
            initial_gap.min()
        )));
    }
    let v22 = sup_v22(potential, u0.grid().d(), 64, None)?;
    if params.gamma <= v22 {
        return Err(Error::Precondition(format!(
            "comparison requires gamma > sup|V22| = {v22:.6}, got gamma = {}",
            params.gamma
        )));
    }
    let threshold = -1e-8 * (1.0 + initial_gap.max_norm());
    let n_steps = (horizon / params.dt).ceil().max(0.0) as usize;
    let mut u = u0.clone();
    let mut v = v0.clone();
    let mut t = 0.0;
    let mut gaps = vec![(0.0, initial_gap.min())];
    let mut min_gap = initial_gap.min();
    let mut first_violation = None;
    for _ in 0..n_steps {
        let dt = params.dt.min(horizon - t).max(0.0);
        if dt == 0.0 {
            break;
        }
        u = scheme.step(&u, dt, op, params, potential)?.0;
        v = scheme.step(&v, dt, op, params, potential)?.0;
        t += dt;
        let gap = u.sub(&v);
        let (mut g, mut node) = (f64::INFINITY, 0);
        for (i, &val) in gap.values().iter().enumerate() {
            if val < g {
                g = val;
                node = i;
            }
        }
        gaps.push((t, g));
        if g < min_gap {
            min_gap = g;
        }
        if g < threshold && first_violation.is_none() {
            first_violation = Some((t, node));
        }
    }
    Ok(ComparisonReport {
        min_gap,
        first_violation,
        threshold,
        passed: min_gap >= threshold,
        gaps,
    })
}
