//! Plane-like minimizers: tilted fields u = ω·x + p with periodic correction p,
//! descent in the tilted parametrization, Birkhoff sign verification,
//! flow equivariance under integer translations, oscillation diagnostics, and
//! rational-frequency sweeps.
//!
//! The periodic part is evolved with an explicit tilt forcing
//! g_ω = A(ω·x) = −div(a ω) assembled with the same stencil samples as the
//! operator, so Au = Ap + g_ω holds node-for-node and every stored object
//! stays periodic on the N-torus.

use std::fmt;
use std::sync::Arc;

use ndarray::Array1;

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::flow::{self, StepDiagnostics};
use crate::grid::{BoundaryCondition, Grid};
use crate::operator::{Discretization, EllipticOperator};
use crate::potential::{FlowParams, Potential};
use crate::scheme::Etd1;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A rational frequency ω = q/N ∈ ℚ^d, stored gcd-reduced; N doubles as the
/// torus period of the minimizer's grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotationVector {
    q: [i64; 2],
    den: i64,
    d: usize,
}

impl RotationVector {
    pub fn new(components: &[i64], den: i64) -> Result<Self> {
        let d = components.len();
        if d == 0 || d > 2 {
            return Err(Error::InvalidParam(format!(
                "rotation vector needs 1 or 2 components, got {d}"
            )));
        }
        if den < 1 {
            return Err(Error::InvalidParam(format!("denominator must be >= 1, got {den}")));
        }
        let mut q = [0i64; 2];
        q[..d].copy_from_slice(components);
        let mut g = den;
        for &c in &components[..d] {
            g = gcd(g, c);
        }
        if g > 1 {
            for c in q.iter_mut() {
                *c /= g;
            }
            return Ok(RotationVector { q, den: den / g, d });
        }
        Ok(RotationVector { q, den, d })
    }

    /// Parse `q1,...,qd/N` (a missing `/N` means denominator 1).
    pub fn parse(text: &str) -> Result<Self> {
        let (nums, den) = match text.split_once('/') {
            Some((n, dtext)) => {
                let den: i64 = dtext
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad denominator in '{text}'")))?;
                (n, den)
            }
            None => (text, 1),
        };
        let comps: Vec<i64> = nums
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad rotation component in '{text}'")))
            })
            .collect::<Result<_>>()?;
        RotationVector::new(&comps, den)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn components(&self) -> &[i64] {
        &self.q[..self.d]
    }

    pub fn omega(&self, axis: usize) -> f64 {
        self.q[axis] as f64 / self.den as f64
    }

    /// ω · x
    pub fn dot(&self, x: &[f64]) -> f64 {
        (0..self.d).map(|j| self.omega(j) * x[j]).sum()
    }

    /// Numerator of ω·k − l over the common denominator: q·k − lN, exact.
    pub fn shift_numerator(&self, k: &[i64; 2], l: i64) -> i64 {
        let qk: i64 = (0..self.d).map(|j| self.q[j] * k[j]).sum();
        qk - l * self.den
    }

    pub fn l1_norm(&self) -> f64 {
        (0..self.d).map(|j| self.omega(j).abs()).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        (0..self.d).map(|j| self.omega(j).powi(2)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.q[..self.d].iter().all(|&c| c == 0)
    }
}

impl fmt::Display for RotationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums: Vec<String> = self.components().iter().map(|c| c.to_string()).collect();
        write!(f, "{}/{}", nums.join(","), self.den)
    }
}

/// u(x) = ω·x + p(x) with p periodic on the N-torus; only p is stored.
#[derive(Debug, Clone)]
pub struct TiltedField {
    pub omega: RotationVector,
    pub p: Field,
}

impl TiltedField {
    pub fn new(omega: RotationVector, p: Field) -> Result<Self> {
        let grid = p.grid();
        if grid.bc() != BoundaryCondition::Periodic {
            return Err(Error::InvalidParam("tilted fields need a periodic grid".into()));
        }
        if grid.d() != omega.d() {
            return Err(Error::GridMismatch(format!(
                "rotation vector is {}-dimensional but the grid is {}-dimensional",
                omega.d(),
                grid.d()
            )));
        }
        if grid.period() as i64 != omega.den() {
            return Err(Error::GridMismatch(format!(
                "rotation denominator {} must equal the grid period {}",
                omega.den(),
                grid.period()
            )));
        }
        Ok(TiltedField { omega, p })
    }

    pub fn from_zero(omega: RotationVector, grid: Grid) -> Result<Self> {
        TiltedField::new(omega, Field::zeros(grid))
    }

    /// Values of u = ω·x + p at the grid nodes (not periodic unless ω = 0).
    pub fn u_values(&self) -> Array1<f64> {
        let grid = self.p.grid();
        let mut out = self.p.values().clone();
        for i in 0..grid.num_nodes() {
            let pos = grid.position(i);
            out[i] += self.omega.dot(&pos[..grid.d()]);
        }
        out
    }

    pub fn mean_u(&self) -> f64 {
        let grid = self.p.grid();
        let m = grid.num_nodes() as f64;
        let tilt_mean: f64 = self.u_values().iter().sum::<f64>() / m;
        tilt_mean
    }
}

/// g_ω = A(ω·x) evaluated with the operator's own stencil samples, so that
/// A(ω·x + p) = g_ω + Ap holds exactly on the grid. Zero for constant
/// coefficients. The finite-difference form requires α = 1 (the tilt is not in
/// the discrete span on which fractional powers act).
pub fn tilt_forcing(op: &EllipticOperator, omega: &RotationVector) -> Result<Field> {
    let grid = *op.grid();
    if grid.bc() != BoundaryCondition::Periodic {
        return Err(Error::Precondition("tilt forcing needs a periodic grid".into()));
    }
    if omega.d() != grid.d() {
        return Err(Error::GridMismatch("rotation vector dimension mismatch".into()));
    }
    match op.discretization() {
        // constant coefficients: div(aω) ≡ 0 for every α
        Discretization::FourierSymbol => Ok(Field::zeros(grid)),
        Discretization::FiniteDifference => {
            if op.coeffs().constant().is_some() {
                return Ok(Field::zeros(grid));
            }
            if (op.alpha() - 1.0).abs() > 1e-14 {
                return Err(Error::Precondition(
                    "tilted machinery with variable coefficients requires alpha = 1".into(),
                ));
            }
            let d = grid.d();
            let h = grid.spacing();
            let mut g = Array1::zeros(grid.num_nodes());
            for i in 0..grid.num_nodes() {
                let pos = grid.position(i);
                let mut acc = 0.0;
                for ax in 0..d {
                    let mut xm = pos;
                    let mut xp = pos;
                    xm[ax] -= 0.5 * h;
                    xp[ax] += 0.5 * h;
                    let flux =
                        op.coeffs().entry(&xp[..d], ax, ax) - op.coeffs().entry(&xm[..d], ax, ax);
                    acc -= omega.omega(ax) * flux / h;
                }
                if d == 2 {
                    // centered node samples of a¹², matching the mixed stencil
                    for (der_ax, omega_ax) in [(0usize, 1usize), (1, 0)] {
                        let mut xm = pos;
                        let mut xp = pos;
                        xm[der_ax] -= h;
                        xp[der_ax] += h;
                        let diff = op.coeffs().entry(&xp[..d], 0, 1)
                            - op.coeffs().entry(&xm[..d], 0, 1);
                        acc -= omega.omega(omega_ax) * diff / (2.0 * h);
                    }
                }
                g[i] = acc;
            }
            Ok(Field::from_raw(grid, g))
        }
    }
}

/// The potential seen by the periodic part: Ṽ(x, y) = V(x, ω·x + y) + g_ω(x)·y,
/// whose y-derivative Ṽ₂ = V₂(x, ω·x+y) + g_ω(x) turns the standard flow on p
/// into the tilted flow on u. Evaluators are grid-locked: x is snapped to the
/// nearest node when reading g_ω.
pub struct TiltedPotential {
    inner: Arc<dyn Potential>,
    omega: RotationVector,
    g: Field,
}

impl TiltedPotential {
    pub fn new(
        inner: Arc<dyn Potential>,
        omega: RotationVector,
        op: &EllipticOperator,
    ) -> Result<Self> {
        if omega.den() != op.grid().period() as i64 {
            return Err(Error::GridMismatch(format!(
                "rotation denominator {} must equal the grid period {}",
                omega.den(),
                op.grid().period()
            )));
        }
        let g = tilt_forcing(op, &omega)?;
        Ok(TiltedPotential { inner, omega, g })
    }

    fn g_at(&self, x: &[f64]) -> f64 {
        let grid = self.g.grid();
        let h = grid.spacing();
        let per = grid.points_per_axis() as i64;
        let mut c = [0usize; 2];
        for ax in 0..grid.d() {
            c[ax] = (x[ax] / h).round().rem_euclid(per as f64) as usize % per as usize;
        }
        self.g.values()[grid.flat(c)]
    }
}

impl Potential for TiltedPotential {
    fn name(&self) -> String {
        format!("tilted({}, omega={})", self.inner.name(), self.omega)
    }
    fn v(&self, x: &[f64], y: f64) -> f64 {
        self.inner.v(x, self.omega.dot(x) + y) + self.g_at(x) * y
    }
    fn v2(&self, x: &[f64], y: f64) -> f64 {
        self.inner.v2(x, self.omega.dot(x) + y) + self.g_at(x)
    }
    fn v22(&self, x: &[f64], y: f64) -> f64 {
        self.inner.v22(x, self.omega.dot(x) + y)
    }
    /// Ṽ₂ and Ṽ₂₂ inherit y-periodicity from V; Ṽ itself carries the linear
    /// tilt term, which nothing downstream samples across periods.
    fn periodic_in_y(&self) -> bool {
        self.inner.periodic_in_y()
    }
    fn smoothness(&self) -> u32 {
        self.inner.smoothness()
    }
}

/// ∂ₜp = −(γ+A)^{−β}(Ap + g_ω + V₂(x, ω·x+p)): the flow of the full field u
/// expressed on its periodic part.
pub fn tilted_rhs(
    tilted: &TiltedField,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &Arc<dyn Potential>,
) -> Result<Field> {
    let tp = TiltedPotential::new(potential.clone(), tilted.omega, op)?;
    let grad = flow::sobolev_gradient(&tilted.p, op, params, &tp)?;
    Ok(grad.scale(-1.0))
}

/// Outcome of `find_minimizer`: the landed tilted field plus the full descent
/// record.
#[derive(Debug, Clone)]
pub struct MinimizerRun {
    pub tilted: TiltedField,
    pub converged: bool,
    /// ‖Au + V₂(x,u)‖_∞ re-evaluated on the renormalized final state.
    pub residual: f64,
    pub elapsed: f64,
    pub diagnostics: Vec<StepDiagnostics>,
    /// (t, p) snapshots across all descent phases.
    pub snapshots: Vec<(f64, Field)>,
    /// Number of integer renormalization shifts applied.
    pub renormalizations: usize,
}

/// Descend from u₀ = ω·x (p ≡ 0) until the elliptic residual drops below
/// tol_residual or the time budget runs out. After each descent phase the
/// state is shifted by an integer so the mean of the periodic part lies in
/// [0, 1) up to a 1e-9 cushion; anchoring the tilt-free part (rather than the
/// raw mean of u, which grows like ω·N/2) keeps sup|p| bounded uniformly in
/// the period, and y-periodicity of V makes the shift residual-neutral.
pub fn find_minimizer(
    omega: RotationVector,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &Arc<dyn Potential>,
) -> Result<MinimizerRun> {
    params.validate()?;
    if !potential.periodic_in_y() {
        return Err(Error::Precondition(
            "plane-like minimizers need a potential 1-periodic in y".into(),
        ));
    }
    let tp = TiltedPotential::new(potential.clone(), omega, op)?;
    let mut tilted = TiltedField::from_zero(omega, *op.grid())?;
    let mut elapsed = 0.0;
    let mut diagnostics = Vec::new();
    let mut snapshots = Vec::new();
    let mut renormalizations = 0;
    let mut converged = false;
    let phase_len = (50.0 * params.dt).max(1.0);
    while elapsed < params.t_end && !converged {
        let mut phase_params = *params;
        phase_params.t_end = phase_len.min(params.t_end - elapsed);
        let traj = flow::evolve(&tilted.p, &Etd1, op, &phase_params, &tp)?;
        traj.ensure_clean()?;
        for d in traj.diagnostics.iter().skip(if diagnostics.is_empty() { 0 } else { 1 }) {
            let mut d = *d;
            d.t += elapsed;
            diagnostics.push(d);
        }
        for (t, s) in traj.times.iter().zip(traj.states.iter()).skip(1) {
            snapshots.push((elapsed + t, s.clone()));
        }
        elapsed += traj.final_time();
        tilted.p = traj.final_state().clone();
        converged = traj.converged;
        // the 1e-9 cushion keeps a symmetric descent whose mean sits at
        // ±machine-epsilon from triggering a spurious integer shift
        let k = -(tilted.p.mean() + 1e-9).floor();
        if k != 0.0 {
            tilted.p = tilted.p.add_scalar(k)?;
            renormalizations += 1;
        }
    }
    let residual = flow::residual(&tilted.p, op, &tp)?;
    converged = converged && residual < params.tol_residual;
    Ok(MinimizerRun {
        tilted,
        converged,
        residual,
        elapsed,
        diagnostics,
        snapshots,
        renormalizations,
    })
}

/// Result of the Birkhoff sign test over a finite (k, l) window.
#[derive(Debug, Clone)]
pub struct BirkhoffReport {
    pub ok: bool,
    pub worst_pair: ([i64; 2], i64),
    pub worst_violation: f64,
}

/// For every k ∈ {−W..W}^d and l in the induced range, classify the sign of
/// ω·k − l exactly in integer arithmetic and check that
/// s(x) = u(x+k) − u(x) − l keeps that sign on every node (|s| ≤ tol counts
/// as a uniform sign when ω·k − l = 0).
pub fn birkhoff_check(tilted: &TiltedField, window: i64, tol: f64) -> Result<BirkhoffReport> {
    if window < 1 {
        return Err(Error::InvalidParam(format!("window must be >= 1, got {window}")));
    }
    let grid = tilted.p.grid();
    let d = grid.d();
    let m = grid.num_nodes();
    let l_max = (window as f64 * tilted.omega.l1_norm()).ceil() as i64 + 1;
    let mut worst_violation = 0.0f64;
    let mut worst_pair = ([0i64; 2], 0i64);
    let mut ks = Vec::new();
    if d == 1 {
        for k1 in -window..=window {
            ks.push([k1, 0]);
        }
    } else {
        for k1 in -window..=window {
            for k2 in -window..=window {
                ks.push([k1, k2]);
            }
        }
    }
    for k in ks {
        // p(x + k) via the periodic index shift
        let mut shifted = vec![0.0; m];
        for i in 0..m {
            shifted[i] = tilted.p.values()[grid.shift_node(i, k)?];
        }
        let mut diff_min = f64::INFINITY;
        let mut diff_max = f64::NEG_INFINITY;
        for i in 0..m {
            let v = shifted[i] - tilted.p.values()[i];
            diff_min = diff_min.min(v);
            diff_max = diff_max.max(v);
        }
        for l in -l_max..=l_max {
            let num = tilted.omega.shift_numerator(&k, l);
            let base = num as f64 / tilted.omega.den() as f64;
            let s_min = base + diff_min;
            let s_max = base + diff_max;
            let violation = match num.cmp(&0) {
                std::cmp::Ordering::Greater => (-s_min).max(0.0),
                std::cmp::Ordering::Less => s_max.max(0.0),
                std::cmp::Ordering::Equal => (-s_min).max(0.0).min(s_max.max(0.0)),
            };
            if violation > worst_violation {
                worst_violation = violation;
                worst_pair = (k, l);
            }
        }
    }
    Ok(BirkhoffReport { ok: worst_violation <= tol, worst_pair, worst_violation })
}

/// Sup-norm commutator defects of the flow with the two symmetries: adding an
/// integer l and translating by an integer vector k.
#[derive(Debug, Clone, Copy)]
pub struct EquivarianceReport {
    /// ‖Φₜ(u₀+l) − (Φₜu₀ + l)‖_∞
    pub vertical: f64,
    /// ‖Φₜ(u₀(·+k)) − (Φₜu₀)(·+k)‖_∞
    pub horizontal: f64,
}

/// Evolve u₀, u₀+l, and u₀(·+k) to time t with the default scheme and report
/// both commutator defects. Runs always reach t (no residual early-out) so the
/// three trajectories stay step-aligned.
pub fn check_equivariance(
    u0: &Field,
    op: &EllipticOperator,
    params: &FlowParams,
    potential: &dyn Potential,
    t: f64,
    k: [i64; 2],
    l: i64,
) -> Result<EquivarianceReport> {
    if u0.grid().bc() != BoundaryCondition::Periodic {
        return Err(Error::Precondition("equivariance checks need a periodic grid".into()));
    }
    let mut p = *params;
    p.t_end = t;
    p.tol_residual = f64::MIN_POSITIVE;
    let base = flow::evolve(u0, &Etd1, op, &p, potential)?;
    base.ensure_clean()?;
    let vert_in = u0.add_scalar(l as f64)?;
    let vert = flow::evolve(&vert_in, &Etd1, op, &p, potential)?;
    vert.ensure_clean()?;
    let vertical = vert
        .final_state()
        .sub(&base.final_state().add_scalar(l as f64)?)
        .max_norm();
    let horiz_in = u0.shift(k)?;
    let horiz = flow::evolve(&horiz_in, &Etd1, op, &p, potential)?;
    horiz.ensure_clean()?;
    let horizontal = horiz.final_state().sub(&base.final_state().shift(k)?).max_norm();
    Ok(EquivarianceReport { vertical, horizontal })
}

/// max − min of u = ω·x + p over the grid nodes inside the closed cube of the
/// given side around `center`; the cube must sit inside the fundamental domain
/// [0, N]^d and must contain at least one node.
pub fn oscillation(tilted: &TiltedField, center: &[f64], side: f64) -> Result<f64> {
    let grid = tilted.p.grid();
    let d = grid.d();
    if center.len() != d {
        return Err(Error::InvalidParam("cube center dimension mismatch".into()));
    }
    if !(side > 0.0) {
        return Err(Error::InvalidParam(format!("cube side must be > 0, got {side}")));
    }
    let nn = grid.period() as f64;
    for (ax, &c) in center.iter().enumerate() {
        if c - side / 2.0 < -1e-12 || c + side / 2.0 > nn + 1e-12 {
            return Err(Error::InvalidParam(format!(
                "cube along axis {ax} leaves the fundamental domain [0, {nn}]"
            )));
        }
    }
    let u = tilted.u_values();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut hit = false;
    for i in 0..grid.num_nodes() {
        let pos = grid.position(i);
        let inside = (0..d).all(|ax| {
            let z = pos[ax] - center[ax];
            z.abs() <= side / 2.0 + 1e-12
        });
        if inside {
            hit = true;
            lo = lo.min(u[i]);
            hi = hi.max(u[i]);
        }
    }
    if !hit {
        return Err(Error::InvalidParam("cube contains no grid nodes".into()));
    }
    Ok(hi - lo)
}

/// Energy of u = ω·x + p per unit cell: the periodic-part energy (quadratic +
/// potential + tilt coupling) plus the tilt self-energy ½∫ωᵀa(x)ω by nodal
/// quadrature, divided by the N^d unit cells of the fundamental domain.
pub fn energy_per_cell(
    tilted: &TiltedField,
    op: &EllipticOperator,
    potential: &Arc<dyn Potential>,
) -> Result<f64> {
    let tp = TiltedPotential::new(potential.clone(), tilted.omega, op)?;
    let periodic_part = flow::energy(&tilted.p, op, &tp)?;
    let grid = tilted.p.grid();
    let d = grid.d();
    let mut tilt_self = 0.0;
    for i in 0..grid.num_nodes() {
        let pos = grid.position(i);
        let a = op.coeffs().eval(&pos[..d]);
        let mut quad = 0.0;
        for r in 0..d {
            for c in 0..d {
                quad += tilted.omega.omega(r) * a[r][c] * tilted.omega.omega(c);
            }
        }
        tilt_self += 0.5 * quad;
    }
    tilt_self *= grid.cell_volume();
    let cells = (grid.period() as f64).powi(d as i32);
    Ok((periodic_part + tilt_self) / cells)
}

/// One sweep item; `error` is set (and the numeric fields zeroed) when the
/// item failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub omega: RotationVector,
    pub residual: f64,
    pub birkhoff_ok: bool,
    pub osc_q: f64,
    pub sup_p: f64,
    pub energy_per_cell: f64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// CSV rows `omega,N,residual,birkhoff_ok,osc_Q,sup_p,energy_per_cell`;
    /// failed items report `error=<message>` in the residual column position.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("omega,N,residual,birkhoff_ok,osc_Q,sup_p,energy_per_cell\n");
        for r in &self.rows {
            let omega_txt = r
                .omega
                .components()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";");
            match &r.error {
                Some(e) => out.push_str(&format!(
                    "{},{},error={},,,,\n",
                    omega_txt,
                    r.omega.den(),
                    e.replace([',', '\n'], " ")
                )),
                None => out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    omega_txt,
                    r.omega.den(),
                    r.residual,
                    r.birkhoff_ok,
                    r.osc_q,
                    r.sup_p,
                    r.energy_per_cell
                )),
            }
        }
        out
    }
}

/// Run `find_minimizer` for each frequency on its own N-periodic grid and
/// collect residual, Birkhoff status, oscillation over the unit cube, sup|p|,
/// and energy per cell. Item failures are recorded and the sweep continues.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    omegas: &[RotationVector],
    points_per_unit: usize,
    coeffs: &CoefficientField,
    discretization: Discretization,
    params: &FlowParams,
    potential: &Arc<dyn Potential>,
    birkhoff_window: i64,
    osc_side: f64,
) -> SweepReport {
    let mut rows = Vec::new();
    for &omega in omegas {
        let item = (|| -> Result<SweepRow> {
            let grid = Grid::new(
                omega.d(),
                omega.den() as usize,
                points_per_unit,
                BoundaryCondition::Periodic,
            )?;
            let op = EllipticOperator::new(grid, coeffs.clone(), 1.0, discretization)?;
            let run = find_minimizer(omega, &op, params, potential)?;
            let birkhoff = birkhoff_check(&run.tilted, birkhoff_window, 1e-8)?;
            let center = vec![osc_side / 2.0; omega.d()];
            let osc = oscillation(&run.tilted, &center, osc_side)?;
            Ok(SweepRow {
                omega,
                residual: run.residual,
                birkhoff_ok: birkhoff.ok,
                osc_q: osc,
                sup_p: run.tilted.p.max_norm(),
                energy_per_cell: energy_per_cell(&run.tilted, &op, potential)?,
                converged: run.converged,
                error: None,
            })
        })();
        rows.push(item.unwrap_or_else(|e| SweepRow {
            omega,
            residual: 0.0,
            birkhoff_ok: false,
            osc_q: 0.0,
            sup_p: 0.0,
            energy_per_cell: 0.0,
            converged: false,
            error: Some(e.to_string()),
        }));
    }
    SweepReport { rows }
}

/// Continued-fraction convergents of the inverse golden mean (√5−1)/2 =
/// [0; 1, 1, 1, …], starting from 1/2: 1/2, 2/3, 3/5, 5/8, ….
pub fn golden_convergents(levels: usize) -> Vec<RotationVector> {
    let mut out = Vec::with_capacity(levels);
    let (mut num, mut den) = (1i64, 2i64);
    for _ in 0..levels {
        out.push(RotationVector::new(&[num], den).expect("consecutive Fibonacci are coprime"));
        let next = num + den;
        num = den;
        den = next;
    }
    out
}
