//! The nonlinearity V(x, y), its y-derivatives, γ selection, and the nonlinear
//! part X(u) = (γ+A)^{−β}(γu − V₂(x, u)) of the flow.
//!
//! Potentials are immutable evaluator bundles behind a trait object; concrete
//! kinds are registered by name in [`PotentialRegistry`] and selected from
//! config strings like `pendulum:0.05`. Expression-backed potentials are
//! validated at construction: x-periodicity to 1e-12 and finite-difference
//! consistency of the supplied derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, ScalarFn};
use crate::field::Field;
use crate::operator::EllipticOperator;

/// Evaluator bundle for V(x, y) with analytic first and second y-derivatives.
pub trait Potential {
    fn name(&self) -> String;
    fn v(&self, x: &[f64], y: f64) -> f64;
    /// ∂V/∂y
    fn v2(&self, x: &[f64], y: f64) -> f64;
    /// ∂²V/∂y²
    fn v22(&self, x: &[f64], y: f64) -> f64;
    /// Whether V(x, y+1) = V(x, y); required for rotation-number machinery
    /// and for sampling-based sup bounds.
    fn periodic_in_y(&self) -> bool;
    /// Declared smoothness class r (r ≥ 2 always holds for the built-ins).
    fn smoothness(&self) -> u32 {
        u32::MAX
    }
}

/// V ≡ 0: the linear-flow baseline.
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn name(&self) -> String {
        "zero".into()
    }
    fn v(&self, _x: &[f64], _y: f64) -> f64 {
        0.0
    }
    fn v2(&self, _x: &[f64], _y: f64) -> f64 {
        0.0
    }
    fn v22(&self, _x: &[f64], _y: f64) -> f64 {
        0.0
    }
    fn periodic_in_y(&self) -> bool {
        true
    }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Pendulum potential V = ε(1 − cos 2πy).
pub struct Pendulum {
    pub eps: f64,
}

impl Potential for Pendulum {
    fn name(&self) -> String {
        format!("pendulum:{}", self.eps)
    }
    fn v(&self, _x: &[f64], y: f64) -> f64 {
        self.eps * (1.0 - (TWO_PI * y).cos())
    }
    fn v2(&self, _x: &[f64], y: f64) -> f64 {
        self.eps * TWO_PI * (TWO_PI * y).sin()
    }
    fn v22(&self, _x: &[f64], y: f64) -> f64 {
        self.eps * TWO_PI * TWO_PI * (TWO_PI * y).cos()
    }
    fn periodic_in_y(&self) -> bool {
        true
    }
}

/// x-modulated pendulum V = ε cos(2πy) g(x) with 1-periodic g.
pub struct Modulated {
    eps: f64,
    g: ScalarFn,
    g_text: String,
}

impl Modulated {
    pub fn new(eps: f64, g_text: &str, d: usize) -> Result<Self> {
        let g = expr::compile(g_text, &x_vars(d))?;
        let m = Modulated { eps, g, g_text: g_text.to_string() };
        check_x_periodicity(&|x, _| (m.g)(x), d, &format!("modulation '{g_text}'"))?;
        Ok(m)
    }
}

impl Potential for Modulated {
    fn name(&self) -> String {
        format!("modulated:{},{}", self.eps, self.g_text)
    }
    fn v(&self, x: &[f64], y: f64) -> f64 {
        self.eps * (TWO_PI * y).cos() * (self.g)(x)
    }
    fn v2(&self, x: &[f64], y: f64) -> f64 {
        -self.eps * TWO_PI * (TWO_PI * y).sin() * (self.g)(x)
    }
    fn v22(&self, x: &[f64], y: f64) -> f64 {
        -self.eps * TWO_PI * TWO_PI * (TWO_PI * y).cos() * (self.g)(x)
    }
    fn periodic_in_y(&self) -> bool {
        true
    }
}

/// User-supplied V, V₂, V₂₂ expressions; derivative consistency is checked by
/// centered differences at construction, y-periodicity is detected by sampling.
pub struct ExprPotential {
    v: ScalarFn,
    v2: ScalarFn,
    v22: ScalarFn,
    periodic_in_y: bool,
    text: String,
}

fn x_vars(d: usize) -> Vec<&'static str> {
    if d == 1 {
        vec!["x"]
    } else {
        vec!["x1", "x2"]
    }
}

fn xy_vars(d: usize) -> Vec<&'static str> {
    let mut v = x_vars(d);
    v.push("y");
    v
}

/// Deterministic low-discrepancy samples of the (x, y) periodicity cell.
fn cell_samples(d: usize, count: usize) -> Vec<(Vec<f64>, f64)> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    (0..count)
        .map(|k| {
            let t = k as f64 + 0.5;
            let x: Vec<f64> = (0..d).map(|j| (t * phi * (j + 2) as f64).fract()).collect();
            (x, (t * phi).fract())
        })
        .collect()
}

fn check_x_periodicity(
    f: &dyn Fn(&[f64], f64) -> f64,
    d: usize,
    what: &str,
) -> Result<()> {
    for (x, y) in cell_samples(d, 17) {
        let base = f(&x, y);
        for axis in 0..d {
            let mut shifted = x.clone();
            shifted[axis] += 1.0;
            let diff = (f(&shifted, y) - base).abs();
            if diff > 1e-12 * (1.0 + base.abs()) {
                return Err(Error::InvalidParam(format!(
                    "{what} is not 1-periodic in x (axis {axis}: deviation {diff:.3e})"
                )));
            }
        }
    }
    Ok(())
}

impl ExprPotential {
    pub fn new(v_text: &str, v2_text: &str, v22_text: &str, d: usize) -> Result<Self> {
        let vars = xy_vars(d);
        let v = expr::compile(v_text, &vars)?;
        let v2 = expr::compile(v2_text, &vars)?;
        let v22 = expr::compile(v22_text, &vars)?;
        let eval = |f: &ScalarFn, x: &[f64], y: f64| {
            let mut args: Vec<f64> = x.to_vec();
            args.push(y);
            f(&args)
        };
        check_x_periodicity(&|x, y| eval(&v, x, y), d, &format!("potential '{v_text}'"))?;
        // centered-difference consistency of the declared derivatives
        let h = 1e-4;
        for (x, y) in cell_samples(d, 17) {
            let fd2 = (eval(&v, &x, y + h) - eval(&v, &x, y - h)) / (2.0 * h);
            let a2 = eval(&v2, &x, y);
            let scale = 1.0 + a2.abs() + eval(&v, &x, y).abs();
            if (fd2 - a2).abs() > 1e-5 * scale {
                return Err(Error::InvalidParam(format!(
                    "V2 expression disagrees with dV/dy at (x={x:?}, y={y}): \
                     analytic {a2:.6e} vs centered {fd2:.6e}"
                )));
            }
            let fd22 = (eval(&v2, &x, y + h) - eval(&v2, &x, y - h)) / (2.0 * h);
            let a22 = eval(&v22, &x, y);
            let scale = 1.0 + a22.abs() + a2.abs();
            if (fd22 - a22).abs() > 1e-5 * scale {
                return Err(Error::InvalidParam(format!(
                    "V22 expression disagrees with dV2/dy at (x={x:?}, y={y})"
                )));
            }
        }
        // y-periodicity is detected, not declared
        let periodic_in_y = cell_samples(d, 17).iter().all(|(x, y)| {
            [&v, &v2, &v22].iter().all(|f| {
                let base = eval(f, x, *y);
                (eval(f, x, y + 1.0) - base).abs() <= 1e-12 * (1.0 + base.abs())
            })
        });
        Ok(ExprPotential {
            v,
            v2,
            v22,
            periodic_in_y,
            text: format!("expr:{v_text},{v2_text},{v22_text}"),
        })
    }

    fn eval(&self, f: &ScalarFn, x: &[f64], y: f64) -> f64 {
        let mut args: Vec<f64> = x.to_vec();
        args.push(y);
        f(&args)
    }
}

impl Potential for ExprPotential {
    fn name(&self) -> String {
        self.text.clone()
    }
    fn v(&self, x: &[f64], y: f64) -> f64 {
        self.eval(&self.v, x, y)
    }
    fn v2(&self, x: &[f64], y: f64) -> f64 {
        self.eval(&self.v2, x, y)
    }
    fn v22(&self, x: &[f64], y: f64) -> f64 {
        self.eval(&self.v22, x, y)
    }
    fn periodic_in_y(&self) -> bool {
        self.periodic_in_y
    }
    fn smoothness(&self) -> u32 {
        2
    }
}

type PotentialCtor = fn(&str, usize) -> Result<Arc<dyn Potential>>;

/// Name-keyed registry of potential constructors; config strings look like
/// `zero`, `pendulum:0.05`, `modulated:0.1,cos(2*pi*x)`, or
/// `expr:<V>,<V2>,<V22>`.
pub struct PotentialRegistry {
    entries: Vec<(&'static str, PotentialCtor)>,
}

impl PotentialRegistry {
    pub fn builtin() -> Self {
        fn zero(args: &str, _d: usize) -> Result<Arc<dyn Potential>> {
            if !args.is_empty() {
                return Err(Error::Parse(format!("zero potential takes no arguments: '{args}'")));
            }
            Ok(Arc::new(ZeroPotential))
        }
        fn pendulum(args: &str, _d: usize) -> Result<Arc<dyn Potential>> {
            let eps: f64 = args
                .parse()
                .map_err(|_| Error::Parse(format!("pendulum needs a numeric eps, got '{args}'")))?;
            if !eps.is_finite() || eps < 0.0 {
                return Err(Error::InvalidParam(format!("pendulum eps must be >= 0, got {eps}")));
            }
            Ok(Arc::new(Pendulum { eps }))
        }
        fn modulated(args: &str, d: usize) -> Result<Arc<dyn Potential>> {
            let parts = expr::split_top_level(args);
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "modulated needs '<eps>,<gexpr>', got '{args}'"
                )));
            }
            let eps: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("modulated eps not numeric: '{}'", parts[0])))?;
            Ok(Arc::new(Modulated::new(eps, parts[1].trim(), d)?))
        }
        fn expr_ctor(args: &str, d: usize) -> Result<Arc<dyn Potential>> {
            let parts = expr::split_top_level(args);
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "expr potential needs '<V>,<V2>,<V22>', got '{args}'"
                )));
            }
            Ok(Arc::new(ExprPotential::new(
                parts[0].trim(),
                parts[1].trim(),
                parts[2].trim(),
                d,
            )?))
        }
        PotentialRegistry {
            entries: vec![
                ("zero", zero),
                ("pendulum", pendulum),
                ("modulated", modulated),
                ("expr", expr_ctor),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn create(&self, spec: &str, d: usize) -> Result<Arc<dyn Potential>> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), a),
            None => (spec.trim(), ""),
        };
        for (key, ctor) in &self.entries {
            if *key == name {
                return ctor(args, d);
            }
        }
        Err(Error::Parse(format!(
            "unknown potential '{name}' (known: {})",
            self.names().join(", ")
        )))
    }
}

/// Construct a potential from its config string using the built-in registry.
pub fn potential_from_spec(spec: &str, d: usize) -> Result<Arc<dyn Potential>> {
    PotentialRegistry::builtin().create(spec, d)
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// sup |V₂₂| over the periodicity cell: tensor sampling with `grid_samples`
/// points per axis, then a coordinate-wise golden-section polish around the
/// best sample. Requires a y-periodic potential unless the caller supplies a
/// bound of their own.
pub fn sup_v22(
    potential: &dyn Potential,
    d: usize,
    grid_samples: usize,
    user_bound: Option<f64>,
) -> Result<f64> {
    if !potential.periodic_in_y() {
        return match user_bound {
            Some(b) if b.is_finite() && b >= 0.0 => Ok(b),
            Some(b) => Err(Error::InvalidParam(format!("v22 bound must be >= 0, got {b}"))),
            None => Err(Error::Precondition(
                "potential is not 1-periodic in y; supply an explicit |V22| bound".into(),
            )),
        };
    }
    let m = grid_samples.max(4);
    let step = 1.0 / m as f64;
    let mut best = 0.0f64;
    let mut best_pt = (vec![0.0; d], 0.0);
    let mut x = vec![0.0; d];
    // tensor sample of the cell [0,1]^d × [0,1]
    let mut idx = vec![0usize; d];
    loop {
        for j in 0..d {
            x[j] = idx[j] as f64 * step;
        }
        for iy in 0..m {
            let y = iy as f64 * step;
            let val = potential.v22(&x, y).abs();
            if val > best {
                best = val;
                best_pt = (x.clone(), y);
            }
        }
        // odometer over the x indices
        let mut carry = 0;
        while carry < d {
            idx[carry] += 1;
            if idx[carry] < m {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == d {
            break;
        }
    }
    // local coordinate-wise polish within one sample step of the best point
    let (mut px, mut py) = best_pt;
    for _ in 0..3 {
        let xs = px.clone();
        best = best.max(golden_max(
            &|y| potential.v22(&xs, y).abs(),
            py - step,
            py + step,
        ));
        py = {
            // keep the polished y for subsequent x sweeps
            let f = |y: f64| potential.v22(&xs, y).abs();
            let mut arg = py;
            let mut cur = f(py);
            for k in 0..=20 {
                let y = py - step + 2.0 * step * k as f64 / 20.0;
                if f(y) > cur {
                    cur = f(y);
                    arg = y;
                }
            }
            arg
        };
        for j in 0..d {
            let (xs, yv) = (px.clone(), py);
            let f = move |t: f64| {
                let mut xx = xs.clone();
                xx[j] = t;
                potential.v22(&xx, yv).abs()
            };
            best = best.max(golden_max(&f, px[j] - step, px[j] + step));
            let mut arg = px[j];
            let mut cur = f(px[j]);
            for k in 0..=20 {
                let t = px[j] - step + 2.0 * step * k as f64 / 20.0;
                if f(t) > cur {
                    cur = f(t);
                    arg = t;
                }
            }
            px[j] = arg;
        }
    }
    Ok(best)
}

/// sup |V₂| over the periodicity cell by the same sampling strategy.
pub fn sup_v2(potential: &dyn Potential, d: usize, grid_samples: usize) -> f64 {
    let m = grid_samples.max(4);
    let step = 1.0 / m as f64;
    let mut best = 0.0f64;
    let mut x = vec![0.0; d];
    let mut idx = vec![0usize; d];
    loop {
        for j in 0..d {
            x[j] = idx[j] as f64 * step;
        }
        for iy in 0..m {
            best = best.max(potential.v2(&x, iy as f64 * step).abs());
        }
        let mut carry = 0;
        while carry < d {
            idx[carry] += 1;
            if idx[carry] < m {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == d {
            break;
        }
    }
    best
}

/// Time-stepping and descent parameters; λ = 1−β is derived, α lives on the
/// operator.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    pub gamma: f64,
    pub beta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub tol_residual: f64,
    pub max_picard: usize,
}

impl FlowParams {
    pub fn lambda(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParam(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParam(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParam(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidParam(format!(
                "tol_residual must be > 0, got {}",
                self.tol_residual
            )));
        }
        if self.max_picard == 0 {
            return Err(Error::InvalidParam("max_picard must be >= 1".into()));
        }
        Ok(())
    }
}

/// γ chosen automatically as 1.1·sup|V₂₂| + 0.1, strictly above the comparison
/// threshold sup|V₂₂| with margin even for V ≡ 0.
pub fn auto_gamma(
    potential: &dyn Potential,
    d: usize,
    grid_samples: usize,
    user_bound: Option<f64>,
) -> Result<f64> {
    Ok(1.1 * sup_v22(potential, d, grid_samples, user_bound)? + 0.1)
}

/// Pointwise core of the nonlinearity: w(x) = γ u(x) − V₂(x, u(x)).
pub fn core_map(potential: &dyn Potential, gamma: f64, u: &Field) -> Field {
    let grid = *u.grid();
    let d = grid.d();
    let mut w = u.values().clone();
    for i in 0..grid.num_nodes() {
        let p = grid.position(i);
        w[i] = gamma * u.values()[i] - potential.v2(&p[..d], u.values()[i]);
    }
    Field::from_raw(grid, w)
}

/// X(u) = (γ+A)^{−β}(γu − V₂(x, u)): the smoothing composition of the
/// pointwise core map with the negative fractional power.
pub fn x_apply(
    op: &EllipticOperator,
    params: &FlowParams,
    u: &Field,
    potential: &dyn Potential,
) -> Result<Field> {
    params.validate()?;
    op.frac_power_apply(&core_map(potential, params.gamma, u), params.gamma, -params.beta)
}

/// Minimum slope of y ↦ γy − V₂(x, y) over discrete samples; nonnegative iff
/// the core map is order-preserving there.
pub fn monotone_core_margin(
    potential: &dyn Potential,
    d: usize,
    gamma: f64,
    samples: usize,
) -> f64 {
    let m = samples.max(8);
    let dy = 1.0 / m as f64;
    let mut min_slope = f64::INFINITY;
    for (x, _) in cell_samples(d, 17) {
        for iy in 0..m {
            let y0 = iy as f64 * dy;
            let c0 = gamma * y0 - potential.v2(&x, y0);
            let c1 = gamma * (y0 + dy) - potential.v2(&x, y0 + dy);
            min_slope = min_slope.min((c1 - c0) / dy);
        }
    }
    min_slope
}

/// Margins for the a-priori sup-norm bounds on X and on the linear semigroup.
#[derive(Debug, Clone)]
pub struct InfinityBoundReport {
    pub x_norm: f64,
    pub x_bound: f64,
    /// x_bound − x_norm; ≥ −1e-9 when the bound holds.
    pub x_margin: f64,
    /// (t, e^{−γ^λ t}·‖u‖_∞ + 1e-9 − ‖e^{tL}u‖_∞) at sampled times.
    pub semigroup_margins: Vec<(f64, f64)>,
}

impl InfinityBoundReport {
    pub fn ok(&self) -> bool {
        self.x_margin >= -1e-9 && self.semigroup_margins.iter().all(|&(_, m)| m >= -1e-9)
    }
}

/// Checks ‖X(u)‖_∞ ≤ γ^λ‖u‖_∞ + γ^{−β}‖V₂‖_∞ and the semigroup contraction
/// ‖e^{tL}u‖_∞ ≤ e^{−γ^λ t}‖u‖_∞ at sampled times. Report-only.
pub fn l_infinity_bound_check(
    op: &EllipticOperator,
    params: &FlowParams,
    u: &Field,
    potential: &dyn Potential,
) -> Result<InfinityBoundReport> {
    params.validate()?;
    let lam = params.lambda();
    let x_norm = x_apply(op, params, u, potential)?.max_norm();
    let v2_sup = sup_v2(potential, u.grid().d(), 128);
    let x_bound = params.gamma.powf(lam) * u.max_norm() + params.gamma.powf(-params.beta) * v2_sup;
    let mut semigroup_margins = Vec::new();
    for t in [0.0, 0.5, 1.0, 2.0] {
        let norm = op.semigroup_apply(u, params.gamma, lam, t)?.max_norm();
        let bound = (-params.gamma.powf(lam) * t).exp() * u.max_norm();
        semigroup_margins.push((t, bound + 1e-9 - norm));
    }
    Ok(InfinityBoundReport { x_norm, x_bound, x_margin: x_bound + 1e-9 - x_norm, semigroup_margins })
}
