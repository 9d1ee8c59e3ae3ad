//! Config file loading and resolution shared by every subcommand.
//!
//! The file format is TOML with five flat sections:
//!
//! ```toml
//! [grid]       # d, N, n, bc
//! [operator]   # coeff, alpha, discretization
//! [potential]  # spec
//! [flow]       # gamma ("auto" or a number), beta, dt, t_end, tol_residual, scheme
//! [run]        # seed, out
//! ```
//!
//! Every key has a default, so an empty (or absent) file is a valid config.
//! `gamma = "auto"` resolves to 1.1·sup|V₂₂| + 0.1 sampled on a fine grid,
//! which is only possible for potentials 1-periodic in y.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use sgflow::potential::{auto_gamma, potential_from_spec, FlowParams, Potential};
use sgflow::scheme::{scheme_from_spec, TimeStepper};
use sgflow::{BoundaryCondition, CoefficientField, Discretization, EllipticOperator, Grid};

fn default_d() -> usize {
    1
}
fn default_period() -> usize {
    1
}
fn default_n() -> usize {
    32
}
fn default_bc() -> String {
    "periodic".into()
}
fn default_coeff() -> String {
    "identity".into()
}
fn default_alpha() -> f64 {
    1.0
}
fn default_discretization() -> String {
    "fd".into()
}
fn default_potential() -> String {
    "pendulum:0.05".into()
}
fn default_gamma() -> GammaSpec {
    GammaSpec::Text("auto".into())
}
fn default_beta() -> f64 {
    0.5
}
fn default_dt() -> f64 {
    1e-2
}
fn default_t_end() -> f64 {
    5.0
}
fn default_tol_residual() -> f64 {
    1e-8
}
fn default_scheme() -> String {
    "etd1".into()
}
fn default_seed() -> u64 {
    42
}
fn default_out() -> String {
    "sgflow-out".into()
}

/// `gamma` accepts either the string "auto" or a number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    #[serde(default = "default_d")]
    d: usize,
    #[serde(rename = "N", default = "default_period")]
    period: usize,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_bc")]
    bc: String,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            d: default_d(),
            period: default_period(),
            n: default_n(),
            bc: default_bc(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorSection {
    #[serde(default = "default_coeff")]
    coeff: String,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_discretization")]
    discretization: String,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            coeff: default_coeff(),
            alpha: default_alpha(),
            discretization: default_discretization(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSection {
    #[serde(default = "default_potential")]
    spec: String,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection { spec: default_potential() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowSection {
    #[serde(default = "default_gamma")]
    gamma: GammaSpec,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_end")]
    t_end: f64,
    #[serde(default = "default_tol_residual")]
    tol_residual: f64,
    #[serde(default = "default_scheme")]
    scheme: String,
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            gamma: default_gamma(),
            beta: default_beta(),
            dt: default_dt(),
            t_end: default_t_end(),
            tol_residual: default_tol_residual(),
            scheme: default_scheme(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_out")]
    out: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: default_seed(), out: default_out() }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    operator: OperatorSection,
    #[serde(default)]
    potential: PotentialSection,
    #[serde(default)]
    flow: FlowSection,
    #[serde(default)]
    run: RunSection,
}

/// Fully resolved config as embedded in `manifest.json`; re-running with
/// these values (gamma now numeric) reproduces the run exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub grid: ResolvedGrid,
    pub operator: ResolvedOperator,
    pub potential: ResolvedPotential,
    pub flow: ResolvedFlow,
    pub run: ResolvedRun,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedGrid {
    pub d: usize,
    #[serde(rename = "N")]
    pub period: usize,
    pub n: usize,
    pub bc: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedOperator {
    pub coeff: String,
    pub alpha: f64,
    pub discretization: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedPotential {
    pub spec: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedFlow {
    /// Numeric value actually used (auto-resolution already applied).
    pub gamma: f64,
    /// What the config asked for: "auto" or the literal number.
    pub gamma_spec: String,
    pub beta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub tol_residual: f64,
    pub scheme: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub seed: u64,
    pub out: String,
}

/// Parsed and resolved settings plus the ready-to-use components every
/// subcommand needs. Operators are built on demand because `minimize` and
/// `sweep` derive their grids from the rotation vector, not from `[grid]`.
pub struct Settings {
    pub resolved: ResolvedConfig,
    pub bc: BoundaryCondition,
    pub discretization: Discretization,
    pub coeffs: CoefficientField,
    pub potential: Arc<dyn Potential>,
    pub params: FlowParams,
    pub scheme: Arc<dyn TimeStepper>,
}

impl Settings {
    /// Load `path` (or use built-in defaults), apply CLI overrides, parse all
    /// component specs, and resolve `gamma = "auto"`.
    pub fn load(path: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<Settings> {
        let file: FileConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => FileConfig::default(),
        };

        let d = file.grid.d;
        let bc = BoundaryCondition::parse(&file.grid.bc)
            .with_context(|| "config key grid.bc".to_string())?;
        let discretization = Discretization::parse(&file.operator.discretization)
            .with_context(|| "config key operator.discretization".to_string())?;
        let coeffs = CoefficientField::parse(&file.operator.coeff, d)
            .with_context(|| "config key operator.coeff".to_string())?;
        let potential = potential_from_spec(&file.potential.spec, d)
            .with_context(|| "config key potential.spec".to_string())?;
        let scheme = scheme_from_spec(&file.flow.scheme)
            .with_context(|| "config key flow.scheme".to_string())?;

        let (gamma, gamma_spec) = match &file.flow.gamma {
            GammaSpec::Number(g) => (*g, g.to_string()),
            GammaSpec::Text(s) if s == "auto" => {
                let g = auto_gamma(potential.as_ref(), d, 256, None)
                    .with_context(|| "resolving flow.gamma = \"auto\"".to_string())?;
                (g, "auto".to_string())
            }
            GammaSpec::Text(s) => bail!("flow.gamma must be a number or \"auto\", got {s:?}"),
        };

        let params = FlowParams {
            gamma,
            beta: file.flow.beta,
            dt: file.flow.dt,
            t_end: file.flow.t_end,
            tol_residual: file.flow.tol_residual,
            max_picard: 8,
        };
        params.validate().context("validating [flow] parameters")?;

        let seed = seed.unwrap_or(file.run.seed);
        let out = out
            .map(|p| p.to_string_lossy().into_owned())
            .unwrap_or(file.run.out);

        let resolved = ResolvedConfig {
            grid: ResolvedGrid {
                d,
                period: file.grid.period,
                n: file.grid.n,
                bc: bc.as_str().to_string(),
            },
            operator: ResolvedOperator {
                coeff: file.operator.coeff,
                alpha: file.operator.alpha,
                discretization: discretization.as_str().to_string(),
            },
            potential: ResolvedPotential { spec: file.potential.spec },
            flow: ResolvedFlow {
                gamma,
                gamma_spec,
                beta: file.flow.beta,
                dt: file.flow.dt,
                t_end: file.flow.t_end,
                tol_residual: file.flow.tol_residual,
                scheme: file.flow.scheme,
            },
            run: ResolvedRun { seed, out },
        };

        Ok(Settings {
            resolved,
            bc,
            discretization,
            coeffs,
            potential,
            params,
            scheme,
        })
    }

    pub fn seed(&self) -> u64 {
        self.resolved.run.seed
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.resolved.run.out)
    }

    /// Grid exactly as configured in `[grid]`.
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(
            self.resolved.grid.d,
            self.resolved.grid.period,
            self.resolved.grid.n,
            self.bc,
        )
        .context("building grid from [grid]")
    }

    /// Operator on `grid` with the configured coefficients, alpha, and
    /// discretization.
    pub fn operator(&self, grid: Grid) -> Result<EllipticOperator> {
        EllipticOperator::new(
            grid,
            self.coeffs.clone(),
            self.resolved.operator.alpha,
            self.discretization,
        )
        .context("building elliptic operator from [operator]")
    }
}
