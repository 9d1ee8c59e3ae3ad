//! Scalar fields on a grid, their inner products, and CSV serialization.

use ndarray::Array1;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid};
use crate::modes;

/// Tolerance below which a prescribed Dirichlet boundary sample counts as zero.
const BOUNDARY_TOL: f64 = 1e-12;

/// A real scalar field sampled at the nodes of a [`Grid`].
///
/// Dirichlet-box fields store their (forced-zero) boundary nodes, so `len()`
/// always equals `grid.num_nodes()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Array1<f64>,
}

impl Field {
    /// Wrap raw node values. Errors on length mismatch, non-finite entries, or a
    /// Dirichlet boundary sample larger than 1e-12 (compliant samples are snapped
    /// to exact zero).
    pub fn new(grid: Grid, mut values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.num_nodes()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, context: "field values".into() });
            }
        }
        if grid.bc() == BoundaryCondition::DirichletBox {
            for i in 0..grid.num_nodes() {
                if grid.is_boundary(i) {
                    if values[i].abs() > BOUNDARY_TOL {
                        return Err(Error::InvalidParam(format!(
                            "Dirichlet field nonzero ({:.3e}) at boundary node {i}",
                            values[i]
                        )));
                    }
                    values[i] = 0.0;
                }
            }
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: Array1::zeros(grid.num_nodes()) }
    }

    /// Sample `f` at the node positions. For a Dirichlet box, `f` must vanish on
    /// the boundary (within 1e-12); the stored boundary values are exactly zero.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = Array1::zeros(grid.num_nodes());
        for i in 0..grid.num_nodes() {
            let p = grid.position(i);
            values[i] = f(&p[..grid.d()]);
        }
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub(crate) fn from_raw(grid: Grid, values: Array1<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_nodes());
        Field { grid, values }
    }

    /// Apply `f` nodewise (position, value) → value, rechecking invariants.
    pub fn map(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let mut values = Array1::zeros(self.len());
        for i in 0..self.len() {
            let p = self.grid.position(i);
            values[i] = f(&p[..self.grid.d()], self.values[i]);
        }
        Field::new(self.grid, values)
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }

    /// Discrete mean N^{-d} h^d Σ u.
    pub fn mean(&self) -> f64 {
        let vol = (self.grid.period() as f64).powi(self.grid.d() as i32);
        self.grid.cell_volume() * self.values.sum() / vol
    }

    /// L² inner product with the rectangle-rule measure: h^d Σ u v.
    pub fn inner_l2(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("inner_l2 on different grids".into()));
        }
        Ok(self.grid.cell_volume() * self.values.dot(&other.values))
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell_volume() * self.values.dot(&self.values)).sqrt()
    }

    /// u + v (panics on grid mismatch; use only with fields from the same grid).
    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "field add on different grids");
        Field { grid: self.grid, values: &self.values + &other.values }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "field sub on different grids");
        Field { grid: self.grid, values: &self.values - &other.values }
    }

    pub fn scale(&self, a: f64) -> Field {
        Field { grid: self.grid, values: &self.values * a }
    }

    /// u + c·1. Periodic only: a constant shift would violate the Dirichlet boundary.
    pub fn add_scalar(&self, c: f64) -> Result<Field> {
        if self.grid.bc() != BoundaryCondition::Periodic {
            return Err(Error::InvalidParam(
                "add_scalar requires a periodic grid".into(),
            ));
        }
        Ok(Field { grid: self.grid, values: &self.values + c })
    }

    /// The translate u(· + k) for an integer vector k (periodic only).
    pub fn shift(&self, k: [i64; 2]) -> Result<Field> {
        let mut values = Array1::zeros(self.len());
        for i in 0..self.len() {
            values[i] = self.values[self.grid.shift_node(i, k)?];
        }
        Ok(Field { grid: self.grid, values })
    }

    /// Random band-limited field: i.i.d. U(-1,1) coefficients on the lowest
    /// ceil(m/4) grid modes, rescaled to the requested sup-norm amplitude.
    pub fn random_band_limited(grid: Grid, amplitude: f64, rng: &mut impl Rng) -> Field {
        let m = grid.num_nodes();
        let keep = m.div_ceil(4);
        let mut values = Array1::<f64>::zeros(m);
        match grid.bc() {
            BoundaryCondition::Periodic => {
                let modes = modes::periodic_modes(&grid);
                for mode in modes.iter().take(keep) {
                    let c: f64 = rng.gen_range(-1.0..1.0);
                    values.scaled_add(c, &modes::mode_values(&grid, mode));
                }
            }
            BoundaryCondition::DirichletBox => {
                // low sine modes sin(pi k x / N) (tensor products in d=2)
                let nn = grid.period() as f64;
                let kmax = ((keep as f64).powf(1.0 / grid.d() as f64).ceil() as usize).max(1);
                let mut made = 0;
                'outer: for k1 in 1..=kmax {
                    for k2 in 1..=(if grid.d() == 2 { kmax } else { 1 }) {
                        let c: f64 = rng.gen_range(-1.0..1.0);
                        for i in 0..m {
                            let p = grid.position(i);
                            let mut v = (std::f64::consts::PI * k1 as f64 * p[0] / nn).sin();
                            if grid.d() == 2 {
                                v *= (std::f64::consts::PI * k2 as f64 * p[1] / nn).sin();
                            }
                            values[i] += c * v;
                        }
                        made += 1;
                        if made >= keep {
                            break 'outer;
                        }
                    }
                }
            }
        }
        let sup = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if sup > 0.0 {
            values *= amplitude / sup;
        }
        Field { grid, values }
    }

    /// CSV serialization: `# grid d=<d> N=<N> n=<n> bc=<bc>` then one
    /// `index,x(,y),value` row per node. Floats use shortest-roundtrip formatting,
    /// so write → read → write is byte-identical.
    pub fn to_csv_string(&self) -> String {
        let g = &self.grid;
        let mut out = String::new();
        out.push_str(&format!(
            "# grid d={} N={} n={} bc={}\n",
            g.d(),
            g.period(),
            g.points_per_period(),
            g.bc().as_str()
        ));
        for i in 0..self.len() {
            let p = g.position(i);
            if g.d() == 1 {
                out.push_str(&format!("{},{},{}\n", i, p[0], self.values[i]));
            } else {
                out.push_str(&format!("{},{},{},{}\n", i, p[0], p[1], self.values[i]));
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_str(text: &str) -> Result<Field> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field CSV".into()))?;
        let rest = header
            .strip_prefix("# grid ")
            .ok_or_else(|| Error::Parse(format!("bad field CSV header: {header:?}")))?;
        let mut d = None;
        let mut nn = None;
        let mut n = None;
        let mut bc = None;
        for tok in rest.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            match key {
                "d" => d = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "N" => nn = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "n" => n = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "bc" => bc = Some(BoundaryCondition::parse(val)?),
                other => return Err(Error::Parse(format!("unknown header key {other:?}"))),
            }
        }
        let (d, nn, n, bc) = match (d, nn, n, bc) {
            (Some(d), Some(nn), Some(n), Some(bc)) => (d, nn, n, bc),
            _ => return Err(Error::Parse("field CSV header missing d/N/n/bc".into())),
        };
        let grid = Grid::new(d, nn, n, bc)?;
        let mut values = Array1::zeros(grid.num_nodes());
        let mut count = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != d + 2 {
                return Err(Error::Parse(format!(
                    "expected {} columns, got {} in {line:?}",
                    d + 2,
                    cols.len()
                )));
            }
            let idx: usize = cols[0].parse().map_err(|_| {
                Error::Parse(format!("bad node index {:?}", cols[0]))
            })?;
            if idx >= grid.num_nodes() {
                return Err(Error::Parse(format!("node index {idx} out of range")));
            }
            let v: f64 = cols[d + 1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad value {:?}", cols[d + 1])))?;
            values[idx] = v;
            count += 1;
        }
        if count != grid.num_nodes() {
            return Err(Error::Parse(format!(
                "field CSV has {count} rows, grid needs {}",
                grid.num_nodes()
            )));
        }
        Field::new(grid, values)
    }

    pub fn read_csv(path: impl AsRef<std::path::Path>) -> Result<Field> {
        Field::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Convenience: the lowest grid modes as (|ξ|², L²-normalized samples), used by
/// tests that want explicit trigonometric fields.
pub fn low_mode_fields(grid: &Grid, count: usize) -> Vec<(f64, Field)> {
    let modes = modes::periodic_modes(grid);
    modes
        .iter()
        .take(count)
        .map(|mo| {
            let vals = modes::mode_values(grid, mo);
            (mo.freq_sq(grid), Field::from_raw(*grid, vals))
        })
        .collect()
}
