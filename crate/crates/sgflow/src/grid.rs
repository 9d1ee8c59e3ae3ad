//! Uniform tensor grids on the torus `N·T^d` or the box `[0, N]^d`.
//!
//! The fundamental domain is `[0, N)^d` (periodic) or `[0, N]^d` (Dirichlet box),
//! sampled with `n` points per unit length, spacing `h = 1/n`. Coefficients and
//! potentials are 1-periodic, so `n` is the resolution of one coefficient cell
//! while `N` is the period of the fields living on the grid.

use crate::error::{Error, Result};

/// Boundary handling for the grid and every operator built on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Fields are N-periodic; nodes `x = i·h`, `i = 0..N·n` per axis (endpoint excluded).
    Periodic,
    /// Fields vanish on the boundary of `[0, N]^d`; nodes include both endpoints,
    /// boundary values are forced to zero and eliminated from all operators.
    DirichletBox,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::DirichletBox => "dirichlet_box",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(BoundaryCondition::Periodic),
            "dirichlet_box" | "dirichlet" => Ok(BoundaryCondition::DirichletBox),
            other => Err(Error::Parse(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// A uniform tensor grid in dimension 1 or 2.
///
/// `Grid` is `Copy`; everything is derived from `(d, N, n, bc)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    d: usize,
    period: usize,
    points_per_period: usize,
    bc: BoundaryCondition,
}

/// Hard cap on total node count; the dense spectral path is O(m^3).
const MAX_NODES: usize = 16384;

impl Grid {
    pub fn new(
        d: usize,
        period: usize,
        points_per_period: usize,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::InvalidParam(format!("dimension must be 1 or 2, got {d}")));
        }
        if period == 0 {
            return Err(Error::InvalidParam("period N must be >= 1".into()));
        }
        if points_per_period < 2 {
            return Err(Error::InvalidParam("points per period n must be >= 2".into()));
        }
        let per_axis = period * points_per_period;
        if per_axis < 4 {
            return Err(Error::InvalidParam(format!(
                "need at least 4 points per axis, got N*n = {per_axis}"
            )));
        }
        let grid = Grid { d, period, points_per_period, bc };
        if grid.num_nodes() > MAX_NODES {
            return Err(Error::InvalidParam(format!(
                "grid has {} nodes, beyond the dense-spectral cap {}",
                grid.num_nodes(),
                MAX_NODES
            )));
        }
        Ok(grid)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Fundamental period N.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Points per unit length n; the spacing is exactly 1/n.
    pub fn points_per_period(&self) -> usize {
        self.points_per_period
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_period as f64
    }

    /// h^d, the weight of the rectangle-rule quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Stored points per axis: N·n for periodic, N·n + 1 for the Dirichlet box.
    pub fn points_per_axis(&self) -> usize {
        match self.bc {
            BoundaryCondition::Periodic => self.period * self.points_per_period,
            BoundaryCondition::DirichletBox => self.period * self.points_per_period + 1,
        }
    }

    /// Total stored nodes (boundary included for the Dirichlet box).
    pub fn num_nodes(&self) -> usize {
        self.points_per_axis().pow(self.d as u32)
    }

    /// Nodes the operator acts on: all of them (periodic) or the interior (Dirichlet).
    pub fn num_interior(&self) -> usize {
        match self.bc {
            BoundaryCondition::Periodic => self.num_nodes(),
            BoundaryCondition::DirichletBox => {
                (self.points_per_axis() - 2).pow(self.d as u32)
            }
        }
    }

    /// Row-major multi-index of a flat node index. The second entry is 0 in d=1.
    pub fn coords(&self, flat: usize) -> [usize; 2] {
        debug_assert!(flat < self.num_nodes());
        match self.d {
            1 => [flat, 0],
            _ => {
                let per = self.points_per_axis();
                [flat / per, flat % per]
            }
        }
    }

    pub fn flat(&self, coords: [usize; 2]) -> usize {
        match self.d {
            1 => coords[0],
            _ => coords[0] * self.points_per_axis() + coords[1],
        }
    }

    /// Physical position of a node. The second entry is 0 in d=1.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let c = self.coords(flat);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h]
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        match self.bc {
            BoundaryCondition::Periodic => false,
            BoundaryCondition::DirichletBox => {
                let last = self.points_per_axis() - 1;
                let c = self.coords(flat);
                (0..self.d).any(|ax| c[ax] == 0 || c[ax] == last)
            }
        }
    }

    /// Flat indices of the operator's nodes, in row-major order.
    pub fn interior_flats(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&f| !self.is_boundary(f)).collect()
    }

    /// Node reached by shifting `flat` through the integer vector `k` (periodic only).
    /// Integer shifts move `k_j · n` nodes along axis j, always commensurate.
    pub fn shift_node(&self, flat: usize, k: [i64; 2]) -> Result<usize> {
        if self.bc != BoundaryCondition::Periodic {
            return Err(Error::InvalidParam(
                "integer shifts require a periodic grid".into(),
            ));
        }
        let per = self.points_per_axis() as i64;
        let n = self.points_per_period as i64;
        let c = self.coords(flat);
        let mut out = [0usize; 2];
        for ax in 0..self.d {
            let moved = (c[ax] as i64 + k[ax] * n).rem_euclid(per);
            out[ax] = moved as usize;
        }
        Ok(self.flat(out))
    }
}
