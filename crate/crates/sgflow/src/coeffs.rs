//! Symmetric, uniformly elliptic coefficient fields a(x).
//!
//! Coefficients are 1-periodic in every coordinate regardless of the field
//! period N, so one unit cell of a(x) tiles the whole domain. Ellipticity
//! Λ₁|ξ|² ≤ ξᵀa(x)ξ ≤ Λ₂|ξ|² is verified by sampling at the grid nodes and
//! stencil midpoints when an operator is assembled.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr;
use crate::grid::Grid;

type MatrixFn = Arc<dyn Fn(&[f64]) -> [[f64; 2]; 2]>;

/// A d×d symmetric coefficient matrix field (d inferred from the grid it is
/// used with; entries beyond d are ignored).
#[derive(Clone)]
pub enum CoefficientField {
    /// Spatially constant matrix.
    Constant([[f64; 2]; 2]),
    /// x-dependent matrix, 1-periodic in each coordinate.
    Variable(MatrixFn),
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoefficientField::Constant(m) => write!(f, "CoefficientField::Constant({m:?})"),
            CoefficientField::Variable(_) => write!(f, "CoefficientField::Variable(..)"),
        }
    }
}

impl CoefficientField {
    pub fn identity() -> Self {
        CoefficientField::Constant([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Constant diagonal matrix diag(c_1, ..., c_d).
    pub fn diagonal(c: &[f64]) -> Result<Self> {
        if c.is_empty() || c.len() > 2 {
            return Err(Error::InvalidParam("diag needs 1 or 2 entries".into()));
        }
        for &v in c {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam(format!("diag entry {v} must be > 0")));
            }
        }
        let c2 = if c.len() == 2 { c[1] } else { 1.0 };
        Ok(CoefficientField::Constant([[c[0], 0.0], [0.0, c2]]))
    }

    /// Full constant symmetric matrix; positive-definiteness is checked here.
    pub fn constant_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        if (m[0][1] - m[1][0]).abs() > 1e-14 {
            return Err(Error::InvalidParam("coefficient matrix must be symmetric".into()));
        }
        let (lo, _) = sym_eigs(m);
        if !(lo > 0.0) {
            return Err(Error::InvalidParam(format!(
                "coefficient matrix not positive definite (min eig {lo:.3e})"
            )));
        }
        Ok(CoefficientField::Constant(m))
    }

    /// Scalar 1-periodic a(x) acting isotropically as a(x)·I.
    pub fn isotropic(f: impl Fn(&[f64]) -> f64 + 'static) -> Self {
        CoefficientField::Variable(Arc::new(move |x| {
            let a = f(x);
            [[a, 0.0], [0.0, a]]
        }))
    }

    /// Full variable matrix field.
    pub fn matrix_fn(f: impl Fn(&[f64]) -> [[f64; 2]; 2] + 'static) -> Self {
        CoefficientField::Variable(Arc::new(f))
    }

    /// Parse a config spec: `identity` | `diag:<c1,...,cd>` | `expr:<1-periodic expr>`.
    /// Expression coefficients are scalar and act isotropically; the variable is
    /// `x` in d=1 and `x1`,`x2` in d=2.
    pub fn parse(spec: &str, d: usize) -> Result<Self> {
        if spec == "identity" {
            return Ok(CoefficientField::identity());
        }
        if let Some(rest) = spec.strip_prefix("diag:") {
            let vals: Vec<f64> = rest
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad diag entry {s:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != d {
                return Err(Error::Parse(format!(
                    "diag wants {d} entries for d={d}, got {}",
                    vals.len()
                )));
            }
            return Self::diagonal(&vals);
        }
        if let Some(rest) = spec.strip_prefix("expr:") {
            let vars: &[&str] = if d == 1 { &["x"] } else { &["x1", "x2"] };
            let f = expr::compile(rest, vars)?;
            return Ok(CoefficientField::isotropic(move |x| f(x)));
        }
        Err(Error::Parse(format!(
            "unknown coefficient spec {spec:?} (want identity | diag:... | expr:...)"
        )))
    }

    /// Evaluate at a position (entries beyond the grid dimension are identity).
    pub fn eval(&self, x: &[f64]) -> [[f64; 2]; 2] {
        match self {
            CoefficientField::Constant(m) => *m,
            CoefficientField::Variable(f) => f(x),
        }
    }

    pub fn entry(&self, x: &[f64], i: usize, j: usize) -> f64 {
        self.eval(x)[i][j]
    }

    pub fn constant(&self) -> Option<[[f64; 2]; 2]> {
        match self {
            CoefficientField::Constant(m) => Some(*m),
            CoefficientField::Variable(_) => None,
        }
    }

    /// ξᵀ a(x) ξ, the quadratic form behind the Fourier symbol.
    pub fn quad_form(&self, x: &[f64], xi: &[f64; 2], d: usize) -> f64 {
        let m = self.eval(x);
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += xi[i] * m[i][j] * xi[j];
            }
        }
        s
    }

    /// Verify symmetry, 1-periodicity and uniform ellipticity by sampling at the
    /// grid nodes and half-spacing midpoints; returns the observed (Λ₁, Λ₂).
    pub fn verify_on(&self, grid: &Grid) -> Result<(f64, f64)> {
        let d = grid.d();
        let h = grid.spacing();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let offsets: &[[f64; 2]] = if d == 1 {
            &[[0.0, 0.0], [0.5, 0.0]]
        } else {
            &[[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]]
        };
        for flat in 0..grid.num_nodes() {
            let p = grid.position(flat);
            for off in offsets {
                let x = [p[0] + off[0] * h, p[1] + off[1] * h];
                let m = self.eval(&x[..d]);
                if d == 2 && (m[0][1] - m[1][0]).abs() > 1e-12 {
                    return Err(Error::InvalidParam(format!(
                        "coefficient matrix asymmetric at x=({:.4},{:.4})",
                        x[0], x[1]
                    )));
                }
                let (a, b) = if d == 1 { (m[0][0], m[0][0]) } else { sym_eigs(m) };
                lo = lo.min(a);
                hi = hi.max(b);
                // 1-periodicity in each coordinate
                for ax in 0..d {
                    let mut xs = x;
                    xs[ax] += 1.0;
                    let ms = self.eval(&xs[..d]);
                    for i in 0..d {
                        for j in 0..d {
                            if (ms[i][j] - m[i][j]).abs() > 1e-12 * (1.0 + m[i][j].abs()) {
                                return Err(Error::InvalidParam(format!(
                                    "coefficient not 1-periodic in x{} at ({:.4},{:.4})",
                                    ax + 1,
                                    x[0],
                                    x[1]
                                )));
                            }
                        }
                    }
                }
            }
        }
        if !(lo > 0.0) {
            return Err(Error::InvalidParam(format!(
                "coefficients not uniformly elliptic: min sampled eigenvalue {lo:.3e}"
            )));
        }
        Ok((lo, hi))
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, (min, max).
fn sym_eigs(m: [[f64; 2]; 2]) -> (f64, f64) {
    let tr2 = (m[0][0] + m[1][1]) / 2.0;
    let det = ((m[0][0] - m[1][1]) / 2.0).hypot(m[0][1]);
    (tr2 - det, tr2 + det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryCondition;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, 1, n, BoundaryCondition::Periodic).unwrap()
    }

    #[test]
    fn parse_variants() {
        assert!(matches!(
            CoefficientField::parse("identity", 1).unwrap(),
            CoefficientField::Constant(_)
        ));
        let c = CoefficientField::parse("diag:2.0,3.0", 2).unwrap();
        assert_eq!(c.eval(&[0.1, 0.2])[1][1], 3.0);
        assert!(CoefficientField::parse("diag:2.0", 2).is_err());
        assert!(CoefficientField::parse("diag:-1", 1).is_err());
        assert!(CoefficientField::parse("mystery", 1).is_err());
        let v = CoefficientField::parse("expr:1 + 0.5*sin(2*pi*x)", 1).unwrap();
        assert!((v.eval(&[0.25])[0][0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn verify_accepts_elliptic_rejects_degenerate() {
        let g = grid1(16);
        let ok = CoefficientField::parse("expr:1 + 0.5*sin(2*pi*x)", 1).unwrap();
        let (lo, hi) = ok.verify_on(&g).unwrap();
        assert!(lo >= 0.5 - 1e-12 && hi <= 1.5 + 1e-12);
        // touches zero at the minimum: not uniformly elliptic on samples
        let bad = CoefficientField::isotropic(|x| (2.0 * std::f64::consts::PI * x[0]).sin());
        assert!(bad.verify_on(&g).is_err());
        // not 1-periodic
        let drift = CoefficientField::isotropic(|x| 1.0 + 0.1 * x[0]);
        assert!(drift.verify_on(&g).is_err());
    }

    #[test]
    fn spd_check_on_full_matrix() {
        assert!(CoefficientField::constant_matrix([[2.0, 0.5], [0.5, 1.0]]).is_ok());
        assert!(CoefficientField::constant_matrix([[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(CoefficientField::constant_matrix([[1.0, 0.5], [0.4, 1.0]]).is_err());
    }

    #[test]
    fn quad_form_matches_symbol() {
        let c = CoefficientField::constant_matrix([[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let q = c.quad_form(&[0.0, 0.0], &[1.0, 2.0], 2);
        assert!((q - (2.0 + 2.0 * 0.5 * 2.0 + 4.0)).abs() < 1e-14);
    }
}
