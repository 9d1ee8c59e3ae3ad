//! The elliptic operator A = −div(a(x)∇·), its discretizations, and the spectral
//! functional calculus built on a dense symmetric eigendecomposition.
//!
//! Two discretizations:
//!
//! * `FiniteDifference` — conservative flux stencil with midpoint coefficient
//!   samples a(x_{i+1/2}); mixed terms (d=2, a¹² ≠ 0) use centered differences,
//!   which keeps the assembled matrix exactly symmetric. Works for both boundary
//!   conditions and variable coefficients.
//! * `FourierSymbol` — matrix-free symbol 4π² ξᵀaξ on the real trigonometric
//!   modes, ξ ∈ (1/N)ℤ^d. Requires constant coefficients and a periodic grid;
//!   the eigenpairs are exact.
//!
//! Every operator function — fractional powers (γ + A^α)^s, the semigroup
//! e^{−t(γ+A^α)^λ}, H^s inner products — is evaluated by mapping eigenvalues,
//! so the eigendecomposition is the single source of truth. The quadrature
//! routes in [`crate::quadrature`] exist to check it, never to replace it.

use ndarray::{Array1, Array2};

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BoundaryCondition, Grid};
use crate::modes;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    FiniteDifference,
    FourierSymbol,
}

impl Discretization {
    pub fn as_str(self) -> &'static str {
        match self {
            Discretization::FiniteDifference => "fd",
            Discretization::FourierSymbol => "fourier",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fd" | "finite_difference" => Ok(Discretization::FiniteDifference),
            "fourier" | "fourier_symbol" => Ok(Discretization::FourierSymbol),
            other => Err(Error::Parse(format!("unknown discretization {other:?}"))),
        }
    }
}

/// Eigenpairs of the discretized base operator A, h^d-orthonormal columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Base eigenvalues μ_i, ascending; tiny negatives are snapped to exact 0.
    eigenvalues: Array1<f64>,
    /// Columns ψ_i over the interior nodes, normalized so h^d Σ ψ² = 1.
    basis: Array2<f64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// A = −div(a∇·) on a grid, raised to the base power α at the eigenvalue level.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: Grid,
    coeffs: CoefficientField,
    alpha: f64,
    discretization: Discretization,
    ellipticity: (f64, f64),
    /// FD path only: the assembled matrix over interior nodes.
    fd_matrix: Option<Array2<f64>>,
    decomp: SpectralDecomposition,
    /// ν_i = μ_i^α, the eigenvalues every operator function actually maps.
    effective: Array1<f64>,
    /// Interior flat indices (identity for periodic grids).
    interior: Vec<usize>,
}

impl EllipticOperator {
    /// Assemble and decompose. Errors: non-elliptic or aperiodic coefficients,
    /// α outside (0,1], FourierSymbol with variable coefficients or a
    /// non-periodic grid.
    pub fn new(
        grid: Grid,
        coeffs: CoefficientField,
        alpha: f64,
        discretization: Discretization,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "base power alpha must lie in (0, 1], got {alpha}"
            )));
        }
        let ellipticity = coeffs.verify_on(&grid)?;
        let interior = grid.interior_flats();
        let (fd_matrix, decomp) = match discretization {
            Discretization::FiniteDifference => {
                let mat = assemble_fd(&grid, &coeffs, &interior);
                let decomp = decompose_sym(&mat, grid.cell_volume())?;
                (Some(mat), decomp)
            }
            Discretization::FourierSymbol => {
                if grid.bc() != BoundaryCondition::Periodic {
                    return Err(Error::InvalidParam(
                        "FourierSymbol requires a periodic grid".into(),
                    ));
                }
                let cmat = coeffs.constant().ok_or_else(|| {
                    Error::InvalidParam(
                        "FourierSymbol requires constant coefficients".into(),
                    )
                })?;
                (None, fourier_decomposition(&grid, cmat))
            }
        };
        let effective = decomp.eigenvalues.mapv(|mu| mu.powf(alpha));
        Ok(EllipticOperator {
            grid,
            coeffs,
            alpha,
            discretization,
            ellipticity,
            fd_matrix,
            decomp,
            effective,
            interior,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &CoefficientField {
        &self.coeffs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn discretization(&self) -> Discretization {
        self.discretization
    }

    /// Sampled ellipticity constants (Λ₁, Λ₂).
    pub fn ellipticity(&self) -> (f64, f64) {
        self.ellipticity
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    /// Base eigenvalues μ_i (before α), ascending.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.decomp.eigenvalues
    }

    /// ν_i = μ_i^α.
    pub fn effective_eigenvalues(&self) -> &Array1<f64> {
        &self.effective
    }

    pub fn num_modes(&self) -> usize {
        self.decomp.len()
    }

    /// The assembled FD matrix over interior nodes, if this is the FD path.
    pub fn fd_matrix(&self) -> Option<&Array2<f64>> {
        self.fd_matrix.as_ref()
    }

    /// Dense base matrix A (interior × interior) on either path; the Fourier
    /// path materializes Ψ diag(μ) Ψᵀ h^d. Intended for oracles, not hot loops.
    pub fn base_matrix(&self) -> Array2<f64> {
        match &self.fd_matrix {
            Some(m) => m.clone(),
            None => {
                let psi = &self.decomp.basis;
                let scaled = psi * &self.decomp.eigenvalues.view().insert_axis(ndarray::Axis(0));
                scaled.dot(&psi.t()) * self.grid.cell_volume()
            }
        }
    }

    /// Spectral coefficients ĉ_i = ⟨ψ_i, u⟩_{L²}.
    pub fn to_spectral(&self, u: &Field) -> Result<Array1<f64>> {
        self.check_grid(u)?;
        let interior_vals = self.interior_values(u);
        Ok(self.decomp.basis.t().dot(&interior_vals) * self.grid.cell_volume())
    }

    /// Field Σ ĉ_i ψ_i (boundary nodes zero on the Dirichlet box).
    pub fn to_physical(&self, coeffs: &Array1<f64>) -> Result<Field> {
        if coeffs.len() != self.decomp.len() {
            return Err(Error::GridMismatch(format!(
                "coefficient vector has {} entries, operator has {} modes",
                coeffs.len(),
                self.decomp.len()
            )));
        }
        let interior_vals = self.decomp.basis.dot(coeffs);
        Ok(self.embed(interior_vals))
    }

    /// A^α u through the decomposition.
    pub fn apply(&self, u: &Field) -> Result<Field> {
        let mut c = self.to_spectral(u)?;
        c *= &self.effective;
        self.to_physical(&c)
    }

    /// ⟨u, v⟩_s = Σ (γ + ν_i)^s ĉ_i d̂_i. Reduces to inner_l2 at s = 0.
    pub fn inner_hs(&self, u: &Field, v: &Field, gamma: f64, s: f64) -> Result<f64> {
        self.check_spectral_shift(gamma)?;
        let cu = self.to_spectral(u)?;
        let cv = self.to_spectral(v)?;
        let mut acc = 0.0;
        for i in 0..cu.len() {
            acc += (gamma + self.effective[i]).powf(s) * cu[i] * cv[i];
        }
        Ok(acc)
    }

    /// (γ + A^α)^s u.
    pub fn frac_power_apply(&self, u: &Field, gamma: f64, s: f64) -> Result<Field> {
        self.check_spectral_shift(gamma)?;
        let mut c = self.to_spectral(u)?;
        for i in 0..c.len() {
            c[i] *= (gamma + self.effective[i]).powf(s);
        }
        self.to_physical(&c)
    }

    /// e^{−t (γ + A^α)^λ} u, the semigroup of L = −(γ+A^α)^λ.
    pub fn semigroup_apply(&self, u: &Field, gamma: f64, lambda: f64, t: f64) -> Result<Field> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "semigroup exponent lambda must lie in (0, 1], got {lambda}"
            )));
        }
        if t < 0.0 {
            return Err(Error::InvalidParam(format!("semigroup time t must be >= 0, got {t}")));
        }
        if gamma < 0.0 {
            return Err(Error::InvalidParam(format!("gamma must be >= 0, got {gamma}")));
        }
        let mut c = self.to_spectral(u)?;
        for i in 0..c.len() {
            c[i] *= (-t * (gamma + self.effective[i]).powf(lambda)).exp();
        }
        self.to_physical(&c)
    }

    /// Per-step multipliers for exponential integrators: e^{−dt ℓ_i} and
    /// φ₁ = (1 − e^{−dt ℓ_i})/ℓ_i with ℓ_i = (γ + ν_i)^λ.
    pub fn etd_factors(&self, gamma: f64, lambda: f64, dt: f64) -> (Array1<f64>, Array1<f64>) {
        let mut decay = Array1::zeros(self.num_modes());
        let mut phi1 = Array1::zeros(self.num_modes());
        for i in 0..self.num_modes() {
            let ell = (gamma + self.effective[i]).powf(lambda);
            let z = dt * ell;
            decay[i] = (-z).exp();
            // -expm1(-z)/ell is accurate for small z; ell > 0 whenever gamma > 0
            phi1[i] = if ell > 0.0 { -(-z).exp_m1() / ell } else { dt };
        }
        (decay, phi1)
    }

    /// Largest value of (γ+ν)^{nλ} e^{−t(γ+ν)^λ} over the spectrum, with the
    /// closed bound (n/(√2 t))ⁿ it must stay below.
    pub fn smoothing_margin(&self, gamma: f64, lambda: f64, t: f64, n: u32) -> (f64, f64) {
        let mut lhs = 0.0f64;
        for i in 0..self.num_modes() {
            let ell = (gamma + self.effective[i]).powf(lambda);
            lhs = lhs.max(ell.powi(n as i32) * (-t * ell).exp());
        }
        let bound = (n as f64 / (2.0f64.sqrt() * t)).powi(n as i32);
        (lhs, bound)
    }

    fn check_grid(&self, u: &Field) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch("field grid differs from operator grid".into()));
        }
        Ok(())
    }

    fn check_spectral_shift(&self, gamma: f64) -> Result<()> {
        let min_eff = self.effective.first().copied().unwrap_or(0.0);
        if gamma + min_eff <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "gamma + min eigenvalue = {:.3e} must be positive",
                gamma + min_eff
            )));
        }
        Ok(())
    }

    fn interior_values(&self, u: &Field) -> Array1<f64> {
        if self.interior.len() == u.len() {
            u.values().clone()
        } else {
            Array1::from_iter(self.interior.iter().map(|&f| u.values()[f]))
        }
    }

    fn embed(&self, interior_vals: Array1<f64>) -> Field {
        if self.interior.len() == self.grid.num_nodes() {
            Field::from_raw(self.grid, interior_vals)
        } else {
            let mut full = Array1::zeros(self.grid.num_nodes());
            for (pos, &f) in self.interior.iter().enumerate() {
                full[f] = interior_vals[pos];
            }
            Field::from_raw(self.grid, full)
        }
    }
}

/// Conservative FD assembly over the interior nodes.
fn assemble_fd(grid: &Grid, coeffs: &CoefficientField, interior: &[usize]) -> Array2<f64> {
    let d = grid.d();
    let h = grid.spacing();
    let h2 = h * h;
    let per = grid.points_per_axis() as i64;
    let periodic = grid.bc() == BoundaryCondition::Periodic;
    let m = interior.len();

    // interior position lookup: flat node -> row index, usize::MAX for boundary
    let mut row_of = vec![usize::MAX; grid.num_nodes()];
    for (r, &f) in interior.iter().enumerate() {
        row_of[f] = r;
    }
    let neighbor = |flat: usize, step: [i64; 2]| -> Option<usize> {
        let c = grid.coords(flat);
        let mut out = [0usize; 2];
        for ax in 0..d {
            let moved = c[ax] as i64 + step[ax];
            if periodic {
                out[ax] = moved.rem_euclid(per) as usize;
            } else if moved < 0 || moved >= per {
                return None;
            } else {
                out[ax] = moved as usize;
            }
        }
        Some(grid.flat(out))
    };

    let mut a = Array2::zeros((m, m));
    let add = |a: &mut Array2<f64>, row: usize, flat: Option<usize>, val: f64| {
        if let Some(f) = flat {
            let col = row_of[f];
            if col != usize::MAX {
                a[[row, col]] += val;
            }
            // couplings into boundary nodes drop: u = 0 there
        }
    };

    for (row, &flat) in interior.iter().enumerate() {
        let p = grid.position(flat);
        for ax in 0..d {
            let mut e = [0i64; 2];
            e[ax] = 1;
            let mut xm = p;
            let mut xp = p;
            xm[ax] -= 0.5 * h;
            xp[ax] += 0.5 * h;
            let am = coeffs.entry(&xm[..d], ax, ax);
            let ap = coeffs.entry(&xp[..d], ax, ax);
            a[[row, row]] += (am + ap) / h2;
            add(&mut a, row, neighbor(flat, [-e[0], -e[1]]), -am / h2);
            add(&mut a, row, neighbor(flat, e), -ap / h2);
        }
        if d == 2 {
            // mixed term −∂₁(a¹²∂₂u) − ∂₂(a¹²∂₁u), centered differences,
            // node-sampled a¹²; skip entirely when the off-diagonal vanishes
            let denom = 4.0 * h2;
            let a12_at = |step: [i64; 2]| -> Option<f64> {
                neighbor(flat, step).map(|f| {
                    let q = grid.position(f);
                    coeffs.entry(&q[..2], 0, 1)
                })
            };
            let center12 = coeffs.entry(&p[..2], 0, 1);
            let has_mixed = center12 != 0.0
                || a12_at([1, 0]).unwrap_or(0.0) != 0.0
                || a12_at([0, 1]).unwrap_or(0.0) != 0.0;
            if has_mixed {
                let ax1 = a12_at([1, 0]);
                let am1 = a12_at([-1, 0]);
                let ax2 = a12_at([0, 1]);
                let am2 = a12_at([0, -1]);
                let g = |v: Option<f64>| v.unwrap_or(0.0);
                add(&mut a, row, neighbor(flat, [1, 1]), -(g(ax1) + g(ax2)) / denom);
                add(&mut a, row, neighbor(flat, [1, -1]), (g(ax1) + g(am2)) / denom);
                add(&mut a, row, neighbor(flat, [-1, 1]), (g(am1) + g(ax2)) / denom);
                add(&mut a, row, neighbor(flat, [-1, -1]), -(g(am1) + g(am2)) / denom);
            }
        }
    }
    a
}

/// Dense symmetric eigendecomposition (nalgebra backend), ascending eigenvalues,
/// columns rescaled to h^d-orthonormality. Tiny negative eigenvalues are snapped
/// to zero; genuinely negative spectra are an assembly bug and error out.
fn decompose_sym(mat: &Array2<f64>, cell_volume: f64) -> Result<SpectralDecomposition> {
    let n = mat.nrows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| mat[[i, j]]);
    let se = dm.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let scale = se.eigenvalues.iter().fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let snap = 1e-9 * scale;
    let mut eigenvalues = Array1::zeros(n);
    for (pos, &i) in idx.iter().enumerate() {
        let mu = se.eigenvalues[i];
        if mu < -1e-7 * scale {
            return Err(Error::InvalidParam(format!(
                "operator spectrum has negative eigenvalue {mu:.6e}"
            )));
        }
        eigenvalues[pos] = if mu.abs() < snap { 0.0 } else { mu.max(0.0) };
    }
    let col_scale = 1.0 / cell_volume.sqrt();
    let mut basis = Array2::zeros((n, n));
    for (pos, &i) in idx.iter().enumerate() {
        for r in 0..n {
            basis[[r, pos]] = se.eigenvectors[(r, i)] * col_scale;
        }
    }
    Ok(SpectralDecomposition { eigenvalues, basis })
}

/// Exact decomposition on the real trigonometric modes, eigenvalues 4π² ξᵀaξ.
fn fourier_decomposition(grid: &Grid, a: [[f64; 2]; 2]) -> SpectralDecomposition {
    let ms = modes::periodic_modes(grid);
    let nn = grid.period() as f64;
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let d = grid.d();
    let mut order: Vec<usize> = (0..ms.len()).collect();
    let symbol = |mo: &modes::RealMode| -> f64 {
        let xi = [mo.k[0] as f64 / nn, mo.k[1] as f64 / nn];
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += xi[i] * a[i][j] * xi[j];
            }
        }
        four_pi_sq * s
    };
    order.sort_by(|&p, &q| symbol(&ms[p]).partial_cmp(&symbol(&ms[q])).unwrap().then(p.cmp(&q)));

    let m = ms.len();
    let mut eigenvalues = Array1::zeros(m);
    let mut basis = Array2::zeros((m, m));
    for (pos, &i) in order.iter().enumerate() {
        eigenvalues[pos] = symbol(&ms[i]);
        let col = modes::mode_values(grid, &ms[i]);
        basis.column_mut(pos).assign(&col);
    }
    SpectralDecomposition { eigenvalues, basis }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn op(
        d: usize,
        nn: usize,
        n: usize,
        bc: BoundaryCondition,
        coeffs: CoefficientField,
        disc: Discretization,
    ) -> EllipticOperator {
        let grid = Grid::new(d, nn, n, bc).unwrap();
        EllipticOperator::new(grid, coeffs, 1.0, disc).unwrap()
    }

    #[test]
    fn fd_eigenvalues_n4_closed_form() {
        // FD symbol (2 − 2cos(2πk/M))/h² on 4 periodic points, h = 1/4:
        // {0, 32, 32, 64}
        let o = op(
            1,
            1,
            4,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FiniteDifference,
        );
        let want = [0.0, 32.0, 32.0, 64.0];
        for (got, want) in o.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-9, "eig {got} vs {want}");
        }
    }

    #[test]
    fn fd_symbol_closed_form_n8() {
        let o = op(
            1,
            1,
            8,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FiniteDifference,
        );
        let h = 1.0 / 8.0;
        let mut want: Vec<f64> =
            (0..8).map(|k| (2.0 - 2.0 * (TWO_PI * k as f64 / 8.0).cos()) / (h * h)).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in o.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-8 * (1.0 + want), "eig {got} vs {want}");
        }
    }

    #[test]
    fn dirichlet_sine_eigenvalues() {
        // interior sine modes: μ_k = (2 − 2cos(πk h))/h², k = 1..M−1
        let o = op(
            1,
            1,
            5,
            BoundaryCondition::DirichletBox,
            CoefficientField::identity(),
            Discretization::FiniteDifference,
        );
        let h = 0.2;
        let want: Vec<f64> =
            (1..5).map(|k| (2.0 - 2.0 * (std::f64::consts::PI * k as f64 * h).cos()) / (h * h)).collect();
        assert_eq!(o.num_modes(), 4);
        for (got, want) in o.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-9 * (1.0 + want));
        }
    }

    #[test]
    fn fourier_sin_is_eigenfunction() {
        let o = op(
            1,
            1,
            16,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FourierSymbol,
        );
        let u = Field::from_fn(*o.grid(), |x| (TWO_PI * x[0]).sin()).unwrap();
        let au = o.apply(&u).unwrap();
        let want = u.scale(4.0 * std::f64::consts::PI * std::f64::consts::PI);
        assert!(au.sub(&want).max_norm() < 1e-10);
    }

    #[test]
    fn constants_are_in_the_kernel() {
        for disc in [Discretization::FiniteDifference, Discretization::FourierSymbol] {
            let o = op(
                1,
                2,
                8,
                BoundaryCondition::Periodic,
                CoefficientField::identity(),
                disc,
            );
            let c = Field::from_fn(*o.grid(), |_| 3.25).unwrap();
            assert!(o.apply(&c).unwrap().max_norm() < 1e-11, "{disc:?}");
            assert_eq!(o.eigenvalues()[0], 0.0, "{disc:?}: μ0 snapped to exact zero");
        }
    }

    #[test]
    fn eig_residual_within_tolerance() {
        // variable coefficients: A ψ_i = μ_i ψ_i to 1e-8 (1 + μ_i), via the FD matrix
        let o = op(
            1,
            1,
            24,
            BoundaryCondition::Periodic,
            CoefficientField::parse("expr:1 + 0.5*sin(2*pi*x)", 1).unwrap(),
            Discretization::FiniteDifference,
        );
        let mat = o.fd_matrix().unwrap();
        for i in 0..o.num_modes() {
            let psi = o.decomposition().basis().column(i).to_owned();
            let apsi = mat.dot(&psi);
            let mu = o.eigenvalues()[i];
            let resid = (&apsi - &(&psi * mu)).iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            assert!(resid < 1e-8 * (1.0 + mu), "mode {i}: residual {resid:.3e}");
        }
    }

    #[test]
    fn parseval_and_roundtrip() {
        let o = op(
            1,
            1,
            32,
            BoundaryCondition::Periodic,
            CoefficientField::parse("expr:1 + 0.3*cos(2*pi*x)", 1).unwrap(),
            Discretization::FiniteDifference,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = Field::random_band_limited(*o.grid(), 1.0, &mut rng);
        let v = Field::random_band_limited(*o.grid(), 1.0, &mut rng);
        let cu = o.to_spectral(&u).unwrap();
        let cv = o.to_spectral(&v).unwrap();
        let direct = u.inner_l2(&v).unwrap();
        assert!((cu.dot(&cv) - direct).abs() < 1e-10);
        let back = o.to_physical(&cu).unwrap();
        assert!(back.sub(&u).max_norm() < 1e-10);
    }

    #[test]
    fn inner_hs_s0_is_l2_and_monotone() {
        let o = op(
            1,
            1,
            16,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FourierSymbol,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = Field::random_band_limited(*o.grid(), 1.0, &mut rng);
        let l2 = u.inner_l2(&u).unwrap();
        let s0 = o.inner_hs(&u, &u, 2.0, 0.0).unwrap();
        assert!((l2 - s0).abs() < 1e-12);
        // γ = 1.5 keeps every γ+μ ≥ 1, so the norm is monotone in s
        let mut prev = 0.0;
        for (i, s) in [-0.5, 0.0, 0.5, 1.0].iter().enumerate() {
            let val = o.inner_hs(&u, &u, 1.5, *s).unwrap();
            if i > 0 {
                assert!(val >= prev - 1e-12, "s={s}: {val} < {prev}");
            }
            prev = val;
        }
        assert!(o.inner_hs(&u, &u, -0.1, 0.5).is_err());
    }

    #[test]
    fn frac_power_constants_rule() {
        // (γ + A)^s c = γ^s c: γ=4, s=−1/2 halves a constant
        let o = op(
            1,
            1,
            16,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FourierSymbol,
        );
        let c = Field::from_fn(*o.grid(), |_| 1.0).unwrap();
        let half = o.frac_power_apply(&c, 4.0, -0.5).unwrap();
        assert!(half.sub(&c.scale(0.5)).max_norm() < 1e-12);
    }

    #[test]
    fn power_law_composition() {
        let o = op(
            1,
            1,
            32,
            BoundaryCondition::Periodic,
            CoefficientField::parse("expr:1 + 0.5*sin(2*pi*x)", 1).unwrap(),
            Discretization::FiniteDifference,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = Field::random_band_limited(*o.grid(), 1.0, &mut rng);
        for (s, r) in [(0.5, -0.25), (-0.5, -0.5), (0.75, 0.25)] {
            let two_step =
                o.frac_power_apply(&o.frac_power_apply(&u, 3.0, r).unwrap(), 3.0, s).unwrap();
            let one_step = o.frac_power_apply(&u, 3.0, s + r).unwrap();
            let err = two_step.sub(&one_step).max_norm() / (1.0 + one_step.max_norm());
            assert!(err < 1e-10, "s={s} r={r}: err {err:.3e}");
        }
    }

    #[test]
    fn semigroup_law_and_constant_decay() {
        let o = op(
            1,
            1,
            16,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FourierSymbol,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = Field::random_band_limited(*o.grid(), 1.0, &mut rng);
        let (gamma, lambda) = (4.0, 0.5);
        let ab = o
            .semigroup_apply(&o.semigroup_apply(&u, gamma, lambda, 0.3).unwrap(), gamma, lambda, 0.7)
            .unwrap();
        let once = o.semigroup_apply(&u, gamma, lambda, 1.0).unwrap();
        assert!(ab.sub(&once).max_norm() < 1e-10);
        // e^{tL} c̄ = e^{−γ^λ t} c̄, here γ^λ = 2
        let c = Field::from_fn(*o.grid(), |_| 1.0).unwrap();
        let decayed = o.semigroup_apply(&c, gamma, lambda, 1.0).unwrap();
        assert!(decayed.sub(&c.scale((-2.0f64).exp())).max_norm() < 1e-12);
        assert!(o.semigroup_apply(&u, gamma, lambda, -0.1).is_err());
        assert!(o.semigroup_apply(&u, gamma, 1.5, 0.1).is_err());
    }

    #[test]
    fn alpha_takes_eigenvalues_to_their_root() {
        let grid = Grid::new(1, 1, 8, BoundaryCondition::Periodic).unwrap();
        let o = EllipticOperator::new(
            grid,
            CoefficientField::identity(),
            0.5,
            Discretization::FourierSymbol,
        )
        .unwrap();
        for (mu, nu) in o.eigenvalues().iter().zip(o.effective_eigenvalues()) {
            assert!((mu.sqrt() - nu).abs() < 1e-13);
        }
    }

    #[test]
    fn fourier_path_rejects_bad_configs() {
        let g = Grid::new(1, 1, 8, BoundaryCondition::Periodic).unwrap();
        let variable = CoefficientField::parse("expr:1 + 0.5*sin(2*pi*x)", 1).unwrap();
        assert!(EllipticOperator::new(g, variable, 1.0, Discretization::FourierSymbol).is_err());
        let gd = Grid::new(1, 1, 8, BoundaryCondition::DirichletBox).unwrap();
        assert!(EllipticOperator::new(
            gd,
            CoefficientField::identity(),
            1.0,
            Discretization::FourierSymbol
        )
        .is_err());
        let gp = Grid::new(1, 1, 8, BoundaryCondition::Periodic).unwrap();
        assert!(EllipticOperator::new(
            gp,
            CoefficientField::identity(),
            1.5,
            Discretization::FiniteDifference
        )
        .is_err());
    }

    #[test]
    fn d2_mixed_coefficients_assemble_symmetric() {
        let grid = Grid::new(2, 1, 6, BoundaryCondition::Periodic).unwrap();
        let coeffs = CoefficientField::matrix_fn(|x| {
            let b = 0.25 * (TWO_PI * x[0]).sin() * (TWO_PI * x[1]).cos();
            [[2.0, b], [b, 1.0]]
        });
        let o =
            EllipticOperator::new(grid, coeffs, 1.0, Discretization::FiniteDifference).unwrap();
        let mat = o.fd_matrix().unwrap();
        let mut asym = 0.0f64;
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                asym = asym.max((mat[[i, j]] - mat[[j, i]]).abs());
            }
        }
        assert!(asym < 1e-12, "asymmetry {asym:.3e}");
        let c = Field::from_fn(grid, |_| 1.0).unwrap();
        assert!(o.apply(&c).unwrap().max_norm() < 1e-10);
    }

    #[test]
    fn d2_fourier_mixed_symbol() {
        // A cos(2π(x₁+x₂)) = 4π² (a₁₁+2a₁₂+a₂₂) cos(2π(x₁+x₂)) for constant a
        let grid = Grid::new(2, 1, 8, BoundaryCondition::Periodic).unwrap();
        let a = [[2.0, 0.5], [0.5, 1.0]];
        let o = EllipticOperator::new(
            grid,
            CoefficientField::constant_matrix(a).unwrap(),
            1.0,
            Discretization::FourierSymbol,
        )
        .unwrap();
        let u = Field::from_fn(grid, |x| (TWO_PI * (x[0] + x[1])).cos()).unwrap();
        let au = o.apply(&u).unwrap();
        let lam = 4.0 * std::f64::consts::PI * std::f64::consts::PI * (2.0 + 1.0 + 1.0);
        assert!(au.sub(&u.scale(lam)).max_norm() < 1e-9);
    }

    #[test]
    fn smoothing_bound_holds() {
        let o = op(
            1,
            1,
            32,
            BoundaryCondition::Periodic,
            CoefficientField::identity(),
            Discretization::FiniteDifference,
        );
        for n in [1u32, 2, 3] {
            for t in [0.1, 1.0] {
                let (lhs, bound) = o.smoothing_margin(2.0, 0.5, t, n);
                assert!(lhs <= bound, "n={n} t={t}: {lhs} > {bound}");
            }
        }
    }

    #[test]
    fn dirichlet_roundtrip_keeps_boundary_zero() {
        let o = op(
            1,
            1,
            8,
            BoundaryCondition::DirichletBox,
            CoefficientField::identity(),
            Discretization::FiniteDifference,
        );
        let u = Field::from_fn(*o.grid(), |x| (std::f64::consts::PI * x[0]).sin()).unwrap();
        let c = o.to_spectral(&u).unwrap();
        let back = o.to_physical(&c).unwrap();
        assert!(back.sub(&u).max_norm() < 1e-10);
        assert_eq!(back.values()[0], 0.0);
    }
}
