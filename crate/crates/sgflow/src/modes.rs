//! Real trigonometric modes of a periodic grid.
//!
//! The discrete exponentials e^{2πi k·c/M} on an M-point axis pair up (k, −k mod M)
//! into real cos/sin modes. Lattice frequencies are ξ = k/N cycles per unit length,
//! so the (negative) Laplace symbol is 4π²|ξ|² and a constant-coefficient operator
//! −div(a∇·) has symbol 4π² ξᵀaξ on these modes. Self-paired residues (k ≡ −k,
//! i.e. k ∈ {0, M/2}) carry only the cosine; its sine vanishes on the grid.

use ndarray::Array1;

use crate::grid::{BoundaryCondition, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// One real mode: signed per-axis frequency indices (|k_j| ≤ M/2) plus cos/sin flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealMode {
    pub k: [i64; 2],
    pub kind: TrigKind,
}

impl RealMode {
    /// |ξ|² = Σ (k_j/N)², the frequency seen by a unit-coefficient symbol.
    pub fn freq_sq(&self, grid: &Grid) -> f64 {
        let nn = grid.period() as f64;
        let mut s = 0.0;
        for ax in 0..grid.d() {
            let xi = self.k[ax] as f64 / nn;
            s += xi * xi;
        }
        s
    }
}

fn signed(r: i64, m: i64) -> i64 {
    if r <= m / 2 {
        r
    } else {
        r - m
    }
}

/// Whether residue r is its own partner under k → −k (mod M).
fn self_paired(r: i64, m: i64) -> bool {
    r == 0 || (m % 2 == 0 && r == m / 2)
}

/// All M^d real modes of a periodic grid, sorted by |ξ|² (ties: lexicographic k,
/// cos before sin). The ordering is deterministic and shared by every consumer.
pub fn periodic_modes(grid: &Grid) -> Vec<RealMode> {
    assert_eq!(grid.bc(), BoundaryCondition::Periodic);
    let m = grid.points_per_axis() as i64;
    let d = grid.d();
    let mut modes = Vec::with_capacity(grid.num_nodes());
    let axis_range: Vec<i64> = (0..m).collect();
    let residues: Vec<[i64; 2]> = match d {
        1 => axis_range.iter().map(|&r| [r, 0]).collect(),
        _ => {
            let mut v = Vec::with_capacity((m * m) as usize);
            for &r1 in &axis_range {
                for &r2 in &axis_range {
                    v.push([r1, r2]);
                }
            }
            v
        }
    };
    for r in residues {
        // Each {k, −k} orbit is emitted once, at its lexicographically smaller residue.
        let neg = [(m - r[0]) % m, if d == 2 { (m - r[1]) % m } else { 0 }];
        if neg < r {
            continue;
        }
        let k = [signed(r[0], m), if d == 2 { signed(r[1], m) } else { 0 }];
        modes.push(RealMode { k, kind: TrigKind::Cos });
        let self_pair = self_paired(r[0], m) && (d == 1 || self_paired(r[1], m));
        if !self_pair {
            modes.push(RealMode { k, kind: TrigKind::Sin });
        }
    }
    modes.sort_by(|a, b| {
        a.freq_sq(grid)
            .partial_cmp(&b.freq_sq(grid))
            .unwrap()
            .then(a.k.cmp(&b.k))
            .then_with(|| match (a.kind, b.kind) {
                (TrigKind::Cos, TrigKind::Sin) => std::cmp::Ordering::Less,
                (TrigKind::Sin, TrigKind::Cos) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
    });
    debug_assert_eq!(modes.len(), grid.num_nodes());
    modes
}

/// Sampled mode, L²-normalized against the h^d rectangle measure:
/// h^d Σ ψ² = 1 exactly in exact arithmetic.
pub fn mode_values(grid: &Grid, mode: &RealMode) -> Array1<f64> {
    let m = grid.points_per_axis() as i64;
    let vol = (grid.period() as f64).powi(grid.d() as i32);
    let self_pair =
        self_paired(mode.k[0].rem_euclid(m), m) && self_paired(mode.k[1].rem_euclid(m), m);
    let norm = if self_pair { (1.0 / vol).sqrt() } else { (2.0 / vol).sqrt() };
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Array1::zeros(grid.num_nodes());
    for flat in 0..grid.num_nodes() {
        let c = grid.coords(flat);
        // k·c mod M keeps the angle in [0, 2π) so large products never lose precision
        let dot = (mode.k[0] * c[0] as i64 + mode.k[1] * c[1] as i64).rem_euclid(m);
        let angle = two_pi * dot as f64 / m as f64;
        out[flat] = match mode.kind {
            TrigKind::Cos => angle.cos(),
            TrigKind::Sin => angle.sin(),
        } * norm;
    }
    out
}
