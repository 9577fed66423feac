//! Staggered-grid discretization of the first-order Dirac operator.
//!
//! The upper component lives on x_j = xmin + jh and the lower one half a
//! step away. Interleaving them gives a symmetric tridiagonal matrix whose
//! derivative coupling is a two-point difference between neighbours of
//! opposite parity, so there are no low-energy doublers.
//!
//! Each box edge clamps one component. The choice follows the sign of the
//! mass term there: clamping the other component would admit a spurious
//! zero-energy state bound to the wall.

use alloc::vec::Vec;

use super::tridiag::SymTridiagonal;
use crate::error::{Error, Result};
use crate::model::{Domain, Eigenpair, Problem, Spinor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub n_points: usize,
    /// Always true for the matrix oracle; kept explicit in reports.
    pub staggered: bool,
}

impl Grid {
    pub fn new(xmin: f64, xmax: f64, n_points: usize) -> Result<Self> {
        if n_points < 16 {
            return Err(Error::InvalidGrid("need at least 16 points"));
        }
        if !(xmax > xmin) || !xmin.is_finite() || !xmax.is_finite() {
            return Err(Error::InvalidGrid("need finite xmin < xmax"));
        }
        Ok(Grid { xmin, xmax, n_points, staggered: true })
    }

    /// Grid on (0, xmax] whose first lower-component site sits at h/2 from
    /// the origin, so the implicit zero falls exactly on x = 0.
    pub fn half_line(xmax: f64, n_points: usize) -> Result<Self> {
        if !(xmax > 0.0) {
            return Err(Error::InvalidGrid("half-line box needs xmax > 0"));
        }
        let h = xmax / (n_points as f64 - 0.5);
        Grid::new(0.5 * h, xmax, n_points)
    }

    /// Box of half-width `half` around `center`.
    pub fn centered(center: f64, half: f64, n_points: usize) -> Result<Self> {
        Grid::new(center - half, center + half, n_points)
    }

    pub fn step(&self) -> f64 {
        (self.xmax - self.xmin) / (self.n_points - 1) as f64
    }

    pub fn site(&self, j: usize) -> f64 {
        self.xmin + self.step() * j as f64
    }

    pub fn sites(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.site(j)).collect()
    }

    /// Same step, box twice as long (about the centre, or away from the
    /// origin for half-line grids).
    pub fn doubled_box(&self, half_line: bool) -> Result<Self> {
        let n = 2 * self.n_points - 1;
        if half_line {
            let h = self.step();
            Grid::new(self.xmin, self.xmin + h * (n - 1) as f64, n)
        } else {
            let c = 0.5 * (self.xmin + self.xmax);
            let half = self.xmax - c;
            Grid::new(c - 2.0 * half, c + 2.0 * half, n)
        }
    }

    /// Same box, half the step. Half-line grids keep the h/2 offset.
    pub fn halved_step(&self, half_line: bool) -> Result<Self> {
        if half_line {
            Grid::half_line(self.xmax, 2 * self.n_points)
        } else {
            Grid::new(self.xmin, self.xmax, 2 * self.n_points - 1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    BoxDirichlet,
    /// Regular solution at the origin, behaving like x^exponent.
    HalfLineRegular {
        exponent: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteHamiltonian {
    pub grid: Grid,
    pub boundary: Boundary,
    pub matrix: SymTridiagonal,
    /// The upper component vanishes at xmin − h; lower sites are then
    /// shifted to x_j − h/2. Otherwise the lower one vanishes at xmin − h/2.
    pub clamp_upper_left: bool,
    /// The lower component vanishes at xmax + h/2; otherwise the upper one
    /// vanishes at xmax + h.
    pub clamp_lower_right: bool,
    /// Largest mismatch between the two independently assembled copies of
    /// each off-diagonal entry.
    pub asymmetry: f64,
}

impl DiscreteHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Dense copy, for inspection of small systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = alloc::vec![alloc::vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.matrix.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.matrix.off[i];
                m[i + 1][i] = self.matrix.off[i];
            }
        }
        m
    }
}

/// Leading exponent of the regular solution at x → 0⁺: the largest
/// eigenvalue of lim x·C(x) for the system ψ′ = C(x)ψ.
pub fn frobenius_exponent(problem: &Problem, energy: f64) -> Result<f64> {
    let x0 = 1e-9;
    let r = residue_matrix(problem, energy, x0)?;
    let p = 0.5 * (r[0][0] + r[1][1]);
    let q = 0.5 * (r[0][0] - r[1][1]);
    let disc = q * q + r[0][1] * r[1][0];
    Ok(if disc >= 0.0 { p + libm::sqrt(disc) } else { p })
}

pub(crate) fn residue_matrix(problem: &Problem, energy: f64, x: f64) -> Result<[[f64; 2]; 2]> {
    let c = system_matrix(problem, energy, x)?;
    Ok([[x * c[0][0], x * c[0][1]], [x * c[1][0], x * c[1][1]]])
}

/// C(x, E) with ψ′ = Cψ for the stationary equation Hψ = Eψ.
pub(crate) fn system_matrix(problem: &Problem, energy: f64, x: f64) -> Result<[[f64; 2]; 2]> {
    let k = problem.coefficients(x)?;
    let s = problem.kinetic_sign() * problem.constants.c_hbar();
    Ok([[-k.mass / s, (energy - k.lower) / s], [(k.upper - energy) / s, k.mass / s]])
}

/// Layout of the unknowns. Upper sites are always x_j, j = 0..N−1; lower
/// sites sit h/2 to the left or right of them, with one more or one fewer
/// when both walls clamp the same component.
fn lower_sites(grid: &Grid, clamp_upper_left: bool, clamp_lower_right: bool) -> Vec<f64> {
    let n = grid.n_points;
    let h = grid.step();
    let first = if clamp_upper_left { grid.xmin - 0.5 * h } else { grid.xmin + 0.5 * h };
    let count = match (clamp_upper_left, clamp_lower_right) {
        (true, false) => n + 1,
        (false, true) => n - 1,
        _ => n,
    };
    (0..count).map(|k| first + h * k as f64).collect()
}

pub fn build_hamiltonian(problem: &Problem, grid: &Grid) -> Result<DiscreteHamiltonian> {
    problem.check()?;
    let domain = problem.shape.domain();
    if !domain.contains(grid.xmin) || !domain.contains(grid.xmax) {
        return Err(Error::OutOfDomain { x: if domain.contains(grid.xmin) { grid.xmax } else { grid.xmin } });
    }
    let sigma = problem.kinetic_sign();
    let (clamp_upper_left, boundary) = match domain {
        Domain::HalfLine => (false, Boundary::HalfLineRegular { exponent: frobenius_exponent(problem, 0.0)? }),
        _ => (sigma * problem.coefficients(grid.xmin)?.mass > 0.0, Boundary::BoxDirichlet),
    };
    let clamp_lower_right = sigma * problem.coefficients(grid.xmax)?.mass > 0.0;
    // Lower sites just outside a bounded domain take the edge values.
    let at = |x: f64| match problem.coefficients(x) {
        Err(Error::OutOfDomain { .. }) => problem.coefficients(x.clamp(grid.xmin, grid.xmax)),
        r => r,
    };
    let h = grid.step();
    let sk = sigma * problem.constants.c_hbar() / h;
    let lower = lower_sites(grid, clamp_upper_left, clamp_lower_right);
    let mut nodes: Vec<(bool, f64)> = (0..grid.n_points).map(|j| (true, grid.site(j))).collect();
    nodes.extend(lower.iter().map(|&x| (false, x)));
    nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut diag = Vec::with_capacity(nodes.len());
    for &(upper, x) in &nodes {
        let k = at(x)?;
        diag.push(if upper { k.upper } else { k.lower });
    }
    let mut off = Vec::with_capacity(nodes.len() - 1);
    let mut asym = 0.0f64;
    for w in nodes.windows(2) {
        let ((up_left, xl), (_, xr)) = (w[0], w[1]);
        let xlow = if up_left { xr } else { xl };
        let m = 0.5 * at(xlow)?.mass;
        // Upper row: (−σcħ d/dx + M) acting on the lower neighbour.
        // Lower row: (σcħ d/dx + M) acting on the upper neighbour.
        let (from_upper, from_lower) = if up_left { (-sk + m, -sk + m) } else { (sk + m, m + sk) };
        asym = asym.max((from_upper - from_lower).abs());
        off.push(from_upper);
    }
    Ok(DiscreteHamiltonian {
        grid: *grid,
        boundary,
        matrix: SymTridiagonal::new(diag, off)?,
        clamp_upper_left,
        clamp_lower_right,
        asymmetry: asym,
    })
}

/// Eigenvalues in the window, ascending.
pub fn eigenvalues(h: &DiscreteHamiltonian, window: (f64, f64)) -> Vec<f64> {
    h.matrix.eigenvalues_in(window.0, window.1)
}

/// Indices of the `count` eigenvalues of smallest |E|, returned in ascending
/// order of E.
pub fn lowest_abs(values: &[f64], count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    v.truncate(count);
    v.sort_by(f64::total_cmp);
    v
}

/// Up to `count` eigenpairs with the smallest |E| inside the window, sorted
/// by energy and normalized to ∫(|ψ₁|² + |ψ₂|²) dx = 1.
pub fn eigen_solve(h: &DiscreteHamiltonian, window: (f64, f64), count: usize) -> Result<Vec<Eigenpair>> {
    if !(window.1 > window.0) {
        return Err(Error::InvalidParameter { name: "window", reason: "must be a nonempty interval" });
    }
    let chosen = lowest_abs(&eigenvalues(h, window), count);
    let gap = 1e-7 * h.matrix.norm().max(1.0);
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(chosen.len());
    for (i, &e) in chosen.iter().enumerate() {
        let near: Vec<&[f64]> =
            (0..i).filter(|&k| (chosen[k] - e).abs() < gap).map(|k| vectors[k].as_slice()).collect();
        let z = h.matrix.eigenvector(e, &near)?;
        out.push(to_eigenpair(h, e, &z));
        vectors.push(z);
    }
    Ok(out)
}

fn to_eigenpair(ham: &DiscreteHamiltonian, energy: f64, z: &[f64]) -> Eigenpair {
    let grid = &ham.grid;
    let n = grid.n_points;
    // Unknowns alternate; the first is a lower site exactly when the upper
    // component is clamped on the left.
    let lead = usize::from(ham.clamp_upper_left);
    let up = |j: usize| z[2 * j + lead];
    let low = |k: isize| -> f64 {
        let i = 2 * k + 1 - lead as isize;
        if i < 0 {
            0.0
        } else {
            z.get(i as usize).copied().unwrap_or(0.0)
        }
    };
    // Sign convention: the largest upper-component sample is positive.
    let mut big = 0.0f64;
    for j in 0..n {
        if up(j).abs() > big.abs() {
            big = up(j);
        }
    }
    let k = if big < 0.0 { -1.0 } else { 1.0 };
    let x = grid.sites();
    let upper: Vec<f64> = (0..n).map(|j| k * up(j)).collect();
    // Lower index k sits at x_k + h/2 (or x_k − h/2 when shifted left).
    let shift = lead as isize;
    let lower: Vec<f64> = (0..n as isize).map(|j| 0.5 * k * (low(j - 1 + shift) + low(j + shift))).collect();
    let mut spinor = Spinor { x, upper, lower };
    spinor.scale(1.0 / libm::sqrt(spinor.norm_sq()));
    let norm = spinor.norm_sq();
    Eigenpair { energy, spinor, diagonal: None, norm }
}
