//! Two-sided shooting on the first-order system ψ′ = C(x, E)ψ.
//!
//! Both ends start on the locally decaying solution (the Frobenius solution
//! at a regular singular origin), are integrated with classical RK4 and
//! renormalized after every step. The matching function is the determinant
//! of the two unit vectors at the match point; it vanishes exactly when the
//! solutions are parallel.

use alloc::vec::Vec;

use super::matrix::{residue_matrix, system_matrix, Boundary, Grid};
use crate::error::{Error, Result};
use crate::model::{Domain, Problem};
use crate::numeric;

/// Where and how to shoot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingSetup {
    pub grid: Grid,
    pub boundary: Boundary,
    pub match_point: f64,
}

impl ShootingSetup {
    /// Picks the match point where the solutions are least exponential at
    /// the window centre, kept away from the box edges.
    pub fn new(problem: &Problem, grid: Grid, window: (f64, f64)) -> Result<Self> {
        let boundary = match problem.shape.domain() {
            Domain::HalfLine => Boundary::HalfLineRegular {
                exponent: super::matrix::frobenius_exponent(problem, 0.5 * (window.0 + window.1))?,
            },
            _ => Boundary::BoxDirichlet,
        };
        let e = 0.5 * (window.0 + window.1);
        let lo = grid.xmin + 0.1 * (grid.xmax - grid.xmin);
        let hi = grid.xmax - 0.1 * (grid.xmax - grid.xmin);
        let mut best = (f64::INFINITY, 0.5 * (lo + hi));
        let samples = 400;
        for i in 0..=samples {
            let x = lo + (hi - lo) * i as f64 / samples as f64;
            let c = system_matrix(problem, e, x)?;
            let mu2 = c[0][0] * c[0][0] + c[0][1] * c[1][0];
            if mu2 < best.0 {
                best = (mu2, x);
            }
        }
        Ok(ShootingSetup { grid, boundary, match_point: best.1 })
    }
}

/// Eigenvector of a traceless-ish 2×2 matrix for eigenvalue `mu`, chosen by
/// a rule that depends only on the sign of `mu·c₀₀` so the start vector
/// varies continuously with the energy.
fn start_vector(c: &[[f64; 2]; 2], mu: f64) -> [f64; 2] {
    let v = if mu * c[0][0] < 0.0 { [c[0][1], mu - c[0][0]] } else { [mu - c[1][1], c[1][0]] };
    let n = libm::hypot(v[0], v[1]);
    if n == 0.0 || !n.is_finite() {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Real eigenvalue pair of a 2×2 matrix, or `None` when complex.
fn real_eigs(c: &[[f64; 2]; 2]) -> Option<(f64, f64)> {
    let p = 0.5 * (c[0][0] + c[1][1]);
    let q = 0.5 * (c[0][0] - c[1][1]);
    let disc = q * q + c[0][1] * c[1][0];
    (disc >= 0.0).then(|| {
        let r = libm::sqrt(disc);
        (p - r, p + r)
    })
}

fn rk4_step(problem: &Problem, e: f64, x: f64, h: f64, y: [f64; 2]) -> Result<[f64; 2]> {
    let f = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        let c = system_matrix(problem, e, x)?;
        Ok([c[0][0] * y[0] + c[0][1] * y[1], c[1][0] * y[0] + c[1][1] * y[1]])
    };
    let k1 = f(x, y)?;
    let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
    let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
    let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
    let mut out = [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    let n = libm::hypot(out[0], out[1]);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::SolverFailure("shooting solution overflowed"));
    }
    out[0] /= n;
    out[1] /= n;
    Ok(out)
}

fn integrate(problem: &Problem, e: f64, mesh: &[f64], mut y: [f64; 2]) -> Result<[f64; 2]> {
    for w in mesh.windows(2) {
        y = rk4_step(problem, e, w[0], w[1] - w[0], y)?;
    }
    Ok(y)
}

fn uniform_mesh(from: f64, to: f64, h: f64) -> Vec<f64> {
    let steps = libm::ceil((to - from).abs() / h).max(1.0) as usize;
    (0..=steps).map(|i| from + (to - from) * i as f64 / steps as f64).collect()
}

/// Matching determinant det[ψ_left, ψ_right] at the match point.
pub fn shoot(problem: &Problem, e: f64, setup: &ShootingSetup) -> Result<f64> {
    let g = &setup.grid;
    let h = g.step();
    let xm = setup.match_point;
    let left = match setup.boundary {
        Boundary::BoxDirichlet => {
            let c = system_matrix(problem, e, g.xmin)?;
            let y0 = match real_eigs(&c) {
                Some((_, grow)) if grow > 0.0 => start_vector(&c, grow),
                _ => [0.0, 1.0],
            };
            integrate(problem, e, &uniform_mesh(g.xmin, xm, h), y0)?
        }
        Boundary::HalfLineRegular { .. } => {
            let x0 = 1e-6f64.min(1e-3 * h);
            let r = residue_matrix(problem, e, x0)?;
            let y0 = match real_eigs(&r) {
                Some((_, top)) => start_vector(&r, top),
                None => [1.0, 0.0],
            };
            // Geometric steps out of the singular point, then uniform.
            let mut mesh = Vec::new();
            let mut x = x0;
            while x < h.min(xm) {
                mesh.push(x);
                x *= 1.05;
            }
            let start = x.min(xm);
            mesh.extend(uniform_mesh(start, xm, h));
            integrate(problem, e, &mesh, y0)?
        }
    };
    let c = system_matrix(problem, e, g.xmax)?;
    let y0 = match real_eigs(&c) {
        Some((decay, _)) if decay < 0.0 => start_vector(&c, decay),
        _ => [1.0, 0.0],
    };
    let right = integrate(problem, e, &uniform_mesh(g.xmax, xm, h), y0)?;
    Ok(left[0] * right[1] - left[1] * right[0])
}

/// Bound-state energies in the window: sign changes of the matching
/// determinant on an energy mesh, refined by bisection to 1e-10. The mesh
/// is doubled (up to three times) when it is coarse compared with the
/// spacing of the roots found.
pub fn find_levels_shooting(
    problem: &Problem,
    window: (f64, f64),
    setup: &ShootingSetup,
    nodes: usize,
) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let mut nodes = nodes.max(2);
    let mut failure = None;
    let mut roots;
    let mut doublings = 0;
    loop {
        let f = |e: f64| match shoot(problem, e, setup) {
            Ok(v) => v,
            Err(err) => {
                failure = Some(err);
                f64::NAN
            }
        };
        roots = numeric::scan_roots(f, lo, hi, nodes, 1e-10);
        if let Some(err) = failure.take() {
            return Err(err);
        }
        let step = (hi - lo) / (nodes - 1) as f64;
        let min_gap = roots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if doublings >= 3 || step <= 0.25 * min_gap {
            break;
        }
        nodes = 2 * nodes - 1;
        doublings += 1;
    }
    Ok(roots)
}
