//! Diagnostics built on the oracle: level drift under box growth and grid
//! refinement, and residuals of the ladder relations on sampled spinors.

use alloc::vec::Vec;

use super::matrix::{build_hamiltonian, eigenvalues, Grid};
use crate::error::{Error, Result};
use crate::factorize::{FactorizationData, Superpotential};
use crate::model::{Domain, Eigenpair, Problem, Shape};
use crate::numeric;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    NotConverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Base-grid levels ordered by |E|.
    pub levels: Vec<f64>,
    /// Relative drift of each level when the box is doubled at fixed step.
    pub box_drift: Vec<f64>,
    /// Relative drift of each level when the step is halved in a fixed box.
    pub step_drift: Vec<f64>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    pub fn max_drift(&self) -> f64 {
        self.box_drift.iter().chain(&self.step_drift).fold(0.0, |a, &b| a.max(b))
    }
}

/// Drift threshold for a converged level.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;
/// Energies below this magnitude are compared absolutely.
const DRIFT_FLOOR: f64 = 1e-6;

fn by_magnitude(problem: &Problem, grid: &Grid, window: (f64, f64), count: usize) -> Result<Vec<f64>> {
    let h = build_hamiltonian(problem, grid)?;
    let mut v = eigenvalues(&h, window);
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v.truncate(count);
    Ok(v)
}

fn drift(base: &[f64], other: &[f64]) -> Vec<f64> {
    base.iter()
        .enumerate()
        .map(|(i, e)| match other.get(i) {
            Some(o) => (o.abs() - e.abs()).abs() / e.abs().max(DRIFT_FLOOR),
            None => f64::INFINITY,
        })
        .collect()
}

/// Recomputes the `count` lowest-|E| levels in `window` after doubling the
/// box and after halving the step. Levels are compared by magnitude so that
/// exact ±E pairs cannot swap places.
pub fn convergence_probe(
    problem: &Problem,
    base: &Grid,
    window: (f64, f64),
    count: usize,
) -> Result<ConvergenceReport> {
    let half_line = problem.shape.domain() == Domain::HalfLine;
    let levels = by_magnitude(problem, base, window, count)?;
    let wide = by_magnitude(problem, &base.doubled_box(half_line)?, window, count)?;
    let fine = by_magnitude(problem, &base.halved_step(half_line)?, window, count)?;
    let box_drift = drift(&levels, &wide);
    let step_drift = drift(&levels, &fine);
    let ok = !levels.is_empty() && box_drift.iter().chain(&step_drift).all(|&d| d < CONVERGENCE_TOLERANCE);
    Ok(ConvergenceReport {
        levels,
        box_drift,
        step_drift,
        verdict: if ok { Verdict::Converged } else { Verdict::NotConverged },
    })
}

/// ‖Aψ̃₁ − w₁ψ̃₂‖/‖ψ̃₂‖ and ‖A†ψ̃₂ − w₂ψ̃₁‖/‖ψ̃₁‖. When one diagonal
/// component vanishes (a zero mode), the residual on that side is the
/// annihilation residual normalized by the surviving component and the other
/// side is `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntertwineResidual {
    pub forward: Option<f64>,
    pub backward: Option<f64>,
}

/// Samples this close to either box edge are left out of the norms.
const EDGE_MARGIN: usize = 2;
/// A component is treated as absent below this fraction of the other. On
/// the grid the annihilated component of a zero mode keeps an O(h²)
/// remnant, far above round-off.
const VANISHING: f64 = 1e-2;

/// Start of the norm window on the half-line: half the ground-state peak
/// τ̃/f. Nearer the 1/x singularity a uniform grid only converges at the
/// order set by the Frobenius exponent.
fn singular_cut(fact: &FactorizationData, e: f64) -> f64 {
    match fact.shape {
        Shape::InverseLinear { q } => {
            let f = fact.offset.eval(e).abs();
            if f > 0.0 {
                0.5 * (fact.kappa * q).abs() / f
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

pub fn intertwine_check(eig: &Eigenpair, fact: &FactorizationData) -> Result<IntertwineResidual> {
    let x = &eig.spinor.x;
    let n = x.len();
    if n < 2 * EDGE_MARGIN + 3 {
        return Err(Error::InvalidGrid("too few samples for the intertwining check"));
    }
    let mix = fact.mixing()?;
    let (t1, t2): (Vec<f64>, Vec<f64>) = match &eig.diagonal {
        Some(d) => (d.upper.clone(), d.lower.clone()),
        None => eig
            .spinor
            .upper
            .iter()
            .zip(&eig.spinor.lower)
            .map(|(&a, &b)| {
                let t = mix.to_diagonal([a, b]);
                (t[0], t[1])
            })
            .unzip(),
    };
    let w = fact.superpotential(eig.energy);
    let mut wv = Vec::with_capacity(n);
    for &xi in x {
        wv.push(w.eval(xi)?.0);
    }
    let ch = fact.c_hbar();
    let (d1, d2) = (numeric::derivative(x, &t1), numeric::derivative(x, &t2));
    let lad = fact.ladder(eig.energy);
    let cut = singular_cut(fact, eig.energy);
    let first = x.iter().position(|&v| v >= cut).unwrap_or(n).max(EDGE_MARGIN);
    if first + 3 > n - EDGE_MARGIN {
        return Err(Error::InvalidGrid("too few samples for the intertwining check"));
    }
    let r = first..n - EDGE_MARGIN;
    let xs = &x[r.clone()];
    let a1: Vec<f64> = r.clone().map(|i| ch * d1[i] + wv[i] * t1[i]).collect();
    let a2: Vec<f64> = r.clone().map(|i| -ch * d2[i] + wv[i] * t2[i]).collect();
    let n1 = numeric::l2_norm(xs, &t1[r.clone()]);
    let n2 = numeric::l2_norm(xs, &t2[r.clone()]);
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::ZeroDivisor("spinor norm"));
    }
    let fwd: Vec<f64> = r.clone().zip(&a1).map(|(i, a)| a - lad.w1 * t2[i]).collect();
    let bwd: Vec<f64> = r.clone().zip(&a2).map(|(i, a)| a - lad.w2 * t1[i]).collect();
    if n2 < VANISHING * n1 {
        return Ok(IntertwineResidual { forward: Some(numeric::l2_norm(xs, &a1) / n1), backward: None });
    }
    if n1 < VANISHING * n2 {
        return Ok(IntertwineResidual { forward: None, backward: Some(numeric::l2_norm(xs, &a2) / n2) });
    }
    Ok(IntertwineResidual {
        forward: Some(numeric::l2_norm(xs, &fwd) / n2),
        backward: Some(numeric::l2_norm(xs, &bwd) / n1),
    })
}
