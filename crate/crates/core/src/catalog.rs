//! Closed-form spectra of the solvable systems, stability predicates, and
//! grid sizing for checking them against the oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::factorize::{mixing_matrix, reduce_2plus1, FactorizationData};
use crate::model::{
    validate, Constants, CouplingBranch, Couplings, Domain, Level, LevelBranch, Mode2p1, Problem, Shape, Spin,
};
use crate::oracle::{build_hamiltonian, eigenvalues, find_levels_shooting, Grid, ShootingSetup};
use crate::susy::{Family, SpectralProblem};

fn pair(n: usize, center: f64, half: f64) -> Vec<Level> {
    if half == 0.0 {
        return vec![Level { n, energy: center, branch: LevelBranch::Single, multiplicity: 1 }];
    }
    let multiplicity = if n == 0 { 1 } else { 2 };
    vec![
        Level { n, energy: center - half, branch: LevelBranch::Minus, multiplicity },
        Level { n, energy: center + half, branch: LevelBranch::Plus, multiplicity },
    ]
}

fn stable_general(c: &Couplings) -> Result<(f64, f64, f64)> {
    let r = validate(c)?;
    if r.branch != CouplingBranch::General {
        return Err(Error::UnsupportedBranch("closed form needs a nonzero scalar coupling"));
    }
    let tau = r.tau.ok_or(Error::UnstableRegime { delta: r.delta })?;
    Ok((tau, c.zeta2 / c.zeta1, c.zeta3 / c.zeta1))
}

/// Superpotential W = a·x + b(E).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearProblem {
    pub a: f64,
    pub couplings: Couplings,
    pub constants: Constants,
}

impl LinearProblem {
    /// Profile s = a·x/κ, so that κ·s = a·x (κ = τζ₁ on the general branch).
    pub fn shape(&self) -> Result<Shape> {
        let kappa = mixing_matrix(&self.couplings)?.eigvals[1];
        Ok(Shape::Linear { a: self.a / kappa })
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem::one_plus_one(self.constants, self.couplings, self.shape()?))
    }

    pub fn spectral(&self) -> Result<SpectralProblem> {
        SpectralProblem::new(FactorizationData::new(&self.couplings, &self.constants, &self.shape()?)?)
    }
}

/// Levels of the linear problem as printed, both signs of the root. At
/// n = 0 the two signs are distinct unless ε = mc²ζ; only one of them
/// is a zero mode of the factorized problem.
pub fn linear_spectrum(p: &LinearProblem, n: usize) -> Result<Vec<Level>> {
    let k = &p.constants;
    let c = &p.couplings;
    let m = k.rest_energy() + c.m_shift;
    let ch = k.c_hbar();
    let a = p.a.abs();
    if validate(c)?.branch == CouplingBranch::PurePseudoscalar {
        // w₁w₂ = E² − M² against wₙ = 2|a|cħn.
        return Ok(pair(n, c.e_shift, libm::sqrt(m * m + 2.0 * a * ch * n as f64)));
    }
    let (tau, z, l) = stable_general(c)?;
    let eps = c.eps;
    let s = 1.0 + z * z;
    let center = -l * (m + z * eps) / s;
    let rad = tau * tau * ((eps - m * z) * (eps - m * z) + 2.0 * a * ch * n as f64 * s);
    Ok(pair(n, c.e_shift + center, libm::sqrt(rad) / s))
}

/// Superpotential W = −τ̃/x + f(E) with τ̃ = qτ, on x > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseLinearProblem {
    pub q: f64,
    pub couplings: Couplings,
    pub constants: Constants,
}

impl InverseLinearProblem {
    fn check(&self) -> Result<()> {
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(Error::InvalidParameter { name: "q", reason: "must be positive" });
        }
        Ok(())
    }

    /// Profile s = −q_s/x with κ·q_s = qτ.
    pub fn shape(&self) -> Result<Shape> {
        self.check()?;
        let r = validate(&self.couplings)?;
        let tau = match r.branch {
            CouplingBranch::General => r.tau.ok_or(Error::UnstableRegime { delta: r.delta })?,
            _ => 1.0,
        };
        let kappa = mixing_matrix(&self.couplings)?.eigvals[1];
        Ok(Shape::InverseLinear { q: self.q * tau / kappa })
    }

    pub fn tau_tilde(&self) -> Result<f64> {
        let (tau, _, _) = stable_general(&self.couplings)?;
        Ok(self.q * tau)
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem::one_plus_one(self.constants, self.couplings, self.shape()?))
    }

    pub fn spectral(&self) -> Result<SpectralProblem> {
        SpectralProblem::new(FactorizationData::new(&self.couplings, &self.constants, &self.shape()?)?)
    }
}

/// Levels of the inverse-linear problem. Without an electric part the
/// condition w(E) = wₙ(E) reduces to
/// E² = M² + ε² − (M + ζε)²q²/(qτ + ncħ)²; with ζ = ε = 0 the closed form
/// for an electric admixture is used; anything else goes through the
/// engine.
pub fn inverse_linear_spectrum(p: &InverseLinearProblem, n: usize) -> Result<Vec<Level>> {
    p.check()?;
    let k = &p.constants;
    let c = &p.couplings;
    let (tau, z, l) = stable_general(c)?;
    let m = k.rest_energy() + c.m_shift;
    let nc = n as f64 * k.c_hbar();
    let q = p.q;
    let f = (m + z * c.eps) / tau;
    if !(f > 0.0) && l == 0.0 {
        return Err(Error::NoRoot { n });
    }
    if l == 0.0 {
        let g = (m + z * c.eps) * q / (q * tau + nc);
        let top = m * m + c.eps * c.eps;
        let mut e2 = top - g * g;
        // At n = 0 with ε = 0 the two terms cancel exactly.
        if e2 < 0.0 && e2 > -1e-14 * top {
            e2 = 0.0;
        }
        if e2 < 0.0 {
            return Err(Error::NoRoot { n });
        }
        return Ok(pair(n, c.e_shift, libm::sqrt(e2)));
    }
    if z == 0.0 && c.eps == 0.0 {
        let tt = q * tau;
        let big = nc + tt;
        let den = (q * l) * (q * l) + big * big;
        let half = big * libm::sqrt(big * big - tt * tt);
        let center = -q * q * l;
        let mut v = pair(n, c.e_shift + m * center / den, m * half / den);
        // A root with f(E) ≤ 0 has no normalizable chain.
        v.retain(|lv| (lv.energy - c.e_shift) * l + m > 0.0);
        if v.is_empty() {
            return Err(Error::NoRoot { n });
        }
        return Ok(v);
    }
    crate::susy::solve_level(&p.spectral()?, n)
}

/// The ℓ = 0 inverse-linear spectrum in the literal form
/// ±(M + ζε)/τ·√(1/τ² − q²/(qτ + ncħ)² + (Mζ − ε)²/(M + εζ)²).
/// It agrees with [`inverse_linear_spectrum`] only when ζ = 0.
pub fn inverse_linear_printed(p: &InverseLinearProblem, n: usize) -> Result<Vec<Level>> {
    p.check()?;
    let k = &p.constants;
    let c = &p.couplings;
    let (tau, z, _) = stable_general(c)?;
    let m = k.rest_energy() + c.m_shift;
    let q = p.q;
    let lead = (m + z * c.eps) / tau;
    let d = q * tau + n as f64 * k.c_hbar();
    let r = (m * z - c.eps) / (m + c.eps * z);
    let rad = 1.0 / (tau * tau) - q * q / (d * d) + r * r;
    if !(rad >= 0.0) {
        return Err(Error::NoRoot { n });
    }
    Ok(pair(n, c.e_shift, (lead * libm::sqrt(rad)).abs()))
}

/// Planar particle in a magnetic field e𝔹 (vector potential eA_y = −e𝔹x),
/// electric field e𝔼 (eA_t = −e𝔼x) and scalar potential Cx.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossedFieldProblem {
    pub b: f64,
    pub efield: f64,
    pub c_scalar: f64,
    pub k: f64,
    pub s: Spin,
    pub constants: Constants,
}

impl CrossedFieldProblem {
    pub fn mode(&self) -> Result<Mode2p1> {
        if self.b == 0.0 || !self.b.is_finite() {
            return Err(Error::InvalidParameter { name: "B", reason: "must be nonzero" });
        }
        Ok(Mode2p1 { k: self.k, s: self.s, lambda1: -self.b, lambda2: self.c_scalar, lambda3: -self.efield })
    }

    /// λ = −C/e𝔹.
    pub fn lambda(&self) -> f64 {
        -self.c_scalar / self.b
    }

    /// ν = 𝔼/𝔹.
    pub fn nu(&self) -> f64 {
        self.efield / self.b
    }

    pub fn shape(&self) -> Shape {
        Shape::Linear { a: 1.0 }
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem::two_plus_one(self.constants, self.mode()?, self.shape()))
    }

    pub fn spectral(&self) -> Result<SpectralProblem> {
        SpectralProblem::new(reduce_2plus1(&self.mode()?, &self.constants, &self.shape())?.data)
    }
}

/// Landau levels in crossed fields as printed, both signs of the root.
pub fn crossed_field_spectrum(p: &CrossedFieldProblem, n: usize) -> Result<Vec<Level>> {
    let mode = p.mode()?;
    let delta = mode.delta();
    let tau = mode.tau().ok_or(Error::UnstableRegime { delta })?;
    if !(delta > 0.0) {
        return Err(Error::UnstableRegime { delta });
    }
    let k = &p.constants;
    let (lam, nu) = (p.lambda(), p.nu());
    let mc2 = k.rest_energy();
    let ck = k.c * p.k;
    let s = 1.0 + lam * lam;
    let center = -nu * (lam * mc2 + ck) / s;
    let t = ck * lam - mc2;
    let rad = tau * tau * (t * t + 2.0 * tau * p.b.abs() * k.c_hbar() * n as f64 * s);
    Ok(pair(n, center, libm::sqrt(rad) / s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Indeterminate,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "Stable",
            Stability::Unstable => "Unstable",
            Stability::Indeterminate => "Indeterminate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub verdict: Stability,
    pub delta: f64,
    pub detail: &'static str,
}

/// Partner Hamiltonians exist (Δ > 0): the sea is stable.
pub const PARTNERS_EXIST: &str = "PARTNERS_EXIST";
/// Δ < 0 rules out the construction, but the criterion is only necessary.
pub const NECESSARY_NOT_SUFFICIENT: &str = "NECESSARY_NOT_SUFFICIENT";
/// Δ = 0 with interaction present: the operators degenerate.
pub const MARGINAL: &str = "MARGINAL";
/// No coupling at all.
pub const NO_INTERACTION: &str = "NO_INTERACTION";

fn verdict_from_delta(delta: f64) -> StabilityVerdict {
    if delta > 0.0 {
        StabilityVerdict { verdict: Stability::Stable, delta, detail: PARTNERS_EXIST }
    } else if delta < 0.0 {
        StabilityVerdict { verdict: Stability::Unstable, delta, detail: NECESSARY_NOT_SUFFICIENT }
    } else {
        StabilityVerdict { verdict: Stability::Indeterminate, delta, detail: MARGINAL }
    }
}

pub fn stability(c: &Couplings) -> StabilityVerdict {
    match validate(c) {
        Err(_) => StabilityVerdict { verdict: Stability::Indeterminate, delta: 0.0, detail: NO_INTERACTION },
        Ok(r) => verdict_from_delta(r.delta),
    }
}

pub fn stability_2plus1(m: &Mode2p1) -> StabilityVerdict {
    if m.lambda1 == 0.0 && m.lambda2 == 0.0 && m.lambda3 == 0.0 {
        return StabilityVerdict { verdict: Stability::Indeterminate, delta: 0.0, detail: NO_INTERACTION };
    }
    verdict_from_delta(m.delta())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepVerdict {
    PairProduction,
    NoPairProduction,
    IndeterminateWindow,
}

impl StepVerdict {
    pub fn name(self) -> &'static str {
        match self {
            StepVerdict::PairProduction => "PairProduction",
            StepVerdict::NoPairProduction => "NoPairProduction",
            StepVerdict::IndeterminateWindow => "IndeterminateWindow",
        }
    }
}

/// Step of height V whose electric part is l times the scalar one. Pairs
/// are produced for l > 1 + 2mc²/V; nothing is predicted in between.
pub fn step_pair_production(l: f64, constants: &Constants, v: f64) -> Result<StepVerdict> {
    if !(v > 0.0) {
        return Err(Error::NonpositiveStep(v));
    }
    let threshold = 1.0 + 2.0 * constants.rest_energy() / v;
    Ok(if l > threshold {
        StepVerdict::PairProduction
    } else if l > 1.0 {
        StepVerdict::IndeterminateWindow
    } else {
        StepVerdict::NoPairProduction
    })
}

/// Ground-state envelope level at the box walls.
const ENVELOPE: f64 = 1e-8;
/// Half-width of the linear box in units of √(cħ/α).
const LINEAR_HALF_WIDTH: f64 = 25.0;

/// Oracle grid for a solved problem. Linear families get a box of
/// half-width 25·√(cħ/α) centred on the mean zero of W over the levels;
/// inverse-linear families a half-line long enough that every level's
/// envelope x^(τ̃+n)·e^(−κₙx) has dropped below 1e-8 of its peak;
/// tabulated profiles use their own interval.
pub fn oracle_grid(p: &SpectralProblem, levels: &[Level], n_points: usize) -> Result<Grid> {
    let ch = p.data.c_hbar();
    let energies: Vec<f64> = if levels.is_empty() { vec![0.0] } else { levels.iter().map(|l| l.energy).collect() };
    match (&p.family, &p.data.shape) {
        (Family::Linear { slope }, _) => {
            let alpha = p.data.kappa
                * match p.data.shape {
                    Shape::Linear { a } => a,
                    _ => unreachable!("linear family on a linear shape"),
                };
            let zeros: Vec<f64> = energies.iter().map(|&e| -p.data.offset.eval(e) / alpha).collect();
            let lo = zeros.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = zeros.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let half = LINEAR_HALF_WIDTH * libm::sqrt(ch / slope) + 0.5 * (hi - lo);
            Grid::centered(0.5 * (lo + hi), half, n_points)
        }
        (Family::InverseLinear { tau_t, .. }, _) => {
            let mut xmax = 0.0f64;
            for l in levels {
                let f = p.case.sign() * p.data.offset.eval(l.energy);
                let power = (tau_t + l.n as f64 * ch) / ch;
                let kappa = f * tau_t / (tau_t + l.n as f64 * ch) / ch;
                if !(kappa > 0.0) {
                    return Err(Error::NoRoot { n: l.n });
                }
                xmax = xmax.max(envelope_edge(power, kappa));
            }
            if xmax == 0.0 {
                return Err(Error::InvalidGrid("no levels to size the half-line box"));
            }
            Grid::half_line(xmax, n_points)
        }
        (Family::Offset { .. }, Shape::Tabulated(t)) => {
            let xs = t.abscissae();
            Grid::new(xs[0], xs[xs.len() - 1], n_points)
        }
        _ => Err(Error::UnsupportedBranch("no grid rule for this family")),
    }
}

/// Smallest x beyond the peak of x^p·e^(−κx) where it falls below 1e-8 of
/// the peak.
fn envelope_edge(p: f64, kappa: f64) -> f64 {
    let peak = p / kappa;
    let log_rel = |x: f64| p * libm::log(x / peak) - kappa * (x - peak);
    let target = libm::log(ENVELOPE);
    let mut hi = peak.max(1.0 / kappa) * 2.0;
    while log_rel(hi) > target {
        hi *= 2.0;
    }
    crate::numeric::bisect(|x| log_rel(x) - target, peak, hi, 1e-10 * hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    Matrix,
    Shooting,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::Matrix => "matrix",
            OracleMethod::Shooting => "shooting",
        }
    }

    /// Agreement demanded of the engine: 1e-3 on the matrix path, 1e-2
    /// where only shooting is available.
    pub fn tolerance(self, domain: Domain) -> f64 {
        match (self, domain) {
            (OracleMethod::Shooting, Domain::HalfLine) => 1e-2,
            _ => 1e-3,
        }
    }

    /// Matrix on the whole line, shooting on the half-line.
    pub fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::HalfLine => OracleMethod::Shooting,
            _ => OracleMethod::Matrix,
        }
    }
}

/// Oracle energy closest to each level. The matrix path diagonalizes once
/// over a window reaching half a level gap beyond the outermost levels.
/// The shooting path scans a separate window around each level, out to half
/// the distance to its nearest neighbour, so levels crowding towards the
/// continuum edge are resolved.
pub fn oracle_levels(
    problem: &Problem,
    levels: &[Level],
    grid: &Grid,
    method: OracleMethod,
) -> Result<Vec<Option<f64>>> {
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let mut es: Vec<f64> = levels.iter().map(|l| l.energy).collect();
    es.sort_by(f64::total_cmp);
    let fallback = 0.1 * (1.0 + es[0].abs());
    let nearest = |e: f64| {
        let g = es.iter().map(|&o| (o - e).abs()).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
        if g.is_finite() {
            g
        } else {
            fallback
        }
    };
    let closest = |found: &[f64], e: f64| found.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
    match method {
        OracleMethod::Matrix => {
            let window = (es[0] - 0.5 * nearest(es[0]), es[es.len() - 1] + 0.5 * nearest(es[es.len() - 1]));
            let found = eigenvalues(&build_hamiltonian(problem, grid)?, window);
            Ok(levels.iter().map(|l| closest(&found, l.energy)).collect())
        }
        OracleMethod::Shooting => levels
            .iter()
            .map(|l| {
                let half = 0.5 * nearest(l.energy);
                let window = (l.energy - half, l.energy + half);
                let setup = ShootingSetup::new(problem, *grid, window)?;
                Ok(closest(&find_levels_shooting(problem, window, &setup, 400)?, l.energy))
            })
            .collect(),
    }
}

/// |E_oracle − E|/max(|E|, floor), where the floor is the smallest nonzero
/// |E| among `levels`, so that a zero mode is judged against the nearest
/// excitation.
pub fn relative_errors(levels: &[Level], oracle: &[Option<f64>]) -> Vec<Option<f64>> {
    let floor = levels.iter().map(|l| l.energy.abs()).filter(|&e| e > 1e-12).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    levels.iter().zip(oracle).map(|(l, o)| o.map(|o| (o - l.energy).abs() / l.energy.abs().max(floor))).collect()
}
