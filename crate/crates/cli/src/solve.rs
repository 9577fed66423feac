//! From a config to levels, oracle checks, sweeps and eigenfunctions.

use diracsusy::catalog::{
    crossed_field_spectrum, inverse_linear_spectrum, linear_spectrum, oracle_grid, oracle_levels, relative_errors,
    stability, stability_2plus1, CrossedFieldProblem, InverseLinearProblem, LinearProblem, OracleMethod, Stability,
    StabilityVerdict, NECESSARY_NOT_SUFFICIENT,
};
use diracsusy::factorize::FactorizationData;
use diracsusy::model::{validate, CouplingBranch, Eigenpair, Level, LevelBranch, Problem, Shape, TabulatedShape};
use diracsusy::oracle::Grid;
use diracsusy::susy::{assemble_spinor, solve_level, spectrum, Family, SpectralProblem};
use diracsusy::Error;
use thiserror::Error;

use crate::config::{ConfigError, DimensionConfig, ProblemConfig, ShapeConfig};

/// Everything that ends a command early, by exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Unstable(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("solver error: {0}")]
    Solve(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Usage(_) | Failure::Solve(_) => 1,
            Failure::Unstable(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnstableRegime { delta } => {
                Failure::Unstable(format!("unstable regime (delta = {delta}): no bound states"))
            }
            e => Failure::Solve(e),
        }
    }
}

pub fn verdict(cfg: &ProblemConfig) -> Result<StabilityVerdict, Failure> {
    Ok(match cfg.dimension {
        DimensionConfig::OnePlusOne => stability(&cfg.couplings),
        DimensionConfig::TwoPlusOne { .. } => stability_2plus1(&crossed(cfg).mode()?),
    })
}

pub fn describe(v: &StabilityVerdict) -> String {
    format!("verdict={} delta={} detail={}", v.verdict.name(), crate::output::num(v.delta), v.detail)
}

pub fn caveat(v: &StabilityVerdict) -> Option<&'static str> {
    (v.detail == NECESSARY_NOT_SUFFICIENT).then_some(
        "note: delta < 0 rules out the factorization; this is necessary, not sufficient, for an unstable sea",
    )
}

fn crossed(cfg: &ProblemConfig) -> CrossedFieldProblem {
    match cfg.dimension {
        DimensionConfig::TwoPlusOne { k, s, b, efield, c } => {
            CrossedFieldProblem { b, efield, c_scalar: c, k, s, constants: cfg.constants }
        }
        DimensionConfig::OnePlusOne => unreachable!("crossed fields need two_plus_one"),
    }
}

/// A stable problem ready to solve. `problem` is what the oracle
/// discretizes: the planar problem itself in 2+1.
pub struct Built {
    pub verdict: StabilityVerdict,
    pub problem: Problem,
    pub spectral: SpectralProblem,
    pub pseudoscalar: bool,
}

pub fn build(cfg: &ProblemConfig) -> Result<Built, Failure> {
    let v = verdict(cfg)?;
    if v.verdict != Stability::Stable {
        return Err(Failure::Unstable(format!("{}: no bound states to compute", describe(&v))));
    }
    let c = cfg.couplings;
    let k = cfg.constants;
    let (problem, spectral) = match (&cfg.dimension, &cfg.shape) {
        (DimensionConfig::TwoPlusOne { .. }, _) => {
            let p = crossed(cfg);
            (p.problem()?, p.spectral()?)
        }
        (_, ShapeConfig::Linear { a }) => {
            let p = LinearProblem { a: *a, couplings: c, constants: k };
            (p.problem()?, p.spectral()?)
        }
        (_, ShapeConfig::InverseLinear { q }) => {
            let p = InverseLinearProblem { q: *q, couplings: c, constants: k };
            (p.problem()?, p.spectral()?)
        }
        (_, ShapeConfig::Tabulated { xs, fs }) => {
            let shape = Shape::Tabulated(TabulatedShape::from_samples(xs.clone(), fs.clone())?);
            let spectral = SpectralProblem::new(FactorizationData::new(&c, &k, &shape)?)?;
            (Problem::one_plus_one(k, c, shape), spectral)
        }
    };
    let spectral = match cfg.window {
        Some(w) => spectral.with_window(w),
        None => spectral,
    };
    let pseudoscalar = cfg.dimension == DimensionConfig::OnePlusOne
        && validate(&c).map(|r| r.branch == CouplingBranch::PurePseudoscalar).unwrap_or(false);
    Ok(Built { verdict: v, problem, spectral, pseudoscalar })
}

/// Closed-form levels with quantum number n, where the catalog has them.
fn closed_form(cfg: &ProblemConfig, n: usize) -> Option<Vec<Level>> {
    let (c, k) = (cfg.couplings, cfg.constants);
    match (&cfg.dimension, &cfg.shape) {
        (DimensionConfig::TwoPlusOne { .. }, _) => crossed_field_spectrum(&crossed(cfg), n).ok(),
        (_, ShapeConfig::Linear { a }) => linear_spectrum(&LinearProblem { a: *a, couplings: c, constants: k }, n).ok(),
        // With both ζ and ε present and an electric part the catalog falls
        // back to the engine; that is not a closed form.
        (_, ShapeConfig::InverseLinear { q }) if c.zeta3 == 0.0 || (c.zeta2 == 0.0 && c.eps == 0.0) => {
            inverse_linear_spectrum(&InverseLinearProblem { q: *q, couplings: c, constants: k }, n).ok()
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub branch: &'static str,
    pub closed: Option<f64>,
    pub engine: Option<f64>,
    pub oracle: Option<f64>,
    pub rel_err: Option<f64>,
    pub stability: &'static str,
    pub method: &'static str,
}

impl Row {
    fn energy(&self) -> f64 {
        self.engine.or(self.closed).unwrap_or(0.0)
    }
}

fn method_tag(b: &Built) -> &'static str {
    if b.pseudoscalar {
        return "pseudoscalar_branch";
    }
    match b.spectral.family {
        Family::Linear { .. } => "linear_chain",
        Family::InverseLinear { .. } => "inverse_linear_chain",
        Family::Offset { .. } => "offset_chain",
    }
}

fn in_window(cfg: &ProblemConfig, e: f64) -> bool {
    cfg.window.is_none_or(|(lo, hi)| e >= lo && e <= hi)
}

/// Engine levels for n ≤ n_max, each beside the nearest closed-form root of
/// the same n. Closed-form roots left over (the second sign of a zero mode,
/// roots the factorization does not admit) get rows of their own.
pub fn spectrum_rows(cfg: &ProblemConfig, b: &Built, n_max: usize) -> Result<(Vec<Level>, Vec<Row>), Failure> {
    let levels = spectrum(&b.spectral, n_max)?;
    let stab = b.verdict.verdict.name();
    let method = method_tag(b);
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let mut closed: Vec<Level> = closed_form(cfg, n).unwrap_or_default();
        for l in levels.iter().filter(|l| l.n == n) {
            let pick = closed
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1.energy - l.energy).abs().total_cmp(&(y.1.energy - l.energy).abs()))
                .map(|(i, _)| i);
            rows.push(Row {
                n,
                branch: l.branch.tag(),
                closed: pick.map(|i| closed.remove(i).energy),
                engine: Some(l.energy),
                oracle: None,
                rel_err: None,
                stability: stab,
                method,
            });
        }
        for c in closed.into_iter().filter(|c| in_window(cfg, c.energy)) {
            rows.push(Row {
                n,
                branch: c.branch.tag(),
                closed: Some(c.energy),
                engine: None,
                oracle: None,
                rel_err: None,
                stability: stab,
                method: "closed_form_only",
            });
        }
    }
    rows.sort_by(|x, y| x.n.cmp(&y.n).then(x.energy().total_cmp(&y.energy())));
    Ok((levels, rows))
}

fn grid_for(cfg: &ProblemConfig, b: &Built, levels: &[Level]) -> Result<Grid, Failure> {
    let n = cfg.grid.n_points;
    Ok(match (cfg.grid.xmin, cfg.grid.xmax, b.problem.shape.domain()) {
        (None, Some(hi), diracsusy::model::Domain::HalfLine) => Grid::half_line(hi, n)?,
        (Some(lo), Some(hi), _) => Grid::new(lo, hi, n)?,
        _ => oracle_grid(&b.spectral, levels, n)?,
    })
}

pub struct Verification {
    pub pass: bool,
    pub summary: String,
}

/// Fills the oracle columns and judges them against the per-method
/// tolerance.
pub fn verify(cfg: &ProblemConfig, b: &Built, levels: &[Level], rows: &mut [Row]) -> Result<Verification, Failure> {
    if levels.is_empty() {
        return Err(Failure::Verification("no levels in the window to verify".into()));
    }
    let grid = grid_for(cfg, b, levels)?;
    let domain = b.problem.shape.domain();
    let method = OracleMethod::default_for(domain);
    let tol = method.tolerance(domain);
    let oracle = oracle_levels(&b.problem, levels, &grid, method)
        .map_err(|e| Failure::Verification(format!("oracle did not converge: {e}")))?;
    let rel = relative_errors(levels, &oracle);
    for (i, l) in levels.iter().enumerate() {
        if let Some(r) = rows.iter_mut().find(|r| r.n == l.n && r.engine == Some(l.energy)) {
            r.oracle = oracle[i];
            r.rel_err = rel[i];
        }
    }
    let missing = rel.iter().filter(|r| r.is_none()).count();
    let worst = rel.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let pass = missing == 0 && worst < tol;
    let mut summary = format!(
        "{} max_rel_err={} tolerance={} oracle={} n_points={}",
        if pass { "PASS" } else { "FAIL" },
        crate::output::num(worst),
        crate::output::num(tol),
        method.name(),
        grid.n_points
    );
    if missing > 0 {
        summary.push_str(&format!(" unmatched_levels={missing}"));
    }
    Ok(Verification { pass, summary })
}

pub fn parse_branch(s: &str) -> Result<LevelBranch, Failure> {
    match s {
        "-" | "minus" => Ok(LevelBranch::Minus),
        "+" | "plus" => Ok(LevelBranch::Plus),
        "single" => Ok(LevelBranch::Single),
        _ => Err(Failure::Usage(format!("unknown branch `{s}` (expected minus, plus or single)"))),
    }
}

/// Normalized eigenfunction of level (n, branch) on the oracle grid.
pub fn wavefunction(
    cfg: &ProblemConfig,
    b: &Built,
    n: usize,
    branch: Option<LevelBranch>,
) -> Result<(Level, Eigenpair), Failure> {
    let found = match solve_level(&b.spectral, n) {
        Err(Error::NoRoot { .. }) => Vec::new(),
        r => r?,
    };
    let level = match branch {
        Some(br) => found.iter().find(|l| l.branch == br).copied(),
        None if found.len() == 1 => Some(found[0]),
        None if found.is_empty() => None,
        None => {
            let tags: Vec<&str> = found.iter().map(|l| l.branch.tag()).collect();
            return Err(Failure::Usage(format!("level {n} has branches {}; pass --branch", tags.join(", "))));
        }
    };
    let level = level.ok_or_else(|| {
        let tag = branch.map_or(String::new(), |br| format!(" branch {}", br.tag()));
        Failure::Usage(format!("no such level: n = {n}{tag} has no root in the window"))
    })?;
    let grid = grid_for(cfg, b, &[level])?;
    let eig = assemble_spinor(&b.spectral, &level, &grid.sites())?;
    Ok((level, eig))
}
