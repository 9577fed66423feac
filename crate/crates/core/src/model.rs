//! Domain types shared by every stage: physical constants, couplings,
//! potential profiles and problem descriptions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric;

fn finite(v: f64, name: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(name))
    }
}

/// Mass, speed of light and reduced Planck constant. Natural units by default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub m: f64,
    pub c: f64,
    pub hbar: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { m: 1.0, c: 1.0, hbar: 1.0 }
    }
}

impl Constants {
    /// `c` and `hbar` must be positive. `m` may be zero (massless carriers).
    pub fn new(m: f64, c: f64, hbar: f64) -> Result<Self> {
        let k = Constants { m: finite(m, "m")?, c: finite(c, "c")?, hbar: finite(hbar, "hbar")? };
        k.check()?;
        Ok(k)
    }

    pub fn check(&self) -> Result<()> {
        finite(self.m, "m")?;
        finite(self.c, "c")?;
        finite(self.hbar, "hbar")?;
        if self.m < 0.0 {
            return Err(Error::InvalidParameter { name: "m", reason: "must be nonnegative" });
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParameter { name: "c", reason: "must be positive" });
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParameter { name: "hbar", reason: "must be positive" });
        }
        Ok(())
    }

    /// mc².
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    pub fn c_hbar(&self) -> f64 {
        self.c * self.hbar
    }
}

/// Potentials V = ζ₁s + m̃c², P = ζ₂s + ε, eA_t = ζ₃s + Ẽ for a shared profile s(x).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Couplings {
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta3: f64,
    pub eps: f64,
    pub m_shift: f64,
    pub e_shift: f64,
}

impl Couplings {
    pub fn scalar(zeta1: f64) -> Self {
        Couplings { zeta1, ..Default::default() }
    }

    /// Δ = ζ₁² + ζ₂² − ζ₃².
    pub fn delta(&self) -> f64 {
        self.zeta1 * self.zeta1 + self.zeta2 * self.zeta2 - self.zeta3 * self.zeta3
    }

    /// ζ = ζ₂/ζ₁.
    pub fn zeta(&self) -> Option<f64> {
        (self.zeta1 != 0.0).then(|| self.zeta2 / self.zeta1)
    }

    /// ℓ = ζ₃/ζ₁.
    pub fn ell(&self) -> Option<f64> {
        (self.zeta1 != 0.0).then(|| self.zeta3 / self.zeta1)
    }

    /// τ = √(1 + ζ² − ℓ²), only when real and positive.
    pub fn tau(&self) -> Option<f64> {
        let (z, l) = (self.zeta()?, self.ell()?);
        let t2 = 1.0 + z * z - l * l;
        (t2 > 0.0).then(|| libm::sqrt(t2))
    }

    fn check_finite(&self) -> Result<()> {
        finite(self.zeta1, "zeta1")?;
        finite(self.zeta2, "zeta2")?;
        finite(self.zeta3, "zeta3")?;
        finite(self.eps, "eps")?;
        finite(self.m_shift, "m_shift")?;
        finite(self.e_shift, "e_shift")?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingBranch {
    General,
    PurePseudoscalar,
    DegenerateElectric,
}

impl CouplingBranch {
    pub fn name(self) -> &'static str {
        match self {
            CouplingBranch::General => "general",
            CouplingBranch::PurePseudoscalar => "pseudoscalar",
            CouplingBranch::DegenerateElectric => "degenerate-electric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationReport {
    pub branch: CouplingBranch,
    pub delta: f64,
    /// τ (general branch) or √Δ (other branches) when real.
    pub tau: Option<f64>,
}

impl ValidationReport {
    pub fn tau_is_real(&self) -> bool {
        self.tau.is_some()
    }
}

pub fn validate(c: &Couplings) -> Result<ValidationReport> {
    c.check_finite()?;
    if c.zeta1 == 0.0 && c.zeta2 == 0.0 && c.zeta3 == 0.0 && c.eps == 0.0 {
        return Err(Error::AllZero);
    }
    let delta = c.delta();
    let (branch, tau) = if c.zeta1 != 0.0 {
        (CouplingBranch::General, c.tau())
    } else if c.zeta3 == 0.0 {
        (CouplingBranch::PurePseudoscalar, Some(1.0))
    } else {
        (CouplingBranch::DegenerateElectric, (delta > 0.0).then(|| libm::sqrt(delta)))
    };
    Ok(ValidationReport { branch, delta, tau })
}

/// Where a profile is defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Line,
    /// x > 0.
    HalfLine,
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Domain::Line => x.is_finite(),
            Domain::HalfLine => x > 0.0 && x.is_finite(),
            Domain::Interval { lo, hi } => x >= lo && x <= hi,
        }
    }
}

/// Profile sampled on a strictly increasing grid, evaluated by cubic Hermite
/// interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedShape {
    xs: Vec<f64>,
    fs: Vec<f64>,
    dfs: Vec<f64>,
}

impl TabulatedShape {
    /// Derivative samples must agree with a finite-difference estimate to 1e-6
    /// relative (to the table's derivative scale).
    pub fn new(xs: Vec<f64>, fs: Vec<f64>, dfs: Vec<f64>) -> Result<Self> {
        Self::check_abscissae(&xs, &fs)?;
        if dfs.len() != xs.len() {
            return Err(Error::InvalidTable("derivative column length mismatch"));
        }
        if dfs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite derivative"));
        }
        let fd = numeric::derivative(&xs, &fs);
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        for (i, (&d, &e)) in dfs.iter().zip(&fd).enumerate() {
            // Finite differences carry an O(h²) error of their own; compare
            // against the stencil spread so coarse tables are not rejected.
            let n = fd.len();
            let spread = if i > 0 && i + 1 < n {
                (fd[i + 1] - 2.0 * fd[i] + fd[i - 1]).abs()
            } else if i == 0 {
                2.0 * (fd[0] - 2.0 * fd[1] + fd[2]).abs()
            } else {
                2.0 * (fd[n - 1] - 2.0 * fd[n - 2] + fd[n - 3]).abs()
            };
            if (d - e).abs() > 1e-6 * scale + spread {
                return Err(Error::InvalidTable("derivative inconsistent with values"));
            }
        }
        Ok(TabulatedShape { xs, fs, dfs })
    }

    /// Derivatives estimated from the values.
    pub fn from_samples(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        Self::check_abscissae(&xs, &fs)?;
        let dfs = numeric::derivative(&xs, &fs);
        Ok(TabulatedShape { xs, fs, dfs })
    }

    fn check_abscissae(xs: &[f64], fs: &[f64]) -> Result<()> {
        if xs.len() < 3 {
            return Err(Error::InvalidTable("need at least three samples"));
        }
        if fs.len() != xs.len() {
            return Err(Error::InvalidTable("value column length mismatch"));
        }
        if xs.iter().chain(fs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite sample"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable("abscissae must be strictly increasing"));
        }
        Ok(())
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.fs
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.dfs
    }

    pub fn domain(&self) -> Domain {
        Domain::Interval { lo: self.xs[0], hi: self.xs[self.xs.len() - 1] }
    }

    fn interval(&self, x: f64) -> usize {
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.xs.len() - 2),
        }
    }

    /// Exact integral of the interpolant from the first abscissa to x.
    fn integral(&self, x: f64) -> Result<f64> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        let i = self.interval(x);
        let mut acc = 0.0;
        for k in 0..i {
            let h = self.xs[k + 1] - self.xs[k];
            acc += 0.5 * h * (self.fs[k] + self.fs[k + 1]) + h * h * (self.dfs[k] - self.dfs[k + 1]) / 12.0;
        }
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let (f0, f1, d0, d1) = (self.fs[i], self.fs[i + 1], self.dfs[i] * h, self.dfs[i + 1] * h);
        acc += h
            * ((0.5 * t4 - t3 + t) * f0
                + (0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2) * d0
                + (-0.5 * t4 + t3) * f1
                + (0.25 * t4 - t3 / 3.0) * d1);
        Ok(acc)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        let i = self.interval(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (f0, f1, d0, d1) = (self.fs[i], self.fs[i + 1], self.dfs[i] * h, self.dfs[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let f =
            (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * d1;
        let df = ((6.0 * t2 - 6.0 * t) * f0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * f1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Ok((f, df))
    }
}

/// The shared profile s(x). Every potential is a coupling times s plus a
/// constant, so with ζ₁ = 1 the profile is the scalar potential itself.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// s = a·x.
    Linear {
        a: f64,
    },
    /// s = −q/x on x > 0.
    InverseLinear {
        q: f64,
    },
    Tabulated(TabulatedShape),
}

impl Shape {
    pub fn domain(&self) -> Domain {
        match self {
            Shape::Linear { .. } => Domain::Line,
            Shape::InverseLinear { .. } => Domain::HalfLine,
            Shape::Tabulated(t) => t.domain(),
        }
    }

    /// (s(x), s′(x)).
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Shape::Linear { a } => {
                if !x.is_finite() {
                    return Err(Error::OutOfDomain { x });
                }
                Ok((a * x, *a))
            }
            Shape::InverseLinear { q } => {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::OutOfDomain { x });
                }
                Ok((-q / x, q / (x * x)))
            }
            Shape::Tabulated(t) => t.eval(x),
        }
    }

    /// An antiderivative of s, up to a constant.
    pub fn antiderivative(&self, x: f64) -> Result<f64> {
        match self {
            Shape::Linear { a } => {
                self.eval(x)?;
                Ok(0.5 * a * x * x)
            }
            Shape::InverseLinear { q } => {
                self.eval(x)?;
                Ok(-q * libm::log(x))
            }
            Shape::Tabulated(t) => t.integral(x),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            Shape::Linear { a } => {
                finite(*a, "a")?;
            }
            Shape::InverseLinear { q } => {
                finite(*q, "q")?;
                if *q == 0.0 {
                    return Err(Error::InvalidParameter { name: "q", reason: "must be nonzero" });
                }
            }
            Shape::Tabulated(_) => {}
        }
        Ok(())
    }
}

pub fn eval_shape(shape: &Shape, x: f64) -> Result<(f64, f64)> {
    shape.eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Spin::Up)
        } else if s == -1.0 {
            Ok(Spin::Down)
        } else {
            Err(Error::InvalidParameter { name: "s", reason: "must be +1 or -1" })
        }
    }
}

/// A planar mode: eA_y = λ₁g, V = λ₂g, eA_t = λ₃g with transverse momentum k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode2p1 {
    pub k: f64,
    pub s: Spin,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Mode2p1 {
    /// Δ₂ = λ₁² + λ₂² − λ₃².
    pub fn delta(&self) -> f64 {
        self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2 - self.lambda3 * self.lambda3
    }

    pub fn lambda(&self) -> Option<f64> {
        (self.lambda1 != 0.0).then(|| self.lambda2 / self.lambda1)
    }

    pub fn nu(&self) -> Option<f64> {
        (self.lambda1 != 0.0).then(|| self.lambda3 / self.lambda1)
    }

    pub fn tau(&self) -> Option<f64> {
        let (l, n) = (self.lambda()?, self.nu()?);
        let t2 = 1.0 + l * l - n * n;
        (t2 > 0.0).then(|| libm::sqrt(t2))
    }

    pub fn check(&self) -> Result<()> {
        finite(self.k, "k")?;
        finite(self.lambda1, "lambda1")?;
        finite(self.lambda2, "lambda2")?;
        finite(self.lambda3, "lambda3")?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LevelBranch {
    Minus,
    Single,
    Plus,
}

impl LevelBranch {
    pub fn tag(self) -> &'static str {
        match self {
            LevelBranch::Minus => "-",
            LevelBranch::Single => "single",
            LevelBranch::Plus => "+",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub n: usize,
    pub energy: f64,
    pub branch: LevelBranch,
    /// 1 for the zero mode, 2 otherwise (the level sits in both partners).
    pub multiplicity: u8,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dimension {
    OnePlusOne(Couplings),
    TwoPlusOne(Mode2p1),
}

/// Dirac operator coefficients at one point, in the common form
/// H = [[upper, −σcħ∂ + mass], [σcħ∂ + mass, lower]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracCoefficients {
    pub upper: f64,
    pub lower: f64,
    pub mass: f64,
}

/// A complete problem: constants, interaction and profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub constants: Constants,
    pub dimension: Dimension,
    pub shape: Shape,
}

impl Problem {
    pub fn one_plus_one(constants: Constants, couplings: Couplings, shape: Shape) -> Self {
        Problem { constants, dimension: Dimension::OnePlusOne(couplings), shape }
    }

    pub fn two_plus_one(constants: Constants, mode: Mode2p1, shape: Shape) -> Self {
        Problem { constants, dimension: Dimension::TwoPlusOne(mode), shape }
    }

    /// σ in the common form.
    pub fn kinetic_sign(&self) -> f64 {
        match self.dimension {
            Dimension::OnePlusOne(_) => 1.0,
            Dimension::TwoPlusOne(m) => -m.s.sign(),
        }
    }

    pub fn coefficients(&self, x: f64) -> Result<DiracCoefficients> {
        let (s, _) = self.shape.eval(x)?;
        let mc2 = self.constants.rest_energy();
        Ok(match self.dimension {
            Dimension::OnePlusOne(c) => {
                let v = c.zeta1 * s + c.m_shift;
                let p = c.zeta2 * s + c.eps;
                let a = c.zeta3 * s + c.e_shift;
                DiracCoefficients { upper: a - p, lower: a + p, mass: mc2 + v }
            }
            Dimension::TwoPlusOne(m) => {
                let ay = m.lambda1 * s;
                let v = m.lambda2 * s;
                let at = m.lambda3 * s;
                DiracCoefficients { upper: mc2 + v + at, lower: -mc2 - v + at, mass: self.constants.c * m.k + ay }
            }
        })
    }

    pub fn check(&self) -> Result<()> {
        self.constants.check()?;
        self.shape.check()?;
        match self.dimension {
            Dimension::OnePlusOne(c) => c.check_finite(),
            Dimension::TwoPlusOne(m) => m.check(),
        }
    }
}

/// Two-component function sampled on a shared grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Spinor {
    pub x: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl Spinor {
    /// ∫(|ψ₁|² + |ψ₂|²) dx by the trapezoid rule.
    pub fn norm_sq(&self) -> f64 {
        let dens: Vec<f64> = self.upper.iter().zip(&self.lower).map(|(a, b)| a * a + b * b).collect();
        numeric::trapezoid(&self.x, &dens)
    }

    pub fn scale(&mut self, k: f64) {
        self.upper.iter_mut().chain(self.lower.iter_mut()).for_each(|v| *v *= k);
    }
}

/// An energy with its spinor in the original basis and, when known, in the
/// diagonal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub spinor: Spinor,
    pub diagonal: Option<Spinor>,
    /// ∫(|ψ₁|² + |ψ₂|²) dx of `spinor`.
    pub norm: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validate_examples() {
        let r = validate(&Couplings::scalar(1.0)).unwrap();
        assert_eq!(r.branch, CouplingBranch::General);
        assert_eq!((r.delta, r.tau), (1.0, Some(1.0)));

        let r = validate(&Couplings { zeta2: 1.0, ..Default::default() }).unwrap();
        assert_eq!(r.branch, CouplingBranch::PurePseudoscalar);

        let r = validate(&Couplings { zeta1: 1.0, zeta3: 2.0, ..Default::default() }).unwrap();
        assert_eq!(r.delta, -3.0);
        assert!(!r.tau_is_real());

        let r = validate(&Couplings { zeta3: 1.0, ..Default::default() }).unwrap();
        assert_eq!(r.branch, CouplingBranch::DegenerateElectric);

        assert_eq!(validate(&Couplings::default()), Err(Error::AllZero));
        let bad = Couplings { zeta1: f64::NAN, ..Default::default() };
        assert_eq!(validate(&bad), Err(Error::NonFinite("zeta1")));
    }

    #[test]
    fn shape_examples() {
        assert_eq!(eval_shape(&Shape::Linear { a: 2.0 }, 3.0), Ok((6.0, 2.0)));
        assert_eq!(eval_shape(&Shape::InverseLinear { q: 1.0 }, 0.5), Ok((-2.0, 4.0)));
        assert_eq!(eval_shape(&Shape::InverseLinear { q: 1.0 }, -1.0), Err(Error::OutOfDomain { x: -1.0 }));
    }

    #[test]
    fn tabulated_reproduces_cubic() {
        let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        let dfs: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - 1.0).collect();
        let t = TabulatedShape::new(xs, fs, dfs).unwrap();
        let s = Shape::Tabulated(t);
        let (f, df) = s.eval(0.537).unwrap();
        assert!((f - (0.537f64.powi(3) - 0.537)).abs() < 1e-12);
        assert!((df - (3.0 * 0.537f64.powi(2) - 1.0)).abs() < 1e-10);
        assert!(s.eval(1.5).is_err());
        // ∫(x³ − x) from −1: x⁴/4 − x²/2 + 1/4.
        let x = 0.537f64;
        let want = x.powi(4) / 4.0 - x * x / 2.0 + 0.25;
        assert!((s.antiderivative(x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        for s in [Shape::Linear { a: 1.7 }, Shape::InverseLinear { q: 0.8 }] {
            for x in [0.3, 1.0, 4.5] {
                let d = 1e-5;
                let fd = (s.antiderivative(x + d).unwrap() - s.antiderivative(x - d).unwrap()) / (2.0 * d);
                assert!((fd - s.eval(x).unwrap().0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let fs = vec![0.0, 1.0, 2.0, 3.0];
        assert!(TabulatedShape::new(xs.clone(), fs.clone(), vec![1.0, 1.0, 5.0, 1.0]).is_err());
        assert!(TabulatedShape::new(xs.clone(), fs.clone(), vec![1.0; 4]).is_ok());
        assert!(TabulatedShape::from_samples(vec![0.0, 2.0, 1.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn mode_derived_quantities() {
        let m = Mode2p1 { k: 0.0, s: Spin::Up, lambda1: -1.0, lambda2: 0.0, lambda3: -0.5 };
        assert_eq!(m.nu(), Some(0.5));
        assert!((m.tau().unwrap() - libm::sqrt(0.75)).abs() < 1e-15);
        assert!(Spin::from_sign(0.0).is_err());
    }

    #[test]
    fn coefficients_one_plus_one() {
        let p = Problem::one_plus_one(
            Constants::default(),
            Couplings { zeta1: 1.0, zeta2: 2.0, zeta3: 3.0, eps: 0.5, ..Default::default() },
            Shape::Linear { a: 1.0 },
        );
        let c = p.coefficients(2.0).unwrap();
        assert_eq!(c, DiracCoefficients { upper: 6.0 - 4.5, lower: 6.0 + 4.5, mass: 3.0 });
    }
}
