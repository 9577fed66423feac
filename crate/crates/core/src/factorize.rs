//! Diagonalization of the coupled Dirac system, ladder coefficients and
//! superpotentials.

use crate::error::{Error, Result};
use crate::model::{validate, Constants, CouplingBranch, Couplings, Domain, Mode2p1, Problem, Shape};

pub type Mat2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mat_inv(a: &Mat2) -> Result<Mat2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if det == 0.0 || det.abs() <= 1e-14 * scale * scale {
        return Err(Error::ZeroDivisor("mixing matrix determinant"));
    }
    Ok([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// The matrix multiplying s(x) in the coupled system:
/// [[−ζ₁, −ζ₃−ζ₂], [ζ₃−ζ₂, ζ₁]].
pub fn coupling_matrix(c: &Couplings) -> Mat2 {
    [[-c.zeta1, -c.zeta3 - c.zeta2], [c.zeta3 - c.zeta2, c.zeta1]]
}

/// Similarity transform D with D·M·D⁻¹ = diag(eigvals).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingMatrix {
    pub d: Mat2,
    pub d_inv: Mat2,
    pub eigvals: [f64; 2],
}

impl MixingMatrix {
    pub fn conjugate(&self, m: &Mat2) -> Mat2 {
        mat_mul(&mat_mul(&self.d, m), &self.d_inv)
    }

    /// ψ̃ = Dψ.
    pub fn to_diagonal(&self, psi: [f64; 2]) -> [f64; 2] {
        apply(&self.d, psi)
    }

    /// ψ = D⁻¹ψ̃.
    pub fn from_diagonal(&self, tilde: [f64; 2]) -> [f64; 2] {
        apply(&self.d_inv, tilde)
    }
}

fn apply(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Closed-form D where the parametrization allows it, direct
/// eigendecomposition on the degenerate-electric branch.
pub fn mixing_matrix(c: &Couplings) -> Result<MixingMatrix> {
    let report = validate(c)?;
    let delta = report.delta;
    match report.branch {
        CouplingBranch::General => {
            if delta == 0.0 {
                return Err(Error::NotDiagonalizable { delta });
            }
            let tau = report.tau.ok_or(Error::UnstableRegime { delta })?;
            let (z, l) = (c.zeta2 / c.zeta1, c.zeta3 / c.zeta1);
            let k = 1.0 / (2.0 * tau * (1.0 + tau));
            let d = [[k * (1.0 + tau), k * (z + l)], [k * (l - z), k * (1.0 + tau)]];
            Ok(MixingMatrix { d, d_inv: mat_inv(&d)?, eigvals: [-tau * c.zeta1, tau * c.zeta1] })
        }
        CouplingBranch::PurePseudoscalar => {
            let d = [[1.0, 1.0], [-1.0, 1.0]];
            Ok(MixingMatrix { d, d_inv: [[0.5, -0.5], [0.5, 0.5]], eigvals: [-c.zeta2, c.zeta2] })
        }
        CouplingBranch::DegenerateElectric => direct_mixing(&coupling_matrix(c)),
    }
}

/// Eigendecomposition of a real 2×2 matrix with distinct real eigenvalues,
/// ordered ascending.
pub fn direct_mixing(m: &Mat2) -> Result<MixingMatrix> {
    let p = 0.5 * (m[0][0] + m[1][1]);
    let q = 0.5 * (m[0][0] - m[1][1]);
    // p² − det written without cancellation.
    let disc = q * q + m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if disc < 0.0 {
        return Err(Error::UnstableRegime { delta: disc });
    }
    if disc <= 1e-28 * scale * scale && (scale == 0.0 || m[0][1] != 0.0 || m[1][0] != 0.0) {
        return Err(Error::NotDiagonalizable { delta: disc });
    }
    let r = libm::sqrt(disc);
    let eig = [p - r, p + r];
    let vec_for = |lam: f64| -> [f64; 2] {
        let a = [m[0][1], lam - m[0][0]];
        let b = [lam - m[1][1], m[1][0]];
        let na = a[0] * a[0] + a[1] * a[1];
        let nb = b[0] * b[0] + b[1] * b[1];
        if na == 0.0 && nb == 0.0 {
            [1.0, 0.0]
        } else if na >= nb {
            a
        } else {
            b
        }
    };
    let (mut v1, mut v2) = (vec_for(eig[0]), vec_for(eig[1]));
    if r == 0.0 {
        // Scalar multiple of the identity.
        v1 = [1.0, 0.0];
        v2 = [0.0, 1.0];
    }
    let d_inv = [[v1[0], v2[0]], [v1[1], v2[1]]];
    let d = mat_inv(&d_inv)?;
    Ok(MixingMatrix { d, d_inv, eigvals: eig })
}

/// c0 + c1·E.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub fn eval(&self, e: f64) -> f64 {
        self.c0 + self.c1 * e
    }

    /// Root of the affine function, if it has one.
    pub fn root(&self) -> Option<f64> {
        (self.c1 != 0.0).then(|| -self.c0 / self.c1)
    }

    fn compose(&self, sign: f64, shift: f64) -> Affine {
        // f(E₁) with E₁ = sign·E − shift.
        Affine { c0: self.c0 - self.c1 * shift, c1: self.c1 * sign }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderCoefficients {
    pub w1: f64,
    pub w2: f64,
    pub offset: f64,
}

/// Coefficients of the 1+1 form after all shifts are folded in. The 2+1
/// system maps onto this with a sign flip on the energy.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Effective {
    couplings: Couplings,
    /// mc² + m̃c² (or the mapped transverse term in 2+1).
    mass: f64,
    /// E₁ = energy_sign·E − energy_shift.
    energy_sign: f64,
    energy_shift: f64,
}

impl Effective {
    fn one_plus_one(c: &Couplings, k: &Constants) -> Self {
        Effective { couplings: *c, mass: k.rest_energy() + c.m_shift, energy_sign: 1.0, energy_shift: c.e_shift }
    }

    fn e1(&self, e: f64) -> f64 {
        self.energy_sign * e - self.energy_shift
    }

    /// (offset, w1, w2) as affine functions of the physical energy.
    fn ladder(&self) -> Result<(Affine, Affine, Affine)> {
        let c = &self.couplings;
        let report = validate(c)?;
        let m = self.mass;
        let eps = c.eps;
        let (off, w1, w2) = match report.branch {
            CouplingBranch::General => {
                let tau = report.tau.ok_or(Error::UnstableRegime { delta: report.delta })?;
                let (z, l) = (c.zeta2 / c.zeta1, c.zeta3 / c.zeta1);
                let (a, b) = (z + l, z - l);
                let den = tau * (tau + 1.0);
                (
                    Affine { c0: (m + z * eps) / tau, c1: l / tau },
                    Affine {
                        c0: (a * (1.0 + tau) * m - eps * (1.0 - l * a + tau)) / den,
                        c1: (1.0 + z * a + tau) / den,
                    },
                    Affine {
                        c0: -(b * (1.0 + tau) * m - eps * (1.0 + l * b + tau)) / den,
                        c1: (1.0 + z * b + tau) / den,
                    },
                )
            }
            CouplingBranch::PurePseudoscalar => {
                (Affine { c0: eps, c1: 0.0 }, Affine { c0: m, c1: 1.0 }, Affine { c0: -m, c1: 1.0 })
            }
            CouplingBranch::DegenerateElectric => {
                if report.delta <= 0.0 {
                    return Err(Error::UnstableRegime { delta: report.delta });
                }
                let mix = mixing_matrix(c)?;
                self.ladder_by_conjugation_raw(&mix)
            }
        };
        Ok((
            off.compose(self.energy_sign, self.energy_shift),
            w1.compose(self.energy_sign, self.energy_shift),
            w2.compose(self.energy_sign, self.energy_shift),
        ))
    }

    /// T = D·R·D⁻¹ read off at E₁ = 0 and E₁ = 1 (T is affine in E₁).
    fn ladder_by_conjugation_raw(&self, mix: &MixingMatrix) -> (Affine, Affine, Affine) {
        let t_at = |e1: f64| {
            let r = [[self.mass, -e1 + self.couplings.eps], [e1 + self.couplings.eps, -self.mass]];
            mix.conjugate(&r)
        };
        let (t0, t1) = (t_at(0.0), t_at(1.0));
        let aff = |i: usize, j: usize, sign: f64| Affine { c0: sign * t0[i][j], c1: sign * (t1[i][j] - t0[i][j]) };
        (aff(0, 0, 1.0), aff(0, 1, -1.0), aff(1, 0, 1.0))
    }

    /// det R + offset², valid on every branch.
    fn kg_by_determinant(&self, e: f64, offset: f64) -> f64 {
        let e1 = self.e1(e);
        let eps = self.couplings.eps;
        e1 * e1 - self.mass * self.mass - eps * eps + offset * offset
    }
}

/// w₁, w₂ and the constant part of W at energy `e`.
pub fn ladder_coefficients(c: &Couplings, k: &Constants, e: f64) -> Result<LadderCoefficients> {
    let (off, w1, w2) = Effective::one_plus_one(c, k).ladder()?;
    Ok(LadderCoefficients { w1: w1.eval(e), w2: w2.eval(e), offset: off.eval(e) })
}

/// The same coefficients read from D·R·D⁻¹ with any valid mixing matrix.
pub fn ladder_by_conjugation(c: &Couplings, k: &Constants, mix: &MixingMatrix, e: f64) -> LadderCoefficients {
    let eff = Effective::one_plus_one(c, k);
    let (off, w1, w2) = eff.ladder_by_conjugation_raw(mix);
    let e1 = eff.e1(e);
    LadderCoefficients { w1: w1.eval(e1), w2: w2.eval(e1), offset: off.eval(e1) }
}

/// Klein-Gordon eigenvalue w(E). Closed form on the general branch,
/// E₁² − M² on the pseudoscalar branch.
pub fn kg_eigenvalue(c: &Couplings, k: &Constants, e: f64) -> Result<f64> {
    let report = validate(c)?;
    let eff = Effective::one_plus_one(c, k);
    let e1 = eff.e1(e);
    let m = eff.mass;
    match report.branch {
        CouplingBranch::General => {
            let tau = report.tau.ok_or(Error::UnstableRegime { delta: report.delta })?;
            let (z, l) = (c.zeta2 / c.zeta1, c.zeta3 / c.zeta1);
            let eps = c.eps;
            let num = (e1 * e1 - m * m) * z * z
                + (e1 + l * m) * (e1 + l * m)
                + eps * eps * (l * l - 1.0)
                + 2.0 * eps * (e1 * l + m) * z;
            Ok(num / (tau * tau))
        }
        CouplingBranch::PurePseudoscalar => Ok(e1 * e1 - m * m),
        CouplingBranch::DegenerateElectric => {
            let (off, _, _) = eff.ladder()?;
            Ok(eff.kg_by_determinant(e, off.eval(e)))
        }
    }
}

/// Klein-Gordon eigenvalue of the planar problem in its own parametrization.
pub fn kg_eigenvalue_2plus1(mode: &Mode2p1, k: &Constants, e: f64) -> Result<f64> {
    mode.check()?;
    let delta = mode.delta();
    if mode.lambda1 == 0.0 {
        return Err(Error::UnsupportedBranch("lambda1 = 0"));
    }
    let tau = mode.tau().ok_or(Error::UnstableRegime { delta })?;
    let (lam, nu) = (mode.lambda2 / mode.lambda1, mode.lambda3 / mode.lambda1);
    let mc2 = k.rest_energy();
    let ck = k.c * mode.k;
    let num = e * e * (1.0 + lam * lam) - (mc2 - ck * lam) * (mc2 - ck * lam)
        + 2.0 * e * (ck + lam * mc2) * nu
        + (ck * ck + mc2 * mc2) * nu * nu;
    Ok(num / (tau * tau))
}

/// Something that evaluates a superpotential and its derivative.
pub trait Superpotential {
    /// (W(x), W′(x)).
    fn eval(&self, x: f64) -> Result<(f64, f64)>;
    fn domain(&self) -> Domain;
    /// ∫ˣW up to a constant, when known in closed form.
    fn antiderivative(&self, _x: f64) -> Option<Result<f64>> {
        None
    }
}

impl<T: Superpotential + ?Sized> Superpotential for &T {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        (**self).eval(x)
    }
    fn antiderivative(&self, x: f64) -> Option<Result<f64>> {
        (**self).antiderivative(x)
    }
    fn domain(&self) -> Domain {
        (**self).domain()
    }
}

/// W(x) = κ·s(x) + offset.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSuperpotential {
    pub kappa: f64,
    pub offset: f64,
    pub shape: Shape,
}

impl Superpotential for ShapeSuperpotential {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (s, ds) = self.shape.eval(x)?;
        Ok((self.kappa * s + self.offset, self.kappa * ds))
    }
    fn domain(&self) -> Domain {
        self.shape.domain()
    }
    fn antiderivative(&self, x: f64) -> Option<Result<f64>> {
        Some(self.shape.antiderivative(x).map(|a| self.kappa * a + self.offset * x))
    }
}

/// Superpotential from a closure returning (W, W′).
pub struct FnSuperpotential<F> {
    pub f: F,
    pub domain: Domain,
}

impl<F: Fn(f64) -> (f64, f64)> Superpotential for FnSuperpotential<F> {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        Ok((self.f)(x))
    }
    fn domain(&self) -> Domain {
        self.domain
    }
}

/// −W, which exchanges the roles of the two partners.
pub struct Negated<W>(pub W);

impl<W: Superpotential> Superpotential for Negated<W> {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let (w, dw) = self.0.eval(x)?;
        Ok((-w, -dw))
    }
    fn domain(&self) -> Domain {
        self.0.domain()
    }
    fn antiderivative(&self, x: f64) -> Option<Result<f64>> {
        self.0.antiderivative(x).map(|r| r.map(|v| -v))
    }
}

/// V∓ = W² ∓ cħW′.
pub struct PartnerPotentials<W> {
    pub w: W,
    pub c_hbar: f64,
}

impl<W: Superpotential> PartnerPotentials<W> {
    pub fn v_minus(&self, x: f64) -> Result<f64> {
        let (w, dw) = self.w.eval(x)?;
        Ok(w * w - self.c_hbar * dw)
    }
    pub fn v_plus(&self, x: f64) -> Result<f64> {
        let (w, dw) = self.w.eval(x)?;
        Ok(w * w + self.c_hbar * dw)
    }
}

pub fn partner_potentials<W: Superpotential>(w: W, k: &Constants) -> PartnerPotentials<W> {
    PartnerPotentials { w, c_hbar: k.c_hbar() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum KgRoute {
    OnePlusOne(Couplings),
    TwoPlusOne(Mode2p1),
}

/// Everything the spectral engine needs about one problem. The
/// superpotential is W(x, E) = κ·s(x) + offset(E).
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationData {
    pub branch: CouplingBranch,
    /// τ on the general branch, 1 on the pseudoscalar branch, √Δ otherwise.
    pub tau: f64,
    pub kappa: f64,
    pub offset: Affine,
    pub w1: Affine,
    pub w2: Affine,
    pub shape: Shape,
    pub constants: Constants,
    kg: KgRoute,
    effective: Effective,
}

impl FactorizationData {
    pub fn new(c: &Couplings, k: &Constants, shape: &Shape) -> Result<Self> {
        k.check()?;
        shape.check()?;
        let report = validate(c)?;
        let eff = Effective::one_plus_one(c, k);
        Self::build(eff, report.branch, report.delta, k, shape, KgRoute::OnePlusOne(*c))
    }

    fn build(
        eff: Effective,
        branch: CouplingBranch,
        delta: f64,
        k: &Constants,
        shape: &Shape,
        kg: KgRoute,
    ) -> Result<Self> {
        if branch != CouplingBranch::PurePseudoscalar && delta <= 0.0 {
            return Err(Error::UnstableRegime { delta });
        }
        let mix = mixing_matrix(&eff.couplings)?;
        let (offset, w1, w2) = eff.ladder()?;
        let tau = match branch {
            CouplingBranch::General => eff.couplings.tau().ok_or(Error::UnstableRegime { delta })?,
            CouplingBranch::PurePseudoscalar => 1.0,
            CouplingBranch::DegenerateElectric => libm::sqrt(delta),
        };
        Ok(FactorizationData {
            branch,
            tau,
            kappa: mix.eigvals[1],
            offset,
            w1,
            w2,
            shape: shape.clone(),
            constants: *k,
            kg,
            effective: eff,
        })
    }

    pub fn c_hbar(&self) -> f64 {
        self.constants.c_hbar()
    }

    pub fn superpotential(&self, e: f64) -> ShapeSuperpotential {
        ShapeSuperpotential { kappa: self.kappa, offset: self.offset.eval(e), shape: self.shape.clone() }
    }

    pub fn ladder(&self, e: f64) -> LadderCoefficients {
        LadderCoefficients { w1: self.w1.eval(e), w2: self.w2.eval(e), offset: self.offset.eval(e) }
    }

    /// w₁(E)·w₂(E).
    pub fn w_product(&self, e: f64) -> f64 {
        self.w1.eval(e) * self.w2.eval(e)
    }

    /// Klein-Gordon eigenvalue by the independent closed form.
    pub fn kg_eigenvalue(&self, e: f64) -> Result<f64> {
        match self.kg {
            KgRoute::OnePlusOne(c) => kg_eigenvalue(&c, &self.constants, e),
            KgRoute::TwoPlusOne(m) => kg_eigenvalue_2plus1(&m, &self.constants, e),
        }
    }

    /// Size of the constant energy terms: rest and offset energies and the
    /// pseudoscalar constant. Used to size root-search windows.
    pub fn energy_scale(&self) -> f64 {
        let c = &self.effective.couplings;
        let zeta = if c.zeta1 != 0.0 { (c.zeta2 / c.zeta1).abs() } else { 0.0 };
        self.constants.rest_energy()
            + self.effective.mass.abs()
            + c.eps.abs() * (1.0 + zeta)
            + self.effective.energy_shift.abs()
    }

    /// Mixing matrix of the (possibly mapped) 1+1 couplings.
    pub fn mixing(&self) -> Result<MixingMatrix> {
        mixing_matrix(&self.effective.couplings)
    }
}

pub fn superpotential(c: &Couplings, k: &Constants, shape: &Shape, e: f64) -> Result<ShapeSuperpotential> {
    Ok(FactorizationData::new(c, k, shape)?.superpotential(e))
}

/// A planar problem rewritten as a 1+1 problem. Energies of the mapped
/// problem relate to the planar ones by E₁ = energy_sign·E.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduced2p1 {
    pub data: FactorizationData,
    pub effective: Problem,
    pub energy_sign: f64,
}

/// For spin s the planar system is the 1+1 system with ζ₁ = −sλ₁, ζ₂ = sλ₂,
/// ζ₃ = −sλ₃, ε = s·mc², mass term −s·ck and E₁ = −sE. For s = +1 this gives
/// W = −τ·eA_y − offset; for s = −1 the sign of W flips, which swaps the
/// roles of A and A†.
pub fn reduce_2plus1(mode: &Mode2p1, k: &Constants, shape: &Shape) -> Result<Reduced2p1> {
    mode.check()?;
    k.check()?;
    if mode.lambda1 == 0.0 {
        return Err(Error::UnsupportedBranch("lambda1 = 0"));
    }
    let delta = mode.delta();
    if delta <= 0.0 {
        return Err(Error::UnstableRegime { delta });
    }
    let s = mode.s.sign();
    let mc2 = k.rest_energy();
    let mass = -s * k.c * mode.k;
    let couplings = Couplings {
        zeta1: -s * mode.lambda1,
        zeta2: s * mode.lambda2,
        zeta3: -s * mode.lambda3,
        eps: s * mc2,
        m_shift: mass - mc2,
        e_shift: 0.0,
    };
    let eff = Effective { couplings, mass, energy_sign: -s, energy_shift: 0.0 };
    let data = FactorizationData::build(eff, CouplingBranch::General, delta, k, shape, KgRoute::TwoPlusOne(*mode))?;
    Ok(Reduced2p1 { data, effective: Problem::one_plus_one(*k, couplings, shape.clone()), energy_sign: -s })
}
