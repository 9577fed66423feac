//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the vectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::SolverFailure("inconsistent tridiagonal dimensions"));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("non-finite matrix entry"));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().fold(1.0f64, |a, e| a.max(e * e));
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.dim() {
                break;
            }
            q = self.diag[i + 1] - x - self.off[i] * self.off[i] / q;
        }
        count
    }

    /// The k-th smallest eigenvalue, known to lie in [lo, hi].
    fn bisect_index(&self, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues in [lo, hi), ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(hi > lo) {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let (lo, hi) = (lo.max(glo - 1.0), hi.min(ghi + 1.0));
        if !(hi > lo) {
            return Vec::new();
        }
        let tol = 4.0 * f64::EPSILON * self.norm().max(1.0);
        let (c_lo, c_hi) = (self.count_below(lo), self.count_below(hi));
        (c_lo..c_hi).map(|k| self.bisect_index(k, lo, hi, tol)).collect()
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn smallest(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        let tol = 4.0 * f64::EPSILON * self.norm().max(1.0);
        (0..count.min(self.dim())).map(|k| self.bisect_index(k, lo - 1.0, hi + 1.0, tol)).collect()
    }

    /// Unit eigenvector for an (accurate) eigenvalue. `previous` holds
    /// vectors of nearby eigenvalues to orthogonalize against.
    pub fn eigenvector(&self, lambda: f64, previous: &[&[f64]]) -> Result<Vec<f64>> {
        let n = self.dim();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let lu = ShiftedLu::new(self, lambda, norm);
        // Deterministic, non-symmetric start so no eigenvector is orthogonal to it.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * libm::sin(0.7 * i as f64 + 0.3)).collect();
        for _ in 0..4 {
            lu.solve(&mut x);
            for p in previous {
                let d: f64 = x.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(p.iter()).for_each(|(a, b)| *a -= d * b);
            }
            let s = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::SolverFailure("inverse iteration collapsed"));
            }
            x.iter_mut().for_each(|v| *v /= s);
        }
        let res = self.residual(&x, lambda);
        if res > 1e-6 * norm {
            return Err(Error::SolverFailure("inverse iteration did not converge"));
        }
        Ok(x)
    }

    /// ‖(T − λ)x‖₂.
    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let y = self.mul(x);
        libm::sqrt(y.iter().zip(x).map(|(a, b)| (a - lambda * b) * (a - lambda * b)).sum())
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }
}

/// LU factorization of T − λI with partial pivoting.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &SymTridiagonal, lambda: f64, norm: f64) -> Self {
        let n = t.dim();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - lambda).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let f = dl[i] / d[i];
                    dl[i] = f;
                    d[i + 1] -= f * du[i];
                }
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swap[i] = true;
            }
        }
        let tiny = f64::EPSILON * norm;
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu { dl, d, du, du2, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
