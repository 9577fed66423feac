//! Small numerical helpers: quadrature, finite differences, root finding.

use alloc::vec;
use alloc::vec::Vec;

/// Trapezoid rule on an arbitrary (sorted) abscissa set.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut s = 0.0;
    for i in 1..x.len() {
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    s
}

/// Running trapezoid integral, starting at zero on `x[0]`.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 1..x.len() {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    out
}

/// Second-order derivative on a possibly non-uniform grid.
/// Interior points use the three-point centered stencil, the ends use
/// one-sided three-point stencils. Needs at least three points.
pub fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3 && y.len() == n);
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i] + h1 / (h2 * (h1 + h2)) * y[i + 1];
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1] - h1 / (h2 * (h1 + h2)) * y[2];
    let (h1, h2) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * y[n - 3] - (h1 + h2) / (h1 * h2) * y[n - 2]
        + (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * y[n - 1];
    d
}

/// Discrete L2 norm with trapezoid weights.
pub fn l2_norm(x: &[f64], y: &[f64]) -> f64 {
    let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    libm::sqrt(trapezoid(x, &sq))
}

/// Real roots of `a E² + b E + c`, ascending. Falls back to the linear
/// equation when `a` vanishes.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-15 * scale {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-14 * (b * b).max((4.0 * a * c).abs()) {
        return Vec::new();
    }
    let disc = disc.max(0.0);
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + libm::copysign(libm::sqrt(disc), b));
    let (r1, r2) = if q == 0.0 {
        let r = libm::sqrt(-c / a);
        (-r, r)
    } else {
        (q / a, c / q)
    };
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol || mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on a uniform mesh of `nodes` points over
/// `[lo, hi]`, each bisected to `tol`. Exact zeros on nodes are kept.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, nodes: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(hi > lo) || nodes < 2 {
        return roots;
    }
    let step = (hi - lo) / (nodes - 1) as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        roots.push(x0);
    }
    for i in 1..nodes {
        let x1 = if i == nodes - 1 { hi } else { lo + step * i as f64 };
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) && f0.is_finite() && f1.is_finite() {
            roots.push(bisect(&mut f, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// A few Newton steps with a centered numerical derivative, kept only
/// while they reduce |f|.
pub fn newton_polish<F: FnMut(f64) -> f64>(mut f: F, mut x: f64, scale: f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..8 {
        if fx == 0.0 {
            break;
        }
        let dh = 1e-6 * x.abs().max(scale).max(1e-300);
        let dfdx = (f(x + dh) - f(x - dh)) / (2.0 * dh);
        if dfdx == 0.0 || !dfdx.is_finite() {
            break;
        }
        let xn = x - fx / dfdx;
        let fn_ = f(xn);
        if fn_.abs() < fx.abs() {
            x = xn;
            fx = fn_;
        } else {
            break;
        }
    }
    x
}
