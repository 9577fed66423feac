//! The two oracles against each other and against known spectra.

use diracsusy::catalog::{
    oracle_grid, oracle_levels, CrossedFieldProblem, InverseLinearProblem, LinearProblem, OracleMethod,
};
use diracsusy::model::{Constants, Couplings, Level, Problem, Shape, Spin};
use diracsusy::oracle::{build_hamiltonian, eigenvalues, Grid};
use diracsusy::susy::{spectrum, SpectralProblem};

fn mixed() -> Couplings {
    Couplings { zeta1: 1.0, zeta3: 0.5, ..Couplings::default() }
}

struct Case {
    name: &'static str,
    problem: Problem,
    spectral: SpectralProblem,
    /// Matrix grid size; the half-line with an electric admixture converges
    /// below second order and needs the most points.
    fine: usize,
}

fn catalog() -> Vec<Case> {
    let k = Constants::default();
    let mut v = Vec::new();
    for (name, c) in [("linear scalar", Couplings::scalar(1.0)), ("linear mixed", mixed())] {
        let p = LinearProblem { a: 1.0, couplings: c, constants: k };
        v.push(Case { name, problem: p.problem().unwrap(), spectral: p.spectral().unwrap(), fine: 256_001 });
    }
    for (name, c, fine) in
        [("inverse-linear scalar", Couplings::scalar(1.0), 256_001), ("inverse-linear mixed", mixed(), 1_024_001)]
    {
        let p = InverseLinearProblem { q: 1.0, couplings: c, constants: k };
        v.push(Case { name, problem: p.problem().unwrap(), spectral: p.spectral().unwrap(), fine });
    }
    for (name, s) in [("crossed fields up", Spin::Up), ("crossed fields down", Spin::Down)] {
        let p = CrossedFieldProblem { b: 1.0, efield: 0.5, c_scalar: 0.2, k: 0.3, s, constants: k };
        v.push(Case { name, problem: p.problem().unwrap(), spectral: p.spectral().unwrap(), fine: 256_001 });
    }
    v
}

fn resized(g: &Grid, n: usize) -> Grid {
    if g.xmin > 0.0 && g.xmin < g.step() {
        Grid::half_line(g.xmax, n).unwrap()
    } else {
        Grid::new(g.xmin, g.xmax, n).unwrap()
    }
}

#[test]
fn shooting_and_diagonalization_agree() {
    for c in catalog() {
        let levels = spectrum(&c.spectral, 5).unwrap();
        let grid = oracle_grid(&c.spectral, &levels, 4001).unwrap();
        // Shooting starts from the series at the origin, which costs accuracy
        // on the half-line.
        let shoot_grid = match c.problem.shape {
            Shape::InverseLinear { .. } => resized(&grid, 16_001),
            _ => grid,
        };
        let shot = oracle_levels(&c.problem, &levels, &shoot_grid, OracleMethod::Shooting).unwrap();
        let diag = oracle_levels(&c.problem, &levels, &resized(&grid, c.fine), OracleMethod::Matrix).unwrap();
        for ((l, s), d) in levels.iter().zip(&shot).zip(&diag) {
            let (s, d) = (s.unwrap(), d.unwrap());
            assert!((s - d).abs() < 1e-6, "{}: n={} shooting {s} matrix {d}", c.name, l.n);
            assert!((s - l.energy).abs() < 1e-6, "{}: n={} shooting {s} engine {}", c.name, l.n, l.energy);
        }
    }
}

#[test]
fn matrix_levels_converge_at_second_order() {
    let p = Problem::one_plus_one(Constants::default(), Couplings::scalar(1.0), Shape::Linear { a: 1.0 });
    let exact: Vec<f64> = (1..=3).map(|n| (2.0 * n as f64).sqrt()).collect();
    let mut points = Vec::new();
    for h in [0.04f64, 0.02, 0.01] {
        let n = (48.0 / h) as usize + 1;
        let grid = Grid::centered(-1.0, 24.0, n).unwrap();
        let found = eigenvalues(&build_hamiltonian(&p, &grid).unwrap(), (0.5, 2.6));
        assert_eq!(found.len(), 3, "{found:?}");
        let err = found.iter().zip(&exact).map(|(f, e)| (f - e).abs()).fold(0.0, f64::max);
        points.push((h.ln(), err.ln()));
    }
    // Least-squares slope of log error against log h.
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    assert!((slope - 2.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn assembled_matrices_are_symmetric() {
    let k = Constants::default();
    let mut problems: Vec<(Problem, Grid)> = catalog()
        .into_iter()
        .map(|c| {
            let g = match c.problem.shape {
                Shape::InverseLinear { .. } => Grid::half_line(20.0, 64).unwrap(),
                _ => Grid::centered(0.0, 8.0, 64).unwrap(),
            };
            (c.problem, g)
        })
        .collect();
    let pseudo = Couplings { zeta2: 1.0, eps: 0.3, ..Couplings::default() };
    problems.push((Problem::one_plus_one(k, pseudo, Shape::Linear { a: 1.0 }), Grid::centered(0.0, 8.0, 64).unwrap()));
    for (p, g) in problems {
        let m = build_hamiltonian(&p, &g).unwrap().to_dense();
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((v - m[j][i]).abs() < 1e-12);
            }
        }
    }
}

fn mirrored(e: f64, set: &[f64], tol: f64) -> bool {
    set.iter().any(|&o| (o + e).abs() < tol)
}

#[test]
fn charge_conjugation_pairs_without_electric_potential() {
    let k = Constants::default();
    let grid = Grid::centered(0.0, 20.0, 2001).unwrap();
    for c in [Couplings::scalar(1.0), Couplings { zeta1: 0.7, m_shift: 0.2, ..Couplings::default() }] {
        let v = eigenvalues(
            &build_hamiltonian(&Problem::one_plus_one(k, c, Shape::Linear { a: 1.0 }), &grid).unwrap(),
            (-3.0, 3.0),
        );
        assert!(v.len() > 5);
        assert!(v.iter().all(|&e| mirrored(e, &v, 1e-10)), "{v:?}");
    }
    let v = eigenvalues(
        &build_hamiltonian(&Problem::one_plus_one(k, mixed(), Shape::Linear { a: 1.0 }), &grid).unwrap(),
        (-3.0, 3.0),
    );
    assert!(v.iter().any(|&e| !mirrored(e, &v, 1e-6)));
}

#[test]
fn levels_sit_inside_the_sized_box() {
    // A level is resolved by the auto-sized grid only if its envelope is
    // negligible at the walls; doubling the box must not move it.
    for c in catalog().into_iter().filter(|c| !matches!(c.problem.shape, Shape::InverseLinear { .. })) {
        let levels: Vec<Level> = spectrum(&c.spectral, 3).unwrap();
        let g = oracle_grid(&c.spectral, &levels, 4001).unwrap();
        let wide = g.doubled_box(false).unwrap();
        let a = oracle_levels(&c.problem, &levels, &g, OracleMethod::Matrix).unwrap();
        let b = oracle_levels(&c.problem, &levels, &wide, OracleMethod::Matrix).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.unwrap() - y.unwrap()).abs() < 1e-10, "{}: {x:?} vs {y:?}", c.name);
        }
    }
}
