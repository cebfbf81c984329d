use qcm::poisson::{
    analytic_poisson1d_fixture, classical_spectral_solve_1d, classical_spectral_solve_2d, default_breakpoints,
    poisson1d_exact_symbol_solve, poisson1d_gate_counts, poisson1d_quantum_solve, poisson2d_exact_symbol_solve,
    poisson2d_quantum_solve, sin_product_source, FitConfig, GridSpec1D, GridSpec2D, SourceField,
};
use qcm::stats::polylog_fit;
use std::f64::consts::PI;

fn mode(grid: &GridSpec1D, m: f64, phase: f64) -> Vec<f64> {
    (0..grid.cells()).map(|k| (2.0 * PI * m * grid.x(k) + phase).sin()).collect()
}

#[test]
fn pipeline_is_linear() {
    let grid = GridSpec1D::new(16, 1.0).unwrap();
    let fit = FitConfig::default();
    let f1 = mode(&grid, 1.0, 0.3);
    let f2: Vec<f64> = mode(&grid, 3.0, -1.1).iter().zip(mode(&grid, 5.0, 0.0)).map(|(a, b)| a + 0.5 * b).collect();
    let (alpha, beta) = (0.7, -2.3);
    let mix: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| alpha * a + beta * b).collect();
    let solve = |v: Vec<f64>| poisson1d_quantum_solve(&SourceField::zero_mean(v).unwrap(), &grid, &fit).unwrap().solution;
    let (v1, v2, v) = (solve(f1), solve(f2), solve(mix));
    for k in 0..grid.cells() {
        assert!((v[k] - alpha * v1[k] - beta * v2[k]).abs() < 1e-8, "k={k}");
    }
}

#[test]
fn exact_symbol_isolates_the_fit() {
    for n in [8, 32, 128] {
        let grid = GridSpec1D::new(n, 1.0).unwrap();
        let f = analytic_poisson1d_fixture().sampled_source(&grid).unwrap();
        let q = poisson1d_exact_symbol_solve(&f, &grid).unwrap();
        let o = classical_spectral_solve_1d(&f.values, &grid);
        let dev = q.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "N={n}: {dev:e}");
    }
    let grid = GridSpec2D::new(8, 1.0).unwrap();
    let f = sin_product_source(&grid, 3, 7).unwrap();
    let q = poisson2d_exact_symbol_solve(&f, &grid).unwrap();
    let o = classical_spectral_solve_2d(&f.values, &grid);
    let dev = q.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-10, "2D: {dev:e}");
}

#[test]
fn fixture_solution_is_zero_mean_and_periodic() {
    let grid = GridSpec1D::new(64, 1.0).unwrap();
    let f = analytic_poisson1d_fixture().sampled_source(&grid).unwrap();
    let sol = poisson1d_quantum_solve(&f, &grid, &FitConfig::default()).unwrap();
    let mean = sol.solution.iter().sum::<f64>() / 64.0;
    assert!(mean.abs() < 1e-8, "mean {mean:e}");
    // Periodic: the node after the last is node 0, so the wrap-around jump
    // is as small as any interior step.
    let jumps: Vec<f64> = (0..64).map(|k| (sol.solution[(k + 1) % 64] - sol.solution[k]).abs()).collect();
    let interior = jumps[..63].iter().cloned().fold(0.0, f64::max);
    assert!(jumps[63] <= interior);
    let d = &sol.diagnostics;
    assert!((d.success_norm.powi(2) + d.junk_norm.powi(2) - 1.0).abs() < 1e-10);
    assert!(d.l2_error_oracle < 1e-5);
}

#[test]
fn two_dimensional_solve_matches_oracle() {
    let grid = GridSpec2D::new(16, 1.0).unwrap();
    let f = sin_product_source(&grid, 5, 3).unwrap();
    let sol = poisson2d_quantum_solve(&f, &grid, &FitConfig::default()).unwrap();
    let o = classical_spectral_solve_2d(&f.values, &grid);
    let dev = sol.solution.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-6, "{dev:e}");
}

#[test]
fn seeded_sources_are_reproducible() {
    let grid = GridSpec2D::new(8, 1.0).unwrap();
    assert_eq!(sin_product_source(&grid, 5, 11).unwrap(), sin_product_source(&grid, 5, 11).unwrap());
    assert_ne!(sin_product_source(&grid, 5, 11).unwrap(), sin_product_source(&grid, 5, 12).unwrap());
}

#[test]
fn gate_counts_are_polylog() {
    let fit = FitConfig::default();
    let sizes = [8usize, 16, 32, 64, 128, 256];
    let totals: Vec<f64> = sizes.iter().map(|&n| poisson1d_gate_counts(n, &fit).unwrap().total() as f64).collect();
    assert!(totals.windows(2).all(|w| w[1] > w[0]), "{totals:?}");
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let pf = polylog_fit(&x, &totals, 3, 0.99).unwrap();
    assert!(pf.r2 >= 0.99, "{pf:?}");
    assert_eq!(default_breakpoints(256).len(), 2 * 8 + 1);
}

#[test]
fn rejects_bad_sources() {
    assert!(SourceField::new(vec![0.0; 8]).is_err());
    assert!(SourceField::new(vec![1.0, 0.0, 0.0, 0.0]).is_err());
    assert!(SourceField::new(vec![1.0, f64::NAN, -1.0, 0.0]).is_err());
    let grid = GridSpec1D::new(8, 1.0).unwrap();
    let f = SourceField::zero_mean(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(poisson1d_quantum_solve(&f, &grid, &FitConfig::default()).is_err());
    assert!(GridSpec1D::new(12, 1.0).is_err());
}
