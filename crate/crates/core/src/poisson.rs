//! Periodic Poisson problems `-v'' = f` (1D) and `-lap v = f` (2D):
//! quantum pipelines `U_I -> F -> U_P -> F^dagger`, classical spectral
//! oracles and the analytic Gaussian fixture.
//!
//! The symbol `s(j) = (L / 2 pi r(j))^2` is encoded as
//! `h(j) = arcsin(eps s(j))`, so the flag branch carries `eps s(j)` up to
//! the fit error only. The solution is read from the branch
//! `a0 = 1, a1 = 0` and rescaled by `|f| / eps`.

use crate::circuit::{Circuit, GateCounts};
use crate::encode::chebyshev::{chebyshev_fit_2d_adaptive, chebyshev_fit_adaptive, BivariatePiecewise, PiecewiseChebyshev};
use crate::encode::piecewise::{push_bivariate_piecewise, push_piecewise, BivariateLayout, OutOfRange, PiecewiseLayout};
use crate::encode::stateprep::push_exact_state_prep;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};
use crate::qft::qft_on_registers;
use crate::stats::{linear_fit, LinearFit};
use crate::statevector::StateVector;
use crate::transpile::transpile_counts;
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gaussian-bump constants `alpha_0 .. alpha_4`.
pub const FIXTURE_ALPHAS: [f64; 5] = [0.3, 0.1, -0.1772, 0.053, -0.0266];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    pub qubits: usize,
    pub length: f64,
}

impl GridSpec1D {
    pub fn new(cells: usize, length: f64) -> Result<Self> {
        check_cells(cells)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("length must be positive, got {length}")));
        }
        Ok(Self { qubits: cells.trailing_zeros() as usize, length })
    }

    pub fn cells(&self) -> usize {
        1 << self.qubits
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.h()
    }
}

/// `N x N` periodic grid; nodal data is stored row-major, `k0 * N + k1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec2D {
    pub qubits_per_axis: usize,
    pub length: f64,
}

impl GridSpec2D {
    pub fn new(cells_per_axis: usize, length: f64) -> Result<Self> {
        let g = GridSpec1D::new(cells_per_axis, length)?;
        Ok(Self { qubits_per_axis: g.qubits, length })
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.qubits_per_axis
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.length / self.cells_per_axis() as f64
    }
}

fn check_cells(cells: usize) -> Result<()> {
    if cells < 4 || !cells.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("cell count must be a power of two >= 4, got {cells}")));
    }
    Ok(())
}

/// Cyclic relabelling `r(k) = k` for `k < N/2`, `k - N` otherwise.
pub fn relabel(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn relabel_real(x: f64, n: f64) -> f64 {
    if x < n / 2.0 {
        x
    } else {
        x - n
    }
}

/// Inverse-Laplacian symbol on the frequency grid, with the zero frequency
/// overridden.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySymbol {
    pub cells: usize,
    pub length: f64,
    pub dims: usize,
    pub zero_value: f64,
}

impl FrequencySymbol {
    /// Symbol at a real-valued index `x` (relabelled like an integer index).
    pub fn eval_real(&self, x: f64) -> f64 {
        let r = relabel_real(x, self.cells as f64);
        if r == 0.0 {
            return self.zero_value;
        }
        (self.length / (2.0 * PI * r)).powi(2)
    }

    pub fn eval_real_2d(&self, x0: f64, x1: f64) -> f64 {
        let n = self.cells as f64;
        let d = relabel_real(x0, n).powi(2) + relabel_real(x1, n).powi(2);
        if d == 0.0 {
            return self.zero_value;
        }
        self.length * self.length / (4.0 * PI * PI * d)
    }

    pub fn at(&self, j: usize) -> f64 {
        self.eval_real(j as f64)
    }

    pub fn at_2d(&self, j0: usize, j1: usize) -> f64 {
        self.eval_real_2d(j0 as f64, j1 as f64)
    }

    /// Largest value, attained at `|r| = 1`.
    pub fn max_abs(&self) -> f64 {
        (self.length / (2.0 * PI)).powi(2).max(self.zero_value.abs())
    }
}

pub fn inverse_laplace_symbol_1d(cells: usize, length: f64) -> FrequencySymbol {
    FrequencySymbol { cells, length, dims: 1, zero_value: 0.0 }
}

pub fn inverse_laplace_symbol_2d(cells_per_axis: usize, length: f64) -> FrequencySymbol {
    FrequencySymbol { cells: cells_per_axis, length, dims: 2, zero_value: 0.0 }
}

/// Nodal source values and their Euclidean norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceField {
    pub values: Vec<f64>,
    pub norm: f64,
}

impl SourceField {
    /// Rejects vanishing, non-finite or non-zero-mean data.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("source values must be finite".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Validation("zero source cannot be normalised".into()));
        }
        let sum: f64 = values.iter().sum();
        if sum.abs() > 1e-8 * norm {
            return Err(Error::Validation(format!("source mean is not zero (sum {sum:.3e}, norm {norm:.3e})")));
        }
        Ok(Self { values, norm })
    }

    /// Subtracts the mean first.
    pub fn zero_mean(mut values: Vec<f64>) -> Result<Self> {
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        values.iter_mut().for_each(|v| *v -= mean);
        Self::new(values)
    }

    pub fn normalised(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.norm).collect()
    }
}

/// Symbol fit settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Highest degree per interval.
    pub degree: usize,
    /// Each interval takes the lowest degree whose symbol error is at most
    /// `rel_tolerance * max|s|`. `None` always uses `degree`.
    pub rel_tolerance: Option<f64>,
    /// Defaults to `0.1 / max|s|`.
    pub epsilon: Option<f64>,
    /// Rejects fits whose symbol error exceeds this.
    pub max_fit_error: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { degree: 3, rel_tolerance: Some(1e-5), epsilon: None, max_fit_error: None }
    }
}

/// Aligned dyadic blocks of the frequency index: `{0}`, `[2^m, 2^(m+1))`
/// for `r = 1 .. N/2 - 1`, their mirror images for negative `r`, and
/// `{N - 1}`. That gives `2n` intervals for `N = 2^n`.
pub fn default_breakpoints(cells: usize) -> Vec<i64> {
    let n = cells.trailing_zeros() as usize;
    let big = cells as i64;
    let mut b = vec![0i64, 1];
    for m in 1..n {
        b.push(1 << m);
    }
    for m in (0..n.saturating_sub(1)).rev() {
        b.push(big - (1 << (m + 1)));
    }
    b.push(big - 1);
    b.push(big);
    b.sort_unstable();
    b.dedup();
    b
}

fn resolve_epsilon(sym: &FrequencySymbol, fit: &FitConfig) -> Result<f64> {
    let eps = fit.epsilon.unwrap_or(0.1 / sym.max_abs());
    if !(eps > 0.0) || eps * sym.max_abs() > 1.0 {
        return Err(Error::InvalidArgument(format!("epsilon {eps} must lie in (0, 1 / max|s|]")));
    }
    Ok(eps)
}

/// Tolerance on `h = arcsin(eps s)`; `arcsin` is nearly linear on the
/// small range used, so this tracks the symbol tolerance.
fn h_tolerance(sym: &FrequencySymbol, fit: &FitConfig, eps: f64) -> Option<f64> {
    fit.rel_tolerance.map(|r| r * sym.max_abs() * eps)
}

/// Fitted 1D symbol: `fit` approximates `arcsin(eps s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEncoding1D {
    pub epsilon: f64,
    pub fit: PiecewiseChebyshev,
    /// `max_j |sin(fit(j)) / eps - s(j)|`.
    pub fit_max_error: f64,
}

pub fn fit_symbol_1d(sym: &FrequencySymbol, fit: &FitConfig) -> Result<SymbolEncoding1D> {
    let eps = resolve_epsilon(sym, fit)?;
    let pc = chebyshev_fit_adaptive(
        |x| (eps * sym.eval_real(x)).asin(),
        &default_breakpoints(sym.cells),
        fit.degree,
        h_tolerance(sym, fit, eps),
    )?;
    let err = (0..sym.cells)
        .map(|j| ((pc.eval(j as i64).unwrap_or(0.0)).sin() / eps - sym.at(j)).abs())
        .fold(0.0, f64::max);
    check_fit(err, fit)?;
    Ok(SymbolEncoding1D { epsilon: eps, fit: pc, fit_max_error: err })
}

/// Fitted 2D symbol on tensor cells of the 1D breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEncoding2D {
    pub epsilon: f64,
    pub fit: BivariatePiecewise,
    pub fit_max_error: f64,
}

pub fn fit_symbol_2d(sym: &FrequencySymbol, fit: &FitConfig) -> Result<SymbolEncoding2D> {
    let eps = resolve_epsilon(sym, fit)?;
    let b = default_breakpoints(sym.cells);
    let bp = chebyshev_fit_2d_adaptive(
        |x0, x1| (eps * sym.eval_real_2d(x0, x1)).asin(),
        &b,
        &b,
        fit.degree,
        h_tolerance(sym, fit, eps),
    )?;
    let n = sym.cells;
    let mut err = 0.0f64;
    for j0 in 0..n {
        for j1 in 0..n {
            let v = bp.eval(j0 as i64, j1 as i64).unwrap_or(0.0).sin() / eps;
            err = err.max((v - sym.at_2d(j0, j1)).abs());
        }
    }
    check_fit(err, fit)?;
    Ok(SymbolEncoding2D { epsilon: eps, fit: bp, fit_max_error: err })
}

fn check_fit(err: f64, fit: &FitConfig) -> Result<()> {
    match fit.max_fit_error {
        Some(bound) if err > bound => {
            Err(Error::Fit(format!("symbol fit error {err:.3e} exceeds the configured bound {bound:.3e}")))
        }
        _ => Ok(()),
    }
}

/// 1D register: data `0..n`, `a0 = n`, `a1 = n + 1`. Aligned blocks need
/// no comparator workspace.
pub fn layout_1d(n: usize) -> PiecewiseLayout {
    PiecewiseLayout { data: (0..n).collect(), a0: n, a1: n + 1, workspace: Vec::new() }
}

/// 2D register: axis 0 on `0..n`, axis 1 on `n..2n`, then `a0`, `f0`, `a1`.
pub fn layout_2d(n: usize) -> BivariateLayout {
    BivariateLayout {
        data0: (0..n).collect(),
        data1: (n..2 * n).collect(),
        a0: 2 * n,
        f0: 2 * n + 1,
        a1: 2 * n + 2,
        workspace: Vec::new(),
    }
}

/// `F -> U_P -> F^dagger` (state preparation excluded).
pub fn poisson1d_solver_circuit(grid: &GridSpec1D, enc: &SymbolEncoding1D) -> Result<Circuit> {
    let n = grid.qubits;
    let layout = layout_1d(n);
    let total = layout.num_qubits();
    let mut c = Circuit::with_label(total, "poisson1d");
    c.append(&qft_on_registers(total, &[(0, n)], false)?)?;
    push_piecewise(&mut c, &enc.fit, &layout, 1.0, &[], OutOfRange::Zero)?;
    c.append(&qft_on_registers(total, &[(0, n)], true)?)?;
    Ok(c)
}

/// `(F (x) F) -> U_P -> (F^dagger (x) F^dagger)`.
pub fn poisson2d_solver_circuit(grid: &GridSpec2D, enc: &SymbolEncoding2D) -> Result<Circuit> {
    let n = grid.qubits_per_axis;
    let layout = layout_2d(n);
    let total = layout.num_qubits();
    let regs = [(0, n), (n, n)];
    let mut c = Circuit::with_label(total, "poisson2d");
    c.append(&qft_on_registers(total, &regs, false)?)?;
    push_bivariate_piecewise(&mut c, &enc.fit, &layout, 1.0, &[])?;
    c.append(&qft_on_registers(total, &regs, true)?)?;
    Ok(c)
}

/// Exact preparation of `f / |f|` on the data register of a `total`-qubit
/// circuit.
pub fn source_state_prep(f: &SourceField, data_qubits: usize, total: usize) -> Result<Circuit> {
    let mut c = Circuit::with_label(total, "source_state_prep");
    push_exact_state_prep(&mut c, &f.normalised(), &(0..data_qubits).collect::<Vec<_>>(), &[])?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonDiagnostics {
    pub cells: usize,
    pub num_qubits: usize,
    /// Transpiled counts of the solver circuit (QFT, symbol, inverse QFT).
    pub gate_counts: GateCounts,
    /// Transpiled counts of the exact source preparation, reported apart.
    pub state_prep_counts: GateCounts,
    pub success_norm: f64,
    pub junk_norm: f64,
    pub epsilon: f64,
    pub source_norm: f64,
    pub fit_max_error: f64,
    /// Normalised L2 distance to the classical spectral oracle.
    pub l2_error_oracle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSolution {
    pub solution: Vec<f64>,
    pub diagnostics: PoissonDiagnostics,
}

/// Runs `prep` then `solver` and reads `a0 = 1`, other ancillas 0.
fn run_and_extract(prep: &Circuit, solver: &Circuit, data_qubits: usize, a0_bit: usize) -> Result<(Vec<f64>, f64, f64)> {
    let mut s = StateVector::new_zero_state(solver.num_qubits)?;
    s.apply_circuit(prep)?;
    s.apply_circuit(solver)?;
    let anc = solver.num_qubits - data_qubits;
    let amps = s.amplitudes();
    let mut out = Vec::with_capacity(1 << data_qubits);
    let mut succ = 0.0;
    for k in 0..1usize << data_qubits {
        let a = amps[k << anc | 1 << a0_bit];
        succ += a.norm_sqr();
        out.push(a.re);
    }
    let total = s.norm_sqr();
    Ok((out, succ.sqrt(), (total - succ).max(0.0).sqrt()))
}

/// Quantum solve of `-v'' = f` with the fitted symbol.
pub fn poisson1d_quantum_solve(f: &SourceField, grid: &GridSpec1D, fit: &FitConfig) -> Result<PoissonSolution> {
    check_len(f, grid.cells())?;
    let sym = inverse_laplace_symbol_1d(grid.cells(), grid.length);
    let enc = fit_symbol_1d(&sym, fit)?;
    let solver = poisson1d_solver_circuit(grid, &enc)?;
    let prep = source_state_prep(f, grid.qubits, solver.num_qubits)?;
    let (amps, success_norm, junk_norm) = run_and_extract(&prep, &solver, grid.qubits, 1)?;
    let solution: Vec<f64> = amps.iter().map(|a| a * f.norm / enc.epsilon).collect();
    let oracle = classical_spectral_solve_1d(&f.values, grid);
    let diagnostics = PoissonDiagnostics {
        cells: grid.cells(),
        num_qubits: solver.num_qubits,
        gate_counts: transpile_counts(&solver),
        state_prep_counts: transpile_counts(&prep),
        success_norm,
        junk_norm,
        epsilon: enc.epsilon,
        source_norm: f.norm,
        fit_max_error: enc.fit_max_error,
        l2_error_oracle: l2_error(&solution, &oracle),
    };
    Ok(PoissonSolution { solution, diagnostics })
}

/// Quantum solve of `-lap v = f` on an `N x N` grid.
pub fn poisson2d_quantum_solve(f: &SourceField, grid: &GridSpec2D, fit: &FitConfig) -> Result<PoissonSolution> {
    let n = grid.qubits_per_axis;
    check_len(f, 1 << (2 * n))?;
    let sym = inverse_laplace_symbol_2d(grid.cells_per_axis(), grid.length);
    let enc = fit_symbol_2d(&sym, fit)?;
    let solver = poisson2d_solver_circuit(grid, &enc)?;
    let prep = source_state_prep(f, 2 * n, solver.num_qubits)?;
    let (amps, success_norm, junk_norm) = run_and_extract(&prep, &solver, 2 * n, 2)?;
    let solution: Vec<f64> = amps.iter().map(|a| a * f.norm / enc.epsilon).collect();
    let oracle = classical_spectral_solve_2d(&f.values, grid);
    let diagnostics = PoissonDiagnostics {
        cells: grid.cells_per_axis(),
        num_qubits: solver.num_qubits,
        gate_counts: transpile_counts(&solver),
        state_prep_counts: transpile_counts(&prep),
        success_norm,
        junk_norm,
        epsilon: enc.epsilon,
        source_norm: f.norm,
        fit_max_error: enc.fit_max_error,
        l2_error_oracle: l2_error(&solution, &oracle),
    };
    Ok(PoissonSolution { solution, diagnostics })
}

fn check_len(f: &SourceField, want: usize) -> Result<()> {
    if f.values.len() != want {
        return Err(Error::InvalidArgument(format!("source has {} values, grid needs {want}", f.values.len())));
    }
    Ok(())
}

/// Same pipeline with the symbol injected exactly: one fully
/// pattern-controlled `RY(2 arcsin(eps s_j))` per frequency. Isolates the
/// circuit from the fit.
pub fn poisson1d_exact_symbol_solve(f: &SourceField, grid: &GridSpec1D) -> Result<Vec<f64>> {
    check_len(f, grid.cells())?;
    let n = grid.qubits;
    let sym = inverse_laplace_symbol_1d(grid.cells(), grid.length);
    let eps = 0.1 / sym.max_abs();
    let total = n + 1;
    let mut c = Circuit::with_label(total, "poisson1d_exact_symbol");
    c.append(&qft_on_registers(total, &[(0, n)], false)?)?;
    push_exact_symbol(&mut c, &(0..n).collect::<Vec<_>>(), n, |j| eps * sym.at(j))?;
    c.append(&qft_on_registers(total, &[(0, n)], true)?)?;
    let prep = source_state_prep(f, n, total)?;
    let (amps, _, _) = run_and_extract(&prep, &c, n, 0)?;
    Ok(amps.iter().map(|a| a * f.norm / eps).collect())
}

/// 2D analogue of [`poisson1d_exact_symbol_solve`].
pub fn poisson2d_exact_symbol_solve(f: &SourceField, grid: &GridSpec2D) -> Result<Vec<f64>> {
    let n = grid.qubits_per_axis;
    check_len(f, 1 << (2 * n))?;
    let sym = inverse_laplace_symbol_2d(grid.cells_per_axis(), grid.length);
    let eps = 0.1 / sym.max_abs();
    let total = 2 * n + 1;
    let regs = [(0, n), (n, n)];
    let mut c = Circuit::with_label(total, "poisson2d_exact_symbol");
    c.append(&qft_on_registers(total, &regs, false)?)?;
    let side = 1usize << n;
    push_exact_symbol(&mut c, &(0..2 * n).collect::<Vec<_>>(), 2 * n, |j| eps * sym.at_2d(j / side, j % side))?;
    c.append(&qft_on_registers(total, &regs, true)?)?;
    let prep = source_state_prep(f, 2 * n, total)?;
    let (amps, _, _) = run_and_extract(&prep, &c, 2 * n, 0)?;
    Ok(amps.iter().map(|a| a * f.norm / eps).collect())
}

fn push_exact_symbol(c: &mut Circuit, data: &[usize], flag: usize, value: impl Fn(usize) -> f64) -> Result<()> {
    let n = data.len();
    for j in 0..1usize << n {
        let v = value(j);
        if v == 0.0 {
            continue;
        }
        let ctl: Vec<Control> = (0..n).map(|b| Control::on(data[b], j >> (n - 1 - b) & 1 == 1)).collect();
        c.push(GateInstance::controlled(GateKind::RY(2.0 * v.asin()), ctl, vec![flag]))?;
    }
    Ok(())
}

fn fft_real(values: &[f64], inverse: bool) -> Vec<C64> {
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(buf.len()) } else { planner.plan_fft_forward(buf.len()) };
    plan.process(&mut buf);
    buf
}

/// Forward DFT, exact symbol, inverse DFT.
pub fn classical_spectral_solve_1d(f: &[f64], grid: &GridSpec1D) -> Vec<f64> {
    let n = f.len();
    let sym = inverse_laplace_symbol_1d(n, grid.length);
    let mut hat = fft_real(f, false);
    for (j, h) in hat.iter_mut().enumerate() {
        *h *= sym.at(j);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut hat);
    hat.iter().map(|c| c.re / n as f64).collect()
}

/// 2D spectral oracle on row-major data.
pub fn classical_spectral_solve_2d(f: &[f64], grid: &GridSpec2D) -> Vec<f64> {
    let side = grid.cells_per_axis();
    let sym = inverse_laplace_symbol_2d(side, grid.length);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(side);
    let inv = planner.plan_fft_inverse(side);
    let mut a: Vec<C64> = f.iter().map(|&v| C64::new(v, 0.0)).collect();
    let transform = |a: &mut Vec<C64>, plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        for row in a.chunks_mut(side) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); side];
        for c in 0..side {
            for r in 0..side {
                col[r] = a[r * side + c];
            }
            plan.process(&mut col);
            for r in 0..side {
                a[r * side + c] = col[r];
            }
        }
    };
    transform(&mut a, &fwd);
    for j0 in 0..side {
        for j1 in 0..side {
            a[j0 * side + j1] *= sym.at_2d(j0, j1);
        }
    }
    transform(&mut a, &inv);
    let scale = (side * side) as f64;
    a.iter().map(|c| c.re / scale).collect()
}

/// Standard forward DFT `v_hat_k = sum_j v_j exp(-2 pi i jk / N)`.
pub fn dft_forward(values: &[f64]) -> Vec<C64> {
    fft_real(values, false)
}

/// `(1/N) sum_k v_hat_k exp(i xi_k x)` with `xi_k = 2 pi r(k) / L`. The
/// Nyquist term keeps `r(N/2) = -N/2`, so off-grid values of data with
/// Nyquist content carry an imaginary part.
pub fn interpolate_bandlimited_complex(v_hat: &[C64], length: f64, x: f64) -> C64 {
    let n = v_hat.len();
    let s: C64 = v_hat
        .iter()
        .enumerate()
        .map(|(k, &c)| c * C64::from_polar(1.0, 2.0 * PI * relabel(k, n) as f64 * x / length))
        .sum();
    s / n as f64
}

pub fn interpolate_bandlimited(v_hat: &[C64], length: f64, x: f64) -> f64 {
    interpolate_bandlimited_complex(v_hat, length, x).re
}

/// `| a/|a| - b/|b| |`. A zero vector is compared as is.
pub fn l2_error(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sa = if na > 0.0 { 1.0 / na } else { 1.0 };
    let sb = if nb > 0.0 { 1.0 / nb } else { 1.0 };
    a.iter().zip(b).map(|(x, y)| (x * sa - y * sb).powi(2)).sum::<f64>().sqrt()
}

/// Least-squares slope of `log(error)` against `log(N)`.
pub fn convergence_fit(cells: &[f64], errors: &[f64]) -> Result<LinearFit> {
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("errors must be positive for a log fit".into()));
    }
    let lx: Vec<f64> = cells.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Gaussian bump `f = exp(-(x - a0)^2 / a1^2) + a2` on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonFixture {
    pub alphas: [f64; 5],
}

pub fn analytic_poisson1d_fixture() -> PoissonFixture {
    PoissonFixture { alphas: FIXTURE_ALPHAS }
}

impl PoissonFixture {
    pub fn source(&self, x: f64) -> f64 {
        let [a0, a1, a2, _, _] = self.alphas;
        (-((x - a0) / a1).powi(2)).exp() + a2
    }

    /// The closed form with the erf term; it satisfies `v'' = f`.
    pub fn closed_form(&self, x: f64) -> f64 {
        let [a0, a1, a2, a3, a4] = self.alphas;
        let z = (x - a0) / a1;
        a1 * PI.sqrt() / 2.0 * ((x - a0) * statrs::function::erf::erf(z) + a1 / PI.sqrt() * (-z * z).exp())
            + a2 * x * x / 2.0
            + a3 * x
            + a4
    }

    /// Solution of `-v'' = f`, the sign the spectral solvers use.
    pub fn solution(&self, x: f64) -> f64 {
        -self.closed_form(x)
    }

    /// Zero-mean nodal source on `grid`.
    pub fn sampled_source(&self, grid: &GridSpec1D) -> Result<SourceField> {
        SourceField::zero_mean((0..grid.cells()).map(|k| self.source(grid.x(k))).collect())
    }

    /// Zero-mean nodal solution on `grid`.
    pub fn sampled_solution(&self, grid: &GridSpec1D) -> Vec<f64> {
        let mut v: Vec<f64> = (0..grid.cells()).map(|k| self.solution(grid.x(k))).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        v
    }
}

/// Seeded sum of `modes` products `a0 sin(a1 pi x0 + a2) sin(a3 pi x1 + a4)`
/// with integer `a1, a3` in `[-20, 20]` and real `a0, a2, a4` in `(-1, 1)`,
/// mean removed. Row-major on the `N x N` grid of `[0, L)^2`.
pub fn sin_product_source(grid: &GridSpec2D, modes: usize, seed: u64) -> Result<SourceField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = grid.cells_per_axis();
    let mut f = vec![0.0; side * side];
    for _ in 0..modes {
        let a0: f64 = rng.gen_range(-1.0..1.0);
        let a1 = rng.gen_range(-20i32..=20) as f64;
        let a2: f64 = rng.gen_range(-1.0..1.0);
        let a3 = rng.gen_range(-20i32..=20) as f64;
        let a4: f64 = rng.gen_range(-1.0..1.0);
        for k0 in 0..side {
            let s0 = (a1 * PI * grid.x(k0) + a2).sin();
            for k1 in 0..side {
                f[k0 * side + k1] += a0 * s0 * (a3 * PI * grid.x(k1) + a4).sin();
            }
        }
    }
    SourceField::zero_mean(f)
}

/// Gate counts of the 1D solver circuit for a sweep of cell counts.
pub fn poisson1d_gate_counts(cells: usize, fit: &FitConfig) -> Result<GateCounts> {
    let grid = GridSpec1D::new(cells, 1.0)?;
    let enc = fit_symbol_1d(&inverse_laplace_symbol_1d(cells, 1.0), fit)?;
    Ok(transpile_counts(&poisson1d_solver_circuit(&grid, &enc)?))
}

/// Gate counts of the 2D solver circuit.
pub fn poisson2d_gate_counts(cells_per_axis: usize, fit: &FitConfig) -> Result<GateCounts> {
    let grid = GridSpec2D::new(cells_per_axis, 1.0)?;
    let enc = fit_symbol_2d(&inverse_laplace_symbol_2d(cells_per_axis, 1.0), fit)?;
    Ok(transpile_counts(&poisson2d_solver_circuit(&grid, &enc)?))
}
