//! Fixed-point homogenisation of a periodic 1D RVE: the classical
//! Fourier-based iteration and its quantum circuit.
//!
//! One iteration maps `gamma -> gamma_bar - (tau - mean tau) / mu0` with
//! the polarisation `tau = (mu - mu0) gamma`. On the quantum side the
//! iteration `s` fragment writes `tau` onto control `c_{2s}`, transforms it,
//! scales it by `-1/mu0` onto `c_{2s+1}`, swaps the applied-strain amplitude
//! into the zero frequency and transforms back. The working branch of
//! iterate `s >= 1` carries `gamma^(s)` with unit prefactor.

use crate::circuit::{Circuit, GateCounts};
use crate::encode::chebyshev::PiecewiseChebyshev;
use crate::encode::piecewise::{push_piecewise, OutOfRange, PiecewiseLayout};
use crate::encode::swap::push_amplitude_swap;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};
use crate::poisson::GridSpec1D;
use crate::qft::qft_on_registers;
use crate::stats::{linear_fit, LinearFit};
use crate::statevector::StateVector;
use crate::transpile::transpile_counts;
use crate::C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RveProblem {
    pub grid: GridSpec1D,
    /// Nodal shear modulus.
    pub mu: Vec<f64>,
    pub mu0: f64,
    pub gamma_bar: f64,
}

impl RveProblem {
    pub fn new(grid: GridSpec1D, mu: Vec<f64>, mu0: f64, gamma_bar: f64) -> Result<Self> {
        if mu.len() != grid.cells() {
            return Err(Error::InvalidArgument(format!("{} moduli for {} nodes", mu.len(), grid.cells())));
        }
        if mu.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidArgument("moduli must be positive".into()));
        }
        if !(mu0 > 0.0 && mu0.is_finite()) {
            return Err(Error::InvalidArgument(format!("reference modulus must be positive, got {mu0}")));
        }
        if !gamma_bar.is_finite() || (grid.cells() as f64).sqrt() * gamma_bar.abs() >= 1.0 {
            return Err(Error::Precondition(format!("|sqrt(N) gamma_bar| must be below 1, got gamma_bar {gamma_bar}")));
        }
        Ok(Self { grid, mu, mu0, gamma_bar })
    }

    /// `mu1` on the first `fraction` of the cell, `mu2` on the rest.
    pub fn two_phase(cells: usize, mu1: f64, mu2: f64, fraction: f64, mu0: f64, gamma_bar: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!("volume fraction {fraction} outside [0, 1]")));
        }
        let grid = GridSpec1D::new(cells, 1.0)?;
        let split = (fraction * cells as f64).round() as usize;
        let mu = (0..cells).map(|k| if k < split { mu1 } else { mu2 }).collect();
        Self::new(grid, mu, mu0, gamma_bar)
    }

    /// The fixture: `mu in {1, 2}` half and half, `mu0 = 1.5`,
    /// `gamma_bar = 0.01`, `N = 8`.
    pub fn fixture() -> Self {
        Self::two_phase(8, 1.0, 2.0, 0.5, 1.5, 0.01).expect("fixture is valid")
    }

    /// `(min mu + max mu) / 2`.
    pub fn default_mu0(mu: &[f64]) -> f64 {
        let (lo, hi) = min_max(mu);
        (lo + hi) / 2.0
    }

    pub fn contrast(&self) -> f64 {
        let (lo, hi) = min_max(&self.mu);
        hi / lo
    }

    /// Harmonic mean, the modulus of the series composite.
    pub fn harmonic_mean(&self) -> f64 {
        self.mu.len() as f64 / self.mu.iter().map(|m| 1.0 / m).sum::<f64>()
    }

    pub fn arithmetic_mean(&self) -> f64 {
        self.mu.iter().sum::<f64>() / self.mu.len() as f64
    }

    /// Exact strain of the series composite, `gamma_bar mu_eff / mu`.
    pub fn analytic_strain(&self) -> Vec<f64> {
        let h = self.harmonic_mean();
        self.mu.iter().map(|m| self.gamma_bar * h / m).collect()
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// 1D Green factor: `gamma_hat = -tau_hat / mu0` away from the zero frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierGreenFactor {
    pub mu0: f64,
}

impl FourierGreenFactor {
    pub fn factor(&self) -> f64 {
        -1.0 / self.mu0
    }
}

/// Stopping rule of the classical iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stop {
    Steps(usize),
    /// Relative change below `tol`, at most `max_steps` steps.
    Tolerance { tol: f64, max_steps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRve {
    /// `gamma^(0) .. gamma^(S)`.
    pub iterates: Vec<Vec<f64>>,
    pub converged: bool,
}

impl ClassicalRve {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("at least the predictor")
    }
}

/// One classical step with a DFT, the Green factor and the zero-frequency
/// slot set to `N gamma_bar`.
pub fn classical_step(p: &RveProblem, gamma: &[f64]) -> Vec<f64> {
    let n = gamma.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<C64> = gamma.iter().zip(&p.mu).map(|(g, m)| C64::new((m - p.mu0) * g, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let green = FourierGreenFactor { mu0: p.mu0 }.factor();
    buf.iter_mut().for_each(|v| *v *= green);
    buf[0] = C64::new(n as f64 * p.gamma_bar, 0.0);
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|v| v.re / n as f64).collect()
}

/// Fixed-point iteration from the uniform predictor `gamma = gamma_bar`.
/// Fails when the update norm grows three steps in a row.
pub fn classical_fixed_point(p: &RveProblem, stop: Stop) -> Result<ClassicalRve> {
    let n = p.mu.len();
    let mut iterates = vec![vec![p.gamma_bar; n]];
    let (max_steps, tol) = match stop {
        Stop::Steps(s) => (s, None),
        Stop::Tolerance { tol, max_steps } => (max_steps, Some(tol)),
    };
    let mut last_change = f64::INFINITY;
    let mut growth = 0;
    let mut converged = false;
    for _ in 0..max_steps {
        let prev = iterates.last().unwrap();
        let next = classical_step(p, prev);
        let change = norm(&diff(&next, prev));
        let scale = norm(&next).max(f64::MIN_POSITIVE);
        iterates.push(next);
        if change > last_change {
            growth += 1;
            if growth >= 3 {
                return Err(Error::NonConvergence(format!(
                    "update norm grew three steps in a row (mu0 = {} is too small for contrast {:.3})",
                    p.mu0,
                    p.contrast()
                )));
            }
        } else {
            growth = 0;
        }
        last_change = change;
        if let Some(t) = tol {
            if change / scale < t {
                converged = true;
                break;
            }
        }
    }
    Ok(ClassicalRve { iterates, converged })
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `mean(mu gamma) / gamma_bar`.
pub fn effective_modulus(mu: &[f64], gamma: &[f64], gamma_bar: f64) -> f64 {
    mu.iter().zip(gamma).map(|(m, g)| m * g).sum::<f64>() / mu.len() as f64 / gamma_bar
}

/// Register partition: field, controls `c_0 .. c_{2S-1}`, applied-strain
/// qubits `b_0 .. b_{S-1}`, helpers. `helpers[0]` is the range flag of the
/// polarisation encoding and the swap tag; the other helpers are
/// comparator workspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RveLayout {
    pub steps: usize,
    pub field: Vec<usize>,
    pub controls: Vec<usize>,
    pub applied: Vec<usize>,
    pub helpers: Vec<usize>,
}

impl RveLayout {
    pub fn new(n: usize, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("at least one iteration is needed".into()));
        }
        let c0 = n;
        let b0 = c0 + 2 * steps;
        let h0 = b0 + steps;
        Ok(Self {
            steps,
            field: (0..n).collect(),
            controls: (c0..b0).collect(),
            applied: (b0..h0).collect(),
            helpers: (h0..h0 + n).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.field.len() + self.controls.len() + self.applied.len() + self.helpers.len()
    }

    /// Index of the basis state with the field at `k` and the given
    /// controls set; everything else in `|0>`.
    fn index(&self, k: usize, controls_on: usize, applied_on: Option<usize>) -> usize {
        let nq = self.num_qubits();
        let n = self.field.len();
        let mut idx = k << (nq - n);
        for &q in &self.controls[..controls_on] {
            idx |= 1 << (nq - 1 - q);
        }
        if let Some(t) = applied_on {
            idx |= 1 << (nq - 1 - self.applied[t]);
        }
        idx
    }
}

/// Scalars multiplying the working branch, in order of application.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrefactorLedger {
    pub entries: Vec<(String, f64)>,
}

impl PrefactorLedger {
    pub fn record(&mut self, label: impl Into<String>, factor: f64) {
        self.entries.push((label.into(), factor));
    }

    pub fn product(&self) -> f64 {
        self.entries.iter().map(|(_, f)| f).product()
    }
}

/// Scaling choices: `sin g_k = kappa_s (mu_k - mu0)` on `c_{2s}` and
/// `sin phi = -nu / mu0` on `c_{2s+1}`, with `kappa_s nu` restoring a unit
/// prefactor after every step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RveScaling {
    pub nu: f64,
    pub beta_main: f64,
    pub kappa0: f64,
    pub kappa: f64,
}

impl RveScaling {
    pub fn new(p: &RveProblem, steps: usize) -> Result<Self> {
        let n = p.mu.len() as f64;
        let a = n.sqrt() * p.gamma_bar;
        let total = steps as f64 * a * a;
        if total >= 1.0 {
            return Err(Error::Precondition(format!(
                "S N gamma_bar^2 = {total:.4} must stay below 1 for the applied-strain copies"
            )));
        }
        let beta_main = (1.0 - total).sqrt();
        let spread = p.mu.iter().map(|m| (m - p.mu0).abs()).fold(0.0, f64::max);
        let mut nu = p.mu0.min(1.0);
        if nu < spread {
            nu = p.mu0;
        }
        if nu < spread {
            return Err(Error::Precondition(format!(
                "max |mu - mu0| = {spread} exceeds mu0 = {}; choose a larger reference modulus",
                p.mu0
            )));
        }
        let kappa0 = a / (beta_main * nu);
        if kappa0 * spread > 1.0 {
            return Err(Error::Precondition("applied strain too large for the first polarisation step".into()));
        }
        Ok(Self { nu, beta_main, kappa0, kappa: 1.0 / nu })
    }

    pub fn kappa_at(&self, s: usize) -> f64 {
        if s == 0 {
            self.kappa0
        } else {
            self.kappa
        }
    }
}

/// `RY(2 arcsin(sqrt(N) gamma_bar))` on `qubit` of a `total`-qubit circuit.
pub fn encode_applied_strain(gamma_bar: f64, cells: usize, qubit: usize, total: usize) -> Result<Circuit> {
    let a = (cells as f64).sqrt() * gamma_bar;
    if !(a.abs() < 1.0) {
        return Err(Error::Precondition(format!("|sqrt(N) gamma_bar| = {:.4} must be below 1", a.abs())));
    }
    let mut c = Circuit::with_label(total, "applied_strain");
    if a != 0.0 {
        c.push(GateInstance::ry(qubit, 2.0 * a.asin()))?;
    }
    Ok(c)
}

/// `S` applied-strain copies (amplitude `sqrt(N) gamma_bar` on each
/// `|b_t = 1>`), then the uniform predictor on the field in the branch with
/// every `b` in `|0>`.
pub fn initial_circuit(p: &RveProblem, layout: &RveLayout) -> Result<Circuit> {
    let n = p.mu.len() as f64;
    let a = n.sqrt() * p.gamma_bar;
    RveScaling::new(p, layout.steps)?;
    let mut c = Circuit::with_label(layout.num_qubits(), "rve_initial");
    for (t, &b) in layout.applied.iter().enumerate() {
        let rest = (1.0 - t as f64 * a * a).sqrt();
        let ctl: Vec<Control> = layout.applied[..t].iter().map(|&q| Control::neg(q)).collect();
        if a != 0.0 {
            c.push(GateInstance::controlled(GateKind::RY(2.0 * (a / rest).asin()), ctl, vec![b]))?;
        }
    }
    let none: Vec<Control> = layout.applied.iter().map(|&q| Control::neg(q)).collect();
    for &q in &layout.field {
        c.push(GateInstance::controlled(GateKind::H, none.clone(), vec![q]))?;
    }
    Ok(c)
}

/// Conditions of the working branch of iteration `s`.
fn working_controls(layout: &RveLayout, s: usize) -> Vec<Control> {
    if s == 0 {
        layout.applied.iter().map(|&q| Control::neg(q)).collect()
    } else {
        vec![Control::pos(layout.controls[2 * s - 2]), Control::pos(layout.controls[2 * s - 1])]
    }
}

/// Runs of equal modulus as intervals with constant `arcsin(kappa (mu - mu0))`.
fn polarisation_fit(p: &RveProblem, kappa: f64) -> PiecewiseChebyshev {
    let mut breakpoints = vec![0i64];
    let mut coeffs = Vec::new();
    let mut k = 0;
    while k < p.mu.len() {
        let mut e = k + 1;
        while e < p.mu.len() && p.mu[e] == p.mu[k] {
            e += 1;
        }
        breakpoints.push(e as i64);
        coeffs.push(vec![(kappa * (p.mu[k] - p.mu0)).asin()]);
        k = e;
    }
    let max_errors = vec![0.0; coeffs.len()];
    PiecewiseChebyshev { breakpoints, degree: 0, coeffs, max_errors }
}

/// Flag amplitudes `kappa_s (mu_k - mu0)` written by [`polarisation_unitary`].
pub fn polarisation_values(p: &RveProblem, scaling: &RveScaling, s: usize) -> Vec<f64> {
    p.mu.iter().map(|m| scaling.kappa_at(s) * (m - p.mu0)).collect()
}

/// `U_P` of iteration `s`: `|k>|0> -> cos g_k |k>|0> + sin g_k |k>|1>` on
/// `c_{2s}`, restricted to the working branch.
pub fn polarisation_unitary(p: &RveProblem, layout: &RveLayout, s: usize) -> Result<Circuit> {
    let scaling = RveScaling::new(p, layout.steps)?;
    let pc = polarisation_fit(p, scaling.kappa_at(s));
    let pl = PiecewiseLayout {
        data: layout.field.clone(),
        a0: layout.controls[2 * s],
        a1: layout.helpers[0],
        workspace: layout.helpers[1..].to_vec(),
    };
    let mut c = Circuit::with_label(layout.num_qubits(), "rve_polarisation");
    push_piecewise(&mut c, &pc, &pl, 1.0, &working_controls(layout, s), OutOfRange::Zero)?;
    Ok(c)
}

/// Iteration `s`: polarisation, transform on `c_{2s}`, Green factor onto
/// `c_{2s+1}`, applied-strain swap into the zero frequency, inverse
/// transform on `c_{2s} c_{2s+1}`.
pub fn iteration_circuit(p: &RveProblem, layout: &RveLayout, s: usize) -> Result<Circuit> {
    if s >= layout.steps {
        return Err(Error::Capacity(format!("iteration {s} exceeds the {} laid out", layout.steps)));
    }
    let scaling = RveScaling::new(p, layout.steps)?;
    let total = layout.num_qubits();
    let n = layout.field.len();
    let (ca, cb) = (layout.controls[2 * s], layout.controls[2 * s + 1]);
    let mut c = Circuit::with_label(total, "rve_iteration");
    c.append(&polarisation_unitary(p, layout, s)?)?;
    let f = qft_on_registers(total, &[(layout.field[0], n)], false)?;
    c.append(&f.controlled_by(&[Control::pos(ca)])?)?;
    let phi = 2.0 * (-scaling.nu / p.mu0).asin();
    c.push(GateInstance::controlled(GateKind::RY(phi), vec![Control::pos(ca)], vec![cb]))?;
    // Labels over field ++ controls ++ applied, MSB first.
    let mut qubits = layout.field.clone();
    qubits.extend(&layout.controls);
    qubits.extend(&layout.applied);
    let width = qubits.len();
    let nc = layout.controls.len();
    let na = layout.applied.len();
    let mut k1 = 0u64;
    for j in 0..2 * s + 2 {
        k1 |= 1 << (nc - 1 - j + na);
    }
    let k2 = 1u64 << (na - 1 - s);
    debug_assert!(width < 64);
    push_amplitude_swap(&mut c, k1, k2, &qubits, layout.helpers[0])?;
    let fi = qft_on_registers(total, &[(layout.field[0], n)], true)?;
    c.append(&fi.controlled_by(&[Control::pos(ca), Control::pos(cb)])?)?;
    Ok(c)
}

/// Initial circuit followed by `S` iterations.
pub fn fixed_point_circuit(p: &RveProblem, steps: usize) -> Result<(Circuit, RveLayout)> {
    let layout = RveLayout::new(p.grid.qubits, steps)?;
    let mut c = initial_circuit(p, &layout)?;
    c.label = "rve_fixed_point".into();
    for s in 0..steps {
        c.append(&iteration_circuit(p, &layout, s)?)?;
    }
    Ok((c, layout))
}

/// Field amplitudes of the working branch after `s` iterations, divided by
/// `prefactor`, and the branch norm.
pub fn extract_strain(state: &StateVector, layout: &RveLayout, s: usize, prefactor: f64) -> Result<(Vec<f64>, f64)> {
    let n = layout.field.len();
    let mut out = Vec::with_capacity(1 << n);
    let mut nrm = 0.0;
    for k in 0..1usize << n {
        let a = state.amplitude(layout.index(k, 2 * s, None));
        nrm += a.norm_sqr();
        out.push(a.re / prefactor);
    }
    let nrm = nrm.sqrt();
    if nrm < 1e-12 {
        return Err(Error::DegenerateProjection(nrm * nrm));
    }
    Ok((out, nrm))
}

/// `(3 S^2 + S - 1) 2^n`.
pub fn junk_bound(steps: usize, n: usize) -> usize {
    (3 * steps * steps + steps - 1) << n
}

/// Nonzero basis components (above `1e-13`) outside the success branch.
pub fn junk_branch_count(state: &StateVector, layout: &RveLayout) -> usize {
    let n = layout.field.len();
    let mut success = std::collections::HashSet::new();
    for k in 0..1usize << n {
        success.insert(layout.index(k, layout.controls.len(), None));
    }
    state.amplitudes().iter().enumerate().filter(|(i, a)| a.norm() > 1e-13 && !success.contains(i)).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RveResult {
    /// Quantum iterates `gamma^(0) .. gamma^(S)`.
    pub iterates: Vec<Vec<f64>>,
    pub polarisation: Vec<Vec<f64>>,
    pub stress: Vec<Vec<f64>>,
    /// Norm of the working branch at each iterate.
    pub success_norms: Vec<f64>,
    pub success_norm: f64,
    pub junk_norm: f64,
    pub junk_branches: usize,
    pub gate_counts: GateCounts,
    pub num_qubits: usize,
    pub ledger: PrefactorLedger,
}

impl RveResult {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("at least the predictor")
    }
}

/// Simulates the `S`-step circuit fragment by fragment and reads every
/// iterate from its working branch.
pub fn quantum_fixed_point(p: &RveProblem, steps: usize) -> Result<RveResult> {
    let (full, layout) = fixed_point_circuit(p, steps)?;
    let scaling = RveScaling::new(p, steps)?;
    let n_cells = p.mu.len() as f64;
    let mut ledger = PrefactorLedger::default();
    ledger.record("applied-strain main branch", scaling.beta_main);
    ledger.record("uniform predictor / gamma_bar", 1.0 / (n_cells.sqrt() * p.gamma_bar));
    let mut state = StateVector::new_zero_state(layout.num_qubits())?;
    state.apply_circuit(&initial_circuit(p, &layout)?)?;
    let (g0, n0) = extract_strain(&state, &layout, 0, ledger.product())?;
    let mut iterates = vec![g0];
    let mut success_norms = vec![n0];
    for s in 0..steps {
        state.apply_circuit(&iteration_circuit(p, &layout, s)?)?;
        ledger.record(format!("polarisation scale kappa_{s}"), scaling.kappa_at(s));
        ledger.record(format!("Green scale nu ({s})"), scaling.nu);
        let (g, nrm) = extract_strain(&state, &layout, s + 1, ledger.product())?;
        iterates.push(g);
        success_norms.push(nrm);
    }
    let polarisation: Vec<Vec<f64>> =
        iterates.iter().map(|g| g.iter().zip(&p.mu).map(|(x, m)| (m - p.mu0) * x).collect()).collect();
    let stress = iterates.iter().map(|g| g.iter().zip(&p.mu).map(|(x, m)| m * x).collect()).collect();
    let success_norm = *success_norms.last().unwrap();
    Ok(RveResult {
        polarisation,
        stress,
        success_norm,
        junk_norm: (state.norm_sqr() - success_norm * success_norm).max(0.0).sqrt(),
        junk_branches: junk_branch_count(&state, &layout),
        gate_counts: transpile_counts(&full),
        num_qubits: layout.num_qubits(),
        iterates,
        success_norms,
        ledger,
    })
}

/// Transpiled counts of the `S`-step circuit.
pub fn rve_gate_counts(p: &RveProblem, steps: usize) -> Result<GateCounts> {
    Ok(transpile_counts(&fixed_point_circuit(p, steps)?.0))
}

/// Log-linear fit of `ln(errors)` against the step index, skipping
/// non-positive entries.
pub fn decay_fit(errors: &[f64]) -> Result<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        errors.iter().enumerate().filter(|(_, &e)| e > 0.0).map(|(s, e)| (s as f64, e.ln())).unzip();
    linear_fit(&x, &y)
}

/// `|gamma^(s) - reference| / |reference|` for every iterate.
pub fn relative_errors(iterates: &[Vec<f64>], reference: &[f64]) -> Vec<f64> {
    let r = norm(reference);
    iterates.iter().map(|g| norm(&diff(g, reference)) / r).collect()
}
