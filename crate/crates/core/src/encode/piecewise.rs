//! Piecewise polynomial encoding: for each interval, flag `k` into `a1`,
//! rotate the function flag `a0` by the interval polynomial controlled on
//! `a1`, then unflag.
//!
//! On an aligned block `[lo, lo + 2^m)` the local variable `k - lo` is the
//! value of the low `m` bits, so the rotations only touch those bits. Other
//! intervals use the comparator and the polynomial shifted to `k`.

use super::chebyshev::{BivariatePiecewise, PiecewiseChebyshev};
use super::comparator::{is_aligned_block, push_range_flag};
use super::poly::{merged_bivariate_on_bits, merged_terms_on_bits, push_terms, shift_coeffs, BivariatePolynomial};
use super::EncodingConfig;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Control;
use serde::{Deserialize, Serialize};

/// Value encoded for `k` outside every interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutOfRange {
    /// The value of the nearest interval at its nearest integer point.
    #[default]
    ConstantContinuation,
    Zero,
}

/// Register roles for a piecewise encoding. `workspace` needs `n - 1`
/// qubits only if some interval is not an aligned block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLayout {
    pub data: Vec<usize>,
    pub a0: usize,
    pub a1: usize,
    pub workspace: Vec<usize>,
}

impl PiecewiseLayout {
    /// Data `0..n`, `a0 = n`, `a1 = n + 1`, workspace `n + 2 .. 2n + 1`.
    pub fn standard(n: usize) -> Self {
        Self { data: (0..n).collect(), a0: n, a1: n + 1, workspace: (n + 2..2 * n + 1).collect() }
    }

    pub fn num_qubits(&self) -> usize {
        self.data.iter().chain(&self.workspace).chain([&self.a0, &self.a1]).max().map_or(0, |m| m + 1)
    }
}

/// Local frame of an interval: the qubits and place values of `u`, and the
/// shift applied to the polynomial so it reads in `u`.
struct Frame {
    qubits: Vec<usize>,
    weights: Vec<f64>,
    shift: f64,
}

fn frame(lo: u64, hi: u64, data: &[usize]) -> Frame {
    let n = data.len();
    if is_aligned_block(lo, hi) {
        let m = (hi - lo).trailing_zeros() as usize;
        Frame {
            qubits: data[n - m..].to_vec(),
            weights: (0..m).map(|j| (1u64 << (m - 1 - j)) as f64).collect(),
            shift: 0.0,
        }
    } else {
        Frame { qubits: data.to_vec(), weights: (0..n).map(|j| (1u64 << (n - 1 - j)) as f64).collect(), shift: lo as f64 }
    }
}

/// Aligned dyadic blocks covering `[lo, hi)`.
pub fn dyadic_blocks(mut lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    while lo < hi {
        let mut size = if lo == 0 { 1u64 << 62 } else { 1u64 << lo.trailing_zeros() };
        while size > hi - lo {
            size >>= 1;
        }
        out.push((lo, lo + size));
        lo += size;
    }
    out
}

fn pattern_controls(lo: u64, hi: u64, data: &[usize]) -> Vec<Control> {
    let n = data.len();
    let m = (hi - lo).trailing_zeros() as usize;
    (0..n - m).map(|j| Control::on(data[j], lo >> (n - 1 - j) & 1 == 1)).collect()
}

fn push_piece(
    c: &mut Circuit,
    lo: u64,
    hi: u64,
    coeffs: &[f64],
    layout: &PiecewiseLayout,
    scale: f64,
    extra: &[Control],
) -> Result<()> {
    if coeffs.iter().all(|&x| x == 0.0) {
        return Ok(());
    }
    let fr = frame(lo, hi, &layout.data);
    let local = if fr.shift != 0.0 { shift_coeffs(coeffs, fr.shift) } else { coeffs.to_vec() };
    let terms = merged_terms_on_bits(&local, &fr.qubits, &fr.weights);
    if terms.is_empty() {
        return Ok(());
    }
    if is_aligned_block(lo, hi) {
        // The block pattern becomes extra controls on every term; the
        // transpiler shares them across the run.
        let mut ctl = extra.to_vec();
        ctl.extend(pattern_controls(lo, hi, &layout.data));
        return push_terms(c, &terms, layout.a0, &ctl, scale);
    }
    push_range_flag(c, lo, hi, &layout.data, layout.a1, &layout.workspace, extra)?;
    push_terms(c, &terms, layout.a0, &[Control::pos(layout.a1)], scale)?;
    push_range_flag(c, lo, hi, &layout.data, layout.a1, &layout.workspace, extra)
}

/// Appends the piecewise encoding of `pc` (rotation angles `2 scale f(k)`),
/// active only when every `extra` control holds.
pub fn push_piecewise(
    c: &mut Circuit,
    pc: &PiecewiseChebyshev,
    layout: &PiecewiseLayout,
    scale: f64,
    extra: &[Control],
    policy: OutOfRange,
) -> Result<()> {
    let n = layout.data.len();
    let size = 1i64 << n;
    let first = pc.breakpoints[0];
    let last = *pc.breakpoints.last().unwrap();
    if first < 0 || last > size {
        return Err(Error::InvalidArgument(format!("intervals [{first}, {last}) exceed the {n}-bit register")));
    }
    for i in 0..pc.num_intervals() {
        let (lo, hi) = pc.interval(i);
        push_piece(c, lo as u64, hi as u64, &pc.coeffs[i], layout, scale, extra)?;
    }
    if policy == OutOfRange::ConstantContinuation {
        let below = pc.eval(first).unwrap_or(0.0);
        let above = pc.eval(last - 1).unwrap_or(0.0);
        for (lo, hi, v) in [(0, first, below), (last, size, above)] {
            for (a, b) in dyadic_blocks(lo as u64, hi as u64) {
                push_piece(c, a, b, &[v], layout, scale, extra)?;
            }
        }
    }
    Ok(())
}

fn max_controls(c: &Circuit) -> usize {
    c.gates.iter().map(|g| g.controls.len()).max().unwrap_or(0)
}

/// Piecewise encoding on the standard layout (`2n + 1` qubits): for `k` in
/// interval `i`, `a0` carries `sin(eps f_i(k))`; `a1` and the workspace
/// return to `|0>`.
pub fn piecewise_encode_circuit(
    pc: &PiecewiseChebyshev,
    n: usize,
    cfg: &EncodingConfig,
    policy: OutOfRange,
) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("piecewise encoding needs at least one data qubit".into()));
    }
    let max_abs = (0..1i64 << n.min(20)).filter_map(|k| pc.eval(k)).fold(0.0f64, |m, v| m.max(v.abs()));
    cfg.check_range(max_abs)?;
    let layout = PiecewiseLayout::standard(n);
    let mut c = Circuit::with_label(layout.num_qubits(), "piecewise_encode");
    push_piecewise(&mut c, pc, &layout, cfg.epsilon, &[], policy)?;
    cfg.check_ancillas(max_controls(&c))?;
    Ok(c)
}

/// Register roles for a tensor-cell encoding: `f0` flags the axis-0 block,
/// `a1` the cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BivariateLayout {
    pub data0: Vec<usize>,
    pub data1: Vec<usize>,
    pub a0: usize,
    pub f0: usize,
    pub a1: usize,
    pub workspace: Vec<usize>,
}

impl BivariateLayout {
    /// Axis 0 on `0..n`, axis 1 on `n..2n`, then `a0`, `f0`, `a1` and
    /// `n - 1` workspace qubits.
    pub fn standard(n: usize) -> Self {
        Self {
            data0: (0..n).collect(),
            data1: (n..2 * n).collect(),
            a0: 2 * n,
            f0: 2 * n + 1,
            a1: 2 * n + 2,
            workspace: (2 * n + 3..3 * n + 2).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.data0
            .iter()
            .chain(&self.data1)
            .chain(&self.workspace)
            .chain([&self.a0, &self.f0, &self.a1])
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// Appends the tensor-cell encoding of `bp`. Points outside the grid of
/// cells are left unrotated.
pub fn push_bivariate_piecewise(
    c: &mut Circuit,
    bp: &BivariatePiecewise,
    layout: &BivariateLayout,
    scale: f64,
    extra: &[Control],
) -> Result<()> {
    let n0 = layout.data0.len();
    let n1 = layout.data1.len();
    let ok = |b: &[i64], n: usize| b[0] >= 0 && *b.last().unwrap() <= 1i64 << n;
    if !ok(&bp.breakpoints0, n0) || !ok(&bp.breakpoints1, n1) {
        return Err(Error::InvalidArgument("cells exceed the register".into()));
    }
    for (i0, row) in bp.cells.iter().enumerate() {
        if row.iter().all(BivariatePolynomial::is_zero) {
            continue;
        }
        let (lo0, hi0) = (bp.breakpoints0[i0] as u64, bp.breakpoints0[i0 + 1] as u64);
        let aligned0 = is_aligned_block(lo0, hi0);
        // Axis-0 condition: its block pattern, or the flag f0.
        let mut row_ctl = extra.to_vec();
        if aligned0 {
            row_ctl.extend(pattern_controls(lo0, hi0, &layout.data0));
        } else {
            push_range_flag(c, lo0, hi0, &layout.data0, layout.f0, &layout.workspace, extra)?;
            row_ctl = vec![Control::pos(layout.f0)];
        }
        let fr0 = frame(lo0, hi0, &layout.data0);
        for (i1, cell) in row.iter().enumerate() {
            if cell.is_zero() {
                continue;
            }
            let (lo1, hi1) = (bp.breakpoints1[i1] as u64, bp.breakpoints1[i1 + 1] as u64);
            let fr1 = frame(lo1, hi1, &layout.data1);
            let local = cell.shifted(fr0.shift, fr1.shift);
            let terms = merged_bivariate_on_bits(&local, &fr0.qubits, &fr0.weights, &fr1.qubits, &fr1.weights);
            if terms.is_empty() {
                continue;
            }
            if is_aligned_block(lo1, hi1) {
                let mut ctl = row_ctl.clone();
                ctl.extend(pattern_controls(lo1, hi1, &layout.data1));
                push_terms(c, &terms, layout.a0, &ctl, scale)?;
            } else {
                push_range_flag(c, lo1, hi1, &layout.data1, layout.a1, &layout.workspace, &row_ctl)?;
                push_terms(c, &terms, layout.a0, &[Control::pos(layout.a1)], scale)?;
                push_range_flag(c, lo1, hi1, &layout.data1, layout.a1, &layout.workspace, &row_ctl)?;
            }
        }
        if !aligned0 {
            push_range_flag(c, lo0, hi0, &layout.data0, layout.f0, &layout.workspace, extra)?;
        }
    }
    Ok(())
}

/// Tensor-cell encoding on [`BivariateLayout::standard`].
pub fn bivariate_piecewise_encode_circuit(bp: &BivariatePiecewise, n: usize, cfg: &EncodingConfig) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("bivariate encoding needs at least one qubit per axis".into()));
    }
    let side = 1i64 << n.min(10);
    let mut max_abs = 0.0f64;
    for k0 in 0..side {
        for k1 in 0..side {
            if let Some(v) = bp.eval(k0, k1) {
                max_abs = max_abs.max(v.abs());
            }
        }
    }
    cfg.check_range(max_abs)?;
    let layout = BivariateLayout::standard(n);
    let mut c = Circuit::with_label(layout.num_qubits(), "bivariate_piecewise_encode");
    push_bivariate_piecewise(&mut c, bp, &layout, cfg.epsilon, &[])?;
    cfg.check_ancillas(max_controls(&c))?;
    Ok(c)
}
