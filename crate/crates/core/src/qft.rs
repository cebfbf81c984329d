//! Quantum Fourier transform circuits and the classical DFT oracle.
//!
//! Forward transform convention: `F[j][k] = exp(+2 pi i j k / N) / sqrt(N)`.
//! Controlled phases are `P(2 pi / 2^(d+1))` between qubits `d` apart.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};
use crate::linalg::Matrix;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QftSpec {
    pub num_qubits: usize,
    pub include_final_swaps: bool,
    pub register_offset: usize,
}

impl QftSpec {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, include_final_swaps: true, register_offset: 0 }
    }

    pub fn at(num_qubits: usize, register_offset: usize) -> Self {
        Self { num_qubits, include_final_swaps: true, register_offset }
    }

    pub fn without_swaps(mut self) -> Self {
        self.include_final_swaps = false;
        self
    }

    fn check(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::InvalidArgument("QFT needs at least one qubit".into()));
        }
        Ok(())
    }
}

fn push_qft(c: &mut Circuit, spec: &QftSpec) -> Result<()> {
    let n = spec.num_qubits;
    let o = spec.register_offset;
    for j in 0..n {
        c.push(GateInstance::h(o + j))?;
        for d in 1..n - j {
            let angle = 2.0 * PI / (1u64 << (d + 1)) as f64;
            c.push(GateInstance::controlled(GateKind::P(angle), vec![Control::pos(o + j + d)], vec![o + j]))?;
        }
    }
    if spec.include_final_swaps {
        for i in 0..n / 2 {
            c.push(GateInstance::swap(o + i, o + n - 1 - i))?;
        }
    }
    Ok(())
}

/// QFT on qubits `register_offset .. register_offset + num_qubits`.
/// The circuit register is exactly wide enough to hold them.
pub fn qft_circuit(spec: &QftSpec) -> Result<Circuit> {
    spec.check()?;
    let mut c = Circuit::with_label(spec.register_offset + spec.num_qubits, "qft");
    push_qft(&mut c, spec)?;
    Ok(c)
}

/// Adjoint of [`qft_circuit`].
pub fn iqft_circuit(spec: &QftSpec) -> Result<Circuit> {
    let mut c = qft_circuit(spec)?.adjoint();
    c.label = "iqft".into();
    Ok(c)
}

/// QFT applied independently to each `(offset, width)` register of a
/// `total`-qubit circuit.
pub fn qft_on_registers(total: usize, registers: &[(usize, usize)], inverse: bool) -> Result<Circuit> {
    let mut seen = vec![false; total];
    for &(o, w) in registers {
        if o + w > total {
            return Err(Error::InvalidArgument(format!("register [{o}, {}) exceeds {total} qubits", o + w)));
        }
        for s in &mut seen[o..o + w] {
            if *s {
                return Err(Error::InvalidArgument("QFT registers overlap".into()));
            }
            *s = true;
        }
    }
    let mut c = Circuit::with_label(total, if inverse { "iqft" } else { "qft" });
    for &(o, w) in registers {
        let spec = QftSpec::at(w, o);
        spec.check()?;
        let mut part = Circuit::new(total);
        push_qft(&mut part, &spec)?;
        c.append(&if inverse { part.adjoint() } else { part })?;
    }
    Ok(c)
}

/// `F (x) F` on two adjacent `n`-qubit registers (axis 0 first).
pub fn qft_2d(n_per_axis: usize) -> Result<Circuit> {
    qft_on_registers(2 * n_per_axis, &[(0, n_per_axis), (n_per_axis, n_per_axis)], false)
}

/// Adjoint of [`qft_2d`].
pub fn iqft_2d(n_per_axis: usize) -> Result<Circuit> {
    qft_on_registers(2 * n_per_axis, &[(0, n_per_axis), (n_per_axis, n_per_axis)], true)
}

/// Classical `2^n x 2^n` DFT matrix with the forward (positive) sign.
pub fn dft_matrix(n: usize) -> Matrix {
    let dim = 1usize << n;
    let s = 1.0 / (dim as f64).sqrt();
    let mut m = Matrix::zeros(dim);
    for j in 0..dim {
        for k in 0..dim {
            let e = ((j * k) % dim) as f64 / dim as f64;
            m[(j, k)] = C64::from_polar(s, 2.0 * PI * e);
        }
    }
    m
}

/// Classical forward transform of `v` (same convention as [`dft_matrix`]).
pub fn dft_apply(v: &[C64]) -> Vec<C64> {
    use rustfft::FftPlanner;
    let mut buf = v.to_vec();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|x| *x *= s);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::StateVector;

    #[test]
    fn three_qubit_figure_vector() {
        let c = qft_circuit(&QftSpec::new(3)).unwrap();
        let s = c.apply_to_basis(6).unwrap();
        let want = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        let want_im = [0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0];
        let r = 1.0 / (2.0 * 2f64.sqrt());
        for k in 0..8 {
            let a = s.amplitude(k);
            assert!((a.re - want[k] * r).abs() < 1e-12 && (a.im - want_im[k] * r).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_mix() {
        for n in 1..=7 {
            let c = qft_circuit(&QftSpec::new(n)).unwrap();
            assert_eq!(c.count_kind("H", 0), n);
            assert_eq!(c.count_kind("P", 1), n * (n - 1) / 2);
            assert_eq!(c.count_kind("SWAP", 0), n / 2);
        }
    }

    #[test]
    fn matches_dft_matrix() {
        for n in 1..=6 {
            let u = qft_circuit(&QftSpec::new(n)).unwrap().circuit_unitary().unwrap();
            assert!(u.max_abs_diff(&dft_matrix(n)) < 1e-10, "n={n}");
            let ui = iqft_circuit(&QftSpec::new(n)).unwrap().circuit_unitary().unwrap();
            assert!(ui.max_abs_diff(&dft_matrix(n).adjoint()) < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_is_kronecker() {
        let u = qft_2d(2).unwrap().circuit_unitary().unwrap();
        let f = dft_matrix(2);
        assert!(u.max_abs_diff(&f.kron(&f)) < 1e-12);
        let h = qft_2d(1).unwrap().circuit_unitary().unwrap();
        assert!(h.max_abs_diff(&dft_matrix(1).kron(&dft_matrix(1))) < 1e-12);
    }

    #[test]
    fn fft_oracle_agrees_with_matrix() {
        let v: Vec<C64> = (0..16).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let a = dft_apply(&v);
        let b = dft_matrix(4).apply(&v);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn offset_register() {
        let c = qft_circuit(&QftSpec::at(2, 1)).unwrap();
        assert_eq!(c.num_qubits, 3);
        let s = StateVector::basis_state(3, 0b100).unwrap();
        let mut t = s.clone();
        t.apply_circuit(&c).unwrap();
        for k in 4..8 {
            assert!((t.amplitude(k).norm() - 0.5).abs() < 1e-12);
        }
    }
}
