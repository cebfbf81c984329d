//! State preparation: exact (Givens rotations) and approximate (uniform
//! superposition followed by a polynomial encoding).

use super::chebyshev::PiecewiseChebyshev;
use super::piecewise::{piecewise_encode_circuit, OutOfRange};
use super::poly::{poly_encode_circuit, MonomialPolynomial};
use super::EncodingConfig;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};

/// Appends `U_S` with `U_S |0...0> = q` on `qubits` (MSB first), each
/// rotation additionally controlled by `extra`.
pub fn push_exact_state_prep(c: &mut Circuit, q: &[f64], qubits: &[usize], extra: &[Control]) -> Result<()> {
    let n = qubits.len();
    if q.len() != 1usize << n {
        return Err(Error::InvalidArgument(format!("vector of length {} does not fit {n} qubits", q.len())));
    }
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("state entries must be finite".into()));
    }
    let norm: f64 = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("state norm {norm} differs from 1")));
    }
    // U_S^dagger zeroes odd partners level by level, LSB first; collect its
    // rotations, then emit the adjoint.
    let mut v = q.to_vec();
    let mut stages: Vec<GateInstance> = Vec::new();
    for level in (1..=n).rev() {
        let half = 1usize << (level - 1);
        let mut next = vec![0.0; half];
        for (i, slot) in next.iter_mut().enumerate() {
            let (a, b) = (v[2 * i], v[2 * i + 1]);
            *slot = a.hypot(b);
            if b == 0.0 && a >= 0.0 {
                continue;
            }
            let theta = 2.0 * b.atan2(a);
            let mut ctl = extra.to_vec();
            for j in 0..level - 1 {
                ctl.push(Control::on(qubits[j], i >> (level - 2 - j) & 1 == 1));
            }
            stages.push(GateInstance::controlled(GateKind::RY(-theta), ctl, vec![qubits[level - 1]]));
        }
        v = next;
    }
    for g in stages.iter().rev() {
        c.push(g.inverse())?;
    }
    Ok(())
}

/// Exact preparation of a real unit vector `q` on `log2(len)` qubits.
pub fn exact_state_prep(q: &[f64]) -> Result<Circuit> {
    if q.is_empty() || !q.len().is_power_of_two() || q.len() < 2 {
        return Err(Error::InvalidArgument("state length must be a power of two, at least 2".into()));
    }
    let n = q.len().trailing_zeros() as usize;
    let mut c = Circuit::with_label(n, "exact_state_prep");
    push_exact_state_prep(&mut c, q, &(0..n).collect::<Vec<_>>(), &[])?;
    Ok(c)
}

/// Function encoded by [`approx_state_prep`].
#[derive(Clone, Debug)]
pub enum StatePrepSource {
    Polynomial(MonomialPolynomial),
    Piecewise(PiecewiseChebyshev),
}

/// Hadamards on the data register followed by the encoding of `f`; the
/// flag-`|1>` branch holds `sin(eps f(k)) / sqrt(N)`.
pub fn approx_state_prep(f: &StatePrepSource, n: usize, cfg: &EncodingConfig) -> Result<Circuit> {
    let enc = match f {
        StatePrepSource::Polynomial(p) => poly_encode_circuit(p, n, cfg)?,
        StatePrepSource::Piecewise(pc) => piecewise_encode_circuit(pc, n, cfg, OutOfRange::ConstantContinuation)?,
    };
    let mut c = Circuit::with_label(enc.num_qubits, "approx_state_prep");
    for q in 0..n {
        c.push(GateInstance::h(q))?;
    }
    c.append(&enc)?;
    Ok(c)
}
