//! Exchange of two basis amplitudes through a tag ancilla.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};

fn pattern(label: u64, qubits: &[usize]) -> Vec<Control> {
    let n = qubits.len();
    qubits.iter().enumerate().map(|(j, &q)| Control::on(q, label >> (n - 1 - j) & 1 == 1)).collect()
}

/// Appends the swap of basis labels `k1` and `k2` of `qubits` (MSB first):
/// tag both, flip the differing bits under the tag, untag both. `tag`
/// enters and leaves in `|0>`.
pub fn push_amplitude_swap(c: &mut Circuit, k1: u64, k2: u64, qubits: &[usize], tag: usize) -> Result<()> {
    let n = qubits.len();
    if k1 == k2 {
        return Err(Error::InvalidArgument("amplitude swap needs two distinct labels".into()));
    }
    if n < 64 && (k1 >> n != 0 || k2 >> n != 0) {
        return Err(Error::InvalidArgument(format!("labels {k1}, {k2} exceed {n} bits")));
    }
    let tag_flip = |k: u64| GateInstance::controlled(GateKind::X, pattern(k, qubits), vec![tag]);
    c.push(tag_flip(k1))?;
    c.push(tag_flip(k2))?;
    let diff = k1 ^ k2;
    for (j, &q) in qubits.iter().enumerate() {
        if diff >> (n - 1 - j) & 1 == 1 {
            c.push(GateInstance::cnot(tag, q))?;
        }
    }
    c.push(tag_flip(k1))?;
    c.push(tag_flip(k2))?;
    Ok(())
}

/// Swap fragment on data `0..n` with the tag at `n`.
pub fn amplitude_swap_circuit(k1: u64, k2: u64, n: usize) -> Result<Circuit> {
    let mut c = Circuit::with_label(n + 1, "amplitude_swap");
    push_amplitude_swap(&mut c, k1, k2, &(0..n).collect::<Vec<_>>(), n)?;
    Ok(c)
}

/// Toffolis in the V-chain realisation of the four `n`-controlled tag
/// flips: `4 (2n - 3) = 8n - 12` for `n >= 3`.
pub fn swap_toffoli_count(n: usize) -> usize {
    match n {
        0 | 1 => 0,
        2 => 4,
        _ => 4 * (2 * n - 3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::StateVector;
    use crate::C64;

    #[test]
    fn swaps_q1_and_q3() {
        let q: Vec<C64> = [0.1, 0.2, 0.3, 0.4].iter().map(|&x| C64::new(x, 0.0)).collect();
        let nrm = q.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        for k in 0..4 {
            amps[k << 1] = q[k] / nrm;
        }
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_circuit(&amplitude_swap_circuit(1, 3, 2).unwrap()).unwrap();
        let want = [0.1, 0.4, 0.3, 0.2];
        for k in 0..4 {
            assert!((s.amplitude(k << 1).re - want[k] / nrm).abs() < 1e-12);
            assert!(s.amplitude(k << 1 | 1).norm() < 1e-12);
        }
    }

    #[test]
    fn involution() {
        let c = amplitude_swap_circuit(5, 12, 4).unwrap();
        let mut twice = c.clone();
        twice.append(&c).unwrap();
        let u = twice.circuit_unitary().unwrap();
        let id = crate::linalg::Matrix::identity(32);
        assert!(u.max_abs_diff(&id) < 1e-12);
    }

    #[test]
    fn rejects_equal_labels() {
        assert!(amplitude_swap_circuit(3, 3, 2).is_err());
    }

    #[test]
    fn toffoli_budget() {
        for n in 3..10 {
            assert_eq!(swap_toffoli_count(n), 8 * n - 12);
        }
    }
}
