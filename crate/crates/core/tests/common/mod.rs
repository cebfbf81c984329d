#![allow(dead_code)]

use qcm::{Circuit, Control, GateInstance, GateKind, StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded circuit of single-qubit gates, half of them with one or two
/// controls of random polarity.
pub fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let t = rng.gen_range(0..n);
        let kind = match rng.gen_range(0..8) {
            0 => GateKind::H,
            1 => GateKind::RX(rng.gen_range(-3.0..3.0)),
            2 => GateKind::U3(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            3 => GateKind::P(rng.gen_range(-3.0..3.0)),
            4 => GateKind::Y,
            5 => GateKind::RY(rng.gen_range(-3.0..3.0)),
            6 => GateKind::X,
            _ => GateKind::RZ(rng.gen_range(-3.0..3.0)),
        };
        let mut g = GateInstance::single(kind, t);
        let nc = rng.gen_range(0..3usize).min(n - 1);
        while g.controls.len() < nc {
            let q = rng.gen_range(0..n);
            if q != t && g.controls.iter().all(|c| c.qubit != q) {
                g.controls.push(Control::on(q, rng.gen_bool(0.5)));
            }
        }
        c.push(g).unwrap();
    }
    c
}

pub fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<C64> = (0..1usize << n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(v.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
