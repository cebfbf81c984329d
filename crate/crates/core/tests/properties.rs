//! Randomised invariants: 1000 cases each from fixed seeds.

mod common;

use common::{max_diff, random_circuit, random_state};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use qcm::encode::{amplitude_swap_circuit, comparator_circuit, expand_rotation_terms, MonomialPolynomial};
use qcm::qft::{qft_circuit, QftSpec};
use qcm::synth::{mcu_vchain, mcx_vchain};
use qcm::{Circuit, Control, GateInstance, GateKind, Projector, StateVector, C64};

fn config(seed: u64) -> Config {
    Config { cases: 1000, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn one_qubit_kind() -> impl Strategy<Value = GateKind> {
    let a = -4.0..4.0f64;
    prop_oneof![
        Just(GateKind::X),
        Just(GateKind::Y),
        Just(GateKind::Z),
        Just(GateKind::H),
        a.clone().prop_map(GateKind::P),
        a.clone().prop_map(GateKind::RX),
        a.clone().prop_map(GateKind::RY),
        a.clone().prop_map(GateKind::RZ),
        (a.clone(), a.clone(), a).prop_map(|(t, p, l)| GateKind::U3(t, p, l)),
    ]
}

fn bits(k: usize, q: usize, n: usize) -> usize {
    k >> (n - 1 - q) & 1
}

/// Index of the only nonzero amplitude of a basis-state output.
fn basis_index(s: &StateVector) -> usize {
    let (k, a) = s.amplitudes().iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
    assert!((a.norm() - 1.0).abs() < 1e-9, "output is not a basis state");
    k
}

proptest! {
    #![proptest_config(config(0x5eed_0001))]

    #[test]
    fn gates_preserve_norm(n in 1usize..7, len in 1usize..24, seed: u64) {
        let c = random_circuit(n, len, seed);
        let mut s = random_state(n, seed ^ 0xabcd);
        for g in &c.gates {
            s.apply_gate(g).unwrap();
            prop_assert!((s.norm_sqr().sqrt() - 1.0).abs() <= 1e-12);
        }
        let total: f64 = s.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0002))]

    #[test]
    fn kron_commutes_with_left_register_gates(na in 1usize..4, nb in 1usize..4, kind in one_qubit_kind(), q in 0usize..3, seed: u64) {
        let q = q % na;
        let r = random_state(na, seed);
        let s = random_state(nb, seed.wrapping_add(1));
        let g = GateInstance::single(kind, q);
        let mut joint = r.kron(&s).unwrap();
        joint.apply_gate(&g).unwrap();
        let mut r2 = r.clone();
        r2.apply_gate(&g).unwrap();
        let separate = r2.kron(&s).unwrap();
        prop_assert!(max_diff(joint.amplitudes(), separate.amplitudes()) <= 1e-14);
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0003))]

    #[test]
    fn circuits_are_unitary_and_adjoint_inverts(n in 1usize..5, len in 1usize..16, seed: u64) {
        let c = random_circuit(n, len, seed);
        prop_assert!(c.circuit_unitary().unwrap().is_unitary(1e-10));
        let round = Circuit::compose(&c, &c.adjoint());
        for k in 0..1usize << n {
            let out = round.apply_to_basis(k).unwrap();
            let want = StateVector::basis_state(n, k).unwrap();
            prop_assert!(max_diff(out.amplitudes(), want.amplitudes()) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0004))]

    #[test]
    fn complementary_projectors_resolve_identity(n in 1usize..6, q in 0usize..5, seed: u64) {
        let q = q % n;
        let s = random_state(n, seed);
        let mut sum = vec![C64::new(0.0, 0.0); s.len()];
        let mut p_total = 0.0;
        for bit in 0..2u8 {
            let (p, collapsed) = s.project(Projector { qubit: q, bit }).unwrap();
            p_total += p;
            for (acc, a) in sum.iter_mut().zip(collapsed.amplitudes()) {
                *acc += a * p.sqrt();
            }
        }
        prop_assert!((p_total - 1.0).abs() <= 1e-12);
        prop_assert!(max_diff(&sum, s.amplitudes()) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0005))]

    #[test]
    fn mcx_restores_ancillas(m in 1usize..7, pol in prop::collection::vec(any::<bool>(), 6)) {
        let controls: Vec<Control> = (0..m).map(|i| Control::on(i, pol[i])).collect();
        let ancillas: Vec<usize> = (m + 1..m + 1 + m.saturating_sub(2)).collect();
        let c = mcx_vchain(&controls, m, &ancillas).unwrap();
        let n = c.num_qubits;
        let a = n - (m + 1);
        for x in 0..1usize << (m + 1) {
            let out = basis_index(&c.apply_to_basis(x << a).unwrap());
            prop_assert_eq!(out & ((1 << a) - 1), 0);
            let fire = controls.iter().all(|ct| bits(x, ct.qubit, m + 1) == ct.polarity.bit());
            prop_assert_eq!(out >> a, x ^ usize::from(fire));
        }
    }

    #[test]
    fn mcu_restores_ancillas(m in 1usize..5, kind in one_qubit_kind(), pol in prop::collection::vec(any::<bool>(), 4)) {
        let controls: Vec<Control> = (0..m).map(|i| Control::on(i, pol[i])).collect();
        let ancillas: Vec<usize> = (m + 1..2 * m).collect();
        let c = mcu_vchain(&controls, kind, m, &ancillas).unwrap();
        let a = c.num_qubits - (m + 1);
        let mut direct = Circuit::new(m + 1);
        direct.push(GateInstance::controlled(kind, controls.clone(), vec![m])).unwrap();
        for x in 0..1usize << (m + 1) {
            let out = c.apply_to_basis(x << a).unwrap();
            let want = direct.apply_to_basis(x).unwrap();
            for (idx, amp) in out.amplitudes().iter().enumerate() {
                if idx & ((1 << a) - 1) != 0 {
                    prop_assert!(amp.norm() <= 1e-12);
                } else {
                    prop_assert!((amp - want.amplitude(idx >> a)).norm() <= 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0006))]

    #[test]
    fn comparator_uncomputes_workspace(n in 1usize..6, a: u64, b: u64) {
        let size = 1u64 << n;
        let (mut lo, mut hi) = (a % (size + 1), b % (size + 1));
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        if lo == hi {
            hi = (hi + 1).min(size);
            lo = hi - 1;
        }
        let c = comparator_circuit(lo, hi, n).unwrap();
        let total = c.num_qubits;
        let low = total - n;
        for k in 0..size as usize {
            let out = basis_index(&c.apply_to_basis(k << low).unwrap());
            prop_assert_eq!(out >> low, k);
            let flag = out >> (low - 1) & 1;
            prop_assert_eq!(flag == 1, (lo..hi).contains(&(k as u64)));
            prop_assert_eq!(out & ((1 << (low - 1)) - 1), 0);
        }
    }

    #[test]
    fn amplitude_swap_releases_tag(n in 1usize..6, a: u64, b: u64) {
        let size = 1u64 << n;
        let k1 = a % size;
        let k2 = (k1 + 1 + b % (size - 1).max(1)) % size;
        prop_assume!(k1 != k2);
        let c = amplitude_swap_circuit(k1, k2, n).unwrap();
        for k in 0..size {
            let out = basis_index(&c.apply_to_basis((k as usize) << 1).unwrap());
            prop_assert_eq!(out & 1, 0);
            let want = if k == k1 { k2 } else if k == k2 { k1 } else { k };
            prop_assert_eq!((out >> 1) as u64, want);
        }
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0007))]

    #[test]
    fn qft_is_linear(n in 1usize..6, alpha in -2.0..2.0f64, beta in -2.0..2.0f64, seed: u64) {
        let c = qft_circuit(&QftSpec::new(n)).unwrap();
        let u = random_state(n, seed);
        let v = random_state(n, seed.wrapping_mul(31).wrapping_add(7));
        let apply = |s: &StateVector| {
            let mut s = s.clone();
            s.apply_circuit(&c).unwrap();
            s.amplitudes().to_vec()
        };
        let (fu, fv) = (apply(&u), apply(&v));
        let mix: Vec<C64> = u.amplitudes().iter().zip(v.amplitudes()).map(|(x, y)| x * alpha + y * beta).collect();
        let norm = mix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        let w = StateVector::from_amplitudes(mix.iter().map(|z| z / norm).collect()).unwrap();
        let fw = apply(&w);
        let want: Vec<C64> = fu.iter().zip(&fv).map(|(x, y)| (x * alpha + y * beta) / norm).collect();
        prop_assert!(max_diff(&fw, &want) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0008))]

    #[test]
    fn rotation_order_is_irrelevant(coeffs in prop::collection::vec(-1.0..1.0f64, 4), perm in Just((0..20).collect::<Vec<usize>>()).prop_shuffle()) {
        let n = 3;
        let f = MonomialPolynomial::new(coeffs);
        let max = (0..8).map(|k| f.eval(k as f64).abs()).fold(0.0, f64::max).max(1e-9);
        let eps = 0.1 / max;
        let terms = expand_rotation_terms(&f, n);
        prop_assert_eq!(terms.len(), 20);
        let build = |order: &[usize]| {
            let mut c = Circuit::new(n + 1);
            for &i in order {
                let t = &terms[i];
                let ctl = t.controls.iter().map(|&q| Control::pos(q)).collect();
                c.push(GateInstance::controlled(GateKind::RY(eps * t.angle), ctl, vec![n])).unwrap();
            }
            c
        };
        let straight: Vec<usize> = (0..20).collect();
        let a = build(&straight).circuit_unitary().unwrap();
        let b = build(&perm).circuit_unitary().unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
        for k in 0..8usize {
            let out = build(&perm).apply_to_basis(k << 1).unwrap();
            let th = eps * f.eval(k as f64);
            prop_assert!((out.amplitude(k << 1 | 1).re - th.sin()).abs() <= 1e-10);
            prop_assert!((out.amplitude(k << 1).re - th.cos()).abs() <= 1e-10);
        }
    }
}
