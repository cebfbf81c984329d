//! Multi-controlled gate synthesis (V-chain), Toffoli and controlled-U
//! decompositions over {CNOT, U3}.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind, Mat2};
use crate::C64;
use std::f64::consts::PI;

const EPS: f64 = 1e-14;

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// `(theta, phi, lambda)` with `m = exp(i g) U3(theta, phi, lambda)` for some `g`.
pub fn u3_params(m: &Mat2) -> (f64, f64, f64) {
    let a = m[0][0].norm();
    let b = m[1][0].norm();
    let theta = 2.0 * b.atan2(a);
    if b < EPS {
        let g = m[0][0].arg();
        (0.0, 0.0, m[1][1].arg() - g)
    } else if a < EPS {
        let g = m[1][0].arg();
        (theta, 0.0, (-m[0][1]).arg() - g)
    } else {
        let g = m[0][0].arg();
        (theta, m[1][0].arg() - g, (-m[0][1]).arg() - g)
    }
}

/// True when `m` is the identity up to a global phase.
pub fn is_identity_up_to_phase(m: &Mat2) -> bool {
    m[0][1].norm() < EPS && m[1][0].norm() < EPS && (m[0][0] - m[1][1]).norm() < EPS
}

/// `(alpha, beta, gamma, delta)` with `m = exp(i alpha) RZ(beta) RY(gamma) RZ(delta)`.
pub fn zyz(m: &Mat2) -> (f64, f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let alpha = det.arg() / 2.0;
    let ph = C64::from_polar(1.0, -alpha);
    let a = m[0][0] * ph;
    let b = m[1][0] * ph;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let (sum, diff) = if b.norm() < EPS {
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() < EPS {
        (0.0, 2.0 * b.arg())
    } else {
        (-2.0 * a.arg(), 2.0 * b.arg())
    };
    let beta = (sum + diff) / 2.0;
    let delta = (sum - diff) / 2.0;
    (alpha, beta, gamma, delta)
}

fn u3_gate(target: usize, m: &Mat2) -> Option<GateInstance> {
    if is_identity_up_to_phase(m) {
        return None;
    }
    let (t, p, l) = u3_params(m);
    Some(GateInstance::u3(target, t, p, l))
}

/// Singly controlled `u` over {CNOT, U3} by the ABC construction:
/// `C`, CNOT, `B`, CNOT, `A` on the target and a phase on the control.
pub fn controlled_u_decompose(control: usize, target: usize, u: &Mat2) -> Vec<GateInstance> {
    let (alpha, beta, gamma, delta) = zyz(u);
    let rz = |t: f64| GateKind::RZ(t).matrix2();
    let ry = |t: f64| GateKind::RY(t).matrix2();
    let a = mul2(&rz(beta), &ry(gamma / 2.0));
    let b = mul2(&ry(-gamma / 2.0), &rz(-(delta + beta) / 2.0));
    let c = rz((delta - beta) / 2.0);
    let mut out = Vec::with_capacity(6);
    let ab_trivial = is_identity_up_to_phase(&b) && is_identity_up_to_phase(&a);
    out.extend(u3_gate(target, &c));
    if !ab_trivial || !is_identity_up_to_phase(&c) {
        out.push(GateInstance::cnot(control, target));
        out.extend(u3_gate(target, &b));
        out.push(GateInstance::cnot(control, target));
        out.extend(u3_gate(target, &a));
    }
    if alpha.abs() > EPS {
        out.push(GateInstance::u3(control, 0.0, 0.0, alpha));
    }
    out
}

/// Toffoli over {CNOT, U3}: 6 CNOT and 8 U3 (the trailing T and H on the
/// target are merged).
pub fn toffoli_gates(c1: usize, c2: usize, t: usize) -> Vec<GateInstance> {
    let h = GateKind::H.matrix2();
    let tg = GateKind::P(PI / 4.0).matrix2();
    let tdg = GateKind::P(-PI / 4.0).matrix2();
    let u = |q: usize, m: &Mat2| {
        let (a, b, c) = u3_params(m);
        GateInstance::u3(q, a, b, c)
    };
    vec![
        u(t, &h),
        GateInstance::cnot(c2, t),
        u(t, &tdg),
        GateInstance::cnot(c1, t),
        u(t, &tg),
        GateInstance::cnot(c2, t),
        u(t, &tdg),
        GateInstance::cnot(c1, t),
        u(c2, &tg),
        u(t, &mul2(&h, &tg)),
        GateInstance::cnot(c1, c2),
        u(c1, &tg),
        u(c2, &tdg),
        GateInstance::cnot(c1, c2),
    ]
}

/// Toffoli on qubits (0, 1 -> 2) as a circuit over {CNOT, U3}.
pub fn toffoli_decompose() -> Circuit {
    let mut c = Circuit::with_label(3, "toffoli");
    c.gates = toffoli_gates(0, 1, 2);
    c
}

fn max_index(controls: &[Control], target: usize, ancillas: &[usize]) -> usize {
    controls.iter().map(|c| c.qubit).chain(ancillas.iter().copied()).fold(target, usize::max)
}

/// Multi-controlled X by the V-chain: `m - 2` clean ancillas and `2m - 3`
/// Toffolis for `m >= 3`; X, CNOT or Toffoli directly for `m <= 2`.
/// Ancillas must enter in `|0>` and are returned to `|0>`.
pub fn mcx_vchain(controls: &[Control], target: usize, ancillas: &[usize]) -> Result<Circuit> {
    let m = controls.len();
    let need = m.saturating_sub(2);
    if ancillas.len() < need {
        return Err(Error::Capacity(format!("mcx with {m} controls needs {need} ancillas, got {}", ancillas.len())));
    }
    let mut c = Circuit::with_label(max_index(controls, target, ancillas) + 1, "mcx");
    if m <= 2 {
        c.push(GateInstance::controlled(GateKind::X, controls.to_vec(), vec![target]))?;
        return Ok(c);
    }
    let anc = &ancillas[..need];
    let tof = |a: Control, b: Control, t: usize| GateInstance::controlled(GateKind::X, vec![a, b], vec![t]);
    let mut ladder = vec![tof(controls[0], controls[1], anc[0])];
    for i in 2..m - 1 {
        ladder.push(tof(controls[i], Control::pos(anc[i - 2]), anc[i - 1]));
    }
    for g in &ladder {
        c.push(g.clone())?;
    }
    c.push(tof(controls[m - 1], Control::pos(anc[m - 3]), target))?;
    for g in ladder.iter().rev() {
        c.push(g.clone())?;
    }
    Ok(c)
}

/// Multi-controlled single-qubit `u` by the V-chain: `m - 1` ancillas,
/// `2(m - 1)` Toffolis and one singly controlled `u`.
pub fn mcu_vchain(controls: &[Control], u: GateKind, target: usize, ancillas: &[usize]) -> Result<Circuit> {
    if u.num_targets() != 1 {
        return Err(Error::InvalidArgument("mcu_vchain takes a single-qubit gate".into()));
    }
    let m = controls.len();
    let need = m.saturating_sub(1);
    if ancillas.len() < need {
        return Err(Error::Capacity(format!("mcu with {m} controls needs {need} ancillas, got {}", ancillas.len())));
    }
    let mut c = Circuit::with_label(max_index(controls, target, ancillas) + 1, "mcu");
    if m <= 1 {
        c.push(GateInstance::controlled(u, controls.to_vec(), vec![target]))?;
        return Ok(c);
    }
    let anc = &ancillas[..need];
    let tof = |a: Control, b: Control, t: usize| GateInstance::controlled(GateKind::X, vec![a, b], vec![t]);
    let mut ladder = vec![tof(controls[0], controls[1], anc[0])];
    for i in 2..m {
        ladder.push(tof(controls[i], Control::pos(anc[i - 2]), anc[i - 1]));
    }
    for g in &ladder {
        c.push(g.clone())?;
    }
    c.push(GateInstance::controlled(u, vec![Control::pos(anc[m - 2])], vec![target]))?;
    for g in ladder.iter().rev() {
        c.push(g.clone())?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn mat(g: &[GateInstance], n: usize) -> Matrix {
        let mut c = Circuit::new(n);
        for x in g {
            c.push(x.clone()).unwrap();
        }
        c.circuit_unitary().unwrap()
    }

    #[test]
    fn u3_params_reproduce_matrix() {
        for k in [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::RX(0.4),
            GateKind::RZ(1.3),
            GateKind::P(0.2),
            GateKind::U3(0.3, -1.0, 2.0),
        ] {
            let m = k.matrix2();
            let (t, p, l) = u3_params(&m);
            let back = GateKind::U3(t, p, l).matrix();
            assert!(back.phase_aligned_diff(&k.matrix()) < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn controlled_u_matches_direct() {
        for k in [GateKind::H, GateKind::RY(0.7), GateKind::U3(1.2, 0.4, -2.1), GateKind::P(0.9), GateKind::Y] {
            let direct = mat(&[GateInstance::controlled(k, vec![Control::pos(0)], vec![1])], 2);
            let dec = mat(&controlled_u_decompose(0, 1, &k.matrix2()), 2);
            assert!(dec.phase_aligned_diff(&direct) < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn toffoli_decomposition_counts_and_action() {
        let t = toffoli_decompose();
        assert_eq!(t.count_kind("X", 1), 6);
        assert!(t.count_kind("U3", 0) <= 8);
        let direct = mat(&[GateInstance::toffoli(0, 1, 2)], 3);
        assert!(t.circuit_unitary().unwrap().phase_aligned_diff(&direct) < 1e-12);
    }

    #[test]
    fn mcx_counts() {
        for m in 3..=8 {
            let controls: Vec<Control> = (0..m).map(Control::pos).collect();
            let anc: Vec<usize> = (m + 1..m + 1 + m - 2).collect();
            let c = mcx_vchain(&controls, m, &anc).unwrap();
            assert_eq!(c.count_kind("X", 2), 2 * m - 3);
        }
        let c = mcx_vchain(&[Control::pos(0)], 1, &[]).unwrap();
        assert_eq!(c.count_kind("X", 1), 1);
        assert!(mcx_vchain(&(0..5).map(Control::pos).collect::<Vec<_>>(), 5, &[6]).is_err());
    }

    #[test]
    fn mcu_counts() {
        let c = mcu_vchain(&[Control::pos(0), Control::pos(1), Control::pos(2)], GateKind::H, 3, &[4, 5]).unwrap();
        assert_eq!(c.count_kind("X", 2), 4);
        assert_eq!(c.count_kind("H", 1), 1);
        let c1 = mcu_vchain(&[Control::pos(0)], GateKind::RY(0.3), 1, &[]).unwrap();
        assert_eq!(c1.len(), 1);
    }
}
