//! Lowering to the universal set {CNOT, U3} and gate accounting.
//!
//! Count model:
//! - an uncontrolled single-qubit gate is one U3 (dropped when it is the
//!   identity up to phase);
//! - SWAP is three CNOTs;
//! - a singly controlled U uses the ABC construction, i.e. two CNOTs, at most
//!   three U3 on the target and one phase U3 on the control;
//! - a Toffoli is 6 CNOT and 8 U3;
//! - X with `m >= 3` controls uses the V-chain (`2m - 3` Toffolis,
//!   `m - 2` ancillas);
//! - any other U with `m >= 2` controls uses the V-chain (`2(m - 1)`
//!   Toffolis plus one controlled U, `m - 1` ancillas);
//! - negative controls are X-conjugated once around the lowered gate;
//! - a controlled SWAP is CNOT, multi-controlled X, CNOT.
//!
//! A run of two or more consecutive `RY` gates on the same target commutes,
//! so it is lowered as one AND-trie instead of gate by gate: the literal
//! shared by most remaining gates is ANDed onto the current node with one
//! Toffoli (computed before and uncomputed after its subtree), and every
//! node applies the summed angle of the gates it completes with a single
//! controlled `RY`. A lone gate lowers exactly as the V-chain above.
//!
//! Ancillas are allocated above the input register and reused between gates.

use crate::circuit::{raw_kind_key, Circuit, GateCounts};
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind, Polarity};
use crate::linalg::Matrix;
use crate::synth::{controlled_u_decompose, is_identity_up_to_phase, mcu_vchain, mcx_vchain, toffoli_gates, u3_params};
use crate::C64;
use std::f64::consts::PI;

/// Receiver for lowered gates.
pub trait GateSink {
    fn emit(&mut self, g: GateInstance);
}

struct CollectSink(Vec<GateInstance>);

impl GateSink for CollectSink {
    fn emit(&mut self, g: GateInstance) {
        self.0.push(g);
    }
}

/// Counts U3/CNOT and tracks layered depth without storing gates.
#[derive(Default)]
struct CountSink {
    u3: usize,
    cnot: usize,
    layer: Vec<usize>,
    depth: usize,
}

impl GateSink for CountSink {
    fn emit(&mut self, g: GateInstance) {
        if g.controls.is_empty() {
            self.u3 += 1;
        } else {
            self.cnot += 1;
        }
        let top = g.qubits().max().unwrap_or(0);
        if self.layer.len() <= top {
            self.layer.resize(top + 1, 0);
        }
        let d = g.qubits().map(|q| self.layer[q]).max().unwrap_or(0) + 1;
        for q in g.qubits() {
            self.layer[q] = d;
        }
        self.depth = self.depth.max(d);
    }
}

struct Lowering<'a, S: GateSink> {
    sink: &'a mut S,
    base: usize,
    max_anc: usize,
}

fn x_u3(q: usize) -> GateInstance {
    GateInstance::u3(q, PI, 0.0, PI)
}

impl<S: GateSink> Lowering<'_, S> {
    fn ancillas(&mut self, k: usize) -> Vec<usize> {
        self.max_anc = self.max_anc.max(k);
        (self.base..self.base + k).collect()
    }

    fn lower(&mut self, g: &GateInstance) {
        if g.kind == GateKind::I {
            return;
        }
        let negs: Vec<usize> =
            g.controls.iter().filter(|c| c.polarity == Polarity::Negative).map(|c| c.qubit).collect();
        if !negs.is_empty() {
            for &q in &negs {
                self.sink.emit(x_u3(q));
            }
            let mut pg = g.clone();
            for c in &mut pg.controls {
                c.polarity = Polarity::Positive;
            }
            self.lower_positive(&pg);
            for &q in &negs {
                self.sink.emit(x_u3(q));
            }
        } else {
            self.lower_positive(g);
        }
    }

    fn lower_positive(&mut self, g: &GateInstance) {
        let m = g.controls.len();
        match (g.kind, m) {
            (GateKind::Swap, 0) => {
                let (a, b) = (g.targets[0], g.targets[1]);
                self.sink.emit(GateInstance::cnot(a, b));
                self.sink.emit(GateInstance::cnot(b, a));
                self.sink.emit(GateInstance::cnot(a, b));
            }
            (GateKind::Swap, _) => {
                let (a, b) = (g.targets[0], g.targets[1]);
                self.sink.emit(GateInstance::cnot(b, a));
                let mut ctl = g.controls.clone();
                ctl.push(Control::pos(a));
                self.lower_positive(&GateInstance::controlled(GateKind::X, ctl, vec![b]));
                self.sink.emit(GateInstance::cnot(b, a));
            }
            (k, 0) => {
                let mat = k.matrix2();
                if !is_identity_up_to_phase(&mat) {
                    let (t, p, l) = u3_params(&mat);
                    self.sink.emit(GateInstance::u3(g.targets[0], t, p, l));
                }
            }
            (GateKind::X, 1) => self.sink.emit(GateInstance::cnot(g.controls[0].qubit, g.targets[0])),
            (GateKind::X, 2) => {
                for x in toffoli_gates(g.controls[0].qubit, g.controls[1].qubit, g.targets[0]) {
                    self.sink.emit(x);
                }
            }
            (GateKind::X, _) => {
                let anc = self.ancillas(m - 2);
                let chain = mcx_vchain(&g.controls, g.targets[0], &anc).expect("ancillas sized for the chain");
                for x in &chain.gates {
                    self.lower_positive(x);
                }
            }
            (k, 1) => {
                for x in controlled_u_decompose(g.controls[0].qubit, g.targets[0], &k.matrix2()) {
                    self.sink.emit(x);
                }
            }
            (k, _) => {
                let anc = self.ancillas(m - 1);
                let chain = mcu_vchain(&g.controls, k, g.targets[0], &anc).expect("ancillas sized for the chain");
                for x in &chain.gates {
                    self.lower_positive(x);
                }
            }
        }
    }
}

/// Remaining controls of one gate in a rotation run, and its angle.
type Item = (Vec<Control>, f64);

impl<S: GateSink> Lowering<'_, S> {
    /// Emits the subtree below `node` (`None` is the unconditioned root) at
    /// ancilla depth `depth`.
    fn lower_trie(&mut self, node: Option<Control>, depth: usize, items: Vec<Item>, target: usize) {
        let (here, mut rest): (Vec<Item>, Vec<Item>) = items.into_iter().partition(|(l, _)| l.is_empty());
        let angle: f64 = here.iter().map(|(_, a)| a).sum();
        if !here.is_empty() && angle != 0.0 {
            let ctl: Vec<Control> = node.into_iter().collect();
            self.lower(&GateInstance::controlled(GateKind::RY(angle), ctl, vec![target]));
        }
        while !rest.is_empty() {
            let mut tally: std::collections::BTreeMap<(usize, bool), usize> = Default::default();
            for (lits, _) in &rest {
                for l in lits {
                    *tally.entry((l.qubit, l.polarity == Polarity::Negative)).or_insert(0) += 1;
                }
            }
            let best = tally.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(k, _)| *k).unwrap();
            let lit = Control::on(best.0, !best.1);
            let (mut group, others): (Vec<Item>, Vec<Item>) = rest.into_iter().partition(|(l, _)| l.contains(&lit));
            rest = others;
            for (l, _) in &mut group {
                l.retain(|c| *c != lit);
            }
            match node {
                None => self.lower_trie(Some(lit), depth, group, target),
                Some(parent) => {
                    let anc = self.ancillas(depth + 1)[depth];
                    let and = GateInstance::controlled(GateKind::X, vec![parent, lit], vec![anc]);
                    self.lower(&and);
                    self.lower_trie(Some(Control::pos(anc)), depth + 1, group, target);
                    self.lower(&and);
                }
            }
        }
    }
}

fn is_ry(g: &GateInstance) -> bool {
    matches!(g.kind, GateKind::RY(_))
}

fn run<S: GateSink>(c: &Circuit, sink: &mut S) -> usize {
    let mut l = Lowering { sink, base: c.num_qubits, max_anc: 0 };
    let gates = &c.gates;
    let mut i = 0;
    while i < gates.len() {
        let g = &gates[i];
        let mut j = i + 1;
        if is_ry(g) {
            while j < gates.len() && is_ry(&gates[j]) && gates[j].targets[0] == g.targets[0] {
                j += 1;
            }
        }
        if j - i >= 2 {
            let items = gates[i..j]
                .iter()
                .map(|x| match x.kind {
                    GateKind::RY(t) => (x.controls.clone(), t),
                    _ => unreachable!("run holds RY gates only"),
                })
                .collect();
            l.lower_trie(None, 0, items, g.targets[0]);
        } else {
            l.lower(g);
        }
        i = j;
    }
    l.max_anc
}

struct NullSink;

impl GateSink for NullSink {
    fn emit(&mut self, _: GateInstance) {}
}

/// Lowers `c` to {CNOT, U3}. The output register holds the input qubits
/// followed by the ancillas the V-chains needed. `raw_by_kind` reports the
/// input circuit's gate mix; `u3`, `cnot` and `depth` describe the output.
pub fn transpile(c: &Circuit) -> (Circuit, GateCounts) {
    let mut sink = CollectSink(Vec::new());
    let anc = run(c, &mut sink);
    let mut out = Circuit::with_label(c.num_qubits + anc, &c.label);
    out.gates = sink.0;
    let counts = GateCounts {
        u3: out.gates.iter().filter(|g| g.controls.is_empty()).count(),
        cnot: out.gates.iter().filter(|g| !g.controls.is_empty()).count(),
        raw_by_kind: c.raw_counts(),
        depth: out.depth(),
    };
    (out, counts)
}

/// Same counts as [`transpile`] without materialising the output.
pub fn transpile_counts(c: &Circuit) -> GateCounts {
    let mut sink = CountSink::default();
    run(c, &mut sink);
    GateCounts { u3: sink.u3, cnot: sink.cnot, raw_by_kind: c.raw_counts(), depth: sink.depth }
}

/// Number of ancillas [`transpile`] appends for `c`.
pub fn ancillas_needed(c: &Circuit) -> usize {
    run(c, &mut NullSink)
}

/// Checks that every gate of `c` lies in {CNOT, U3}.
pub fn is_universal_form(c: &Circuit) -> bool {
    c.gates.iter().all(|g| match (g.kind, g.controls.len()) {
        (GateKind::U3(..), 0) => true,
        (GateKind::X, 1) => g.controls[0].polarity == Polarity::Positive,
        _ => false,
    })
}

/// Deviation between `original` and its lowering `lowered` (ancillas above
/// the original register, entering in `|0>`): the phase-aligned max-norm
/// difference of the actions on the original register, or the largest
/// amplitude left on nonzero ancilla patterns, whichever is larger.
pub fn lowering_deviation(original: &Circuit, lowered: &Circuit) -> Result<f64> {
    let n = original.num_qubits;
    if lowered.num_qubits < n {
        return Err(Error::InvalidArgument("lowered circuit is smaller than the original".into()));
    }
    let a = lowered.num_qubits - n;
    let dim = 1usize << n;
    let mut got = Matrix::zeros(dim);
    let mut leak = 0.0f64;
    for k in 0..dim {
        let s = lowered.apply_to_basis(k << a)?;
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for (idx, amp) in s.amplitudes().iter().enumerate() {
            if idx & ((1 << a) - 1) == 0 {
                col[idx >> a] = *amp;
            } else {
                leak = leak.max(amp.norm());
            }
        }
        got.set_column(k, &col);
    }
    let want = original.circuit_unitary()?;
    Ok(got.phase_aligned_diff(&want).max(leak))
}

/// Lowered gate-kind histogram, keyed like `raw_by_kind`.
pub fn lowered_histogram(c: &Circuit) -> std::collections::BTreeMap<String, usize> {
    let (t, _) = transpile(c);
    let mut m = std::collections::BTreeMap::new();
    for g in &t.gates {
        *m.entry(raw_kind_key(g)).or_insert(0) += 1;
    }
    m
}
