//! Circuit container, adjoint, composition, unitary extraction and JSON-lines
//! serialisation.

use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind, Polarity};
use crate::linalg::Matrix;
use crate::statevector::StateVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Serialisation version tag.
pub const CIRCUIT_FORMAT: &str = "qcm-circuit/1";

/// Largest register for which [`Circuit::circuit_unitary`] builds a matrix.
pub const MAX_UNITARY_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<GateInstance>,
    pub label: String,
}

/// Gate tallies. `u3` and `cnot` are meaningful on transpiled circuits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub u3: usize,
    pub cnot: usize,
    pub raw_by_kind: BTreeMap<String, usize>,
    pub depth: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.u3 + self.cnot
    }

    pub fn add(&mut self, other: &GateCounts) {
        self.u3 += other.u3;
        self.cnot += other.cnot;
        for (k, v) in &other.raw_by_kind {
            *self.raw_by_kind.entry(k.clone()).or_insert(0) += v;
        }
        self.depth += other.depth;
    }
}

/// Key used in `raw_by_kind`: the kind name prefixed by one `C` per control,
/// e.g. `CX`, `CCX`, `C5RY`.
pub fn raw_kind_key(g: &GateInstance) -> String {
    match g.controls.len() {
        0 => g.kind.name().to_string(),
        1 => format!("C{}", g.kind.name()),
        2 => format!("CC{}", g.kind.name()),
        m => format!("C{m}{}", g.kind.name()),
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    version: String,
    num_qubits: usize,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct GateLine {
    kind: String,
    params: Vec<f64>,
    targets: Vec<usize>,
    controls: Vec<Control>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new(), label: String::new() }
    }

    pub fn with_label(num_qubits: usize, label: &str) -> Self {
        Circuit { num_qubits, gates: Vec::new(), label: label.to_string() }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking its indices.
    pub fn push(&mut self, g: GateInstance) -> Result<()> {
        g.validate(self.num_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// Appends the gates of `other`, which must fit in this register.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits > self.num_qubits {
            return Err(Error::Validation(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// `first` followed by `second` on the larger of the two registers.
    pub fn compose(first: &Circuit, second: &Circuit) -> Circuit {
        let mut c = Circuit::with_label(first.num_qubits.max(second.num_qubits), &first.label);
        c.gates.extend(first.gates.iter().cloned());
        c.gates.extend(second.gates.iter().cloned());
        c
    }

    /// Gates reversed and inverted.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(|g| g.inverse()).collect(),
            label: if self.label.is_empty() { String::new() } else { format!("{}^dagger", self.label) },
        }
    }

    /// Every gate gains the extra controls. Fails if a control collides with a
    /// qubit the gate already uses.
    pub fn controlled_by(&self, extra: &[Control]) -> Result<Circuit> {
        let mut c = Circuit::with_label(self.num_qubits, &self.label);
        for g in &self.gates {
            c.push(g.clone().with_controls(extra))?;
        }
        Ok(c)
    }

    pub fn raw_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(raw_kind_key(g)).or_insert(0) += 1;
        }
        m
    }

    /// Number of gates of `kind` (ignoring parameters) with exactly `controls` controls.
    pub fn count_kind(&self, kind_name: &str, controls: usize) -> usize {
        self.gates.iter().filter(|g| g.kind.name() == kind_name && g.controls.len() == controls).count()
    }

    /// Greedy layered depth: a gate starts after the latest gate on any of its qubits.
    pub fn depth(&self) -> usize {
        let mut layer = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let d = g.qubits().map(|q| layer[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                layer[q] = d;
            }
            depth = depth.max(d);
        }
        depth
    }

    /// Output state for basis input `|k>`.
    pub fn apply_to_basis(&self, k: usize) -> Result<StateVector> {
        let mut s = StateVector::basis_state(self.num_qubits, k)?;
        s.apply_circuit(self)?;
        Ok(s)
    }

    /// Full `2^n x 2^n` unitary, column `k` being the image of `|k>`.
    /// Limited to [`MAX_UNITARY_QUBITS`].
    pub fn circuit_unitary(&self) -> Result<Matrix> {
        if self.num_qubits > MAX_UNITARY_QUBITS {
            return Err(Error::Capacity(format!(
                "unitary of {} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit debug limit",
                self.num_qubits
            )));
        }
        let dim = 1usize << self.num_qubits;
        let mut m = Matrix::zeros(dim);
        for k in 0..dim {
            let s = self.apply_to_basis(k)?;
            m.set_column(k, s.amplitudes());
        }
        Ok(m)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&HeaderLine {
            version: CIRCUIT_FORMAT.to_string(),
            num_qubits: self.num_qubits,
            label: self.label.clone(),
        })
        .expect("header serialises");
        out.push('\n');
        for g in &self.gates {
            let line = GateLine {
                kind: g.kind.name().to_string(),
                params: g.kind.params(),
                targets: g.targets.clone(),
                controls: g.controls.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("gate serialises"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: HeaderLine =
            serde_json::from_str(lines.next().ok_or_else(|| Error::Io("empty circuit file".into()))?)?;
        if header.version != CIRCUIT_FORMAT {
            return Err(Error::Io(format!("unsupported circuit version {}", header.version)));
        }
        let mut c = Circuit::with_label(header.num_qubits, &header.label);
        for l in lines {
            let gl: GateLine = serde_json::from_str(l)?;
            let kind = GateKind::from_name(&gl.kind, &gl.params)?;
            c.push(GateInstance { kind, targets: gl.targets, controls: gl.controls })?;
        }
        Ok(c)
    }
}

/// Largest deviation between the actions of `a` and `b` on every basis
/// state after aligning one global phase. Both must have the same register.
pub fn unitary_distance_up_to_phase(a: &Circuit, b: &Circuit) -> Result<f64> {
    let ua = a.circuit_unitary()?;
    let ub = b.circuit_unitary()?;
    Ok(ua.phase_aligned_diff(&ub))
}

/// Negative controls expressed with X conjugation on positive controls.
pub fn positive_control_form(g: &GateInstance, num_qubits: usize) -> Circuit {
    let mut c = Circuit::new(num_qubits);
    let negs: Vec<usize> =
        g.controls.iter().filter(|c| c.polarity == Polarity::Negative).map(|c| c.qubit).collect();
    for &q in &negs {
        c.gates.push(GateInstance::x(q));
    }
    let mut pg = g.clone();
    for ctl in &mut pg.controls {
        ctl.polarity = Polarity::Positive;
    }
    c.gates.push(pg);
    for &q in &negs {
        c.gates.push(GateInstance::x(q));
    }
    c
}
