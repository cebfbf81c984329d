//! Gate kinds, control polarity and gate instances.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Elementary gate kinds. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    I,
    H,
    P(f64),
    RX(f64),
    RY(f64),
    RZ(f64),
    U3(f64, f64, f64),
    Swap,
}

/// 2x2 complex matrix as nested arrays.
pub type Mat2 = [[C64; 2]; 2];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::I => "I",
            GateKind::H => "H",
            GateKind::P(_) => "P",
            GateKind::RX(_) => "RX",
            GateKind::RY(_) => "RY",
            GateKind::RZ(_) => "RZ",
            GateKind::U3(..) => "U3",
            GateKind::Swap => "SWAP",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::P(t) | GateKind::RX(t) | GateKind::RY(t) | GateKind::RZ(t) => vec![t],
            GateKind::U3(t, p, l) => vec![t, p, l],
            _ => vec![],
        }
    }

    pub fn from_name(name: &str, params: &[f64]) -> Result<GateKind> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "gate {name} takes {k} parameters, got {}",
                    params.len()
                )))
            }
        };
        let kind = match name.to_ascii_uppercase().as_str() {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "I" => GateKind::I,
            "H" => GateKind::H,
            "P" => {
                want(1)?;
                GateKind::P(params[0])
            }
            "RX" => {
                want(1)?;
                GateKind::RX(params[0])
            }
            "RY" => {
                want(1)?;
                GateKind::RY(params[0])
            }
            "RZ" => {
                want(1)?;
                GateKind::RZ(params[0])
            }
            "U3" => {
                want(3)?;
                GateKind::U3(params[0], params[1], params[2])
            }
            "SWAP" => GateKind::Swap,
            other => return Err(Error::InvalidArgument(format!("unknown gate kind {other}"))),
        };
        if !matches!(kind, GateKind::P(_) | GateKind::RX(_) | GateKind::RY(_) | GateKind::RZ(_) | GateKind::U3(..)) {
            want(0)?;
        }
        Ok(kind)
    }

    pub fn num_targets(&self) -> usize {
        if matches!(self, GateKind::Swap) {
            2
        } else {
            1
        }
    }

    /// 2x2 matrix of a single-qubit kind. Panics for `Swap`.
    pub fn matrix2(&self) -> Mat2 {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        match *self {
            GateKind::X => [[z, o], [o, z]],
            GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            GateKind::Z => [[o, z], [z, c(-1.0, 0.0)]],
            GateKind::I => [[o, z], [z, o]],
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::P(t) => [[o, z], [z, C64::from_polar(1.0, t)]],
            GateKind::RX(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            GateKind::RY(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::RZ(t) => [[C64::from_polar(1.0, -t / 2.0), z], [z, C64::from_polar(1.0, t / 2.0)]],
            GateKind::U3(t, p, l) => {
                let (s, co) = (t / 2.0).sin_cos();
                [
                    [c(co, 0.0), -C64::from_polar(s, l)],
                    [C64::from_polar(s, p), C64::from_polar(co, p + l)],
                ]
            }
            GateKind::Swap => panic!("SWAP is a two-qubit gate"),
        }
    }

    /// Matrix of the uncontrolled gate: 2x2, or 4x4 for `Swap`.
    pub fn matrix(&self) -> Matrix {
        match self {
            GateKind::Swap => Matrix::from_real_rows(&[
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ]),
            k => Matrix::from_2x2(k.matrix2()),
        }
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::P(t) => GateKind::P(-t),
            GateKind::RX(t) => GateKind::RX(-t),
            GateKind::RY(t) => GateKind::RY(-t),
            GateKind::RZ(t) => GateKind::RZ(-t),
            GateKind::U3(t, p, l) => GateKind::U3(-t, -l, -p),
            k => k,
        }
    }
}

/// Alias kept for readers who look for the free function.
pub fn gate_matrix(kind: &GateKind) -> Matrix {
    kind.matrix()
}

/// Control polarity. `Negative` conditions on `|0>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    pub fn bit(self) -> usize {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    #[serde(rename = "q")]
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Positive }
    }
    pub fn neg(qubit: usize) -> Self {
        Control { qubit, polarity: Polarity::Negative }
    }
    /// Control that fires when `qubit` holds `bit`.
    pub fn on(qubit: usize, bit: bool) -> Self {
        Control { qubit, polarity: Polarity::from_bit(bit) }
    }
}

/// One gate application: kind, target qubits and polarised controls.
#[derive(Clone, Debug, PartialEq)]
pub struct GateInstance {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateInstance {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        GateInstance { kind, targets, controls: Vec::new() }
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Self::new(kind, vec![target])
    }

    pub fn controlled(kind: GateKind, controls: Vec<Control>, targets: Vec<usize>) -> Self {
        GateInstance { kind, targets, controls }
    }

    pub fn x(t: usize) -> Self {
        Self::single(GateKind::X, t)
    }
    pub fn h(t: usize) -> Self {
        Self::single(GateKind::H, t)
    }
    pub fn ry(t: usize, theta: f64) -> Self {
        Self::single(GateKind::RY(theta), t)
    }
    pub fn u3(t: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Self::single(GateKind::U3(theta, phi, lambda), t)
    }
    pub fn cnot(c: usize, t: usize) -> Self {
        Self::controlled(GateKind::X, vec![Control::pos(c)], vec![t])
    }
    pub fn toffoli(c1: usize, c2: usize, t: usize) -> Self {
        Self::controlled(GateKind::X, vec![Control::pos(c1), Control::pos(c2)], vec![t])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b])
    }

    pub fn with_controls(mut self, extra: &[Control]) -> Self {
        self.controls.extend_from_slice(extra);
        self
    }

    /// All qubits touched, targets first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.num_targets() {
            return Err(Error::Validation(format!(
                "{} needs {} target(s), got {}",
                self.kind.name(),
                self.kind.num_targets(),
                self.targets.len()
            )));
        }
        let mut seen = Vec::with_capacity(self.targets.len() + self.controls.len());
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::Validation(format!("qubit {q} out of range for {num_qubits} qubits")));
            }
            if seen.contains(&q) {
                return Err(Error::Validation(format!("qubit {q} used twice in {}", self.kind.name())));
            }
            seen.push(q);
        }
        Ok(())
    }

    pub fn inverse(&self) -> GateInstance {
        GateInstance { kind: self.kind.inverse(), targets: self.targets.clone(), controls: self.controls.clone() }
    }

    /// Matrix on the gate's own qubits ordered (controls..., targets...),
    /// first listed qubit most significant. CNOT yields the textbook 4x4.
    pub fn local_matrix(&self) -> Matrix {
        let base = self.kind.matrix();
        let nc = self.controls.len();
        let bd = base.dim();
        let dim = bd << nc;
        let mut m = Matrix::identity(dim);
        let mut pattern = 0usize;
        for (i, c) in self.controls.iter().enumerate() {
            pattern |= c.polarity.bit() << (nc - 1 - i);
        }
        let off = pattern * bd;
        for i in 0..bd {
            for j in 0..bd {
                m[(off + i, off + j)] = base[(i, j)];
            }
        }
        m
    }
}
