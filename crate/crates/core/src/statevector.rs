//! Dense statevector with in-place gate kernels, Born-rule readout and
//! projective measurement.
//!
//! Gate kernels enumerate only the amplitude pairs whose control bits match,
//! so a gate with `c` controls touches `2^(n-c)` amplitudes. Large kernels run
//! on rayon; every pair is owned by exactly one task, so results are bitwise
//! identical to the serial path.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{GateInstance, GateKind, Mat2};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Default cap on the register size; `QCM_MAX_QUBITS` overrides it.
pub const DEFAULT_MAX_QUBITS: usize = 26;
const NORM_TOL: f64 = 1e-8;
const PAR_THRESHOLD: usize = 1 << 14;
const FUSE_MAX_CONTROLS: usize = 22;

/// Largest register the simulator will allocate.
pub fn max_qubits() -> usize {
    std::env::var("QCM_MAX_QUBITS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

/// Projector `I ⊗ .. ⊗ |bit><bit| ⊗ .. ⊗ I` acting on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projector {
    pub qubit: usize,
    pub bit: u8,
}

/// Binary digits `k_0 .. k_{n-1}` of a basis label, `k_0` most significant.
pub fn label_bits(k: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((k >> (n - 1 - j)) & 1) as u8).collect()
}

/// Inverse of [`label_bits`].
pub fn label_from_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct DumpHeader {
    num_qubits: usize,
    norm: f64,
}

#[derive(Clone, Copy)]
struct SendPtr(*mut C64);
// SAFETY: kernels only dereference disjoint indices from different tasks.
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    fn get(self) -> *mut C64 {
        self.0
    }
}

/// Spreads the bits of `t` over the positions not listed in `fixed`
/// (ascending), leaving zeros at the fixed positions.
#[inline]
fn deposit(mut t: usize, fixed: &[u32]) -> usize {
    for &p in fixed {
        let low = t & ((1usize << p) - 1);
        t = ((t >> p) << (p + 1)) | low;
    }
    t
}

fn check_capacity(n: usize) -> Result<()> {
    let cap = max_qubits();
    if n == 0 || n > cap {
        return Err(Error::Capacity(format!("{n} qubits requested; allowed range is 1..={cap}")));
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn new_zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, k: usize) -> Result<Self> {
        check_capacity(n)?;
        if k >= 1usize << n {
            return Err(Error::InvalidArgument(format!("basis label {k} out of range for {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[k] = C64::new(1.0, 0.0);
        Ok(StateVector { num_qubits: n, amps })
    }

    /// Wraps amplitudes; the length must be a power of two and the norm 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("length {len} is not a power of two >= 2")));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        let s = StateVector { num_qubits: n, amps };
        let drift = (s.norm_sqr() - 1.0).abs();
        if drift > 1e-10 {
            return Err(Error::InvalidArgument(format!("amplitudes have squared norm off by {drift:e}")));
        }
        Ok(s)
    }

    /// Normalises real data and wraps it.
    pub fn from_real_normalised(values: &[f64]) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalise a zero or non-finite vector".into()));
        }
        Self::from_amplitudes(values.iter().map(|v| C64::new(v / norm, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_chunks(4096).map(|c| c.iter().map(|a| a.norm_sqr()).sum::<f64>()).sum()
        } else {
            self.amps.iter().map(|a| a.norm_sqr()).sum()
        }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product `self ⊗ other`; `self` supplies the leading qubits.
    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        check_capacity(self.num_qubits + other.num_qubits)?;
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { num_qubits: self.num_qubits + other.num_qubits, amps })
    }

    fn bitpos(&self, q: usize) -> u32 {
        (self.num_qubits - 1 - q) as u32
    }

    /// Applies one gate in place, then checks the norm.
    pub fn apply_gate(&mut self, gate: &GateInstance) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        self.check_norm()
    }

    /// Applies every gate of `c`. Runs of `RY` gates sharing a target are
    /// fused into one multiplexed rotation. The norm is checked once at the end.
    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.num_qubits > self.num_qubits {
            return Err(Error::Validation(format!(
                "circuit on {} qubits applied to a {}-qubit state",
                c.num_qubits, self.num_qubits
            )));
        }
        for g in &c.gates {
            g.validate(self.num_qubits)?;
        }
        let gates = &c.gates;
        let mut i = 0;
        while i < gates.len() {
            let mut j = i;
            if let GateKind::RY(_) = gates[i].kind {
                let t = gates[i].targets[0];
                while j + 1 < gates.len()
                    && matches!(gates[j + 1].kind, GateKind::RY(_))
                    && gates[j + 1].targets[0] == t
                {
                    j += 1;
                }
            }
            if j > i && self.apply_fused_ry(&gates[i..=j]) {
                i = j + 1;
                continue;
            }
            self.apply_unchecked(&gates[i]);
            i += 1;
        }
        self.check_norm()
    }

    fn check_norm(&self) -> Result<()> {
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::NormDrift(drift));
        }
        Ok(())
    }

    fn fixed_positions(&self, gate: &GateInstance) -> (Vec<u32>, usize) {
        let mut fixed: Vec<u32> = gate.qubits().map(|q| self.bitpos(q)).collect();
        fixed.sort_unstable();
        let cmask = gate
            .controls
            .iter()
            .filter(|c| c.polarity.bit() == 1)
            .fold(0usize, |m, c| m | (1usize << self.bitpos(c.qubit)));
        (fixed, cmask)
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &GateInstance) {
        let (fixed, cmask) = self.fixed_positions(gate);
        let count = 1usize << (self.num_qubits - fixed.len());
        match gate.kind {
            GateKind::I => {}
            GateKind::Swap => {
                let pa = 1usize << self.bitpos(gate.targets[0]);
                let pb = 1usize << self.bitpos(gate.targets[1]);
                self.for_each_base(count, &fixed, cmask, move |amps, base| {
                    // SAFETY: distinct bases give disjoint (base|pb, base|pa) pairs.
                    unsafe { std::ptr::swap(amps.add(base | pb), amps.add(base | pa)) }
                });
            }
            kind => {
                let m = kind.matrix2();
                let tb = 1usize << self.bitpos(gate.targets[0]);
                self.for_each_base(count, &fixed, cmask, move |amps, base| {
                    // SAFETY: each base owns the pair (base, base|tb).
                    unsafe { rotate_pair(amps, base, base | tb, &m) }
                });
            }
        }
    }

    fn for_each_base<F>(&mut self, count: usize, fixed: &[u32], cmask: usize, f: F)
    where
        F: Fn(*mut C64, usize) + Sync + Send,
    {
        let ptr = SendPtr(self.amps.as_mut_ptr());
        if count >= PAR_THRESHOLD {
            (0..count).into_par_iter().with_min_len(2048).for_each(|t| {
                let p = ptr;
                f(p.get(), deposit(t, fixed) | cmask)
            });
        } else {
            for t in 0..count {
                f(ptr.get(), deposit(t, fixed) | cmask);
            }
        }
    }

    /// Applies a run of commuting `RY` gates on one target as a single pass
    /// with an angle table over the union of their control qubits.
    fn apply_fused_ry(&mut self, run: &[GateInstance]) -> bool {
        let target = run[0].targets[0];
        let mut union: Vec<usize> = Vec::new();
        for g in run {
            for c in &g.controls {
                if !union.contains(&c.qubit) {
                    union.push(c.qubit);
                }
            }
        }
        if union.len() > FUSE_MAX_CONTROLS || union.contains(&target) {
            return false;
        }
        union.sort_unstable();
        let u = union.len();
        let mut table = vec![0.0f64; 1 << u];
        // table bit for union[i] is (u - 1 - i)
        for g in run {
            let theta = match g.kind {
                GateKind::RY(t) => t,
                _ => unreachable!(),
            };
            let mut fixed: Vec<u32> = Vec::with_capacity(g.controls.len());
            let mut val = 0usize;
            for c in &g.controls {
                let i = union.binary_search(&c.qubit).unwrap();
                let b = (u - 1 - i) as u32;
                fixed.push(b);
                val |= c.polarity.bit() << b;
            }
            fixed.sort_unstable();
            for t in 0..(1usize << (u - fixed.len())) {
                table[deposit(t, &fixed) | val] += theta;
            }
        }
        if table.iter().all(|&t| t == 0.0) {
            return true;
        }
        let rot: Vec<(f64, f64)> = table.iter().map(|&t| (t / 2.0).sin_cos()).collect();
        let zero: Vec<bool> = table.iter().map(|&t| t == 0.0).collect();
        let positions: Vec<u32> = union.iter().map(|&q| self.bitpos(q)).collect();
        let tb = 1usize << self.bitpos(target);
        let fixed = [self.bitpos(target)];
        let count = 1usize << (self.num_qubits - 1);
        self.for_each_base(count, &fixed, 0, move |amps, base| {
            let mut idx = 0usize;
            for &p in &positions {
                idx = (idx << 1) | ((base >> p) & 1);
            }
            if zero[idx] {
                return;
            }
            let (s, c) = rot[idx];
            // SAFETY: each base owns the pair (base, base|tb).
            unsafe {
                let a0 = *amps.add(base);
                let a1 = *amps.add(base | tb);
                *amps.add(base) = a0 * c - a1 * s;
                *amps.add(base | tb) = a0 * s + a1 * c;
            }
        });
        true
    }

    /// Born probability `|q_k|^2`.
    pub fn probability(&self, k: usize) -> f64 {
        self.amps[k].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Projective measurement outcome: `(p, P|q>/sqrt(p))`.
    pub fn project(&self, proj: Projector) -> Result<(f64, StateVector)> {
        if proj.qubit >= self.num_qubits || proj.bit > 1 {
            return Err(Error::InvalidArgument(format!("bad projector {proj:?}")));
        }
        let pos = self.bitpos(proj.qubit);
        let keep = |k: usize| ((k >> pos) & 1) as u8 == proj.bit;
        let p: f64 = self.amps.iter().enumerate().filter(|(k, _)| keep(*k)).map(|(_, a)| a.norm_sqr()).sum();
        if p < 1e-14 {
            return Err(Error::DegenerateProjection(p));
        }
        let s = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| if keep(k) { a * s } else { C64::new(0.0, 0.0) })
            .collect();
        Ok((p, StateVector { num_qubits: self.num_qubits, amps }))
    }

    /// Draws `shots` labels from the Born distribution with a ChaCha8 stream
    /// seeded by `seed`; identical on every platform.
    pub fn sample(&self, seed: u64, shots: usize) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        if shots == 0 {
            return hist;
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let mut k = cdf.partition_point(|&c| c <= u);
            if k >= cdf.len() {
                k = cdf.len() - 1;
            }
            // skip zero-probability labels that share a cdf value
            while self.amps[k].norm_sqr() == 0.0 && k + 1 < cdf.len() {
                k += 1;
            }
            *hist.entry(k).or_insert(0) += 1;
        }
        hist
    }

    /// Writes `<stem>.bin` (little-endian re/im f64 pairs in index order) and
    /// `<stem>.json` (`{num_qubits, norm}`).
    pub fn write_dump(&self, stem: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        std::fs::write(stem.with_extension("bin"), bytes)?;
        let header = DumpHeader { num_qubits: self.num_qubits, norm: self.norm_sqr().sqrt() };
        std::fs::write(stem.with_extension("json"), serde_json::to_string(&header)?)?;
        Ok(())
    }

    pub fn read_dump(stem: &Path) -> Result<StateVector> {
        let header: DumpHeader = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let bytes = std::fs::read(stem.with_extension("bin"))?;
        if bytes.len() != (16usize << header.num_qubits) {
            return Err(Error::Io(format!("dump size {} does not match {} qubits", bytes.len(), header.num_qubits)));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }
}

#[inline]
unsafe fn rotate_pair(amps: *mut C64, i0: usize, i1: usize, m: &Mat2) {
    let a0 = *amps.add(i0);
    let a1 = *amps.add(i1);
    *amps.add(i0) = m[0][0] * a0 + m[0][1] * a1;
    *amps.add(i1) = m[1][0] * a0 + m[1][1] * a1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Control;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        let mut s = StateVector::new_zero_state(2).unwrap();
        s.apply_gate(&GateInstance::h(0)).unwrap();
        s.apply_gate(&GateInstance::cnot(0, 1)).unwrap();
        s
    }

    #[test]
    fn zero_states() {
        assert_eq!(StateVector::new_zero_state(1).unwrap().amplitudes(), &[c(1.0), c(0.0)]);
        let s = StateVector::new_zero_state(2).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let s3 = StateVector::new_zero_state(3).unwrap();
        assert_eq!(s3.len(), 8);
        assert_eq!(s3.amplitude(0), c(1.0));
        assert!(StateVector::new_zero_state(0).is_err());
        assert!(matches!(StateVector::new_zero_state(200), Err(Error::Capacity(_))));
    }

    #[test]
    fn kron_places_left_register_high() {
        let one = StateVector::basis_state(1, 1).unwrap();
        let zero = StateVector::basis_state(1, 0).unwrap();
        let k = one.kron(&zero).unwrap();
        assert_eq!(k.amplitudes(), &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        let r = StateVector::from_amplitudes(vec![c(0.6), c(0.8)]).unwrap();
        let s = StateVector::from_amplitudes(vec![c(0.8), C64::new(0.0, 0.6)]).unwrap();
        let rs = r.kron(&s).unwrap();
        let want = [c(0.48), C64::new(0.0, 0.36), c(0.64), C64::new(0.0, 0.48)];
        for (a, b) in rs.amplitudes().iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn x_on_second_qubit() {
        let mut s = StateVector::new_zero_state(2).unwrap();
        s.apply_gate(&GateInstance::x(1)).unwrap();
        assert_eq!(s.amplitude(1), c(1.0));
    }

    #[test]
    fn bell_state_and_probabilities() {
        let s = bell();
        assert!((s.amplitude(0) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.amplitude(3) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.probability(0) - 0.5).abs() < 1e-15);
        let z = StateVector::new_zero_state(2).unwrap();
        assert_eq!(z.probability(0), 1.0);
        assert_eq!(z.probability(3), 0.0);
    }

    #[test]
    fn identity_gate_is_noop() {
        let mut s = bell();
        let before = s.clone();
        s.apply_gate(&GateInstance::single(GateKind::I, 1)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn projection_of_bell_state() {
        let (p, post) = bell().project(Projector { qubit: 1, bit: 0 }).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((post.amplitude(0) - c(1.0)).norm() < 1e-15);
        let z = StateVector::new_zero_state(2).unwrap();
        let (p, post) = z.project(Projector { qubit: 0, bit: 0 }).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(post, z);
        assert!(matches!(z.project(Projector { qubit: 0, bit: 1 }), Err(Error::DegenerateProjection(_))));
    }

    #[test]
    fn sampling_is_deterministic_and_concentrated() {
        let s = StateVector::basis_state(2, 1).unwrap();
        let h = s.sample(7, 100);
        assert_eq!(h.get(&1), Some(&100));
        assert!(s.sample(7, 0).is_empty());
        let b = bell();
        let h1 = b.sample(42, 100_000);
        assert_eq!(h1, b.sample(42, 100_000));
        let f0 = *h1.get(&0).unwrap() as f64 / 1e5;
        assert!((f0 - 0.5).abs() <= 0.01);
        assert!(h1.keys().all(|&k| k == 0 || k == 3));
    }

    #[test]
    fn uniform_three_qubit_sampling() {
        let mut s = StateVector::new_zero_state(3).unwrap();
        for q in 0..3 {
            s.apply_gate(&GateInstance::h(q)).unwrap();
        }
        let h = s.sample(3, 80_000);
        for k in 0..8 {
            let f = *h.get(&k).unwrap() as f64 / 8e4;
            assert!((f - 0.125).abs() <= 0.01, "label {k}: {f}");
        }
    }

    #[test]
    fn negative_control_fires_on_zero() {
        let mut s = StateVector::new_zero_state(2).unwrap();
        s.apply_gate(&GateInstance::controlled(GateKind::X, vec![Control::neg(0)], vec![1])).unwrap();
        assert_eq!(s.amplitude(1), c(1.0));
    }

    #[test]
    fn fused_ry_matches_sequential() {
        let mut circ = Circuit::new(5);
        circ.push(GateInstance::h(0)).unwrap();
        circ.push(GateInstance::h(1)).unwrap();
        circ.push(GateInstance::h(2)).unwrap();
        circ.push(GateInstance::ry(4, 0.3)).unwrap();
        circ.push(GateInstance::controlled(GateKind::RY(0.7), vec![Control::pos(0)], vec![4])).unwrap();
        circ.push(GateInstance::controlled(GateKind::RY(-0.2), vec![Control::neg(1), Control::pos(2)], vec![4]))
            .unwrap();
        circ.push(GateInstance::controlled(GateKind::RY(1.1), vec![Control::pos(3)], vec![4])).unwrap();
        let mut fused = StateVector::new_zero_state(5).unwrap();
        fused.apply_circuit(&circ).unwrap();
        let mut seq = StateVector::new_zero_state(5).unwrap();
        for g in &circ.gates {
            seq.apply_gate(g).unwrap();
        }
        for (a, b) in fused.amplitudes().iter().zip(seq.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("bell");
        let s = bell();
        s.write_dump(&stem).unwrap();
        assert_eq!(StateVector::read_dump(&stem).unwrap(), s);
        let header = std::fs::read_to_string(stem.with_extension("json")).unwrap();
        assert!(header.contains("\"num_qubits\":2"));
    }

    #[test]
    fn label_bits_msb_first() {
        assert_eq!(label_bits(6, 3), vec![1, 1, 0]);
        assert_eq!(label_from_bits(&[1, 1, 0]), 6);
    }
}
