//! Half-open range tests `lo <= k < hi` against classical constants.
//!
//! `[k < c]` is the final borrow of the ripple subtraction `k - c`, with
//! borrows kept in workspace qubits (at most `n - 1`). The range flag is
//! `[k < hi] xor [k < lo]`. Aligned power-of-two blocks skip the
//! comparator and use one pattern-controlled X.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};

/// Boolean value of a borrow: a constant, or XOR of conjunctions of literals.
#[derive(Clone, Debug)]
enum Borrow {
    Const(bool),
    Qubit(usize),
}

fn mcx(controls: Vec<Control>, target: usize) -> GateInstance {
    GateInstance::controlled(GateKind::X, controls, vec![target])
}

/// Borrow out of one bit as an XOR of conjunctions (`None` = constant).
fn step(c_bit: bool, k: usize, b: &Borrow) -> std::result::Result<Vec<Vec<Control>>, bool> {
    match (b, c_bit) {
        (Borrow::Const(false), false) => Err(false),
        (Borrow::Const(false), true) | (Borrow::Const(true), false) => Ok(vec![vec![Control::neg(k)]]),
        (Borrow::Const(true), true) => Err(true),
        (Borrow::Qubit(w), false) => Ok(vec![vec![Control::neg(k), Control::pos(*w)]]),
        (Borrow::Qubit(w), true) => Ok(vec![vec![], vec![Control::pos(k), Control::neg(*w)]]),
    }
}

/// Gates flipping `flag` by `[k < c]` (conjoined with `extra`), with the
/// borrow chain computed and uncomputed around the write.
fn less_than_gates(c: u64, data: &[usize], flag: usize, workspace: &[usize], extra: &[Control]) -> Result<Vec<GateInstance>> {
    let n = data.len();
    if c >= 1u64 << n {
        return Ok(vec![mcx(extra.to_vec(), flag)]);
    }
    if c == 0 {
        return Ok(Vec::new());
    }
    let mut compute = Vec::new();
    let mut b = Borrow::Const(false);
    let mut used = 0usize;
    for i in 0..n {
        let q = data[n - 1 - i];
        let c_bit = c >> i & 1 == 1;
        let last = i == n - 1;
        match step(c_bit, q, &b) {
            Err(v) => {
                if last {
                    let mut out = compute.clone();
                    if v {
                        out.push(mcx(extra.to_vec(), flag));
                    }
                    out.extend(compute.iter().rev().cloned());
                    return Ok(out);
                }
                b = Borrow::Const(v);
            }
            Ok(terms) => {
                if last {
                    let mut out = compute.clone();
                    for t in terms {
                        let mut ctl = extra.to_vec();
                        ctl.extend(t);
                        out.push(mcx(ctl, flag));
                    }
                    out.extend(compute.iter().rev().cloned());
                    return Ok(out);
                }
                let w = *workspace.get(used).ok_or_else(|| {
                    Error::Capacity(format!("comparator on {n} bits needs {} workspace qubits", n - 1))
                })?;
                used += 1;
                for t in terms {
                    compute.push(mcx(t, w));
                }
                b = Borrow::Qubit(w);
            }
        }
    }
    unreachable!("loop returns on the last bit")
}

/// True when `[lo, hi)` is a power-of-two block aligned to its size.
pub fn is_aligned_block(lo: u64, hi: u64) -> bool {
    let size = hi - lo;
    size.is_power_of_two() && lo.is_multiple_of(size)
}

/// Appends gates flipping `flag` iff `lo <= k < hi` and every `extra`
/// control holds. `data` lists the register MSB first. Workspace qubits
/// (up to `n - 1`) are only touched for non-aligned ranges and are
/// returned to `|0>`.
pub fn push_range_flag(
    c: &mut Circuit,
    lo: u64,
    hi: u64,
    data: &[usize],
    flag: usize,
    workspace: &[usize],
    extra: &[Control],
) -> Result<()> {
    let n = data.len();
    if lo >= hi || hi > 1u64 << n {
        return Err(Error::InvalidArgument(format!("invalid range [{lo}, {hi}) on {n} bits")));
    }
    if is_aligned_block(lo, hi) {
        let m = (hi - lo).trailing_zeros() as usize;
        let mut ctl = extra.to_vec();
        for (j, &q) in data.iter().enumerate().take(n - m) {
            ctl.push(Control::on(q, lo >> (n - 1 - j) & 1 == 1));
        }
        return c.push(mcx(ctl, flag));
    }
    for g in less_than_gates(hi, data, flag, workspace, extra)? {
        c.push(g)?;
    }
    for g in less_than_gates(lo, data, flag, workspace, extra)? {
        c.push(g)?;
    }
    Ok(())
}

/// Comparator fragment `U_C` on a fresh register: data `0..n`, flag `n`,
/// workspace `n + 1 ..= 2n - 1`. Its adjoint uncomputes the flag.
pub fn comparator_circuit(lo: u64, hi: u64, n: usize) -> Result<Circuit> {
    let workspace: Vec<usize> = (n + 1..2 * n).collect();
    let mut c = Circuit::with_label(2 * n, "comparator");
    let data: Vec<usize> = (0..n).collect();
    push_range_flag(&mut c, lo, hi, &data, n, &workspace, &[])?;
    Ok(c)
}
