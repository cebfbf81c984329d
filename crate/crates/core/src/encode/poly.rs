//! Polynomial encoding by multi-controlled RY rotations.
//!
//! With `k = sum_j 2^(n-1-j) k_j` (qubit 0 most significant) and `k_j^2 = k_j`,
//! `k^a` expands into products of bits, and `exp(-i Y eps f(k))` factors into
//! one controlled rotation per product.

use super::EncodingConfig;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateInstance, GateKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `f(x) = sum_j coeffs[j] x^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialPolynomial {
    pub coeffs: Vec<f64>,
}

impl MonomialPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// `q(x) = p(x - s)`.
    pub fn shifted(&self, s: f64) -> Self {
        Self::new(shift_coeffs(&self.coeffs, s))
    }
}

pub(crate) fn shift_coeffs(c: &[f64], s: f64) -> Vec<f64> {
    // Horner in (x - s): q = (...(c_p (x-s) + c_{p-1})(x-s) + ...)
    let mut q = vec![0.0; c.len()];
    for &a in c.iter().rev() {
        let mut next = vec![0.0; c.len()];
        for i in 0..c.len() {
            if i + 1 < c.len() {
                next[i + 1] += q[i];
            }
            next[i] -= s * q[i];
        }
        next[0] += a;
        q = next;
    }
    q
}

/// `f(x0, x1) = sum_ab coeffs[a][b] x0^a x1^b` on a square grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariatePolynomial {
    pub coeffs: Vec<Vec<f64>>,
}

impl BivariatePolynomial {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        let p = coeffs.len().max(coeffs.iter().map(Vec::len).max().unwrap_or(0)).max(1);
        let mut c = vec![vec![0.0; p]; p];
        for (a, row) in coeffs.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                c[a][b] = v;
            }
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x0: f64, x1: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| acc * x0 + row.iter().rev().fold(0.0, |a, &c| a * x1 + c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|&c| c == 0.0)
    }

    /// `q(x0, x1) = p(x0 - s0, x1 - s1)`.
    pub fn shifted(&self, s0: f64, s1: f64) -> Self {
        let p = self.coeffs.len();
        let rows: Vec<Vec<f64>> = self.coeffs.iter().map(|r| shift_coeffs(r, s1)).collect();
        let mut out = vec![vec![0.0; p]; p];
        for b in 0..p {
            let col: Vec<f64> = rows.iter().map(|r| r[b]).collect();
            for (a, v) in shift_coeffs(&col, s0).into_iter().enumerate() {
                out[a][b] = v;
            }
        }
        Self { coeffs: out }
    }
}

/// One multi-controlled rotation: `RY(angle)` on the flag when every
/// qubit in `controls` is `|1>`. `angle` is the full RY argument, so the
/// terms of `f` sum to `2 f(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTerm {
    pub controls: Vec<usize>,
    pub angle: f64,
}

fn multinomial(e: &[usize]) -> f64 {
    let mut r = 1.0;
    let mut total = 0usize;
    for &x in e {
        for i in 1..=x {
            total += 1;
            r *= total as f64 / i as f64;
        }
    }
    r
}

fn exponent_vectors(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, p, &mut vec![0; n], &mut out);
    out.sort_by_key(|e| (e.iter().sum::<usize>(), std::cmp::Reverse(e.clone())));
    out
}

fn register_weights(n: usize) -> Vec<f64> {
    (0..n).map(|j| (1u64 << (n - 1 - j)) as f64).collect()
}

/// Unmerged expansion over `qubits` with place values `weights`: one term
/// per exponent vector `e` with `|e| <= p`, `C(m + p, m)` in total.
fn raw_terms(coeffs: &[f64], qubits: &[usize], weights: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let p = coeffs.len() - 1;
    exponent_vectors(qubits.len(), p)
        .into_iter()
        .map(|e| {
            let deg: usize = e.iter().sum();
            let mut w = multinomial(&e);
            let mut ctl = Vec::new();
            for (j, &x) in e.iter().enumerate() {
                if x > 0 {
                    w *= weights[j].powi(x as i32);
                    ctl.push(qubits[j]);
                }
            }
            (ctl, w * coeffs[deg])
        })
        .collect()
}

/// Raw expansion of `f` on an `n`-bit register (qubits `0..n`).
/// Returns exactly `C(n + p, n)` terms; see [`merge_terms`] for the
/// collapsed form.
pub fn expand_rotation_terms(f: &MonomialPolynomial, n: usize) -> Vec<RotationTerm> {
    let q: Vec<usize> = (0..n).collect();
    raw_terms(&f.coeffs, &q, &register_weights(n))
        .into_iter()
        .map(|(controls, w)| RotationTerm { controls, angle: 2.0 * w })
        .collect()
}

/// Raw expansion of a bivariate `f` on two `n`-bit registers (axis 0 on
/// qubits `0..n`, axis 1 on `n..2n`): `C(n + p, n)^2` terms.
pub fn expand_bivariate_terms(f: &BivariatePolynomial, n: usize) -> Vec<RotationTerm> {
    let p = f.degree();
    let w = register_weights(n);
    let q0: Vec<usize> = (0..n).collect();
    let q1: Vec<usize> = (n..2 * n).collect();
    let unit = |a: usize| {
        let mut c = vec![0.0; p + 1];
        c[a] = 1.0;
        c
    };
    let mut out = Vec::new();
    let t0: Vec<Vec<(Vec<usize>, f64, usize)>> =
        (0..=p).map(|a| raw_terms(&unit(a), &q0, &w).into_iter().filter(|t| t.1 != 0.0).map(|t| (t.0, t.1, a)).collect()).collect();
    let t1: Vec<Vec<(Vec<usize>, f64, usize)>> =
        (0..=p).map(|b| raw_terms(&unit(b), &q1, &w).into_iter().filter(|t| t.1 != 0.0).map(|t| (t.0, t.1, b)).collect()).collect();
    for x in t0.iter().flatten() {
        for y in t1.iter().flatten() {
            let mut controls = x.0.clone();
            controls.extend(&y.0);
            out.push(RotationTerm { controls, angle: 2.0 * f.coeffs[x.2][y.2] * x.1 * y.1 });
        }
    }
    out
}

/// Collapses terms sharing a control set and drops exact zeros.
pub fn merge_terms(terms: &[RotationTerm]) -> Vec<RotationTerm> {
    let mut m: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
    for t in terms {
        let mut c = t.controls.clone();
        c.sort_unstable();
        c.dedup();
        *m.entry((c.len(), c)).or_insert(0.0) += t.angle;
    }
    m.into_iter().filter(|(_, a)| *a != 0.0).map(|((_, controls), angle)| RotationTerm { controls, angle }).collect()
}

/// `tables[a][mask]`: coefficient of `prod_{j in mask} b_j` in
/// `(sum_j weights[j] b_j)^a` for bits `b_j`.
pub(crate) fn power_tables(weights: &[f64], p: usize) -> Vec<BTreeMap<u64, f64>> {
    let mut tables = Vec::with_capacity(p + 1);
    let mut cur = BTreeMap::from([(0u64, 1.0)]);
    tables.push(cur.clone());
    for _ in 0..p {
        let mut next = BTreeMap::new();
        for (&mask, &c) in &cur {
            for (j, &w) in weights.iter().enumerate() {
                *next.entry(mask | (1u64 << j)).or_insert(0.0) += c * w;
            }
        }
        tables.push(next.clone());
        cur = next;
    }
    tables
}

fn mask_qubits(mask: u64, qubits: &[usize]) -> Vec<usize> {
    qubits.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &q)| q).collect()
}

/// Merged terms of a univariate polynomial in `u = sum_j weights[j] b_j`.
pub(crate) fn merged_terms_on_bits(coeffs: &[f64], qubits: &[usize], weights: &[f64]) -> Vec<RotationTerm> {
    let p = coeffs.len() - 1;
    let tables = power_tables(weights, p);
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for (a, t) in tables.iter().enumerate() {
        if coeffs[a] == 0.0 {
            continue;
        }
        for (&mask, &c) in t {
            *acc.entry(mask).or_insert(0.0) += 2.0 * coeffs[a] * c;
        }
    }
    let mut out: Vec<RotationTerm> = acc
        .into_iter()
        .filter(|(_, a)| *a != 0.0)
        .map(|(mask, angle)| RotationTerm { controls: mask_qubits(mask, qubits), angle })
        .collect();
    out.sort_by_key(|t| t.controls.len());
    out
}

/// Merged terms of a bivariate polynomial in `(u0, u1)` with
/// `u_i = sum_j weights_i[j] b_ij`.
pub(crate) fn merged_bivariate_on_bits(
    f: &BivariatePolynomial,
    qubits0: &[usize],
    weights0: &[f64],
    qubits1: &[usize],
    weights1: &[f64],
) -> Vec<RotationTerm> {
    let p = f.degree();
    let t0 = power_tables(weights0, p);
    let t1 = power_tables(weights1, p);
    let mut acc: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for (a, ta) in t0.iter().enumerate() {
        for (b, tb) in t1.iter().enumerate() {
            let c = f.coeffs[a][b];
            if c == 0.0 {
                continue;
            }
            for (&m0, &x) in ta {
                for (&m1, &y) in tb {
                    *acc.entry((m0, m1)).or_insert(0.0) += 2.0 * c * x * y;
                }
            }
        }
    }
    let mut out: Vec<RotationTerm> = acc
        .into_iter()
        .filter(|(_, a)| *a != 0.0)
        .map(|((m0, m1), angle)| {
            let mut controls = mask_qubits(m0, qubits0);
            controls.extend(mask_qubits(m1, qubits1));
            RotationTerm { controls, angle }
        })
        .collect();
    out.sort_by_key(|t| t.controls.len());
    out
}

/// Appends `RY(scale * angle)` on `flag` for each term, controlled on the
/// term's qubits plus `extra`.
pub(crate) fn push_terms(c: &mut Circuit, terms: &[RotationTerm], flag: usize, extra: &[Control], scale: f64) -> Result<()> {
    for t in terms {
        let mut ctl: Vec<Control> = extra.to_vec();
        ctl.extend(t.controls.iter().map(|&q| Control::pos(q)));
        c.push(GateInstance::controlled(GateKind::RY(scale * t.angle), ctl, vec![flag]))?;
    }
    Ok(())
}

fn max_over_register(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    if n > 20 {
        return 0.0;
    }
    (0..1usize << n).map(|k| f(k).abs()).fold(0.0, f64::max)
}

/// `|k>|0> -> cos(eps f(k))|k>|0> + sin(eps f(k))|k>|1>` on `n` data
/// qubits and a flag at index `n`, one multi-controlled RY per raw term.
pub fn poly_encode_circuit(f: &MonomialPolynomial, n: usize, cfg: &EncodingConfig) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial encoding needs at least one data qubit".into()));
    }
    cfg.check_range(max_over_register(n, |k| f.eval(k as f64)))?;
    let terms = expand_rotation_terms(f, n);
    cfg.check_ancillas(terms.iter().map(|t| t.controls.len()).max().unwrap_or(0))?;
    let mut c = Circuit::with_label(n + 1, "poly_encode");
    push_terms(&mut c, &terms, n, &[], cfg.epsilon)?;
    Ok(c)
}

/// Bivariate analogue of [`poly_encode_circuit`]: axis 0 on qubits `0..n`,
/// axis 1 on `n..2n`, flag at `2n`.
pub fn bivariate_encode_circuit(f: &BivariatePolynomial, n: usize, cfg: &EncodingConfig) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("bivariate encoding needs at least one qubit per axis".into()));
    }
    let mask = (1usize << n) - 1;
    cfg.check_range(max_over_register(2 * n, |k| f.eval((k >> n) as f64, (k & mask) as f64)))?;
    let terms = expand_bivariate_terms(f, n);
    cfg.check_ancillas(terms.iter().map(|t| t.controls.len()).max().unwrap_or(0))?;
    let mut c = Circuit::with_label(2 * n + 1, "bivariate_encode");
    push_terms(&mut c, &terms, 2 * n, &[], cfg.epsilon)?;
    Ok(c)
}

/// Binomial coefficient as an integer.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
