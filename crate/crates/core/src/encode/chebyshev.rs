//! Classical piecewise Chebyshev interpolation on integer domains.
//!
//! Each interval `[lo, hi)` is interpolated at the `p + 1` first-kind
//! Chebyshev nodes of `[lo, hi - 1]`. Intervals holding at most `p + 1`
//! integers are interpolated at those integers instead (exact there).
//! Coefficients are monomials in the local variable `u = k - lo`.

use super::poly::{BivariatePolynomial, MonomialPolynomial};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseChebyshev {
    pub breakpoints: Vec<i64>,
    pub degree: usize,
    /// `coeffs[i][a]` multiplies `(k - breakpoints[i])^a`.
    pub coeffs: Vec<Vec<f64>>,
    /// Largest absolute error at the integer points of each interval.
    pub max_errors: Vec<f64>,
}

impl PiecewiseChebyshev {
    pub fn num_intervals(&self) -> usize {
        self.coeffs.len()
    }

    pub fn interval(&self, i: usize) -> (i64, i64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn interval_of(&self, k: i64) -> Option<usize> {
        if k < self.breakpoints[0] || k >= *self.breakpoints.last().unwrap() {
            return None;
        }
        Some(self.breakpoints.partition_point(|&b| b <= k) - 1)
    }

    /// Local polynomial of interval `i` (in `u = k - lo`).
    pub fn local_poly(&self, i: usize) -> MonomialPolynomial {
        MonomialPolynomial::new(self.coeffs[i].clone())
    }

    pub fn eval(&self, k: i64) -> Option<f64> {
        self.interval_of(k).map(|i| self.local_poly(i).eval((k - self.breakpoints[i]) as f64))
    }

    pub fn max_error(&self) -> f64 {
        self.max_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let pc: Self = serde_json::from_str(s)?;
        check_breakpoints(&pc.breakpoints)?;
        if pc.coeffs.len() + 1 != pc.breakpoints.len() {
            return Err(Error::Validation("one coefficient row per interval expected".into()));
        }
        Ok(pc)
    }
}

/// Tensor-product piecewise interpolant on a grid of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariatePiecewise {
    pub breakpoints0: Vec<i64>,
    pub breakpoints1: Vec<i64>,
    pub degree: usize,
    /// `cells[i0][i1]` in local variables `(k0 - lo0, k1 - lo1)`.
    pub cells: Vec<Vec<BivariatePolynomial>>,
    pub max_errors: Vec<Vec<f64>>,
}

impl BivariatePiecewise {
    pub fn eval(&self, k0: i64, k1: i64) -> Option<f64> {
        let find = |b: &[i64], k: i64| {
            (k >= b[0] && k < *b.last().unwrap()).then(|| b.partition_point(|&x| x <= k) - 1)
        };
        let i0 = find(&self.breakpoints0, k0)?;
        let i1 = find(&self.breakpoints1, k1)?;
        Some(self.cells[i0][i1].eval((k0 - self.breakpoints0[i0]) as f64, (k1 - self.breakpoints1[i1]) as f64))
    }

    pub fn max_error(&self) -> f64 {
        self.max_errors.iter().flatten().copied().fold(0.0, f64::max)
    }
}

fn check_breakpoints(b: &[i64]) -> Result<()> {
    if b.len() < 2 {
        return Err(Error::InvalidArgument("need at least two breakpoints".into()));
    }
    if b.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("breakpoints must increase strictly: {b:?}")));
    }
    Ok(())
}

/// Interpolation nodes of one interval.
struct Nodes {
    lo: i64,
    /// Absolute node positions.
    x: Vec<f64>,
    /// Chebyshev nodes (true) or the interval's integers (false).
    chebyshev: bool,
    half_width: f64,
}

impl Nodes {
    fn new(lo: i64, hi: i64, p: usize) -> Self {
        let count = (hi - lo) as usize;
        if count <= p + 1 {
            return Self { lo, x: (lo..hi).map(|k| k as f64).collect(), chebyshev: false, half_width: 0.0 };
        }
        let a = lo as f64;
        let b = (hi - 1) as f64;
        let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
        let x = (0..=p).map(|i| c + h * ((2 * i + 1) as f64 * PI / (2 * (p + 1)) as f64).cos()).collect();
        Self { lo, x, chebyshev: true, half_width: h }
    }

    fn eval_target(&self, f: &impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        self.x
            .iter()
            .map(|&x| {
                let v = f(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Fit(format!("target is not finite at {x}")))
                }
            })
            .collect()
    }

    /// Monomial coefficients in `u = k - lo`, length `x.len()`.
    fn local_coeffs(&self, v: &[f64]) -> Vec<f64> {
        let m = self.x.len();
        if !self.chebyshev {
            // Newton divided differences on u = 0, 1, ..., m - 1.
            let u: Vec<f64> = self.x.iter().map(|x| x - self.lo as f64).collect();
            let mut dd = v.to_vec();
            for j in 1..m {
                for i in (j..m).rev() {
                    dd[i] = (dd[i] - dd[i - 1]) / (u[i] - u[i - j]);
                }
            }
            let mut r = vec![0.0; m];
            r[0] = dd[m - 1];
            for i in (0..m - 1).rev() {
                r = mul_affine(&r, 1.0, -u[i]);
                r[0] += dd[i];
            }
            return r;
        }
        // Discrete Chebyshev transform at first-kind nodes.
        let p = m - 1;
        let theta: Vec<f64> = (0..m).map(|i| (2 * i + 1) as f64 * PI / (2 * m) as f64).collect();
        let mut cheb: Vec<f64> = (0..m)
            .map(|j| 2.0 / m as f64 * v.iter().zip(&theta).map(|(vi, t)| vi * (j as f64 * t).cos()).sum::<f64>())
            .collect();
        cheb[0] /= 2.0;
        // T_j in monomials of t by the three-term recurrence.
        let mut t_prev = vec![0.0; m];
        t_prev[0] = 1.0;
        let mut mono = vec![0.0; m];
        for (a, b) in mono.iter_mut().zip(&t_prev) {
            *a += cheb[0] * b;
        }
        if p >= 1 {
            let mut t_cur = vec![0.0; m];
            t_cur[1] = 1.0;
            for (a, b) in mono.iter_mut().zip(&t_cur) {
                *a += cheb[1] * b;
            }
            for j in 2..=p {
                let mut t_next = vec![0.0; m];
                for i in 0..m - 1 {
                    t_next[i + 1] += 2.0 * t_cur[i];
                }
                for i in 0..m {
                    t_next[i] -= t_prev[i];
                }
                for (a, b) in mono.iter_mut().zip(&t_next) {
                    *a += cheb[j] * b;
                }
                t_prev = t_cur;
                t_cur = t_next;
            }
        }
        // t = u / h - 1.
        let (sa, sb) = (1.0 / self.half_width, -1.0);
        let mut r = vec![0.0; m];
        for &c in mono.iter().rev() {
            r = mul_affine(&r, sa, sb);
            r[0] += c;
        }
        r
    }
}

/// `r(u) * (a u + b)`, truncated to `r.len()` coefficients.
fn mul_affine(r: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for i in 0..r.len() {
        out[i] += b * r[i];
        if i + 1 < r.len() {
            out[i + 1] += a * r[i];
        }
    }
    out
}

fn pad(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    v.resize(len, 0.0);
    v
}

fn warn_degree(p: usize) {
    if p > 8 {
        log::warn!("Chebyshev to monomial conversion is ill-conditioned for degree {p} > 8");
    }
}

/// Degrees tried for one interval: only `p`, or `0..=p` until the error
/// drops to `tol`.
fn degrees(p: usize, tol: Option<f64>) -> std::ops::RangeInclusive<usize> {
    if tol.is_some() {
        0..=p
    } else {
        p..=p
    }
}

fn fit_interval(target: &impl Fn(f64) -> f64, lo: i64, hi: i64, d: usize, len: usize) -> Result<(Vec<f64>, f64)> {
    let nodes = Nodes::new(lo, hi, d);
    let c = pad(nodes.local_coeffs(&nodes.eval_target(target)?), len);
    let poly = MonomialPolynomial::new(c.clone());
    let mut err = 0.0f64;
    for k in lo..hi {
        let t = target(k as f64);
        if !t.is_finite() {
            return Err(Error::Fit(format!("target is not finite at {k}")));
        }
        err = err.max((poly.eval((k - lo) as f64) - t).abs());
    }
    Ok((c, err))
}

/// Fits `target` on `[b_0, b_1), [b_1, b_2), ...` with degree `p`.
pub fn chebyshev_fit(target: impl Fn(f64) -> f64, breakpoints: &[i64], p: usize) -> Result<PiecewiseChebyshev> {
    chebyshev_fit_adaptive(target, breakpoints, p, None)
}

/// Like [`chebyshev_fit`], but with `tol` each interval takes the lowest
/// degree up to `p` whose integer-point error is at most `tol`.
pub fn chebyshev_fit_adaptive(
    target: impl Fn(f64) -> f64,
    breakpoints: &[i64],
    p: usize,
    tol: Option<f64>,
) -> Result<PiecewiseChebyshev> {
    check_breakpoints(breakpoints)?;
    warn_degree(p);
    let mut coeffs = Vec::new();
    let mut max_errors = Vec::new();
    for w in breakpoints.windows(2) {
        let mut best = None;
        for d in degrees(p, tol) {
            let (c, err) = fit_interval(&target, w[0], w[1], d, p + 1)?;
            let done = tol.is_none_or(|t| err <= t);
            best = Some((c, err));
            if done {
                break;
            }
        }
        let (c, err) = best.expect("at least one degree is tried");
        coeffs.push(c);
        max_errors.push(err);
    }
    Ok(PiecewiseChebyshev { breakpoints: breakpoints.to_vec(), degree: p, coeffs, max_errors })
}

fn fit_cell(
    target: &impl Fn(f64, f64) -> f64,
    w0: &[i64],
    w1: &[i64],
    d: usize,
    len: usize,
) -> Result<(BivariatePolynomial, f64)> {
    let n0 = Nodes::new(w0[0], w0[1], d);
    let n1 = Nodes::new(w1[0], w1[1], d);
    // a_cols[j][a]: axis-0 coefficients at axis-1 node j.
    let mut a_cols = Vec::with_capacity(n1.x.len());
    for &y in &n1.x {
        let vals = n0.eval_target(&|x| target(x, y))?;
        a_cols.push(pad(n0.local_coeffs(&vals), len));
    }
    let mut c = vec![vec![0.0; len]; len];
    for (a, row_c) in c.iter_mut().enumerate() {
        let vals: Vec<f64> = a_cols.iter().map(|col| col[a]).collect();
        *row_c = pad(n1.local_coeffs(&vals), len);
    }
    let poly = BivariatePolynomial::new(c);
    let mut err = 0.0f64;
    for k0 in w0[0]..w0[1] {
        for k1 in w1[0]..w1[1] {
            let t = target(k0 as f64, k1 as f64);
            if !t.is_finite() {
                return Err(Error::Fit(format!("target is not finite at ({k0}, {k1})")));
            }
            err = err.max((poly.eval((k0 - w0[0]) as f64, (k1 - w1[0]) as f64) - t).abs());
        }
    }
    Ok((poly, err))
}

/// Tensor-product fit of `target(k0, k1)` on the cells spanned by two
/// breakpoint lists.
pub fn chebyshev_fit_2d(
    target: impl Fn(f64, f64) -> f64,
    breakpoints0: &[i64],
    breakpoints1: &[i64],
    p: usize,
) -> Result<BivariatePiecewise> {
    chebyshev_fit_2d_adaptive(target, breakpoints0, breakpoints1, p, None)
}

/// Tensor fit with a per-cell degree search, as in [`chebyshev_fit_adaptive`].
pub fn chebyshev_fit_2d_adaptive(
    target: impl Fn(f64, f64) -> f64,
    breakpoints0: &[i64],
    breakpoints1: &[i64],
    p: usize,
    tol: Option<f64>,
) -> Result<BivariatePiecewise> {
    check_breakpoints(breakpoints0)?;
    check_breakpoints(breakpoints1)?;
    warn_degree(p);
    let mut cells = Vec::new();
    let mut max_errors = Vec::new();
    for w0 in breakpoints0.windows(2) {
        let mut row = Vec::new();
        let mut row_err = Vec::new();
        for w1 in breakpoints1.windows(2) {
            let mut best = None;
            for d in degrees(p, tol) {
                let (poly, err) = fit_cell(&target, w0, w1, d, p + 1)?;
                let done = tol.is_none_or(|t| err <= t);
                best = Some((poly, err));
                if done {
                    break;
                }
            }
            let (poly, err) = best.expect("at least one degree is tried");
            row.push(poly);
            row_err.push(err);
        }
        cells.push(row);
        max_errors.push(row_err);
    }
    Ok(BivariatePiecewise {
        breakpoints0: breakpoints0.to_vec(),
        breakpoints1: breakpoints1.to_vec(),
        degree: p,
        cells,
        max_errors,
    })
}
