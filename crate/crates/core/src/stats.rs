//! Least-squares fits used by convergence and scaling studies.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `y ~ slope x + intercept`, with the coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let c = polyfit(x, y, 1)?;
    Ok(LinearFit { slope: c[1], intercept: c[0], r2: r_squared(x, y, &c) })
}

/// Coefficients (ascending powers) of the least-squares polynomial of
/// degree `deg`. Solved by Householder QR on the centred, scaled
/// Vandermonde matrix.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Result<Vec<f64>> {
    let m = x.len();
    if m != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if m < deg + 1 {
        return Err(Error::InvalidArgument(format!("{m} points cannot determine degree {deg}")));
    }
    let mean = x.iter().sum::<f64>() / m as f64;
    let scale = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).max(1e-300);
    let cols = deg + 1;
    let mut a: Vec<Vec<f64>> = x.iter().map(|&v| (0..cols).map(|j| ((v - mean) / scale).powi(j as i32)).collect()).collect();
    let mut b = y.to_vec();
    for j in 0..cols {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("rank-deficient fit".into()));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>();
        if vn == 0.0 {
            continue;
        }
        for k in j..cols {
            let d = (j..m).map(|i| v[i - j] * a[i][k]).sum::<f64>() * 2.0 / vn;
            for i in j..m {
                a[i][k] -= d * v[i - j];
            }
        }
        let d = (j..m).map(|i| v[i - j] * b[i]).sum::<f64>() * 2.0 / vn;
        for i in j..m {
            b[i] -= d * v[i - j];
        }
    }
    let mut z = vec![0.0; cols];
    for j in (0..cols).rev() {
        let s: f64 = (j + 1..cols).map(|k| a[j][k] * z[k]).sum();
        z[j] = (b[j] - s) / a[j][j];
    }
    // Undo the centring and scaling: sum_j z_j ((x - mean)/scale)^j.
    let mut out = vec![0.0; cols];
    for (j, &zj) in z.iter().enumerate() {
        let f = zj / scale.powi(j as i32);
        for k in 0..=j {
            out[k] += f * binom(j, k) * (-mean).powi((j - k) as i32);
        }
    }
    Ok(out)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

pub fn r_squared(x: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(&a, &b)| (b - poly_eval(c, a)).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Fit of gate counts against `log2 N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolylogFit {
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub r2: f64,
    /// Lowest degree whose fit reaches `r2_target`, if any up to `degree`.
    pub min_degree: Option<usize>,
}

/// Fits `counts` with polynomials in `log2(sizes)` of degree up to
/// `max_degree` (clamped so the fit stays overdetermined where possible).
pub fn polylog_fit(sizes: &[f64], counts: &[f64], max_degree: usize, r2_target: f64) -> Result<PolylogFit> {
    let x: Vec<f64> = sizes.iter().map(|s| s.log2()).collect();
    let degree = max_degree.min(x.len().saturating_sub(1));
    let mut min_degree = None;
    for d in 0..=degree {
        let c = polyfit(&x, counts, d)?;
        if r_squared(&x, counts, &c) >= r2_target {
            min_degree = Some(d);
            break;
        }
    }
    let coeffs = polyfit(&x, counts, degree)?;
    let r2 = r_squared(&x, counts, &coeffs);
    Ok(PolylogFit { degree, coeffs, r2, min_degree })
}

/// `count(4N) / count(N)` for every `N` in `sizes` whose quadruple is also
/// present, as `(N, ratio)`.
pub fn growth_ratios(sizes: &[f64], counts: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &s) in sizes.iter().enumerate() {
        if let Some(j) = sizes.iter().position(|&t| (t - 4.0 * s).abs() < 1e-9) {
            out.push((s, counts[j] / counts[i]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic() {
        let x: Vec<f64> = (0..8).map(|i| i as f64 + 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - v + 0.5 * v * v + 0.1 * v * v * v).collect();
        let c = polyfit(&x, &y, 3).unwrap();
        for (a, b) in c.iter().zip([2.0, -1.0, 0.5, 0.1]) {
            assert!((a - b).abs() < 1e-9, "{c:?}");
        }
        assert!((r_squared(&x, &y, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_order_slope() {
        let n: Vec<f64> = [8.0f64, 16.0, 32.0, 64.0, 128.0, 256.0].to_vec();
        let e: Vec<f64> = n.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let lx: Vec<f64> = n.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
        let f = linear_fit(&lx, &ly).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-6);
    }

    #[test]
    fn ratios() {
        let s = [8.0, 16.0, 32.0, 64.0];
        let c = [1.0, 2.0, 3.0, 5.0];
        assert_eq!(growth_ratios(&s, &c), vec![(8.0, 3.0), (16.0, 2.5)]);
    }
}
