//! Daubechies filters by spectral factorization.
//!
//! `|H(ω)|² = 2 cos^{2N}(ω/2) P(sin²(ω/2))` with
//! `P(y) = Σ_{k<N} C(N-1+k, k) y^k`. Each root `y_i` of `P` gives a pair
//! `z, 1/z` through `z + 1/z = 2 - 4y`; keeping the roots inside the unit
//! circle yields the minimum-phase filter.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{invalid, Result};

/// Hölder regularity credited to DB1..DB10.
const REGULARITY: [f64; 10] = [0.0, 0.550, 1.088, 1.618, 1.969, 2.189, 2.460, 2.761, 3.074, 3.361];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletBasis {
    /// Number of vanishing moments.
    pub n: usize,
    /// Hölder regularity of the mother wavelet.
    pub u: f64,
    /// Low-pass (scaling) filter, `Σ h = √2`.
    pub h: Vec<f64>,
    /// High-pass filter `g_k = (-1)^k h_{L-1-k}`.
    pub g: Vec<f64>,
}

pub fn build_basis(n: usize) -> Result<WaveletBasis> {
    if !(1..=10).contains(&n) {
        return Err(invalid(format!("Daubechies order {n} not in 1..=10")));
    }
    let h = daubechies_lowpass(n);
    let len = h.len();
    let g = (0..len)
        .map(|k| if k % 2 == 0 { h[len - 1 - k] } else { -h[len - 1 - k] })
        .collect();
    Ok(WaveletBasis {
        n,
        u: REGULARITY[n - 1],
        h,
        g,
    })
}

impl WaveletBasis {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Largest violation of `Σ h = √2`, `Σ g = 0` and
    /// `Σ_n h_n h_{n+2k} = δ_k` (also for `g` and the `h`/`g` cross terms).
    pub fn qmf_residual(&self) -> f64 {
        let h = &self.h;
        let g = &self.g;
        let len = h.len() as isize;
        let mut worst: f64 = (h.iter().sum::<f64>() - SQRT_2).abs();
        worst = worst.max(g.iter().sum::<f64>().abs());
        let corr = |a: &[f64], b: &[f64], shift: isize| -> f64 {
            (0..len)
                .filter(|&i| (0..len).contains(&(i + shift)))
                .map(|i| a[i as usize] * b[(i + shift) as usize])
                .sum()
        };
        let mut k = -(len / 2);
        while k <= len / 2 {
            let delta = if k == 0 { 1.0 } else { 0.0 };
            worst = worst.max((corr(h, h, 2 * k) - delta).abs());
            worst = worst.max((corr(g, g, 2 * k) - delta).abs());
            worst = worst.max(corr(h, g, 2 * k).abs());
            k += 1;
        }
        worst
    }

    /// Whether `u > max(|τ|, |τ - d(1/p - 1/2)_+|)`, the regularity needed
    /// for the continuum space with smoothness `τ` and integrability `p`.
    pub fn regularity_adequate(&self, tau: f64, p: f64, d: usize) -> bool {
        let excess = (d as f64 * (1.0 / p - 0.5)).max(0.0);
        self.u > tau.abs().max((tau - excess).abs())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    // value and derivative, coefficients in increasing degree
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial (increasing-degree coefficients)
/// by Aberth iteration, polished with Newton steps.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let radius = 1.0 + coeffs[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = horner(coeffs, z[i]);
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&k| k != i)
                .map(|k| 1.0 / (z[i] - z[k]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *root);
            if dp.norm() > 0.0 {
                *root -= p / dp;
            }
        }
    }
    z
}

fn daubechies_lowpass(n: usize) -> Vec<f64> {
    let p: Vec<f64> = (0..n).map(|k| binomial(n - 1 + k, k)).collect();
    let y_roots = polynomial_roots(&p);
    // polynomial in z with increasing-degree complex coefficients
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let mul = |poly: &mut Vec<Complex64>, root: Complex64| {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] -= c * root;
            next[i + 1] += c;
        }
        *poly = next;
    };
    for _ in 0..n {
        mul(&mut poly, Complex64::new(-1.0, 0.0));
    }
    for y in y_roots {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - 4.0).sqrt();
        let (z1, z2) = ((b + disc) * 0.5, (b - disc) * 0.5);
        let inside = if z1.norm() < z2.norm() { z1 } else { z2 };
        mul(&mut poly, inside);
    }
    // reversed order gives the customary tabulated orientation
    let mut h: Vec<f64> = poly.iter().rev().map(|c| c.re).collect();
    let s: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v *= SQRT_2 / s;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_filter() {
        let b = build_basis(1).unwrap();
        let r = 1.0 / SQRT_2;
        assert!((b.h[0] - r).abs() < 1e-15 && (b.h[1] - r).abs() < 1e-15);
        assert!((b.g[0] - r).abs() < 1e-15 && (b.g[1] + r).abs() < 1e-15);
    }

    #[test]
    fn db2_matches_closed_form() {
        // h = ((1+√3), (3+√3), (3-√3), (1-√3)) / (4√2)
        let s3 = 3f64.sqrt();
        let want = [1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3].map(|v| v / (4.0 * SQRT_2));
        let b = build_basis(2).unwrap();
        for (a, w) in b.h.iter().zip(want) {
            assert!((a - w).abs() < 1e-14);
        }
    }

    #[test]
    fn qmf_and_vanishing_moments_for_all_orders() {
        for n in 1..=10 {
            let b = build_basis(n).unwrap();
            assert_eq!(b.len(), 2 * n);
            assert!(b.qmf_residual() < 1e-12, "DB{n}: {}", b.qmf_residual());
            for m in 0..n {
                // centre the index to keep the moment sums well conditioned
                let c = (b.len() as f64 - 1.0) / 2.0;
                let mom: f64 = b
                    .g
                    .iter()
                    .enumerate()
                    .map(|(k, gk)| gk * ((k as f64 - c) / c.max(1.0)).powi(m as i32))
                    .sum();
                assert!(mom.abs() < 1e-10, "DB{n} moment {m}: {mom}");
            }
        }
        assert!(build_basis(0).is_err() && build_basis(11).is_err());
    }
}
