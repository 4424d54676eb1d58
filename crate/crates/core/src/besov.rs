//! Weighted Besov sequence norms, weighted Sobolev norms and the
//! embedding predicates between weighted Besov spaces.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::numeric::{integrate, linear_fit};
use crate::sampler::GridField;
use crate::wavelet::CoeffPyramid;

/// `(p, q, τ, μ)` of `B^τ_{p,q}(ℝ^d; μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovParams {
    #[serde(with = "crate::serde_ext::ext_real")]
    pub p: f64,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub q: f64,
    pub tau: f64,
    pub mu: f64,
}

impl BesovParams {
    pub fn new(p: f64, q: f64, tau: f64, mu: f64) -> Result<Self> {
        let s = Self { p, q, tau, mu };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || !(self.q > 0.0) {
            return Err(invalid("p and q must be positive or inf"));
        }
        if !self.tau.is_finite() || !self.mu.is_finite() {
            return Err(invalid("tau and mu must be finite"));
        }
        Ok(())
    }

    /// `d / p`, zero for `p = ∞`.
    fn d_over_p(&self, d: usize) -> f64 {
        d as f64 / self.p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub params: BesovParams,
    /// Physical scale of each entry of `per_level`.
    pub scales: Vec<i32>,
    /// `S_j = Σ_G (Σ_m ⟨2^{-j}m⟩^{μp} |c|^p)^{q/p}`; for `q = ∞` the max
    /// over `G` of the `p`-sums raised to `1/p`.
    pub per_level: Vec<f64>,
    pub total: f64,
    /// Slope of `log2 S_j` against `j`, coarsest (father) level excluded.
    pub growth_slope: f64,
}

impl NormReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "j,S_j")?;
        for (j, s) in self.scales.iter().zip(&self.per_level) {
            writeln!(w, "{j},{s:.17e}")?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "total": self.total,
            "growth_slope": self.growth_slope,
        })
    }
}

/// `⟨x⟩ = (1 + |x|²)^{1/2}`.
pub fn japanese(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Per-band `p`-sum `Σ_m ⟨x_m⟩^{μp} |c_m|^p`, or `sup_m ⟨x_m⟩^μ |c_m|` for
/// `p = ∞`.
fn band_sum(pyr: &CoeffPyramid, band: &crate::wavelet::Band, p: f64, mu: f64) -> f64 {
    let spec = &pyr.spec;
    let it = band.coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0);
    if p.is_infinite() {
        it.map(|(i, c)| japanese(&band.position(i, spec)).powf(mu) * c.abs())
            .fold(0.0, f64::max)
    } else {
        it.map(|(i, c)| {
            let w = if mu == 0.0 { 1.0 } else { japanese(&band.position(i, spec)).powf(mu * p) };
            w * c.abs().powf(p)
        })
        .sum()
    }
}

pub fn besov_norm(pyramid: &CoeffPyramid, params: BesovParams) -> Result<NormReport> {
    params.validate()?;
    let d = pyramid.spec.d;
    let (p, q) = (params.p, params.q);
    let expo = params.tau - params.d_over_p(d) + d as f64 / 2.0;
    let mut scales = Vec::new();
    let mut per_level = Vec::new();
    for j in pyramid.scales() {
        let sums: Vec<f64> = pyramid.bands_at(j).map(|b| band_sum(pyramid, b, p, params.mu)).collect();
        // each band's (quasi-)norm, `(Σ ...)^{1/p}`
        let norms = sums.iter().map(|s| if p.is_infinite() { *s } else { s.powf(1.0 / p) });
        let s_j = if q.is_infinite() {
            norms.fold(0.0, f64::max)
        } else {
            norms.map(|n| n.powf(q)).sum()
        };
        scales.push(j);
        per_level.push(s_j);
    }
    let total = if q.is_infinite() {
        scales
            .iter()
            .zip(&per_level)
            .map(|(j, s)| (*j as f64 * expo).exp2() * s)
            .fold(0.0, f64::max)
    } else {
        scales
            .iter()
            .zip(&per_level)
            .map(|(j, s)| (*j as f64 * expo * q).exp2() * s)
            .sum::<f64>()
            .powf(1.0 / q)
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales
        .iter()
        .zip(&per_level)
        .skip(1)
        .filter(|(_, s)| **s > 0.0)
        .map(|(j, s)| (*j as f64, s.log2()))
        .unzip();
    let growth_slope = linear_fit(&xs, &ys).map_or(f64::NAN, |(s, _)| s);
    Ok(NormReport {
        params,
        scales,
        per_level,
        total,
        growth_slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSum {
    pub value: f64,
    pub error: f64,
}

/// `C0 = ∫_{ℝ^d} ⟨x⟩^{-s} dx = π^{d/2} Γ((s-d)/2) / Γ(s/2)` for `s > d`.
pub fn weight_integral(s: f64, d: usize) -> f64 {
    let df = d as f64;
    PI.powf(df / 2.0) * gamma((s - df) / 2.0) / gamma(s / 2.0)
}

/// `∫_{[-a,a]^d} ⟨x⟩^{-s} dx` by nested quadrature.
fn cube_integral(s: f64, d: usize, a: f64) -> f64 {
    fn nested(s: f64, depth: usize, r2: f64, a: f64) -> f64 {
        if depth == 0 {
            return (1.0 + r2).powf(-s / 2.0);
        }
        2.0 * integrate(|x: f64| nested(s, depth - 1, r2 + x * x, a), 0.0, a, 1e-15, 1e-13).value
    }
    nested(s, d, 0.0, a)
}

/// Lattice sum over `|m_k| <= m` plus the integral over the complement of
/// the midpoint cube.
fn weight_sum_at(j: i32, s: f64, d: usize, m: i64) -> f64 {
    let h = (-(j as f64)).exp2();
    let mut total = 0.0;
    let n = (2 * m + 1) as usize;
    let count = n.pow(d as u32);
    for flat in 0..count {
        let mut idx = flat;
        let mut r2 = 0.0;
        for _ in 0..d {
            let k = (idx % n) as i64 - m;
            idx /= n;
            let x = k as f64 * h;
            r2 += x * x;
        }
        total += (1.0 + r2).powf(-s / 2.0);
    }
    let a = (m as f64 + 0.5) * h;
    let tail = weight_integral(s, d) - cube_integral(s, d, a);
    total + tail / h.powi(d as i32)
}

/// `Σ_{m ∈ ℤ^d} ⟨2^{-j} m⟩^{-μp}`, finite iff `μp > d`.
pub fn weight_sum(j: i32, mu: f64, p: f64, d: usize) -> Result<WeightSum> {
    if !(1..=3).contains(&d) {
        return Err(invalid("d must lie in 1..=3"));
    }
    let s = mu * p;
    if !(s > d as f64) {
        return Err(Error::Divergent(format!(
            "weight sum needs mu*p > d, got mu*p = {s}, d = {d}"
        )));
    }
    let base = (j as f64).exp2().ceil() as i64;
    // the cube must reach well past the weight's unit scale
    let cap = [0, 4_000_000, 2_000, 150][d];
    let mut m = (8 * base).max(16).min(cap);
    let mut prev = weight_sum_at(j, s, d, m / 2);
    loop {
        let v = weight_sum_at(j, s, d, m);
        let err = (v - prev).abs();
        if err <= 1e-9 * v.abs() || 2 * m > cap {
            return Ok(WeightSum { value: v, error: err });
        }
        prev = v;
        m *= 2;
    }
}

/// `‖⟨·⟩^τ ⋆ (⟨x⟩^μ f)‖₂` on the torus: the density `f = increment / vol`
/// is weighted at cell centres, transformed by FFT, multiplied by
/// `⟨ω⟩^τ` with `ω_k = 2π k / S`, and measured in `L2` with cell volume.
pub fn sobolev_norm(field: &GridField, tau: f64, mu: f64) -> Result<f64> {
    let spec = field.spec;
    let d = spec.d;
    let n = spec.cells_per_axis();
    let vol = spec.cell_volume();
    let mut data: Vec<Complex64> = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if mu == 0.0 { 1.0 } else { japanese(&spec.cell_center(i)).powf(mu) };
            Complex64::new(w * v / vol, 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let lines = data.len() / n;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..lines {
            let base = (l / stride) * stride * n + l % stride;
            for i in 0..n {
                line[i] = data[base + i * stride];
            }
            fft.process(&mut line);
            for i in 0..n {
                data[base + i * stride] = line[i];
            }
        }
    }
    let side = spec.side();
    let freq = |k: usize| {
        let signed = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * signed / side
    };
    let mut acc = 0.0;
    for (flat, c) in data.iter().enumerate() {
        let mut idx = flat;
        let mut w2 = 1.0;
        for _ in 0..d {
            let f = freq(idx % n);
            idx /= n;
            w2 += f * f;
        }
        acc += w2.powf(tau) * c.norm_sqr();
    }
    Ok((acc * vol / field.values.len() as f64).sqrt())
}

/// `p_0 <= p_1` and `τ0 - τ1 >= d(1/p0 - 1/p1)`.
pub fn condition_tau(src: &BesovParams, dst: &BesovParams, d: usize) -> bool {
    let df = d as f64;
    src.p <= dst.p && src.tau - dst.tau >= df * (1.0 / src.p - 1.0 / dst.p)
}

/// `p_1 <= p_0` and `μ0 - μ1 > d(1/p1 - 1/p0)`.
pub fn condition_mu(src: &BesovParams, dst: &BesovParams, d: usize) -> bool {
    let df = d as f64;
    dst.p <= src.p && src.mu - dst.mu > df * (1.0 / dst.p - 1.0 / src.p)
}

/// Sufficient condition for `B^{τ0}_{p0,q0}(μ0) ⊆ B^{τ1}_{p1,q1}(μ1)`;
/// the `q` parameters play no role.
pub fn embedding_admissible(src: &BesovParams, dst: &BesovParams, d: usize) -> bool {
    src.tau > dst.tau
        && src.mu >= dst.mu
        && (condition_tau(src, dst, d) || condition_mu(src, dst, d))
}

/// Both sides of the Hölder step
/// `Σ ⟨2^{-j}m⟩^{μ1 p1} |λ|^{p1} <= (Σ ⟨⟩^{(μ1-μ0) p1 b})^{1/b} (Σ ⟨⟩^{μ0 p0} |λ|^{p0})^{1/a}`
/// with `a = p0/p1`, `1/a + 1/b = 1`. Entry `k` of `lambda` sits at shift
/// `m = (k, 0, ..., 0)`.
pub fn holder_step_check(
    lambda: &[f64],
    j: i32,
    mu0: f64,
    mu1: f64,
    p0: f64,
    p1: f64,
    d: usize,
) -> Result<(f64, f64)> {
    if !(p1 > 0.0 && p1.is_finite() && p0 >= p1) {
        return Err(invalid("need 0 < p1 <= p0"));
    }
    if !(mu0 - mu1 > d as f64 * (1.0 / p1 - 1.0 / p0)) {
        return Err(invalid("need mu0 - mu1 > d (1/p1 - 1/p0)"));
    }
    let h = (-(j as f64)).exp2();
    let w = |k: usize| japanese(&[k as f64 * h]);
    let lhs: f64 = lambda
        .iter()
        .enumerate()
        .map(|(k, l)| w(k).powf(mu1 * p1) * l.abs().powf(p1))
        .sum();
    let inv_a = p1 / p0;
    let inv_b = 1.0 - inv_a;
    let first = if inv_b == 0.0 {
        (0..lambda.len()).map(|k| w(k).powf((mu1 - mu0) * p1)).fold(0.0, f64::max)
    } else {
        (0..lambda.len())
            .map(|k| w(k).powf((mu1 - mu0) * p1 / inv_b))
            .sum::<f64>()
            .powf(inv_b)
    };
    let second = if p0.is_infinite() {
        lambda
            .iter()
            .enumerate()
            .map(|(k, l)| w(k).powf(mu0 * p1) * l.abs().powf(p1))
            .fold(0.0, f64::max)
    } else {
        lambda
            .iter()
            .enumerate()
            .map(|(k, l)| w(k).powf(mu0 * p0) * l.abs().powf(p0))
            .sum::<f64>()
            .powf(inv_a)
    };
    Ok((lhs, first * second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::GridSpec;
    use crate::wavelet::{analyze, build_basis, CoeffPyramid};

    fn pyramid_1d(j_max: u32, levels: usize) -> CoeffPyramid {
        // L = 0.5 so that index 0 sits at position -0.5; use L chosen by caller
        CoeffPyramid::zeros(GridSpec::new(1, j_max, 0.5).unwrap(), 1, levels).unwrap()
    }

    #[test]
    fn hand_evaluated_two_level_norm() {
        // scales 0 and 1; put a unit coefficient in the father band at j = 0
        // and in the mother band at j = 1, both at weight 1 (μ = 0)
        let mut p = pyramid_1d(2, 2);
        p.bands[0].coeffs[0] = 1.0;
        p.bands.iter_mut().find(|b| b.scale == 1).unwrap().coeffs[0] = 1.0;
        let r = besov_norm(&p, BesovParams::new(1.0, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!((r.total - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        assert_eq!(r.scales, vec![0, 1]);
    }

    #[test]
    fn single_coefficient_at_origin_has_norm_one() {
        // L = 1: index 1 of scale 0 sits at x = 0
        let mut p = CoeffPyramid::zeros(GridSpec::new(1, 1, 1.0).unwrap(), 1, 1).unwrap();
        p.bands[0].coeffs[1] = 1.0;
        for (pp, q) in [(1.0, 1.0), (2.0, 0.5), (f64::INFINITY, 3.0), (0.7, f64::INFINITY)] {
            let r = besov_norm(&p, BesovParams::new(pp, q, 0.0, 2.0).unwrap()).unwrap();
            assert!((r.total - 1.0).abs() < 1e-15, "{pp} {q}");
        }
    }

    #[test]
    fn homogeneity() {
        let spec = GridSpec::new(1, 6, 1.0).unwrap();
        let vals: Vec<f64> = (0..spec.total_cells()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let f = GridField::new(spec, vals, "t", 0).unwrap();
        let mut p = analyze(&f, &build_basis(2).unwrap(), 5).unwrap();
        let params = BesovParams::new(1.5, 2.0, 0.3, 0.5).unwrap();
        let a = besov_norm(&p, params).unwrap().total;
        p.scale_by(-3.0);
        let b = besov_norm(&p, params).unwrap().total;
        assert!((b / a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn weight_sums() {
        let w = weight_sum(0, 1.0, 2.0, 1).unwrap();
        let exact = PI / PI.tanh();
        assert!((w.value - exact).abs() < 1e-9, "{} vs {exact}", w.value);
        let w10 = weight_sum(10, 2.0, 1.0, 1).unwrap();
        assert!((w10.value / 1024.0 / PI - 1.0).abs() < 5e-3);
        assert!(matches!(weight_sum(3, 1.0, 1.0, 1), Err(Error::Divergent(_))));
        let w2 = weight_sum(2, 2.0, 2.0, 2).unwrap();
        // Σ over ℤ² of (1 + |m|²/16)^{-2} ≈ 16 π for large scale
        assert!((w2.value / (16.0 * weight_integral(4.0, 2)) - 1.0).abs() < 0.05);
    }

    #[test]
    fn sobolev_identity_and_pure_frequency() {
        let spec = GridSpec::new(1, 6, 0.5).unwrap();
        let n = spec.cells_per_axis();
        let vol = spec.cell_volume();
        let k0 = 3.0;
        let vals: Vec<f64> = (0..n).map(|i| (2.0 * PI * k0 * i as f64 / n as f64).cos() * vol).collect();
        let f = GridField::new(spec, vals, "t", 0).unwrap();
        let l2 = sobolev_norm(&f, 0.0, 0.0).unwrap();
        let direct = (f.values.iter().map(|v| (v / vol).powi(2)).sum::<f64>() * vol).sqrt();
        assert!((l2 - direct).abs() < 1e-12);
        let tau = 1.3;
        let omega = 2.0 * PI * k0;
        let s = sobolev_norm(&f, tau, 0.0).unwrap();
        assert!((s / l2 - (1.0 + omega * omega).powf(tau / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn embedding_examples() {
        let p = |p, tau, mu| BesovParams::new(p, 2.0, tau, mu).unwrap();
        assert!(embedding_admissible(&p(1.0, 1.0, 0.0), &p(2.0, 0.0, 0.0), 1));
        assert!(!embedding_admissible(&p(1.0, 1.0, 0.0), &p(1.0, 1.0, 0.0), 1));
        assert!(embedding_admissible(&p(2.0, 1.0, 2.0), &p(1.0, 0.0, 0.0), 1));
    }

    #[test]
    fn holder_step_cases() {
        assert_eq!(holder_step_check(&[0.0; 10], 2, 2.0, 0.0, 2.0, 1.0, 1).unwrap(), (0.0, 0.0));
        let (l, r) = holder_step_check(&[1.7], 3, 2.0, 0.5, 3.0, 1.0, 1).unwrap();
        assert!((l - 1.7).abs() < 1e-15 && (r - 1.7).abs() < 1e-14);
        let (l, r) = holder_step_check(&[0.3, -2.0, 1.0, 0.5], 1, 3.0, 1.0, 2.0, 2.0, 1).unwrap();
        assert!(l <= r);
        assert!(holder_step_check(&[1.0], 0, 0.0, 0.0, 2.0, 1.0, 1).is_err());
    }
}
