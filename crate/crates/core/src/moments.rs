//! Fractional moments `E|X|^p`, `0 < p < 2`, from the characteristic
//! function: `E|X|^p = c_p ∫ (1 - Re Φ(ξ)) |ξ|^{-p-1} dξ`, together with
//! Monte Carlo counterparts.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, PI};

use crate::error::{invalid, Error, Result};
use crate::idlaw::LevyModel;
use crate::numeric::{cexpm1, gk15, integrate};
use crate::rng::{derive_seed, StreamFactory};
use crate::sampler::{CellSampler, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    CfIntegral,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    /// `+inf` when the moment diverges.
    #[serde(with = "crate::serde_ext::ext_real")]
    pub value: f64,
    pub method: MomentMethod,
    /// Standard error (Monte Carlo) or quadrature error bound.
    pub error: f64,
}

fn check_order(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 2.0) {
        return Err(invalid(format!("moment order p = {p} outside (0, 2)")));
    }
    Ok(())
}

/// `∫_0^∞ (1 - cos u) u^{-p-1} du` by quadrature: `[0, 2πK]` panel by
/// panel, then the tail `T^{-p}/p - ∫_T^∞ cos(u) u^{-p-1} du` expanded
/// asymptotically at `T = 2πK`.
fn half_line_one_minus_cos(p: f64) -> f64 {
    const PERIODS: usize = 2000;
    let f = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            2.0 * (0.5 * u).sin().powi(2) * u.powf(-p - 1.0)
        }
    };
    let mut head = integrate(f, 0.0, 2.0 * PI, 1e-16, 1e-14).value;
    for k in 1..PERIODS {
        let a = 2.0 * PI * k as f64;
        head += integrate(f, a, a + 2.0 * PI, 1e-18, 1e-14).value;
    }
    let t = 2.0 * PI * PERIODS as f64;
    // at T = 2πK: ∫_T^∞ cos(u) u^{-ν} du = ν T^{-ν-1} - ν(ν+1)(ν+2) T^{-ν-3} + ...
    let nu = p + 1.0;
    let cos_tail = nu * t.powf(-nu - 1.0) - nu * (nu + 1.0) * (nu + 2.0) * t.powf(-nu - 3.0);
    head + t.powf(-p) / p - cos_tail
}

/// `c_p = (∫_ℝ (1 - cos u) |u|^{-p-1} du)^{-1}`.
pub fn c_p(p: f64) -> Result<f64> {
    check_order(p)?;
    Ok(1.0 / (2.0 * half_line_one_minus_cos(p)))
}

/// Closed form `Γ(p+1) sin(πp/2) / π` of `c_p`.
pub fn c_p_closed_form(p: f64) -> f64 {
    statrs::function::gamma::gamma(p + 1.0) * (0.5 * PI * p).sin() / PI
}

/// Frequency beyond which `Re Φ` is replaced by its running mean.
const XI_MAX: f64 = 1e4;
/// Decades scanned toward the origin before giving up.
const MAX_DECADES: usize = 60;

/// `∫_0^∞ h(ξ) ξ^{-p-1} dξ` for `h = 1 - Re Φ`, or `+inf`.
///
/// `re_phi` must be `Re Φ`; `h` is passed separately so callers with the
/// exponent at hand can avoid cancellation near `ξ = 0`.
fn moment_integral<H, R>(h: H, re_phi: R, p: f64) -> (f64, f64)
where
    H: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    // (0, 1]: decade by decade in u = ln ξ
    let mut head = 0.0;
    let mut err = 0.0;
    let mut last = f64::INFINITY;
    let mut rising = 0;
    let mut prev_ratio = f64::NAN;
    for k in 0..MAX_DECADES {
        let (a, b) = (-((k + 1) as f64) * LN_10, -(k as f64) * LN_10);
        let q = integrate(|u: f64| h(u.exp()) * (-p * u).exp(), a, b, 1e-300, 1e-12);
        err += q.error;
        let c = q.value;
        head += c;
        if c >= last {
            rising += 1;
            if rising >= 3 {
                return (f64::INFINITY, f64::INFINITY);
            }
        } else {
            rising = 0;
        }
        if c <= 0.0 {
            break;
        }
        let ratio = c / last;
        last = c;
        if ratio < 1.0 && (ratio - prev_ratio).abs() < 1e-3 * ratio {
            // geometric decay: the remaining series is c r/(1-r)
            let rest = c * ratio / (1.0 - ratio);
            if rest < 1e-8 * head {
                head += rest;
                err += 1e-2 * rest;
                break;
            }
        } else if c < 1e-15 * head {
            break;
        }
        prev_ratio = ratio;
        if k + 1 == MAX_DECADES {
            return (f64::INFINITY, f64::INFINITY);
        }
    }
    // [1, ∞): 1/p - ∫ Re Φ ξ^{-p-1}
    let mut osc = 0.0;
    let mut last_mean = 0.0;
    let panels = (XI_MAX - 1.0) as usize;
    let mut mean_acc = 0.0;
    let mut f = |x: f64| re_phi(x) * x.powf(-p - 1.0);
    let mut g = |x: f64| re_phi(x);
    for i in 0..panels {
        let a = 1.0 + i as f64;
        let (v, e) = gk15(&mut f, a, a + 1.0);
        osc += v;
        err += e;
        if a >= XI_MAX / 2.0 {
            mean_acc += gk15(&mut g, a, a + 1.0).0;
            last_mean = mean_acc / (a + 1.0 - XI_MAX / 2.0);
        }
    }
    let tail = last_mean * XI_MAX.powf(-p) / p;
    err += (tail * 0.1).abs();
    (head + 1.0 / p - osc - tail, err)
}

/// `E|X|^p = c_p ∫ (1 - Re Φ(ξ)) |ξ|^{-p-1} dξ` for a characteristic
/// function `Φ`.
pub fn fractional_moment_cf<F>(phi: F, p: f64) -> Result<MomentEstimate>
where
    F: Fn(f64) -> Complex64,
{
    check_order(p)?;
    let at0 = phi(0.0);
    if (at0 - 1.0).norm() > 1e-12 {
        return Err(Error::InvalidCharacteristicFunction(format!("Φ(0) = {at0}, expected 1")));
    }
    for xi in [0.1, 0.7, 1.9, 13.0] {
        let (a, b) = (phi(xi), phi(-xi));
        if (a - b.conj()).norm() > 1e-9 * a.norm().max(1.0) {
            return Err(Error::InvalidCharacteristicFunction(format!(
                "Φ is not hermitian at ξ = {xi}"
            )));
        }
    }
    let (v, e) = moment_integral(|x| 1.0 - phi(x).re, |x| phi(x).re, p);
    Ok(finish(v, e, p))
}

/// As [`fractional_moment_cf`] for `Φ = exp(g)`, using `1 - Re Φ = -Re expm1(g)`.
pub fn fractional_moment_log_cf<G>(log_phi: G, p: f64) -> Result<MomentEstimate>
where
    G: Fn(f64) -> Complex64,
{
    check_order(p)?;
    let (v, e) = moment_integral(|x| -cexpm1(log_phi(x)).re, |x| log_phi(x).exp().re, p);
    Ok(finish(v, e, p))
}

fn finish(integral: f64, err: f64, p: f64) -> MomentEstimate {
    let c = c_p_closed_form(p);
    // both half-lines: the integrand is even
    let value = if integral.is_finite() { (2.0 * c * integral).max(0.0) } else { f64::INFINITY };
    MomentEstimate {
        p,
        value,
        method: MomentMethod::CfIntegral,
        error: 2.0 * c * err,
    }
}

/// `E|⟨w, φ⟩|^p` from the characteristic functional.
pub fn pairing_moment_cf(model: &LevyModel, phi: &TestFunction, p: f64) -> Result<MomentEstimate> {
    let vol = phi.spec.cell_volume();
    let nonzero: Vec<f64> = phi.values.iter().copied().filter(|v| *v != 0.0).collect();
    if nonzero.is_empty() {
        check_order(p)?;
        return Ok(MomentEstimate {
            p,
            value: 0.0,
            method: MomentMethod::CfIntegral,
            error: 0.0,
        });
    }
    model.validate()?;
    fractional_moment_log_cf(
        |xi| {
            nonzero
                .iter()
                .map(|v| model.exponent(xi * v).unwrap_or(Complex64::new(f64::NAN, 0.0)))
                .sum::<Complex64>()
                * vol
        },
        p,
    )
}

/// `E[⟨w, φ⟩²] = σ² ‖φ‖₂² + (m ∫φ)²` when the law has finite variance
/// `σ²` and mean `m` per unit volume.
pub fn second_moment(model: &LevyModel, phi: &TestFunction) -> Option<f64> {
    let (var, mean) = model.variance_and_mean()?;
    let vol = phi.spec.cell_volume();
    let l2 = phi.values.iter().map(|v| v * v).sum::<f64>() * vol;
    let int = phi.values.iter().sum::<f64>() * vol;
    Some(var * l2 + (mean * int).powi(2))
}

/// Bootstrap resamples used for the Monte Carlo standard error.
const BOOTSTRAP: usize = 200;

/// Monte Carlo estimate of `E|⟨w, φ⟩|^p` from `n` independent fields.
///
/// Only cells where `φ ≠ 0` are drawn; the others do not affect the pairing.
pub fn fractional_moment_mc(
    model: &LevyModel,
    phi: &TestFunction,
    p: f64,
    n: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if !(p > 0.0) || n < 2 {
        return Err(invalid("need p > 0 and at least two draws"));
    }
    let sampler = CellSampler::new(model)?;
    let vol = phi.spec.cell_volume();
    let support: Vec<f64> = phi.values.iter().copied().filter(|v| *v != 0.0).collect();
    let factory = StreamFactory::new(seed);
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let mut rng = factory.stream(i as u64);
            let x: f64 = support.iter().map(|w| w * sampler.sample(vol, &mut rng)).sum();
            x.abs().powf(p)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let boot = StreamFactory::new(derive_seed(seed, 0xB007));
    let means: Vec<f64> = (0..BOOTSTRAP)
        .into_par_iter()
        .map(|b| {
            let mut rng = boot.stream(b as u64);
            (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    let bm = means.iter().sum::<f64>() / BOOTSTRAP as f64;
    let se = (means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BOOTSTRAP - 1) as f64).sqrt();
    Ok(MomentEstimate {
        p,
        value: mean,
        method: MomentMethod::MonteCarlo,
        error: se,
    })
}

/// `I(x) = ∫_ℝ (1 - e^{-|xξ|^α}) |ξ|^{-p-1} dξ`, integrated in `u = ln ξ`
/// with analytic tails.
fn stable_scaling_integral(alpha: f64, p: f64, x: f64) -> f64 {
    let ax = x.abs();
    let la = ax.ln();
    // |x|^α e^{αu} = s  <=>  u = (ln s)/α - ln|x|
    let u_of = |s: f64| s.ln() / alpha - la;
    let (a, b) = (u_of(1e-6), u_of(50.0));
    let body = integrate(
        |u: f64| -(-(alpha * (u + la)).exp()).exp_m1() * (-p * u).exp(),
        a,
        b,
        1e-300,
        1e-14,
    )
    .value;
    // below a: 1 - e^{-s} = s - s²/2 + s³/6 with s = |x|^α e^{αu}
    let lower = |k: f64, c: f64| c * (k * alpha * la).exp() * ((k * alpha - p) * a).exp() / (k * alpha - p);
    let low = lower(1.0, 1.0) - lower(2.0, 0.5) + lower(3.0, 1.0 / 6.0);
    // above b: 1 - e^{-s} = 1 up to e^{-50}
    let high = (-p * b).exp() / p;
    2.0 * (body + low + high)
}

/// Both sides of `∫ (1 - e^{-|xξ|^α}) |ξ|^{-p-1} dξ = c_{p,α} |x|^p`:
/// the left by quadrature, the right with `c_{p,α} = 2Γ(1 - p/α)/p`.
pub fn lemma3_scaling(alpha: f64, p: f64, x: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 2.0) || !(p > 0.0) {
        return Err(invalid("need alpha in (0, 2] and p > 0"));
    }
    if p >= alpha {
        return Err(Error::Divergent(format!("integral diverges at 0 for p = {p} >= alpha = {alpha}")));
    }
    if x == 0.0 {
        return Ok((0.0, 0.0));
    }
    let c = 2.0 * statrs::function::gamma::gamma(1.0 - p / alpha) / p;
    Ok((stable_scaling_integral(alpha, p, x), c * x.abs().powf(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::GridSpec;

    #[test]
    fn c_p_values() {
        assert!((c_p(1.0).unwrap() - 1.0 / PI).abs() < 1e-9);
        assert!((c_p(0.5).unwrap() - 0.199_471).abs() < 1e-6);
        for p in [0.3, 1.0, 1.7] {
            let q = c_p(p).unwrap() * 2.0 * half_line_one_minus_cos(p);
            assert!((q - 1.0).abs() < 1e-12);
            assert!((c_p(p).unwrap() / c_p_closed_form(p) - 1.0).abs() < 1e-8, "{p}");
        }
        assert!(c_p(2.0).is_err() && c_p(0.0).is_err());
    }

    #[test]
    fn gaussian_and_cauchy_moments() {
        let g = fractional_moment_cf(|x| Complex64::new((-0.5 * x * x).exp(), 0.0), 1.0).unwrap();
        assert!((g.value - (2.0 / PI).sqrt()).abs() < 1e-7, "{g:?}");
        let c = fractional_moment_cf(|x: f64| Complex64::new((-x.abs()).exp(), 0.0), 0.5).unwrap();
        assert!((c.value - 2f64.sqrt()).abs() < 1e-6, "{c:?}");
        let z = fractional_moment_cf(|_| Complex64::new(1.0, 0.0), 1.0).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn divergent_moment_is_infinite() {
        let c = fractional_moment_cf(|x: f64| Complex64::new((-x.abs()).exp(), 0.0), 1.2).unwrap();
        assert!(c.value.is_infinite());
        assert!(fractional_moment_cf(|_| Complex64::new(0.5, 0.0), 1.0).is_err());
    }

    #[test]
    fn lattice_law_tail_uses_mean() {
        // Poisson(1): E|X|^0.5 = Σ e^{-1} k^{0.5} / k!
        let exact: f64 = (1..40)
            .map(|k| (-1.0f64).exp() * (k as f64).sqrt() / statrs::function::gamma::gamma(k as f64 + 1.0))
            .sum();
        let m = LevyModel::Poisson { lambda: 1.0 };
        let est = fractional_moment_log_cf(|x| m.exponent(x).unwrap(), 0.5).unwrap();
        assert!((est.value - exact).abs() < 2e-3, "{} vs {exact}", est.value);
    }

    #[test]
    fn lemma3() {
        let (l, r) = lemma3_scaling(1.0, 0.5, 2.0).unwrap();
        assert!((l / r - 1.0).abs() < 1e-8);
        let (l, _) = lemma3_scaling(1.0, 0.5, 1.0).unwrap();
        assert!((l - 2.0 * PI.sqrt() / 0.5).abs() < 1e-8);
        assert_eq!(lemma3_scaling(1.0, 0.5, 0.0).unwrap(), (0.0, 0.0));
        let a = lemma3_scaling(1.5, 0.7, -3.0).unwrap();
        let b = lemma3_scaling(1.5, 0.7, 3.0).unwrap();
        assert_eq!(a, b);
        assert!(matches!(lemma3_scaling(1.0, 1.0, 1.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn mc_matches_gaussian_absolute_moment() {
        let spec = GridSpec::new(1, 0, 0.5).unwrap();
        let phi = TestFunction::from_fn(spec, |_| 1.0);
        let m = fractional_moment_mc(&LevyModel::Gaussian { sigma2: 1.0 }, &phi, 1.0, 200_000, 5).unwrap();
        assert!((m.value - (2.0 / PI).sqrt()).abs() < 4.0 * m.error, "{m:?}");
        let z = fractional_moment_mc(&LevyModel::Laplace, &TestFunction::zeros(spec), 1.0, 100, 1).unwrap();
        assert_eq!(z.value, 0.0);
        assert_eq!(second_moment(&LevyModel::Laplace, &phi), Some(2.0));
    }
}
