use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use super::measure::{LevyMeasure, Side};
use crate::error::{invalid, Error, Result};
use crate::numeric::{cexpm1, gk15, integrate, sinc_m1};

/// Law of the jumps of a compound-Poisson noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpLaw {
    /// Discrete atoms with probabilities `weights` (normalized on use).
    Atoms { values: Vec<f64>, weights: Vec<f64> },
    Gaussian { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
    /// Symmetric Pareto: density `(α/2) s^α |x|^(-α-1)` on `|x| >= s`.
    Pareto { alpha: f64, scale: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::Atoms { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(invalid("atoms need matching, non-empty values and weights"));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
                    return Err(invalid("atom weights must be >= 0 with positive total"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("atom locations must be finite"));
                }
            }
            JumpLaw::Gaussian { mean, std } => {
                if !mean.is_finite() || !(*std >= 0.0 && std.is_finite()) {
                    return Err(invalid("gaussian jumps need finite mean and std >= 0"));
                }
            }
            JumpLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && high > low) {
                    return Err(invalid("uniform jumps need low < high"));
                }
            }
            JumpLaw::Pareto { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha < 2.0) || !(*scale > 0.0 && scale.is_finite()) {
                    return Err(invalid("pareto jumps need alpha in (0, 2) and scale > 0"));
                }
            }
        }
        Ok(())
    }

    /// `P̂_jump(ξ) - 1`, evaluated without cancellation near `ξ = 0`.
    pub fn cf_minus_one(&self, xi: f64) -> Complex64 {
        match self {
            JumpLaw::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                values
                    .iter()
                    .zip(weights)
                    .map(|(a, w)| cexpm1(Complex64::new(0.0, a * xi)) * (w / total))
                    .sum()
            }
            JumpLaw::Gaussian { mean, std } => {
                cexpm1(Complex64::new(-0.5 * std * std * xi * xi, mean * xi))
            }
            JumpLaw::Uniform { low, high } => {
                let c = 0.5 * (low + high);
                let h = 0.5 * (high - low);
                let s1 = sinc_m1(h * xi);
                cexpm1(Complex64::new(0.0, c * xi)) * (1.0 + s1) + s1
            }
            JumpLaw::Pareto { alpha, scale } => {
                let t = (xi * scale).abs();
                Complex64::new(-alpha * t.powf(*alpha) * pareto_tail(*alpha, t), 0.0)
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            JumpLaw::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                Some(values.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / total)
            }
            JumpLaw::Gaussian { mean, .. } => Some(*mean),
            JumpLaw::Uniform { low, high } => Some(0.5 * (low + high)),
            JumpLaw::Pareto { alpha, .. } => (*alpha > 1.0).then_some(0.0),
        }
    }

    pub fn second_moment(&self) -> Option<f64> {
        match self {
            JumpLaw::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                Some(values.iter().zip(weights).map(|(a, w)| a * a * w).sum::<f64>() / total)
            }
            JumpLaw::Gaussian { mean, std } => Some(mean * mean + std * std),
            JumpLaw::Uniform { low, high } => {
                Some((high * high + high * low + low * low) / 3.0)
            }
            JumpLaw::Pareto { .. } => None,
        }
    }
}

/// `∫_0^∞ (1 - cos u) u^(-α-1) du = π / (2 Γ(α+1) sin(πα/2))` for `α ∈ (0, 2)`.
pub fn one_minus_cos_integral(alpha: f64) -> f64 {
    PI / (2.0 * gamma(alpha + 1.0) * (0.5 * PI * alpha).sin())
}

/// `G(t) = ∫_t^∞ (1 - cos u) u^(-α-1) du`.
fn pareto_tail(alpha: f64, t: f64) -> f64 {
    if t == 0.0 {
        return one_minus_cos_integral(alpha);
    }
    if t <= 1.0 {
        // ∫_0^t (1 - cos u) u^(-α-1) du by its alternating power series
        let mut head = 0.0;
        let mut fact = 1.0;
        let t2 = t * t;
        let mut tp = t2;
        for k in 1..30 {
            let n = 2 * k;
            fact *= ((n - 1) * n) as f64;
            let term = tp / (fact * (n as f64 - alpha));
            head += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 * head.abs() {
                break;
            }
            tp *= t2;
        }
        one_minus_cos_integral(alpha) - head * t.powf(-alpha)
    } else if t <= 40.0 {
        let head = integrate(
            |u: f64| {
                if u == 0.0 {
                    0.0
                } else {
                    2.0 * (0.5 * u).sin().powi(2) * u.powf(-alpha - 1.0)
                }
            },
            0.0,
            t,
            1e-15,
            1e-13,
        )
        .value;
        one_minus_cos_integral(alpha) - head
    } else {
        t.powf(-alpha) / alpha - cos_tail(alpha + 1.0, t, 0)
    }
}

/// Asymptotic expansion of `∫_t^∞ cos(u) u^(-ν) du` for large `t`.
fn cos_tail(nu: f64, t: f64, depth: usize) -> f64 {
    if depth > 10 {
        return 0.0;
    }
    -t.sin() * t.powf(-nu) + nu * sin_tail(nu + 1.0, t, depth + 1)
}

fn sin_tail(mu: f64, t: f64, depth: usize) -> f64 {
    if depth > 10 {
        return 0.0;
    }
    t.cos() * t.powf(-mu) - mu * cos_tail(mu + 1.0, t, depth + 1)
}

/// A Lévy white-noise law, identified by its Lévy exponent `f`.
///
/// Serialized as `{ "family": ..., "params": { ... } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevyModel {
    /// `f(ξ) = -σ² ξ² / 2`
    Gaussian { sigma2: f64 },
    /// `f(ξ) = i μ ξ`
    Drift { mu: f64 },
    /// `f(ξ) = -|ξ|^α`
    #[serde(rename = "sas")]
    SymmetricStable { alpha: f64 },
    /// `f(ξ) = -|ξ|^α - |ξ|^β`
    #[serde(rename = "sum-sas")]
    SumStable { alpha: f64, beta: f64 },
    /// `f(ξ) = -log(1 + ξ²)`
    Laplace,
    /// `f(ξ) = -c log(1 + ξ²)`
    SymGamma { c: f64 },
    /// `f(ξ) = λ (e^{iξ} - 1)`
    Poisson { lambda: f64 },
    /// `f(ξ) = λ (P̂_jump(ξ) - 1)`
    CompoundPoisson { lambda: f64, jump: JumpLaw },
    /// Inverse Gaussian with mean 1 and shape 1: `f(ξ) = 1 - sqrt(1 - 2iξ)`.
    InverseGaussian,
    /// Lévy–Khintchine triplet `(drift, gaussian, measure)` with truncation
    /// `1_{|x| <= 1}` in the compensator.
    CustomTriplet {
        drift: f64,
        gaussian: f64,
        measure: LevyMeasure,
    },
}

impl LevyModel {
    pub fn validate(&self) -> Result<()> {
        let open_stable = |a: f64| a > 0.0 && a < 2.0;
        match self {
            LevyModel::Gaussian { sigma2 } if !(*sigma2 > 0.0 && sigma2.is_finite()) => {
                Err(invalid("gaussian needs sigma2 > 0"))
            }
            LevyModel::Drift { mu } if !mu.is_finite() => Err(invalid("drift must be finite")),
            LevyModel::SymmetricStable { alpha } if !open_stable(*alpha) => {
                Err(invalid("sas needs alpha in (0, 2)"))
            }
            LevyModel::SumStable { alpha, beta } if !(open_stable(*alpha) && open_stable(*beta)) => {
                Err(invalid("sum-sas needs alpha, beta in (0, 2)"))
            }
            LevyModel::SymGamma { c } if !(*c > 0.0 && c.is_finite()) => {
                Err(invalid("sym-gamma needs c > 0"))
            }
            LevyModel::Poisson { lambda } if !(*lambda > 0.0 && lambda.is_finite()) => {
                Err(invalid("poisson needs lambda > 0"))
            }
            LevyModel::CompoundPoisson { lambda, jump } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("compound-poisson needs lambda > 0"));
                }
                jump.validate()
            }
            LevyModel::CustomTriplet {
                drift,
                gaussian,
                measure,
            } => {
                if !drift.is_finite() || !(*gaussian >= 0.0 && gaussian.is_finite()) {
                    return Err(invalid("triplet needs finite drift and gaussian >= 0"));
                }
                measure.validate()
            }
            _ => Ok(()),
        }
    }

    /// Short identifier used for provenance tags.
    pub fn tag(&self) -> String {
        match self {
            LevyModel::Gaussian { sigma2 } => format!("gaussian(sigma2={sigma2})"),
            LevyModel::Drift { mu } => format!("drift(mu={mu})"),
            LevyModel::SymmetricStable { alpha } => format!("sas(alpha={alpha})"),
            LevyModel::SumStable { alpha, beta } => format!("sum-sas(alpha={alpha},beta={beta})"),
            LevyModel::Laplace => "laplace".into(),
            LevyModel::SymGamma { c } => format!("sym-gamma(c={c})"),
            LevyModel::Poisson { lambda } => format!("poisson(lambda={lambda})"),
            LevyModel::CompoundPoisson { lambda, .. } => format!("compound-poisson(lambda={lambda})"),
            LevyModel::InverseGaussian => "inverse-gaussian".into(),
            LevyModel::CustomTriplet { .. } => "custom-triplet".into(),
        }
    }

    /// Whether `f` is real-valued (the law is symmetric).
    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyModel::Gaussian { .. }
            | LevyModel::SymmetricStable { .. }
            | LevyModel::SumStable { .. }
            | LevyModel::Laplace
            | LevyModel::SymGamma { .. } => true,
            LevyModel::Drift { mu } => *mu == 0.0,
            LevyModel::CustomTriplet { drift, measure, .. } => {
                *drift == 0.0 && measure.is_symmetric()
            }
            LevyModel::CompoundPoisson { jump, .. } => match jump {
                JumpLaw::Gaussian { mean, .. } => *mean == 0.0,
                JumpLaw::Uniform { low, high } => low == &-high,
                JumpLaw::Pareto { .. } => true,
                JumpLaw::Atoms { .. } => false,
            },
            LevyModel::Poisson { .. } | LevyModel::InverseGaussian => false,
        }
    }

    /// `(variance, mean)` of the unit-volume increment when finite.
    pub fn variance_and_mean(&self) -> Option<(f64, f64)> {
        match self {
            LevyModel::Gaussian { sigma2 } => Some((*sigma2, 0.0)),
            LevyModel::Drift { mu } => Some((0.0, *mu)),
            LevyModel::Laplace => Some((2.0, 0.0)),
            LevyModel::SymGamma { c } => Some((2.0 * c, 0.0)),
            LevyModel::Poisson { lambda } => Some((*lambda, *lambda)),
            LevyModel::CompoundPoisson { lambda, jump } => {
                let m2 = jump.second_moment()?;
                let m1 = jump.mean()?;
                Some((lambda * m2, lambda * m1))
            }
            LevyModel::InverseGaussian => Some((1.0, 1.0)),
            _ => None,
        }
    }

    /// Evaluates the Lévy exponent `f(ξ)`.
    pub fn exponent(&self, xi: f64) -> Result<Complex64> {
        if xi == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let real = |v: f64| Ok(Complex64::new(v, 0.0));
        match self {
            LevyModel::Gaussian { sigma2 } => real(-0.5 * sigma2 * xi * xi),
            LevyModel::Drift { mu } => Ok(Complex64::new(0.0, mu * xi)),
            LevyModel::SymmetricStable { alpha } => real(-xi.abs().powf(*alpha)),
            LevyModel::SumStable { alpha, beta } => {
                real(-xi.abs().powf(*alpha) - xi.abs().powf(*beta))
            }
            LevyModel::Laplace => real(-(xi * xi).ln_1p()),
            LevyModel::SymGamma { c } => real(-c * (xi * xi).ln_1p()),
            LevyModel::Poisson { lambda } => Ok(cexpm1(Complex64::new(0.0, xi)) * *lambda),
            LevyModel::CompoundPoisson { lambda, jump } => Ok(jump.cf_minus_one(xi) * *lambda),
            LevyModel::InverseGaussian => {
                // 1 - sqrt(1 - z) = z / (1 + sqrt(1 - z)), z = 2iξ
                let z = Complex64::new(0.0, 2.0 * xi);
                Ok(z / (1.0 + (1.0 - z).sqrt()))
            }
            LevyModel::CustomTriplet {
                drift,
                gaussian,
                measure,
            } => {
                let jumps = triplet_jump_part(measure, xi)?;
                Ok(Complex64::new(-0.5 * gaussian * xi * xi, drift * xi) + jumps)
            }
        }
    }
}

/// `eval_exponent`: the Lévy exponent of `model` at `ξ`.
pub fn eval_exponent(model: &LevyModel, xi: f64) -> Result<Complex64> {
    model.exponent(xi)
}

/// Characteristic functional of the noise at `ξ φ`, with `φ` given by its
/// samples on cells of volume `volume`: `exp(Σ_i f(ξ φ_i) volume)`.
pub fn char_functional(model: &LevyModel, phi: &[f64], volume: f64, xi: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in phi {
        if v != 0.0 {
            acc += model.exponent(xi * v)?;
        }
    }
    Ok((acc * volume).exp())
}

/// Number of oscillation periods integrated panel by panel before giving up.
const MAX_PERIODS: usize = 200_000;

/// `∫ (e^{iξx} - 1 - iξx 1_{|x|<=1}) ν(dx)`, both half-lines.
fn triplet_jump_part(measure: &LevyMeasure, xi: f64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    let sides: &[(Side, f64)] = if measure.is_symmetric() {
        &[(Side::Positive, 2.0)]
    } else {
        &[(Side::Positive, 1.0), (Side::Negative, -1.0)]
    };
    for &(side, sign) in sides {
        let part = half_line_jump_part(measure, side, xi.abs())?;
        if measure.is_symmetric() {
            total += Complex64::new(2.0 * part.re, 0.0);
        } else {
            // side −: x -> -x flips the sign of the odd (imaginary) part
            total += Complex64::new(part.re, sign * part.im);
        }
    }
    if xi < 0.0 {
        total = total.conj();
    }
    Ok(total)
}

/// `∫_0^∞ (e^{iξx} - 1 - iξx 1_{x<=1}) ν(±x) dx` for `ξ > 0`.
fn half_line_jump_part(measure: &LevyMeasure, side: Side, xi: f64) -> Result<Complex64> {
    let eps = measure.inner_cutoff;
    let big = measure.outer_cutoff;
    let dens = |x: f64| measure.log_density_at_log(side, x.ln()).exp();

    // small jumps: e^{iξx} - 1 - iξx ≈ -ξ²x²/2 - iξ³x³/6
    let small_sq = measure.side_integral(side, 2.0, 1e-300, eps);
    let small_cube = measure.side_integral(side, 3.0, 1e-300, eps);
    let mut re = -0.5 * xi * xi * small_sq;
    let mut im = -xi.powi(3) * small_cube / 6.0;
    // large jumps beyond the outer cutoff: cos averages out, sin is bounded by ν/ξ
    re -= measure.side_integral(side, 0.0, big, f64::INFINITY.min(1e300));

    // non-oscillatory scale of the result, used for relative tolerances
    let scale = (measure.side_integral(side, 0.0, (1.0 / xi).max(eps), big)
        + xi * xi * measure.side_integral(side, 2.0, eps, (1.0 / xi).clamp(eps, big)))
    .max(1e-300);
    let tol = 1e-11 * scale;

    let mut breaks: Vec<f64> = vec![eps];
    breaks.extend(measure.breakpoints().into_iter().filter(|&b| b > eps && b < big));
    let onset = (8.0 * PI / xi).clamp(eps, big);
    breaks.push(onset);
    breaks.push(big);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();

    let integrand_re = |x: f64| (-2.0 * (0.5 * xi * x).sin().powi(2)) * dens(x);
    let integrand_im = |x: f64| {
        let comp = if x <= 1.0 { xi * x } else { 0.0 };
        ((xi * x).sin() - comp) * dens(x)
    };

    // slowly varying region: integrate in log variables
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || a >= onset {
            continue;
        }
        let b = b.min(onset);
        let qr = integrate(|t: f64| integrand_re(t.exp()) * t.exp(), a.ln(), b.ln(), tol, 1e-12);
        let qi = integrate(|t: f64| integrand_im(t.exp()) * t.exp(), a.ln(), b.ln(), tol, 1e-12);
        if !qr.converged || !qi.converged {
            return Err(Error::NonConvergence {
                context: format!("jump integral on [{a:e}, {b:e}] at xi = {xi:e}"),
                partial: re + qr.value,
                error: qr.error + qi.error,
            });
        }
        re += qr.value;
        im += qi.value;
    }

    // oscillatory region: the `-1` and compensator parts are smooth, the
    // trigonometric parts are summed period by period
    if onset < big {
        let smooth_lo = onset;
        let breaks_hi: Vec<f64> = breaks.iter().copied().filter(|&b| b >= onset).collect();
        for w in breaks_hi.windows(2) {
            let q = integrate(|t: f64| -dens(t.exp()) * t.exp(), w[0].ln(), w[1].ln(), tol, 1e-12);
            re += q.value;
            let qc = integrate(
                |t: f64| {
                    let x = t.exp();
                    if x <= 1.0 {
                        -xi * x * dens(x) * x
                    } else {
                        0.0
                    }
                },
                w[0].ln(),
                w[1].ln(),
                tol,
                1e-12,
            );
            im += qc.value;
        }
        let period = 2.0 * PI / xi;
        let mut x = smooth_lo;
        let mut osc = Complex64::new(0.0, 0.0);
        let mut periods = 0usize;
        let bps = measure.breakpoints();
        loop {
            if x >= big {
                break;
            }
            // second mean value bound on the remaining oscillatory tail
            let bound = 4.0 * dens(x) / xi;
            if bound < tol && !bps.iter().any(|&b| b > x && b < big) {
                break;
            }
            let mut next = (x + period).min(big);
            if let Some(&b) = bps.iter().find(|&&b| b > x && b < next) {
                next = b;
            }
            let mut fc = |u: f64| (xi * u).cos() * dens(u);
            let mut fs = |u: f64| (xi * u).sin() * dens(u);
            let (vc, _) = gk15(&mut fc, x, next);
            let (vs, _) = gk15(&mut fs, x, next);
            osc += Complex64::new(vc, vs);
            x = next;
            periods += 1;
            if periods > MAX_PERIODS {
                return Err(Error::NonConvergence {
                    context: format!("oscillatory jump tail at xi = {xi:e}"),
                    partial: re + osc.re,
                    error: bound,
                });
            }
        }
        re += osc.re;
        im += osc.im;
    }
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idlaw::measure::MeasureTerm;

    #[test]
    fn catalog_values() {
        let g = LevyModel::Gaussian { sigma2: 1.0 };
        assert_eq!(g.exponent(2.0).unwrap(), Complex64::new(-2.0, 0.0));
        let c = LevyModel::SymmetricStable { alpha: 1.0 };
        assert_eq!(c.exponent(3.0).unwrap(), Complex64::new(-3.0, 0.0));
        let l = LevyModel::Laplace;
        assert!((l.exponent(1.0).unwrap().re + 2f64.ln()).abs() < 1e-15);
        let p = LevyModel::Poisson { lambda: 2.0 };
        let v = p.exponent(PI).unwrap();
        assert!((v.re + 4.0).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn inverse_gaussian_matches_direct_formula() {
        let ig = LevyModel::InverseGaussian;
        for xi in [0.3, 1.0, 7.0, -2.5] {
            let direct = 1.0 - (Complex64::new(1.0, -2.0 * xi)).sqrt();
            assert!((ig.exponent(xi).unwrap() - direct).norm() < 1e-13);
        }
        // second-order behaviour at the origin survives
        let v = ig.exponent(1e-9).unwrap();
        assert!((v.re + 0.5e-18).abs() < 1e-27);
    }

    #[test]
    fn pareto_cf_is_continuous_across_branches() {
        for alpha in [0.5, 1.0, 1.5] {
            for t in [1.0, 40.0] {
                let below = pareto_tail(alpha, t * (1.0 - 1e-9));
                let above = pareto_tail(alpha, t * (1.0 + 1e-9));
                assert!((below - above).abs() < 1e-7 * below.abs().max(1e-3), "{alpha} {t}");
            }
        }
    }

    #[test]
    fn pareto_cf_small_xi_scaling() {
        // P̂ - 1 ~ -α K_α |ξ|^α as ξ -> 0
        let law = JumpLaw::Pareto { alpha: 0.7, scale: 1.0 };
        let xi = 1e-6;
        let v = law.cf_minus_one(xi).re;
        let lead = -0.7 * one_minus_cos_integral(0.7) * xi.powf(0.7);
        assert!((v / lead - 1.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_jumps_cf() {
        let law = JumpLaw::Uniform { low: -1.0, high: 3.0 };
        let xi = 0.8;
        let direct = ((Complex64::new(0.0, 3.0 * xi)).exp() - (Complex64::new(0.0, -xi)).exp())
            / Complex64::new(0.0, 4.0 * xi)
            - 1.0;
        assert!((law.cf_minus_one(xi) - direct).norm() < 1e-14);
    }

    #[test]
    fn triplet_reproduces_stable_exponent() {
        // ν(x) = c |x|^(-1-α) with c = 1 / (2 K_α) gives f(ξ) = -|ξ|^α
        let alpha = 1.2;
        let c = 1.0 / (2.0 * one_minus_cos_integral(alpha));
        let mut nu = LevyMeasure::new(vec![MeasureTerm::power_band(c, 1.0 + alpha, 0.0, f64::INFINITY)]);
        nu.inner_cutoff = 1e-8;
        nu.outer_cutoff = 1e8;
        let model = LevyModel::CustomTriplet {
            drift: 0.0,
            gaussian: 0.0,
            measure: nu,
        };
        for xi in [0.5, 1.0, 3.0, -2.0] {
            let v = model.exponent(xi).unwrap();
            let want = -xi.abs().powf(alpha);
            assert!((v.re - want).abs() < 1e-6 * want.abs(), "xi={xi}: {v} vs {want}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_triplet_is_hermitian() {
        let nu = LevyMeasure::new(vec![MeasureTerm {
            side: Side::Positive,
            ..MeasureTerm::power_band(1.0, 1.5, 0.0, 5.0)
        }]);
        let model = LevyModel::CustomTriplet {
            drift: 0.3,
            gaussian: 0.2,
            measure: nu,
        };
        let a = model.exponent(1.7).unwrap();
        let b = model.exponent(-1.7).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        assert!(a.re <= 0.0);
    }

    #[test]
    fn char_functional_closed_forms() {
        // Gaussian with ‖φ‖₂ = 1 at ξ = 1
        let phi = vec![0.5; 4];
        let v = char_functional(&LevyModel::Gaussian { sigma2: 1.0 }, &phi, 1.0, 1.0).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15 && v.im == 0.0);
        // SαS(1.5) with φ = 1_[0,1] sampled on 8 cells, ξ = 2
        let phi = vec![1.0; 8];
        let m = LevyModel::SymmetricStable { alpha: 1.5 };
        let v = char_functional(&m, &phi, 0.125, 2.0).unwrap();
        assert!((v.re - (-(2f64.powf(1.5))).exp()).abs() < 1e-14);
        let zero = char_functional(&m, &[0.0; 5], 0.2, 3.0).unwrap();
        assert_eq!(zero, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn model_serializes_as_family_and_params() {
        let m = LevyModel::SymmetricStable { alpha: 1.5 };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"family":"sas","params":{"alpha":1.5}}"#);
        let back: LevyModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let l: LevyModel = serde_json::from_str(r#"{"family":"laplace"}"#).unwrap();
        assert_eq!(l, LevyModel::Laplace);
    }
}
