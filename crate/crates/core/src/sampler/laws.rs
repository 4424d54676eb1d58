//! Exact samplers for the catalog laws under volume scaling, and a
//! truncated compound-Poisson sampler for Lévy triplets.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, Poisson, StandardNormal};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::idlaw::{JumpLaw, LevyMeasure, LevyModel, Side};

/// Default jump threshold `ε` for triplet sampling.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 1e-3;

/// Largest jump size tabulated for triplet sampling.
const MAX_JUMP: f64 = 1e300;
/// Spacing of the tabulation grid in `ln |x|`.
const TABLE_STEP: f64 = 0.05;

/// Draws cell increments of a fixed model for arbitrary cell volumes.
#[derive(Debug, Clone)]
pub struct CellSampler {
    model: LevyModel,
    triplet: Option<TripletTable>,
}

/// What the triplet approximation leaves out or replaces.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationReport {
    /// Jump threshold `ε`.
    pub threshold: f64,
    /// `∫_{|x|<=ε} x² ν(dx)`, the variance per unit volume carried by the
    /// Gaussian replacing the small jumps.
    pub small_jump_variance: f64,
    /// Jump intensity per unit volume of `|x| > ε`.
    pub jump_rate: f64,
    /// Estimated mass of `ν` beyond the tabulated range.
    pub truncated_mass: f64,
}

#[derive(Debug, Clone)]
struct SideTable {
    /// Nodes in `ln x`.
    t: Vec<f64>,
    /// Log mass density in `ln x` at the nodes.
    log_g: Vec<f64>,
    /// Cumulative mass up to each node.
    cum: Vec<f64>,
}

impl SideTable {
    fn build(measure: &LevyMeasure, side: Side, eps: f64) -> (Self, f64) {
        let (a, b) = (eps.ln(), MAX_JUMP.ln());
        let mut t: Vec<f64> = Vec::new();
        let n = ((b - a) / TABLE_STEP).ceil() as usize;
        for k in 0..=n {
            t.push((a + k as f64 * TABLE_STEP).min(b));
        }
        // band edges become nodes so that no panel straddles a discontinuity
        for bp in measure.breakpoints() {
            let lt = bp.ln();
            if lt > a && lt < b {
                t.push(lt - 1e-12);
                t.push(lt + 1e-12);
            }
        }
        t.sort_by(|x, y| x.total_cmp(y));
        t.dedup();
        let log_g: Vec<f64> = t.iter().map(|&s| s + measure.log_density_at_log(side, s)).collect();
        let mut cum = vec![0.0; t.len()];
        for k in 1..t.len() {
            cum[k] = cum[k - 1] + panel_mass(log_g[k - 1], log_g[k], t[k] - t[k - 1]);
        }
        // remaining mass past the table, assuming the last slope persists
        let m = t.len();
        let slope = (log_g[m - 1] - log_g[m - 2]) / (t[m - 1] - t[m - 2]);
        let tail = if log_g[m - 1].is_finite() && slope < 0.0 {
            log_g[m - 1].exp() / -slope
        } else if log_g[m - 1].is_finite() {
            f64::INFINITY
        } else {
            0.0
        };
        (Self { t, log_g, cum }, tail)
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("non-empty table")
    }

    /// Jump size with cumulative mass `u` (`0 <= u < total`).
    fn invert(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= u).clamp(1, self.cum.len() - 1);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let (g0, g1) = (self.log_g[k - 1], self.log_g[k]);
        let du = u - self.cum[k - 1];
        let h = t1 - t0;
        let s = (g1 - g0) / h;
        let tau = if !s.is_finite() || s.abs() * h < 1e-9 {
            du / g0.exp()
        } else {
            (s * du * (-g0).exp()).ln_1p() / s
        };
        (t0 + tau.clamp(0.0, h)).exp()
    }
}

/// Mass of `exp(g)` over a panel of width `h` with log-linear `g`.
fn panel_mass(g0: f64, g1: f64, h: f64) -> f64 {
    if !g0.is_finite() || !g1.is_finite() {
        return 0.0;
    }
    let s = (g1 - g0) / h;
    if (s * h).abs() < 1e-9 {
        g0.exp() * h
    } else {
        g0.exp() * (s * h).exp_m1() / s
    }
}

#[derive(Debug, Clone)]
struct TripletTable {
    drift: f64,
    gaussian: f64,
    /// Positive and negative half-lines.
    sides: [SideTable; 2],
    /// Mean of the jumps in `(ε, 1]` per unit volume, removed by the compensator.
    compensator: f64,
    report: TruncationReport,
}

impl TripletTable {
    fn build(drift: f64, gaussian: f64, measure: &LevyMeasure, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid("jump threshold must lie in (0, 1]"));
        }
        let (pos, tail_p) = SideTable::build(measure, Side::Positive, eps);
        let (neg, tail_n) = SideTable::build(measure, Side::Negative, eps);
        let rate = pos.total() + neg.total();
        if !rate.is_finite() {
            return Err(invalid("Lévy measure has infinite mass outside the jump threshold"));
        }
        let small = measure.side_integral(Side::Positive, 2.0, 1e-300, eps)
            + measure.side_integral(Side::Negative, 2.0, 1e-300, eps);
        let compensator = measure.side_integral(Side::Positive, 1.0, eps, 1.0)
            - measure.side_integral(Side::Negative, 1.0, eps, 1.0);
        Ok(Self {
            drift,
            gaussian,
            sides: [pos, neg],
            compensator,
            report: TruncationReport {
                threshold: eps,
                small_jump_variance: small,
                jump_rate: rate,
                truncated_mass: tail_p + tail_n,
            },
        })
    }

    fn sample<R: Rng + ?Sized>(&self, volume: f64, rng: &mut R) -> f64 {
        let sd = ((self.gaussian + self.report.small_jump_variance) * volume).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        let mut x = (self.drift - self.compensator) * volume + sd * z;
        let rate = self.report.jump_rate * volume;
        if rate > 0.0 {
            let count = poisson(rate, rng);
            let pos_mass = self.sides[0].total();
            for _ in 0..count as u64 {
                let u: f64 = rng.random::<f64>() * self.report.jump_rate;
                x += if u < pos_mass {
                    self.sides[0].invert(u)
                } else {
                    -self.sides[1].invert(u - pos_mass)
                };
            }
        }
        x
    }
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng)
}

fn gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Standard symmetric α-stable draw (`E e^{iξX} = e^{-|ξ|^α}`) by the
/// Chambers–Mallows–Stuck construction.
pub fn standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let v = PI * (u - 0.5);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Inverse Gaussian draw with mean `m` and shape `lambda`
/// (Michael–Schucany–Haas).
pub fn inverse_gaussian<R: Rng + ?Sized>(m: f64, lambda: f64, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    let y = n * n;
    let my = m * y;
    let x1 = m - 2.0 * m * my / (my + (my * my + 4.0 * m * lambda * y).sqrt());
    let u: f64 = rng.random();
    if u <= m / (m + x1) {
        x1
    } else {
        m * m / x1
    }
}

impl JumpLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::Atoms { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    if u < *w {
                        return *v;
                    }
                    u -= w;
                }
                *values.last().expect("validated non-empty")
            }
            JumpLaw::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            JumpLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            JumpLaw::Pareto { alpha, scale } => {
                let u: f64 = Open01.sample(rng);
                let mag = scale * u.powf(-1.0 / alpha);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }
}

impl CellSampler {
    pub fn new(model: &LevyModel) -> Result<Self> {
        Self::with_threshold(model, DEFAULT_JUMP_THRESHOLD)
    }

    /// `eps` is the jump threshold used for triplets; ignored otherwise.
    pub fn with_threshold(model: &LevyModel, eps: f64) -> Result<Self> {
        model.validate()?;
        let triplet = match model {
            LevyModel::CustomTriplet {
                drift,
                gaussian,
                measure,
            } => Some(TripletTable::build(*drift, *gaussian, measure, eps)?),
            _ => None,
        };
        Ok(Self {
            model: model.clone(),
            triplet,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    /// Approximation details for triplet models.
    pub fn truncation(&self) -> Option<TruncationReport> {
        self.triplet.as_ref().map(|t| t.report)
    }

    /// One draw of the law with exponent `volume · f`.
    pub fn sample<R: Rng + ?Sized>(&self, volume: f64, rng: &mut R) -> f64 {
        if volume == 0.0 {
            return 0.0;
        }
        let v = volume;
        match &self.model {
            LevyModel::Gaussian { sigma2 } => {
                let z: f64 = rng.sample(StandardNormal);
                (sigma2 * v).sqrt() * z
            }
            LevyModel::Drift { mu } => mu * v,
            LevyModel::SymmetricStable { alpha } => v.powf(1.0 / alpha) * standard_sas(*alpha, rng),
            LevyModel::SumStable { alpha, beta } => {
                v.powf(1.0 / alpha) * standard_sas(*alpha, rng)
                    + v.powf(1.0 / beta) * standard_sas(*beta, rng)
            }
            LevyModel::Laplace => gamma(v, rng) - gamma(v, rng),
            LevyModel::SymGamma { c } => gamma(c * v, rng) - gamma(c * v, rng),
            LevyModel::Poisson { lambda } => poisson(lambda * v, rng),
            LevyModel::CompoundPoisson { lambda, jump } => {
                let n = poisson(lambda * v, rng) as u64;
                (0..n).map(|_| jump.sample(rng)).sum()
            }
            LevyModel::InverseGaussian => inverse_gaussian(v, v * v, rng),
            LevyModel::CustomTriplet { .. } => self
                .triplet
                .as_ref()
                .expect("table built for triplets")
                .sample(v, rng),
        }
    }
}

/// One draw of the increment over a cell of the given volume.
pub fn sample_cell<R: Rng + ?Sized>(model: &LevyModel, volume: f64, rng: &mut R) -> Result<f64> {
    if !(volume >= 0.0 && volume.is_finite()) {
        return Err(invalid("cell volume must be finite and >= 0"));
    }
    Ok(CellSampler::new(model)?.sample(volume, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idlaw::make_index_pair_measure;
    use crate::numeric::median;
    use crate::rng::StreamFactory;

    fn draws(model: &LevyModel, volume: f64, n: usize, seed: u64) -> Vec<f64> {
        let s = CellSampler::new(model).unwrap();
        let mut rng = StreamFactory::new(seed).stream(0);
        (0..n).map(|_| s.sample(volume, &mut rng)).collect()
    }

    fn mean_var(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn gaussian_variance_scales_with_volume() {
        let x = draws(&LevyModel::Gaussian { sigma2: 1.0 }, 4.0, 1_000_000, 1);
        let (_, v) = mean_var(&x);
        assert!((v / 4.0 - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn zero_volume_is_zero() {
        let mut rng = StreamFactory::new(0).stream(0);
        for m in [LevyModel::Laplace, LevyModel::InverseGaussian, LevyModel::Poisson { lambda: 3.0 }] {
            assert_eq!(sample_cell(&m, 0.0, &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn cauchy_scale_from_median() {
        let x = draws(&LevyModel::SymmetricStable { alpha: 1.0 }, 2.0, 200_000, 2);
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        assert!((median(&abs) - 2.0).abs() < 0.03, "{}", median(&abs));
    }

    #[test]
    fn stable_cf_matches() {
        // E cos(ξX) = exp(-v|ξ|^α)
        let alpha = 1.5;
        let v = 0.5;
        let x = draws(&LevyModel::SymmetricStable { alpha }, v, 400_000, 3);
        for xi in [0.5, 1.0, 2.0] {
            let emp = x.iter().map(|s| (xi * s).cos()).sum::<f64>() / x.len() as f64;
            let want = (-v * f64::powf(xi, alpha)).exp();
            assert!((emp - want).abs() < 5e-3, "xi={xi}: {emp} vs {want}");
        }
    }

    #[test]
    fn finite_variance_laws_have_right_moments() {
        let v = 0.25;
        for model in [
            LevyModel::Laplace,
            LevyModel::SymGamma { c: 3.0 },
            LevyModel::Poisson { lambda: 2.0 },
            LevyModel::InverseGaussian,
            LevyModel::CompoundPoisson {
                lambda: 2.0,
                jump: JumpLaw::Uniform { low: -1.0, high: 2.0 },
            },
        ] {
            let (var1, mean1) = model.variance_and_mean().unwrap();
            let x = draws(&model, v, 400_000, 4);
            let (m, var) = mean_var(&x);
            let se = (var1 * v / x.len() as f64).sqrt();
            assert!((m - mean1 * v).abs() < 5.0 * se, "{model:?}: mean {m}");
            assert!((var / (var1 * v) - 1.0).abs() < 0.03, "{model:?}: var {var}");
        }
    }

    #[test]
    fn poisson_cells_are_integers() {
        let x = draws(&LevyModel::Poisson { lambda: 1.0 }, 1.0, 1000, 5);
        assert!(x.iter().all(|v| v.fract() == 0.0 && *v >= 0.0));
    }

    #[test]
    fn inverse_gaussian_cf() {
        let model = LevyModel::InverseGaussian;
        let v = 0.3;
        let x = draws(&model, v, 400_000, 6);
        for xi in [0.7, 2.0] {
            let n = x.len() as f64;
            let re = x.iter().map(|s| (xi * s).cos()).sum::<f64>() / n;
            let im = x.iter().map(|s| (xi * s).sin()).sum::<f64>() / n;
            let want = (model.exponent(xi).unwrap() * v).exp();
            assert!((re - want.re).abs() < 5e-3 && (im - want.im).abs() < 5e-3);
        }
    }

    #[test]
    fn triplet_sampler_matches_exponent() {
        let nu = make_index_pair_measure(1.5, 0.8).unwrap();
        let model = LevyModel::CustomTriplet {
            drift: 0.0,
            gaussian: 0.0,
            measure: nu,
        };
        let s = CellSampler::new(&model).unwrap();
        let rep = s.truncation().unwrap();
        assert!(rep.truncated_mass < 1e-100);
        assert!(rep.small_jump_variance > 0.0);
        let v = 0.5;
        let mut rng = StreamFactory::new(7).stream(0);
        let x: Vec<f64> = (0..200_000).map(|_| s.sample(v, &mut rng)).collect();
        for xi in [0.5, 1.0, 3.0] {
            let emp = x.iter().map(|t| (xi * t).cos()).sum::<f64>() / x.len() as f64;
            let want = (model.exponent(xi).unwrap() * v).exp().re;
            assert!((emp - want).abs() < 8e-3, "xi={xi}: {emp} vs {want}");
        }
    }
}
