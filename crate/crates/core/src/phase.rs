//! Admissible `(τ, μ)` regions for `w ∈ B^{-τ}_{p,q}(ℝ^d; -μ)` and the
//! multi-resolution experiments that probe them.
//!
//! Smoothness and weight are stated as positive numbers: a noise lies in
//! the space with smoothness `-τ` and weight exponent `-μ`. Experiments
//! therefore evaluate [`besov_norm`] with `BesovParams { tau: -τ, mu: -μ }`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::besov::{besov_norm, BesovParams};
use crate::error::{invalid, Error, Result};
use crate::idlaw::{estimate_indices_with, IndexPair, IndexSettings, LevyModel};
use crate::numeric::{linear_fit, median};
use crate::rng::derive_seed;
use crate::sampler::{sample_field_with, CellSampler, GridSpec};
use crate::wavelet::{analyze, build_basis, dirac_pyramid, CoeffPyramid, WaveletBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Weighted,
    Local,
    /// `p = q = 2`.
    Sobolev,
    /// `p = q = ∞`.
    Holder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub d: usize,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub p: f64,
    pub kind: RegionKind,
    pub tau_threshold: f64,
    /// `None` for the local kind.
    pub mu_threshold: Option<f64>,
}

impl RegionSpec {
    /// Strict membership `τ > τ*` and `μ > μ*`.
    pub fn contains(&self, tau: f64, mu: f64) -> bool {
        tau > self.tau_threshold && self.mu_threshold.is_none_or(|m| mu > m)
    }
}

/// `τ* = d(1 - 1/max(p, β∞))`, `μ* = d / min(p, β0)`.
pub fn predicted_region(indices: IndexPair, d: usize, p: f64, kind: RegionKind) -> Result<RegionSpec> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let p = match kind {
        RegionKind::Sobolev => 2.0,
        RegionKind::Holder => f64::INFINITY,
        _ => p,
    };
    if !(p > 0.0) {
        return Err(invalid(format!("p = {p} must be positive")));
    }
    let d_f = d as f64;
    let tau_threshold = d_f * (1.0 - 1.0 / p.max(indices.beta_inf));
    let mu_threshold = match kind {
        RegionKind::Local => None,
        _ => {
            if indices.beta0 <= 0.0 {
                return Err(Error::NotTempered);
            }
            Some(d_f / p.min(indices.beta0))
        }
    };
    Ok(RegionSpec {
        d,
        p,
        kind,
        tau_threshold,
        mu_threshold,
    })
}

/// The `1/p` where `τ*` stops depending on `p`, if any.
pub fn kink_inv_p(indices: IndexPair) -> Option<f64> {
    (indices.beta_inf > 0.0).then(|| 1.0 / indices.beta_inf)
}

/// Vertices of the predicted boundary in figure coordinates
/// `(1/p, -τ*)` over `1/p ∈ [0, inv_p_max]`.
pub fn boundary_polyline(indices: IndexPair, d: usize, inv_p_max: f64) -> Vec<[f64; 2]> {
    // `+ 0.0` turns a negative zero into zero
    let neg_tau = |s: f64| -(d as f64) * (1.0 - 1.0 / (1.0 / s).max(indices.beta_inf)) + 0.0;
    let neg_tau0 = -(d as f64);
    let mut pts = vec![[0.0, neg_tau0]];
    if let Some(k) = kink_inv_p(indices) {
        if k > 0.0 && k < inv_p_max {
            pts.push([k, neg_tau(k)]);
        }
    }
    if inv_p_max > 0.0 {
        pts.push([inv_p_max, neg_tau(inv_p_max)]);
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Convergent,
    Divergent,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSettings {
    /// Grid resolution `J`.
    pub resolution: u32,
    /// Wavelet levels analysed below `J`.
    pub levels: usize,
    pub half_width: f64,
    pub ensemble: usize,
    /// Daubechies order.
    pub basis: usize,
    /// Margin is `margin_factor · q` (`margin_factor` when `q = ∞`).
    pub margin_factor: f64,
    pub seed: u64,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        ScalingSettings {
            resolution: 12,
            levels: 8,
            half_width: 4.0,
            ensemble: 100,
            basis: 3,
            margin_factor: 0.05,
            seed: 0,
        }
    }
}

impl ScalingSettings {
    fn validate(&self, d: usize) -> Result<GridSpec> {
        if self.ensemble == 0 {
            return Err(invalid("ensemble must be positive"));
        }
        if self.levels < 5 || self.levels > self.resolution as usize {
            return Err(invalid("need 5 <= levels <= resolution (4 fitted levels)"));
        }
        GridSpec::new(d, self.resolution, self.half_width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub params: BesovParams,
    /// Median over the ensemble of the log2-slope of the level terms
    /// `2^{j(τ - d/p + d/2)q} S_j`; `-inf` when every level vanishes.
    #[serde(with = "crate::serde_ext::ext_real")]
    pub fitted_slope: f64,
    pub classification: Classification,
    pub slope_margin: f64,
    pub ensemble_size: usize,
    /// Scales entering the fit.
    pub resolutions: Vec<i32>,
    /// Interquartile range of the per-realization slopes.
    pub slope_iqr: f64,
    /// Hill estimate of the tail index of the finest-level coefficients.
    pub tail_index: Option<f64>,
    /// `p` at or above the tail index: level sums do not average.
    pub heavy_tailed: bool,
}

/// Per-realization `log2 S_j` slopes, shared across `τ`.
struct Ensemble {
    slopes: Vec<f64>,
    resolutions: Vec<i32>,
    tail_index: Option<f64>,
}

fn hill_estimator(values: &mut [f64]) -> Option<f64> {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    let nonzero = values.iter().take_while(|v| **v > 0.0).count();
    let k = (nonzero as f64).sqrt() as usize;
    if k < 5 || k >= nonzero {
        return None;
    }
    let base = values[k].ln();
    let s: f64 = values[..k].iter().map(|v| v.ln() - base).sum();
    (s > 0.0).then(|| k as f64 / s)
}

fn run_ensemble(model: &LevyModel, d: usize, p: f64, q: f64, mu: f64, settings: &ScalingSettings) -> Result<Ensemble> {
    let spec = settings.validate(d)?;
    let basis = build_basis(settings.basis)?;
    let sampler = CellSampler::new(model)?;
    // τ only shifts the fitted slope, so any value works here
    let params = BesovParams::new(p, q, 0.0, -mu)?;
    let runs: Vec<(f64, Vec<i32>, Vec<f64>)> = (0..settings.ensemble)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let field = sample_field_with(&sampler, spec, derive_seed(settings.seed, r as u64))?;
            let pyr = analyze(&field, &basis, settings.levels)?;
            let report = besov_norm(&pyr, params)?;
            let finest = finest_band_magnitudes(&pyr);
            let slope = if report.per_level.iter().skip(1).all(|s| *s == 0.0) {
                f64::NEG_INFINITY
            } else {
                report.growth_slope
            };
            Ok((slope, report.scales[1..].to_vec(), finest))
        })
        .collect::<Result<_>>()?;
    let resolutions = runs.first().map(|r| r.1.clone()).unwrap_or_default();
    let mut pooled: Vec<f64> = runs.iter().flat_map(|r| r.2.iter().copied()).collect();
    Ok(Ensemble {
        slopes: runs.iter().map(|r| r.0).collect(),
        resolutions,
        tail_index: hill_estimator(&mut pooled),
    })
}

fn finest_band_magnitudes(pyr: &CoeffPyramid) -> Vec<f64> {
    let finest = pyr.scales().end - 1;
    pyr.bands_at(finest).flat_map(|b| b.coeffs.iter().map(|c| c.abs())).collect()
}

fn verdict(ens: &Ensemble, params: BesovParams, d: usize, settings: &ScalingSettings) -> ScalingVerdict {
    let (p, q) = (params.p, params.q);
    let expo = -params.tau - d as f64 / p + d as f64 / 2.0;
    let shift = if q.is_infinite() { expo } else { expo * q };
    let margin = settings.margin_factor * if q.is_infinite() { 1.0 } else { q };
    let mut slopes: Vec<f64> = ens.slopes.iter().map(|s| s + shift).collect();
    // a vanishing realization counts as arbitrarily convergent
    let fitted = median(&slopes.iter().map(|s| s.max(-1e300)).collect::<Vec<_>>());
    slopes.retain(|s| s.is_finite());
    slopes.sort_unstable_by(f64::total_cmp);
    let iqr = if slopes.len() >= 4 {
        slopes[3 * slopes.len() / 4] - slopes[slopes.len() / 4]
    } else {
        0.0
    };
    let classification = if fitted < -margin {
        Classification::Convergent
    } else if fitted > margin {
        Classification::Divergent
    } else {
        Classification::Marginal
    };
    ScalingVerdict {
        params,
        fitted_slope: if fitted <= -1e300 { f64::NEG_INFINITY } else { fitted },
        classification,
        slope_margin: margin,
        ensemble_size: settings.ensemble,
        resolutions: ens.resolutions.clone(),
        slope_iqr: iqr,
        tail_index: ens.tail_index,
        heavy_tailed: ens.tail_index.is_some_and(|a| p >= a),
    }
}

/// Classify `w ∈ B^{-τ}_{p,q}(-μ)` from the growth of the level terms,
/// with `params.tau = τ` and `params.mu = μ` given as positive numbers.
pub fn empirical_scaling(
    model: &LevyModel,
    d: usize,
    params: BesovParams,
    settings: &ScalingSettings,
) -> Result<ScalingVerdict> {
    Ok(empirical_scaling_many(model, d, params, &[params.tau], settings)?.remove(0))
}

/// [`empirical_scaling`] at several `τ`, sharing one ensemble.
pub fn empirical_scaling_many(
    model: &LevyModel,
    d: usize,
    params: BesovParams,
    taus: &[f64],
    settings: &ScalingSettings,
) -> Result<Vec<ScalingVerdict>> {
    params.validate()?;
    let ens = run_ensemble(model, d, params.p, params.q, params.mu, settings)?;
    Ok(taus
        .iter()
        .map(|&tau| verdict(&ens, BesovParams { tau, ..params }, d, settings))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracScaling {
    #[serde(with = "crate::serde_ext::ext_real")]
    pub p: f64,
    pub d: usize,
    pub threshold: f64,
    /// log2-slope of `S_j^{1/q}`.
    pub slope: f64,
    pub scales: Vec<i32>,
    pub per_level: Vec<f64>,
}

const DIRAC_POSITIONS: usize = 16;

/// Resolution used for the Dirac experiment in dimension `d`.
fn dirac_resolution(d: usize) -> u32 {
    match d {
        1 => 12,
        2 => 8,
        _ => 5,
    }
}

/// Smoothness threshold of a single Dirac mass: the `τ` where the level
/// terms of `B^{-τ}_{p,p}` stop decaying.
pub fn dirac_scaling(p: f64, d: usize, basis: &WaveletBasis) -> Result<DiracScaling> {
    if !(p > 0.0) {
        return Err(invalid("p must be positive"));
    }
    if !(1..=3).contains(&d) {
        return Err(invalid("dimension must be 1, 2 or 3"));
    }
    let spec = GridSpec::new(d, dirac_resolution(d), 0.5)?;
    // average over positions spread irregularly against the dyadic grid
    let n = spec.cells_per_axis();
    let mut scales = Vec::new();
    let mut per_level: Vec<f64> = Vec::new();
    for i in 0..DIRAC_POSITIONS {
        let idx: Vec<usize> = (0..d)
            .map(|k| {
                let frac = ((i * d + k) as f64 * 0.618_033_988_749_895 + 0.1).fract();
                ((frac * n as f64) as usize).min(n - 1)
            })
            .collect();
        let pyr = dirac_pyramid(spec, basis, spec.ravel(&idx), 1.0)?;
        let report = besov_norm(&pyr, BesovParams::new(p, p, 0.0, 0.0)?)?;
        if per_level.is_empty() {
            per_level = vec![0.0; report.per_level.len()];
            scales = report.scales;
        }
        for (acc, s) in per_level.iter_mut().zip(&report.per_level) {
            *acc += s / DIRAC_POSITIONS as f64;
        }
    }
    // coarse levels wrap around the unit torus; the finest sees the cell
    let (lo, hi) = (scales.len() / 3, scales.len() - 1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = scales[lo..hi]
        .iter()
        .zip(&per_level[lo..hi])
        .map(|(j, s)| (*j as f64, s.log2()))
        .unzip();
    let (raw, _) = linear_fit(&xs, &ys).ok_or_else(|| Error::NonConvergence {
        context: "dirac slope fit".into(),
        partial: f64::NAN,
        error: f64::NAN,
    })?;
    let slope = if p.is_infinite() { raw } else { raw / p };
    let d_f = d as f64;
    let d_over_p = if p.is_infinite() { 0.0 } else { d_f / p };
    Ok(DiracScaling {
        p,
        d,
        threshold: slope - d_over_p + d_f / 2.0,
        slope,
        scales,
        per_level,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub inv_p: f64,
    pub tau: f64,
    pub tau_threshold: f64,
    pub predicted: bool,
    #[serde(with = "crate::serde_ext::ext_real")]
    pub slope: f64,
    pub verdict: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub model: String,
    pub d: usize,
    pub kind: RegionKind,
    pub indices: IndexPair,
    pub rows: Vec<PhaseRow>,
}

impl PhaseTable {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "inv_p,tau,predicted,slope,verdict")?;
        for r in &self.rows {
            let v = match r.verdict {
                Classification::Convergent => "convergent",
                Classification::Divergent => "divergent",
                Classification::Marginal => "marginal",
            };
            writeln!(w, "{},{},{},{},{}", r.inv_p, r.tau, r.predicted, r.slope, v)?;
        }
        Ok(())
    }

    /// Fraction of rows whose verdict matches the prediction.
    pub fn agreement(&self) -> f64 {
        let hits = self
            .rows
            .iter()
            .filter(|r| {
                matches!(
                    (r.predicted, r.verdict),
                    (true, Classification::Convergent) | (false, Classification::Divergent)
                )
            })
            .count();
        hits as f64 / self.rows.len().max(1) as f64
    }

    /// Boundary polyline `(1/p, -τ*)` covering the table's `1/p` range.
    pub fn plot_data(&self) -> serde_json::Value {
        let kink = kink_inv_p(self.indices);
        let max = self
            .rows
            .iter()
            .map(|r| r.inv_p)
            .fold(1.0, f64::max)
            .max(kink.map_or(0.0, |k| k + 0.5));
        serde_json::json!({
            "model": self.model,
            "d": self.d,
            "abscissa": "1/p",
            "ordinate": "-tau",
            "kink": kink,
            "boundary": boundary_polyline(self.indices, self.d, max),
        })
    }
}

/// Weight used in experiments: one above the predicted weight threshold.
pub fn experiment_weight(indices: IndexPair, d: usize, p: f64) -> f64 {
    let m = p.min(indices.beta0);
    if m > 0.0 { d as f64 / m + 1.0 } else { 1.0 }
}

/// Predicted and empirical verdicts on the `(1/p, τ)` grid, `q = p`.
pub fn phase_diagram(
    model: &LevyModel,
    d: usize,
    p_grid: &[f64],
    tau_grid: &[f64],
    kind: RegionKind,
    settings: &ScalingSettings,
) -> Result<PhaseTable> {
    let indices = estimate_indices_with(model, &IndexSettings::default())?.value;
    phase_diagram_from_indices(model, indices, d, p_grid, tau_grid, kind, settings)
}

/// [`phase_diagram`] with known indices.
pub fn phase_diagram_from_indices(
    model: &LevyModel,
    indices: IndexPair,
    d: usize,
    p_grid: &[f64],
    tau_grid: &[f64],
    kind: RegionKind,
    settings: &ScalingSettings,
) -> Result<PhaseTable> {
    if p_grid.iter().chain(tau_grid).any(|v| v.is_nan()) || tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("grids must be finite"));
    }
    let mut rows = Vec::new();
    for &p in p_grid {
        let region = predicted_region(indices, d, p, kind)?;
        let mu = experiment_weight(indices, d, region.p);
        let params = BesovParams::new(region.p, region.p, 0.0, mu)?;
        let verdicts = empirical_scaling_many(model, d, params, tau_grid, settings)?;
        for (tau, v) in tau_grid.iter().zip(verdicts) {
            rows.push(PhaseRow {
                inv_p: 1.0 / region.p,
                tau: *tau,
                tau_threshold: region.tau_threshold,
                predicted: region.contains(*tau, mu),
                slope: v.fitted_slope,
                verdict: v.classification,
            });
        }
    }
    Ok(PhaseTable {
        model: model.tag(),
        d,
        kind,
        indices,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: f64, b: f64) -> IndexPair {
        IndexPair::new(a, b).unwrap()
    }

    #[test]
    fn region_examples() {
        let g = predicted_region(pair(2.0, 2.0), 1, 2.0, RegionKind::Weighted).unwrap();
        assert_eq!((g.tau_threshold, g.mu_threshold), (0.5, Some(0.5)));
        let c = predicted_region(pair(1.0, 1.0), 1, f64::INFINITY, RegionKind::Weighted).unwrap();
        assert_eq!((c.tau_threshold, c.mu_threshold), (1.0, Some(1.0)));
        let h = predicted_region(pair(1.0, 1.0), 1, 3.0, RegionKind::Holder).unwrap();
        assert_eq!(h.tau_threshold, 1.0);
        let cp = predicted_region(pair(0.0, 0.0), 1, 1.0, RegionKind::Local).unwrap();
        assert_eq!((cp.tau_threshold, cp.mu_threshold), (0.0, None));
        assert!(matches!(
            predicted_region(pair(0.0, 1.0), 1, 1.0, RegionKind::Weighted),
            Err(Error::NotTempered)
        ));
        let s = predicted_region(pair(0.7, 1.3), 2, 5.0, RegionKind::Sobolev).unwrap();
        assert_eq!((s.p, s.tau_threshold, s.mu_threshold), (2.0, 1.0, Some(2.0 / 0.7)));
    }

    #[test]
    fn polyline_kinks() {
        let cauchy = boundary_polyline(pair(1.0, 1.0), 1, 3.0);
        assert_eq!(cauchy, vec![[0.0, -1.0], [1.0, 0.0], [3.0, 0.0]]);
        let ig = boundary_polyline(pair(2.0, 0.5), 1, 3.0);
        assert_eq!(ig[1], [2.0, 1.0]);
        let cp = boundary_polyline(pair(2.0, 0.0), 1, 2.0);
        assert_eq!(cp, vec![[0.0, -1.0], [2.0, 1.0]]);
    }

    #[test]
    fn dirac_thresholds() {
        let b = build_basis(3).unwrap();
        let t1 = dirac_scaling(1.0, 1, &b).unwrap().threshold;
        let t2 = dirac_scaling(2.0, 1, &b).unwrap().threshold;
        let ti = dirac_scaling(f64::INFINITY, 2, &b).unwrap().threshold;
        assert!(t1.abs() < 0.05, "{t1}");
        assert!((t2 - 0.5).abs() < 0.05, "{t2}");
        assert!((ti - 2.0).abs() < 0.1, "{ti}");
    }

    #[test]
    fn zero_noise_is_convergent() {
        let s = ScalingSettings {
            resolution: 8,
            levels: 6,
            half_width: 0.5,
            ensemble: 3,
            ..Default::default()
        };
        let params = BesovParams::new(2.0, 2.0, -5.0, 1.0).unwrap();
        let v = empirical_scaling(&LevyModel::Drift { mu: 0.0 }, 1, params, &s).unwrap();
        assert_eq!(v.classification, Classification::Convergent);
        assert_eq!(v.fitted_slope, f64::NEG_INFINITY);
    }

    #[test]
    fn gaussian_verdicts_straddle_half() {
        let s = ScalingSettings {
            resolution: 10,
            levels: 7,
            half_width: 2.0,
            ensemble: 20,
            ..Default::default()
        };
        let params = BesovParams::new(2.0, 2.0, 0.0, 1.0).unwrap();
        let v = empirical_scaling_many(&LevyModel::Gaussian { sigma2: 1.0 }, 1, params, &[0.6, 0.4], &s).unwrap();
        assert_eq!(v[0].classification, Classification::Convergent, "{:?}", v[0]);
        assert_eq!(v[1].classification, Classification::Divergent, "{:?}", v[1]);
        // slope = q (d/2 - τ)
        assert!((v[0].fitted_slope + 0.2).abs() < 0.05);
        assert!(!v[0].heavy_tailed);
    }
}
