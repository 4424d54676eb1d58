//! Blumenthal–Getoor indices of a Lévy exponent.
//!
//! `I0 = { p : limsup_{ξ→0} |f(ξ)|/|ξ|^p < ∞ }` and
//! `I∞ = { p : limsup_{ξ→∞} |f(ξ)|/|ξ|^p < ∞ }`, both restricted to `[0, 2]`;
//! `β0 = sup I0`, `β∞ = inf I∞`.
//!
//! A finite grid cannot see a limsup, so membership is decided from the trend
//! of per-decade maxima of `log10(r(ξ)/|ξ|^p)`: a nonpositive least-squares
//! slope over the far half of the decades means the ratio stays bounded.

use serde::{Deserialize, Serialize};

use super::model::LevyModel;
use crate::error::{invalid, Result};
use crate::numeric::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub beta0: f64,
    pub beta_inf: f64,
}

impl IndexPair {
    pub fn new(beta0: f64, beta_inf: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&beta0) || !(0.0..=2.0).contains(&beta_inf) {
            return Err(invalid(format!(
                "indices must lie in [0, 2], got ({beta0}, {beta_inf})"
            )));
        }
        Ok(Self { beta0, beta_inf })
    }
}

/// Growth of the ratio curve as a function of `p`; `p` belongs to the index
/// set when `growth <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceCurve {
    pub p: Vec<f64>,
    pub growth: Vec<f64>,
    pub threshold: f64,
}

impl EvidenceCurve {
    /// Location of the last membership change along the p grid, if any.
    pub fn last_sign_change(&self) -> Option<f64> {
        let inside: Vec<bool> = self.growth.iter().map(|g| *g <= self.threshold).collect();
        (1..inside.len())
            .rev()
            .find(|&i| inside[i] != inside[i - 1])
            .map(|i| 0.5 * (self.p[i] + self.p[i - 1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub value: IndexPair,
    /// Evidence for `β0` (behaviour as `ξ → 0`).
    pub at_zero: EvidenceCurve,
    /// Evidence for `β∞` (behaviour as `ξ → ∞`).
    pub at_infinity: EvidenceCurve,
    pub tolerance: f64,
    /// `β0` reported at 2 although larger exponents would also qualify.
    pub beta0_capped: bool,
    /// The ratio curves were too irregular for a trustworthy slope.
    pub inconclusive: bool,
    pub notes: Vec<String>,
}

/// Smallest `p ∈ [0, 2]` with `pred(p)`, for an upward-closed predicate.
/// The flag is set when no `p` qualifies (value reported as 2).
pub fn bisect_upward<F: Fn(f64) -> bool>(pred: F, resolution: f64) -> (f64, bool) {
    if pred(0.0) {
        return (0.0, false);
    }
    if !pred(2.0) {
        return (2.0, true);
    }
    let (mut lo, mut hi) = (0.0, 2.0);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Largest `p ∈ [0, 2]` with `pred(p)`, for a downward-closed predicate.
/// The flag is set when `p = 2` itself qualifies (the cap is active).
pub fn bisect_downward<F: Fn(f64) -> bool>(pred: F, resolution: f64) -> (f64, bool) {
    if pred(2.0) {
        return (2.0, true);
    }
    if !pred(0.0) {
        return (0.0, false);
    }
    let (mut lo, mut hi) = (0.0, 2.0);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Which function of `f` the ratio curves are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// `|Re f|`, falling back to `|f|` when the real part vanishes on the
    /// whole grid (pure drift).
    #[default]
    SymmetricPart,
    /// `|f|`.
    Modulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSettings {
    /// Decades spanned on each side: `[10^-(1+D), 10^-1]` and `[10, 10^(1+D)]`.
    pub decades: usize,
    pub samples_per_decade: usize,
    pub p_resolution: f64,
    /// Slope (decades of ratio per decade of ξ) still counted as bounded.
    pub growth_threshold: f64,
    /// RMS residual of the per-decade fit above which the estimate is inconclusive.
    pub max_residual: f64,
    pub convention: IndexConvention,
}

impl Default for IndexSettings {
    fn default() -> Self {
        Self {
            decades: 24,
            samples_per_decade: 64,
            p_resolution: 0.01,
            growth_threshold: 1e-3,
            max_residual: 0.25,
            convention: IndexConvention::SymmetricPart,
        }
    }
}

/// Per-decade maxima of `log10 r(ξ)` together with the decade centres
/// `log10 ξ`, ordered from the unit scale toward the limit.
struct DecadeProfile {
    log_xi: Vec<Vec<f64>>,
    log_r: Vec<Vec<f64>>,
}

impl DecadeProfile {
    /// `(slope, rms residual)` of `max_k(log10 r - p log10 ξ)` against the
    /// decade number, fitted over the far half.
    fn growth(&self, p: f64) -> (f64, f64) {
        let n = self.log_r.len();
        let start = n / 2;
        let mut ks = Vec::with_capacity(n - start);
        let mut ms = Vec::with_capacity(n - start);
        for k in start..n {
            let m = self.log_r[k]
                .iter()
                .zip(&self.log_xi[k])
                .map(|(r, x)| r - p * x)
                .fold(f64::NEG_INFINITY, f64::max);
            if m.is_finite() {
                ks.push(k as f64);
                ms.push(m);
            }
        }
        if ks.len() < 2 {
            // ratio identically zero on the far decades: bounded
            return (f64::NEG_INFINITY, 0.0);
        }
        let (slope, icpt) = linear_fit(&ks, &ms).expect("distinct decade indices");
        let rss: f64 = ks
            .iter()
            .zip(&ms)
            .map(|(k, m)| (m - slope * k - icpt).powi(2))
            .sum();
        (slope, (rss / ks.len() as f64).sqrt())
    }
}

/// Estimates `(β0, β∞)` of `model` on `decades`-wide log grids.
pub fn estimate_indices(model: &LevyModel, decades: usize, p_resolution: f64) -> Result<IndexEstimate> {
    estimate_indices_with(
        model,
        &IndexSettings {
            decades,
            p_resolution,
            ..IndexSettings::default()
        },
    )
}

/// Per-decade `log10 x`, `log10 |Re f|` and `log10 |f|`.
type Samples = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>);

pub fn estimate_indices_with(model: &LevyModel, settings: &IndexSettings) -> Result<IndexEstimate> {
    model.validate()?;
    if settings.decades < 4 || settings.samples_per_decade < 2 {
        return Err(invalid("need at least 4 decades and 2 samples per decade"));
    }
    if !(settings.p_resolution > 0.0 && settings.p_resolution < 1.0) {
        return Err(invalid("p_resolution must lie in (0, 1)"));
    }
    let mut notes = Vec::new();
    let (mut dec_zero, mut dec_inf, mut per_decade) =
        (settings.decades, settings.decades, settings.samples_per_decade);
    if let LevyModel::CustomTriplet { measure, .. } = model {
        // the quadrature truncation only resolves ξ inside [10/R, 0.1/ε]
        let reach_inf = ((0.1 / measure.inner_cutoff).log10() - 1.0).floor().max(4.0) as usize;
        let reach_zero = ((measure.outer_cutoff / 10.0).log10() - 1.0).floor().max(4.0) as usize;
        dec_inf = dec_inf.min(reach_inf);
        dec_zero = dec_zero.min(reach_zero);
        per_decade = per_decade.min(8);
        notes.push(format!(
            "triplet grids limited by quadrature cutoffs: {dec_zero} decades at 0, {dec_inf} at infinity"
        ));
    }

    let sample = |toward_zero: bool, decades: usize| -> Result<Samples> {
        let mut xs = Vec::with_capacity(decades);
        let mut re = Vec::with_capacity(decades);
        let mut md = Vec::with_capacity(decades);
        for k in 0..decades {
            let mut dx = Vec::with_capacity(per_decade);
            let mut dre = Vec::with_capacity(per_decade);
            let mut dmd = Vec::with_capacity(per_decade);
            for s in 0..per_decade {
                let frac = (s as f64 + 0.5) / per_decade as f64;
                let lx = if toward_zero {
                    -1.0 - (k as f64 + frac)
                } else {
                    1.0 + k as f64 + frac
                };
                let v = model.exponent(10f64.powf(lx))?;
                dx.push(lx);
                dre.push(v.re.abs().log10());
                dmd.push(v.norm().log10());
            }
            xs.push(dx);
            re.push(dre);
            md.push(dmd);
        }
        Ok((xs, re, md))
    };
    let (xz, rez, mdz) = sample(true, dec_zero)?;
    let (xi, rei, mdi) = sample(false, dec_inf)?;

    let all_neg_inf = |v: &[Vec<f64>]| v.iter().flatten().all(|x| *x == f64::NEG_INFINITY);
    let use_modulus = match settings.convention {
        IndexConvention::Modulus => true,
        IndexConvention::SymmetricPart => {
            let fallback = all_neg_inf(&rez) && all_neg_inf(&rei);
            if fallback {
                notes.push("real part vanishes on the grid; ratios use |f|".into());
            }
            fallback
        }
    };
    let pick = |re: Vec<Vec<f64>>, md: Vec<Vec<f64>>| if use_modulus { md } else { re };
    let zero = DecadeProfile {
        log_xi: xz,
        log_r: pick(rez, mdz),
    };
    let inf = DecadeProfile {
        log_xi: xi,
        log_r: pick(rei, mdi),
    };

    let eta = settings.growth_threshold;
    // toward 0 the decade index runs against log10 ξ, so growth is measured
    // in decades of 1/ξ
    let in_i0 = |p: f64| zero.growth(p).0 <= eta;
    let in_inf = |p: f64| inf.growth(p).0 <= eta;
    let (beta0, capped) = bisect_downward(in_i0, settings.p_resolution);
    let (beta_inf, inf_empty) = bisect_upward(in_inf, settings.p_resolution);

    let step = 0.05;
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * step).collect();
    let at_zero = EvidenceCurve {
        p: grid.clone(),
        growth: grid.iter().map(|&p| zero.growth(p).0).collect(),
        threshold: eta,
    };
    let at_infinity = EvidenceCurve {
        p: grid.clone(),
        growth: grid.iter().map(|&p| inf.growth(p).0).collect(),
        threshold: eta,
    };

    let res0 = zero.growth(beta0).1;
    let res_inf = inf.growth(beta_inf).1;
    let inconclusive = res0 > settings.max_residual || res_inf > settings.max_residual;
    if inconclusive {
        notes.push(format!(
            "irregular ratio curves (fit residuals {res0:.3} at 0, {res_inf:.3} at infinity)"
        ));
    }
    if capped {
        notes.push("beta0 reported at its cap 2".into());
    }
    if inf_empty {
        notes.push("ratio at infinity grows faster than |xi|^2; beta_inf reported at 2".into());
    }
    Ok(IndexEstimate {
        value: IndexPair::new(beta0, beta_inf)?,
        at_zero,
        at_infinity,
        tolerance: settings.p_resolution + step,
        beta0_capped: capped,
        inconclusive,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idlaw::model::JumpLaw;

    fn est(model: LevyModel) -> IndexEstimate {
        estimate_indices(&model, 24, 0.01).unwrap()
    }

    #[test]
    fn bisection_helpers() {
        let (v, empty) = bisect_upward(|p| p >= 0.7, 1e-4);
        assert!((v - 0.7).abs() < 1e-4 && !empty);
        assert_eq!(bisect_upward(|_| false, 1e-4), (2.0, true));
        assert_eq!(bisect_upward(|_| true, 1e-4), (0.0, false));
        let (v, capped) = bisect_downward(|p| p <= 1.3, 1e-4);
        assert!((v - 1.3).abs() < 1e-4 && !capped);
        assert_eq!(bisect_downward(|_| true, 1e-4), (2.0, true));
    }

    #[test]
    fn stable_and_sum_of_stables() {
        let e = est(LevyModel::SymmetricStable { alpha: 0.7 });
        assert!((e.value.beta0 - 0.7).abs() < 0.05 && (e.value.beta_inf - 0.7).abs() < 0.05);
        let e = est(LevyModel::SumStable { alpha: 0.5, beta: 1.5 });
        assert!((e.value.beta0 - 0.5).abs() < 0.05, "{:?}", e.value);
        assert!((e.value.beta_inf - 1.5).abs() < 0.05, "{:?}", e.value);
        assert!(!e.inconclusive);
    }

    #[test]
    fn laplace_and_gaussian() {
        let e = est(LevyModel::Laplace);
        assert!((e.value.beta0 - 2.0).abs() < 0.05 && e.value.beta_inf < 0.05, "{:?}", e.value);
        assert!(e.beta0_capped);
        let e = est(LevyModel::Gaussian { sigma2: 3.0 });
        assert!((e.value.beta0 - 2.0).abs() < 0.05 && (e.value.beta_inf - 2.0).abs() < 0.05);
    }

    #[test]
    fn drift_uses_modulus_fallback() {
        let e = est(LevyModel::Drift { mu: -2.0 });
        assert!((e.value.beta0 - 1.0).abs() < 0.05 && (e.value.beta_inf - 1.0).abs() < 0.05);
        assert!(!e.notes.is_empty());
    }

    #[test]
    fn pareto_jumps_set_beta0() {
        let e = est(LevyModel::CompoundPoisson {
            lambda: 1.0,
            jump: JumpLaw::Pareto { alpha: 0.8, scale: 1.0 },
        });
        assert!((e.value.beta0 - 0.8).abs() < 0.05, "{:?}", e.value);
        assert!(e.value.beta_inf < 0.05);
    }

    #[test]
    fn curves_bracket_the_estimate() {
        let e = est(LevyModel::SymmetricStable { alpha: 1.3 });
        let c0 = e.at_zero.last_sign_change().unwrap();
        let ci = e.at_infinity.last_sign_change().unwrap();
        assert!((c0 - e.value.beta0).abs() <= e.tolerance);
        assert!((ci - e.value.beta_inf).abs() <= e.tolerance);
    }
}
