//! Lévy measures built from power-law bands with optional logarithmic
//! corrections, and the index computation that reads the Blumenthal–Getoor
//! pair off the measure's integrability at zero and at infinity.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

use super::indices::{bisect_downward, bisect_upward, EvidenceCurve, IndexEstimate, IndexPair};
use crate::error::{invalid, Error, Result};
use crate::numeric::{linear_fit, log_add_exp};

/// Which argument the logarithmic correction of a term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LogArg {
    #[default]
    None,
    /// `log(1 + |x|)`
    OnePlusAbs,
    /// `log(1 + 1/|x|)`
    OnePlusInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    #[default]
    Both,
    Positive,
    Negative,
}

/// One band of the density:
/// `weight * |x|^(-power) * L(x)^(-log_power)` on `lo < |x| <= hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureTerm {
    pub weight: f64,
    pub power: f64,
    #[serde(default)]
    pub log_power: f64,
    #[serde(default)]
    pub log_arg: LogArg,
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "infinite")]
    pub hi: f64,
    #[serde(default)]
    pub side: Side,
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl MeasureTerm {
    pub fn power_band(weight: f64, power: f64, lo: f64, hi: f64) -> Self {
        Self {
            weight,
            power,
            log_power: 0.0,
            log_arg: LogArg::None,
            lo,
            hi,
            side: Side::Both,
        }
    }

    fn covers(&self, side: Side, t: f64) -> bool {
        let side_ok = self.side == Side::Both || self.side == side;
        // compare in log space so bands stay meaningful far outside f64 range
        let lo_ok = self.lo <= 0.0 || t > self.lo.ln();
        let hi_ok = self.hi.is_infinite() || t <= self.hi.ln();
        side_ok && lo_ok && hi_ok && self.weight > 0.0
    }

    fn log_value(&self, t: f64) -> f64 {
        let mut v = self.weight.ln() - self.power * t;
        if self.log_power != 0.0 {
            let l = match self.log_arg {
                LogArg::None => return v,
                LogArg::OnePlusAbs => ln_softplus(t),
                LogArg::OnePlusInverse => ln_softplus(-t),
            };
            v -= self.log_power * l;
        }
        v
    }
}

/// `ln(ln(1 + e^t))`, stable for any `t`.
fn ln_softplus(t: f64) -> f64 {
    if t < -35.0 {
        t
    } else if t > 35.0 {
        (t + (-t).exp().ln_1p()).ln()
    } else {
        t.exp().ln_1p().ln()
    }
}

/// A Lévy measure on the real line minus the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LevyMeasure {
    pub terms: Vec<MeasureTerm>,
    /// Inner quadrature cutoff for exponent evaluation.
    #[serde(default = "default_inner_cutoff")]
    pub inner_cutoff: f64,
    /// Outer quadrature cutoff for exponent evaluation.
    #[serde(default = "default_outer_cutoff")]
    pub outer_cutoff: f64,
}

fn default_inner_cutoff() -> f64 {
    1e-8
}
fn default_outer_cutoff() -> f64 {
    1e8
}

/// Number of decades scanned on each side by the index computation.
const SCAN_DECADES: usize = 200;
/// Decades (counted from the far end) used in the finiteness fit.
const SCAN_WINDOW: usize = 40;
/// A decade-contribution slope below `-FINITE_SLOPE` counts as convergent.
const FINITE_SLOPE: f64 = 1e-3;

impl LevyMeasure {
    pub fn new(terms: Vec<MeasureTerm>) -> Self {
        Self {
            terms,
            inner_cutoff: default_inner_cutoff(),
            outer_cutoff: default_outer_cutoff(),
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|t| t.side == Side::Both)
    }

    pub fn validate(&self) -> Result<()> {
        for term in &self.terms {
            if !(term.weight >= 0.0 && term.weight.is_finite()) {
                return Err(invalid("measure term weight must be finite and >= 0"));
            }
            if !term.power.is_finite() || !term.log_power.is_finite() {
                return Err(invalid("measure term exponents must be finite"));
            }
            if !(term.lo >= 0.0 && term.hi > term.lo) {
                return Err(invalid("measure term band must satisfy 0 <= lo < hi"));
            }
        }
        if !(self.inner_cutoff > 0.0 && self.inner_cutoff < 1.0) {
            return Err(invalid("inner cutoff must lie in (0, 1)"));
        }
        if !(self.outer_cutoff > 1.0) {
            return Err(invalid("outer cutoff must exceed 1"));
        }
        if !self.is_levy_measure() {
            return Err(invalid(
                "measure fails the integrability condition ∫ min(1, x²) ν(dx) < ∞",
            ));
        }
        Ok(())
    }

    /// Log-density at `x = ±e^t` on the given side; `-inf` outside the support.
    pub fn log_density_at_log(&self, side: Side, t: f64) -> f64 {
        self.terms
            .iter()
            .filter(|term| term.covers(side, t))
            .fold(f64::NEG_INFINITY, |acc, term| log_add_exp(acc, term.log_value(t)))
    }

    pub fn density(&self, x: f64) -> f64 {
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        let side = if x > 0.0 { Side::Positive } else { Side::Negative };
        self.log_density_at_log(side, x.abs().ln()).exp()
    }

    /// Band edges in `(0, inf)`, including 1, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![1.0];
        for t in &self.terms {
            if t.lo > 0.0 {
                pts.push(t.lo);
            }
            if t.hi.is_finite() {
                pts.push(t.hi);
            }
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }

    /// `log ∫ |x|^p ν(dx)` over one decade `|x| ∈ [10^k, 10^(k+1)]`, both sides.
    fn log_decade_moment(&self, p: f64, k: f64) -> f64 {
        let a = k * LN_10;
        let b = (k + 1.0) * LN_10;
        let mut acc = f64::NEG_INFINITY;
        for side in [Side::Positive, Side::Negative] {
            acc = log_add_exp(acc, log_gk_exp(a, b, |t| (p + 1.0) * t + self.log_density_at_log(side, t)));
        }
        acc
    }

    /// Growth rate (log10 per decade, moving toward the limit) of the decade
    /// contributions to `∫ |x|^p ν(dx)` near zero (`inner`) or infinity.
    fn tail_growth(&self, p: f64, inner: bool) -> f64 {
        let mut ks = Vec::with_capacity(SCAN_WINDOW);
        let mut vals = Vec::with_capacity(SCAN_WINDOW);
        for step in (SCAN_DECADES - SCAN_WINDOW)..SCAN_DECADES {
            let k = if inner {
                -(step as f64) - 1.0
            } else {
                step as f64
            };
            let v = self.log_decade_moment(p, k);
            if v.is_finite() {
                ks.push(step as f64);
                vals.push(v / LN_10);
            }
        }
        if vals.len() < 2 {
            return f64::NEG_INFINITY;
        }
        linear_fit(&ks, &vals).map_or(f64::NEG_INFINITY, |(slope, _)| slope)
    }

    /// Whether `∫_{|x| <= 1} |x|^p ν(dx)` is finite.
    pub fn inner_moment_finite(&self, p: f64) -> bool {
        self.tail_growth(p, true) < -FINITE_SLOPE
    }

    /// Whether `∫_{|x| > 1} |x|^p ν(dx)` is finite.
    pub fn outer_moment_finite(&self, p: f64) -> bool {
        self.tail_growth(p, false) < -FINITE_SLOPE
    }

    /// Numerical check of `∫ min(1, x²) ν(dx) < ∞`.
    pub fn is_levy_measure(&self) -> bool {
        self.inner_moment_finite(2.0) && self.outer_moment_finite(0.0)
    }

    /// `∫_{lo < |x| <= hi} |x|^power ν(dx)` on one side, computed in log variables.
    pub(crate) fn side_integral(&self, side: Side, power: f64, lo: f64, hi: f64) -> f64 {
        let (a, b) = (lo.ln(), hi.ln());
        if !(b > a) {
            return 0.0;
        }
        let mut breaks = vec![a];
        for bp in self.breakpoints() {
            let t = bp.ln();
            if t > a && t < b {
                breaks.push(t);
            }
        }
        breaks.push(b);
        breaks
            .windows(2)
            .map(|w| {
                crate::numeric::integrate(
                    |t| ((power + 1.0) * t + self.log_density_at_log(side, t)).exp(),
                    w[0],
                    w[1],
                    1e-14,
                    1e-10,
                )
                .value
            })
            .sum()
    }
}

/// `log ∫_a^b exp(g(t)) dt` with a fixed 15-point Kronrod rule on 8 panels.
fn log_gk_exp<G: Fn(f64) -> f64>(a: f64, b: f64, g: G) -> f64 {
    const X: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const W: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_18,
        0.140_653_259_715_525_92,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_83,
    ];
    const PANELS: usize = 8;
    let h = (b - a) / PANELS as f64;
    let mut acc = f64::NEG_INFINITY;
    for panel in 0..PANELS {
        let c = a + (panel as f64 + 0.5) * h;
        let half = 0.5 * h;
        for i in 0..8 {
            let lw = (W[i] * half).ln();
            acc = log_add_exp(acc, lw + g(c - half * X[i]));
            if i < 7 {
                acc = log_add_exp(acc, lw + g(c + half * X[i]));
            }
        }
    }
    acc
}

/// Blumenthal–Getoor indices from the measure, for symmetric measures with
/// no drift and no Gaussian part:
/// `β∞ = inf { p : ∫_{|x|<=1} |x|^p ν < ∞ }`, `β0 = sup { p : ∫_{|x|>1} |x|^p ν < ∞ }`.
pub fn indices_from_measure(nu: &LevyMeasure) -> Result<IndexEstimate> {
    if !nu.is_symmetric() {
        return Err(Error::Unsupported(
            "index formula from the Lévy measure requires a symmetric measure".into(),
        ));
    }
    let resolution = 1e-3;
    let inner = |p: f64| nu.inner_moment_finite(p);
    let outer = |p: f64| nu.outer_moment_finite(p);
    let (beta_inf, inf_empty) = bisect_upward(inner, resolution);
    let (beta0, capped) = bisect_downward(outer, resolution);

    let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let at_zero = EvidenceCurve {
        p: grid.clone(),
        growth: grid.iter().map(|&p| nu.tail_growth(p, false)).collect(),
        threshold: -FINITE_SLOPE,
    };
    let at_infinity = EvidenceCurve {
        p: grid.clone(),
        growth: grid.iter().map(|&p| nu.tail_growth(p, true)).collect(),
        threshold: -FINITE_SLOPE,
    };
    let mut notes = Vec::new();
    if capped {
        notes.push("beta0 reported at its cap 2: |x|^2 is integrable at infinity".to_string());
    }
    if inf_empty {
        notes.push("no p in [0, 2] makes the inner moment finite; beta_inf reported at 2".to_string());
    }
    Ok(IndexEstimate {
        value: IndexPair::new(beta0, beta_inf)?,
        at_zero,
        at_infinity,
        tolerance: 2.0 * resolution + 2.0 * FINITE_SLOPE,
        beta0_capped: capped,
        inconclusive: false,
        notes,
    })
}

/// Measure with prescribed indices `(β0, β∞)`: `|x|^-(β0+1)` outside the unit
/// ball and `|x|^-(β∞+1)` inside, with logarithmic corrections at `β0 = 0`
/// and `β∞ = 2`.
pub fn make_index_pair_measure(beta0: f64, beta_inf: f64) -> Result<LevyMeasure> {
    if !(0.0..=2.0).contains(&beta0) || !(0.0..=2.0).contains(&beta_inf) {
        return Err(invalid("indices must lie in [0, 2]"));
    }
    let outer = if beta0 > 0.0 {
        MeasureTerm::power_band(1.0, beta0 + 1.0, 1.0, f64::INFINITY)
    } else {
        MeasureTerm {
            weight: 1.0,
            power: 1.0,
            log_power: 2.0,
            log_arg: LogArg::OnePlusAbs,
            lo: 1.0,
            hi: f64::INFINITY,
            side: Side::Both,
        }
    };
    let inner = if beta_inf < 2.0 {
        MeasureTerm::power_band(1.0, beta_inf + 1.0, 0.0, 1.0)
    } else {
        // log^-2(1 + 1/|x|) |x|^-3 keeps ∫ x² ν finite near the origin
        MeasureTerm {
            weight: 1.0,
            power: 3.0,
            log_power: 2.0,
            log_arg: LogArg::OnePlusInverse,
            lo: 0.0,
            hi: 1.0,
            side: Side::Both,
        }
    };
    Ok(LevyMeasure::new(vec![outer, inner]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_of_index_pair_measure() {
        let nu = make_index_pair_measure(1.0, 0.5).unwrap();
        assert!((nu.density(2.0) - 0.25).abs() < 1e-14);
        assert!((nu.density(-0.25) - 0.25f64.powf(-1.5)).abs() < 1e-10);
        assert!((nu.density(1.0) - 1.0).abs() < 1e-14);
        assert_eq!(nu.density(0.0), 0.0);
    }

    #[test]
    fn one_half_one_pair_recovered() {
        let nu = make_index_pair_measure(1.0, 0.5).unwrap();
        let est = indices_from_measure(&nu).unwrap();
        assert!((est.value.beta0 - 1.0).abs() < 0.05, "{:?}", est.value);
        assert!((est.value.beta_inf - 0.5).abs() < 0.05, "{:?}", est.value);
    }

    #[test]
    fn zero_measure_reports_caps() {
        let est = indices_from_measure(&LevyMeasure::zero()).unwrap();
        assert_eq!(est.value.beta0, 2.0);
        assert_eq!(est.value.beta_inf, 0.0);
        assert!(est.beta0_capped);
    }

    #[test]
    fn compact_band_gives_two_and_zero() {
        let nu = LevyMeasure::new(vec![MeasureTerm::power_band(1.0, 0.0, 1.0, 2.0)]);
        let est = indices_from_measure(&nu).unwrap();
        assert_eq!(est.value.beta0, 2.0);
        assert_eq!(est.value.beta_inf, 0.0);
    }

    #[test]
    fn endpoint_measures_are_levy_measures() {
        for (b0, binf) in [(0.0, 2.0), (0.0, 0.0), (2.0, 2.0)] {
            let nu = make_index_pair_measure(b0, binf).unwrap();
            assert!(nu.validate().is_ok(), "({b0}, {binf})");
        }
    }

    #[test]
    fn literal_log_half_correction_is_not_a_levy_measure() {
        // log^-1/2(1+|x|) |x|^-3 behaves like |x|^-3.5 at the origin
        let nu = LevyMeasure::new(vec![MeasureTerm {
            weight: 1.0,
            power: 3.0,
            log_power: 0.5,
            log_arg: LogArg::OnePlusAbs,
            lo: 0.0,
            hi: 1.0,
            side: Side::Both,
        }]);
        assert!(!nu.is_levy_measure());
    }

    #[test]
    fn asymmetric_measure_rejected() {
        let mut nu = make_index_pair_measure(1.0, 1.0).unwrap();
        nu.terms[0].side = Side::Positive;
        assert!(matches!(indices_from_measure(&nu), Err(Error::Unsupported(_))));
    }

    #[test]
    fn side_integral_matches_closed_form() {
        let nu = make_index_pair_measure(1.0, 0.5).unwrap();
        // ∫_0^1 x² x^-1.5 dx = 1/1.5
        let v = nu.side_integral(Side::Positive, 2.0, 1e-300, 1.0);
        assert!((v - 1.0 / 1.5).abs() < 1e-8, "{v}");
    }
}
