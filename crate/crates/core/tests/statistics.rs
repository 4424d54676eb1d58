//! Monte Carlo checks of the sampler, the transform and the moment layer.

use levy_besov::idlaw::{char_functional, JumpLaw, LevyModel};
use levy_besov::moments::{fractional_moment_log_cf, fractional_moment_mc, pairing_moment_cf, second_moment};
use levy_besov::numeric::{correlation, ks_two_sample, linear_fit};
use levy_besov::sampler::{pair, sample_field, GridSpec, TestFunction};
use levy_besov::wavelet::{analyze, build_basis, synthesize, CoeffPyramid};
use num_complex::Complex64;
use rayon::prelude::*;

fn coefficients(model: &LevyModel, spec: GridSpec, n: usize, levels: usize, seed: u64) -> Vec<CoeffPyramid> {
    let basis = build_basis(2).unwrap();
    (0..n as u64)
        .into_par_iter()
        .map(|r| analyze(&sample_field(model, spec, seed + r).unwrap(), &basis, levels).unwrap())
        .collect()
}

#[test]
fn wavelet_coefficients_are_stationary_in_shift() {
    let spec = GridSpec::new(1, 6, 0.5).unwrap();
    for model in [LevyModel::Laplace, LevyModel::SymmetricStable { alpha: 0.9 }] {
        let pyrs = coefficients(&model, spec, 10_000, 3, 7_000);
        // mother band at scale 4: 16 shifts
        let band = pyrs[0].bands.iter().position(|b| b.scale == 4 && b.gender == 1).unwrap();
        let at = |m: usize| -> Vec<f64> { pyrs.iter().map(|p| p.bands[band].coeffs[m]).collect() };
        let reference = at(0);
        for m in [3, 8, 13] {
            let (_, pval) = ks_two_sample(&reference, &at(m));
            assert!(pval > 0.01, "{model:?} shift {m}: p = {pval}");
        }
    }
}

#[test]
fn second_moment_identity_holds() {
    let spec = GridSpec::new(1, 5, 1.0).unwrap();
    let phi = TestFunction::from_fn(spec, |x| (-4.0 * x[0] * x[0]).exp() + 0.3 * x[0]);
    let n = 40_000;
    for model in [
        LevyModel::Gaussian { sigma2: 1.5 },
        LevyModel::Poisson { lambda: 2.0 },
        LevyModel::Laplace,
    ] {
        let xs: Vec<f64> = (0..n as u64)
            .into_par_iter()
            .map(|r| pair(&sample_field(&model, spec, 90_000 + r).unwrap(), &phi).unwrap())
            .collect();
        let squares: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mean = squares.iter().sum::<f64>() / n as f64;
        let sd = (squares.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let want = second_moment(&model, &phi).unwrap();
        let z = (mean - want).abs() / (sd / (n as f64).sqrt());
        assert!(z < 4.0, "{model:?}: E[X^2] {mean} vs {want} (z = {z:.2})");
    }
}

#[test]
fn empirical_cf_matches_characteristic_functional() {
    let spec = GridSpec::new(1, 4, 1.0).unwrap();
    let phi = TestFunction::from_fn(spec, |x| 1.0 - x[0].abs());
    let n = 20_000;
    for model in [
        LevyModel::Gaussian { sigma2: 1.0 },
        LevyModel::SymmetricStable { alpha: 1.3 },
        LevyModel::InverseGaussian,
        LevyModel::CompoundPoisson {
            lambda: 3.0,
            jump: JumpLaw::Uniform { low: -1.0, high: 2.0 },
        },
    ] {
        let xs: Vec<f64> = (0..n as u64)
            .into_par_iter()
            .map(|r| pair(&sample_field(&model, spec, 5_000 + r).unwrap(), &phi).unwrap())
            .collect();
        for k in -10..=10 {
            let xi = 0.5 * k as f64;
            let draws: Vec<Complex64> = xs.iter().map(|x| Complex64::new(0.0, xi * x).exp()).collect();
            let mean = draws.iter().sum::<Complex64>() / n as f64;
            let var = draws.iter().map(|d| (d - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let want = char_functional(&model, &phi.values, spec.cell_volume(), xi).unwrap();
            assert!((mean - want).norm() <= 3.0 * se + 1e-12, "{model:?} at {xi}: {mean} vs {want}");
        }
    }
}

#[test]
fn gaussian_coefficients_are_uncorrelated() {
    let spec = GridSpec::new(1, 6, 0.5).unwrap();
    let pyrs = coefficients(&LevyModel::Gaussian { sigma2: 1.0 }, spec, 40_000, 4, 300_000);
    let get = |scale: i32, gender: u8, m: usize| -> Vec<f64> {
        let b = pyrs[0].bands.iter().position(|b| b.scale == scale && b.gender == gender).unwrap();
        pyrs.iter().map(|p| p.bands[b].coeffs[m]).collect()
    };
    let pairs = [
        ((2, 0, 1), (2, 1, 1)),
        ((2, 1, 0), (2, 1, 1)),
        ((3, 1, 2), (4, 1, 5)),
        ((4, 1, 7), (5, 1, 14)),
        ((5, 1, 0), (5, 1, 1)),
        ((2, 0, 3), (5, 1, 30)),
    ];
    for (a, b) in pairs {
        let r = correlation(&get(a.0, a.1, a.2), &get(b.0, b.1, b.2));
        assert!(r.abs() < 0.02, "{a:?} vs {b:?}: r = {r}");
    }
}

#[test]
fn stable_wavelet_moments_follow_exact_scaling() {
    let (alpha, p) = (1.4, 0.7);
    let spec = GridSpec::new(1, 14, 0.5).unwrap();
    let basis = build_basis(3).unwrap();
    let levels = 12;
    let template = CoeffPyramid::zeros(spec, 3, levels).unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 4..=9 {
        let mut pyr = template.clone();
        let band = pyr.bands.iter_mut().find(|b| b.scale == j && b.gender == 1).unwrap();
        band.coeffs[band.per_axis / 2] = 1.0;
        // ψ_{j,m} on the grid, as a test function acting on increments
        let cells = synthesize(&pyr, &basis).unwrap();
        let amp = ((spec.j as f64) * spec.d as f64 / 2.0).exp2();
        let scale_alpha: f64 = cells.values.iter().map(|v| (amp * v).abs().powf(alpha)).sum::<f64>() * spec.cell_volume();
        let m = fractional_moment_log_cf(|xi: f64| Complex64::new(-scale_alpha * xi.abs().powf(alpha), 0.0), p)
            .unwrap()
            .value;
        xs.push(j as f64);
        ys.push(m.log2());
    }
    let slope = linear_fit(&xs, &ys).unwrap().0;
    let target = p * (0.5 - 1.0 / alpha);
    assert!((slope / target - 1.0).abs() < 0.02, "slope {slope} vs {target}");
}

#[test]
fn cf_and_monte_carlo_moments_agree_on_catalog() {
    let spec = GridSpec::new(1, 0, 0.5).unwrap();
    let phi = TestFunction::from_fn(spec, |_| 1.0);
    let rows: Vec<(LevyModel, f64)> = vec![
        (LevyModel::Gaussian { sigma2: 1.0 }, 2.0),
        (LevyModel::SymmetricStable { alpha: 1.2 }, 1.2),
        (LevyModel::SumStable { alpha: 0.8, beta: 1.6 }, 0.8),
        (LevyModel::Laplace, 2.0),
        (LevyModel::SymGamma { c: 0.5 }, 2.0),
        (LevyModel::Poisson { lambda: 1.0 }, 2.0),
        (
            LevyModel::CompoundPoisson {
                lambda: 1.0,
                jump: JumpLaw::Gaussian { mean: 0.0, std: 1.0 },
            },
            2.0,
        ),
        (LevyModel::InverseGaussian, 2.0),
    ];
    for (i, (model, beta0)) in rows.iter().enumerate() {
        for (k, p) in [0.25, 0.5, 1.0, 1.5].into_iter().enumerate() {
            if p >= *beta0 {
                continue;
            }
            let cf = pairing_moment_cf(model, &phi, p).unwrap();
            let mc = fractional_moment_mc(model, &phi, p, 100_000, (10 * i + k) as u64).unwrap();
            let se = (cf.error.powi(2) + mc.error.powi(2)).sqrt();
            assert!(
                (cf.value - mc.value).abs() <= 3.0 * se,
                "{model:?} p={p}: cf {} mc {} se {se}",
                cf.value,
                mc.value
            );
        }
    }
}
