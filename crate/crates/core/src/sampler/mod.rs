//! Realizations of Lévy white noise on dyadic grids.
//!
//! A field stores the raw increments `⟨w, 1_cell⟩`; cells are independent
//! and each one carries the law with exponent `volume · f`. Every cell draws
//! from its own counter-based stream, so a field depends only on
//! `(model, grid, seed)` and never on the thread count.

mod grid;
mod laws;

pub use grid::{pair, Boundary, GridField, GridSpec, TestFunction, MAX_CELLS};
pub use laws::{
    inverse_gaussian, sample_cell, standard_sas, CellSampler, TruncationReport,
    DEFAULT_JUMP_THRESHOLD,
};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::io::Write;

use crate::error::{invalid, Result};
use crate::idlaw::{JumpLaw, LevyModel};
use crate::rng::StreamFactory;

pub fn sample_field(model: &LevyModel, spec: GridSpec, seed: u64) -> Result<GridField> {
    let sampler = CellSampler::new(model)?;
    sample_field_with(&sampler, spec, seed)
}

/// As [`sample_field`], reusing a prepared sampler.
pub fn sample_field_with(sampler: &CellSampler, spec: GridSpec, seed: u64) -> Result<GridField> {
    spec.validate()?;
    let factory = StreamFactory::new(seed);
    let vol = spec.cell_volume();
    let values: Vec<f64> = (0..spec.total_cells())
        .into_par_iter()
        .with_min_len(256)
        .map(|i| sampler.sample(vol, &mut factory.stream(i as u64)))
        .collect();
    GridField::new(spec, values, sampler.model().tag(), seed)
}

/// Explicit compound-Poisson realization `Σ a_k δ(· - x_k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub d: usize,
    pub locations: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Sums amplitudes per cell of `spec`.
    pub fn bin(&self, spec: GridSpec) -> Vec<f64> {
        let mut out = vec![0.0; spec.total_cells()];
        for (x, a) in self.locations.iter().zip(&self.amplitudes) {
            out[spec.cell_of(x)] += a;
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let axes: Vec<String> = (0..self.d).map(|k| format!("x{k}")).collect();
        writeln!(w, "{},amplitude", axes.join(","))?;
        for (x, a) in self.locations.iter().zip(&self.amplitudes) {
            let coords: Vec<String> = x.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{},{a:.17e}", coords.join(","))?;
        }
        Ok(())
    }
}

/// Poisson number of points with mean `λ (2L)^d`, uniform locations in
/// `[-L, L)^d` and i.i.d. amplitudes.
pub fn sample_compound_poisson_points(
    lambda: f64,
    jump: &JumpLaw,
    spec: GridSpec,
    seed: u64,
) -> Result<PointCloud> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda must be positive"));
    }
    jump.validate()?;
    spec.validate()?;
    let width = 2.0 * spec.half_width;
    let mean = lambda * width.powi(spec.d as i32);
    let mut rng = StreamFactory::new(seed).stream(u64::MAX);
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| invalid(format!("point count: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut cloud = PointCloud {
        d: spec.d,
        locations: Vec::with_capacity(n),
        amplitudes: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let x: Vec<f64> = (0..spec.d)
            .map(|_| -spec.half_width + width * rng.random::<f64>())
            .collect();
        cloud.locations.push(x);
        cloud.amplitudes.push(jump.sample(&mut rng));
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_is_thread_count_independent() {
        let spec = GridSpec::new(2, 5, 1.0).unwrap();
        let model = LevyModel::SymmetricStable { alpha: 1.2 };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| sample_field(&model, spec, 11).unwrap());
        let b = eight.install(|| sample_field(&model, spec, 11).unwrap());
        assert_eq!(a.values, b.values);
        let c = sample_field(&model, spec, 12).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn gaussian_field_variance() {
        let spec = GridSpec::new(1, 8, 1.0).unwrap();
        let mut acc = 0.0;
        let mut n = 0usize;
        for seed in 0..40 {
            let f = sample_field(&LevyModel::Gaussian { sigma2: 1.0 }, spec, seed).unwrap();
            assert_eq!(f.values.len(), 512);
            acc += f.values.iter().map(|v| v * v).sum::<f64>();
            n += f.values.len();
        }
        let var = acc / n as f64;
        assert!((var * 256.0 - 1.0).abs() < 0.05, "{}", var * 256.0);
    }

    #[test]
    fn point_cloud_bins_onto_grid() {
        let spec = GridSpec::new(1, 3, 1.0).unwrap();
        let cloud = sample_compound_poisson_points(
            5.0,
            &JumpLaw::Atoms {
                values: vec![1.0],
                weights: vec![1.0],
            },
            spec,
            3,
        )
        .unwrap();
        let binned = cloud.bin(spec);
        assert_eq!(binned.iter().sum::<f64>(), cloud.len() as f64);
        let mut csv = Vec::new();
        cloud.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), cloud.len() + 1);
    }
}
