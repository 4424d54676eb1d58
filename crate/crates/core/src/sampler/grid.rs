use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::lwnf::{self, Header};

/// Largest number of cells a grid may hold.
pub const MAX_CELLS: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Dyadic grid on the torus `[-L, -L + S)^d`, `S = ceil(2L)`, with
/// `2^J` cells per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    #[serde(rename = "J")]
    pub j: u32,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn new(d: usize, j: u32, half_width: f64) -> Result<Self> {
        let spec = Self {
            d,
            j,
            half_width,
            boundary: Boundary::Periodic,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(invalid(format!("dimension {} not in 1..=3", self.d)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(invalid("box half-width L must be positive"));
        }
        if self.j > 24 {
            return Err(invalid(format!("level J = {} too fine", self.j)));
        }
        let per_axis = (self.side() as usize).checked_shl(self.j).unwrap_or(usize::MAX);
        match per_axis.checked_pow(self.d as u32) {
            Some(n) if n <= MAX_CELLS => Ok(()),
            _ => Err(invalid("grid has too many cells")),
        }
    }

    /// Torus side length `ceil(2L)`.
    pub fn side(&self) -> f64 {
        (2.0 * self.half_width).ceil()
    }

    pub fn cells_per_axis(&self) -> usize {
        (self.side() as usize) << self.j
    }

    pub fn total_cells(&self) -> usize {
        self.cells_per_axis().pow(self.d as u32)
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    pub fn cell_volume(&self) -> f64 {
        (-((self.j as usize * self.d) as f64)).exp2()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.cells_per_axis(); self.d]
    }

    /// Multi-index of a row-major flat index (last axis fastest).
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let n = self.cells_per_axis();
        let mut out = vec![0; self.d];
        for k in (0..self.d).rev() {
            out[k] = index % n;
            index /= n;
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let n = self.cells_per_axis();
        idx.iter().fold(0, |acc, &i| acc * n + i)
    }

    /// Centre of the cell with the given flat index.
    pub fn cell_center(&self, index: usize) -> Vec<f64> {
        let h = self.cell_width();
        self.unravel(index)
            .into_iter()
            .map(|i| -self.half_width + (i as f64 + 0.5) * h)
            .collect()
    }

    /// Flat index of the cell containing `x`, wrapping periodically.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        let n = self.cells_per_axis() as i64;
        let h = self.cell_width();
        let idx: Vec<usize> = x
            .iter()
            .map(|&xi| (((xi + self.half_width) / h).floor() as i64).rem_euclid(n) as usize)
            .collect();
        self.ravel(&idx)
    }
}

/// One realization of the cell increments `⟨w, 1_cell⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub model_tag: String,
    pub seed: u64,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>, model_tag: impl Into<String>, seed: u64) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.total_cells() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} cells",
                values.len(),
                spec.total_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field values must be finite"));
        }
        Ok(Self {
            spec,
            values,
            model_tag: model_tag.into(),
            seed,
        })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.total_cells()],
            model_tag: "zero".into(),
            seed: 0,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        lwnf::write_header(
            w,
            &Header {
                version: lwnf::VERSION_FIELD,
                spec: self.spec,
                model_tag: self.model_tag.clone(),
                seed: self.seed,
            },
        )?;
        lwnf::write_f64s(w, &self.values)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let h = lwnf::read_header(r)?;
        if h.version != lwnf::VERSION_FIELD {
            return Err(Error::Format(format!(
                "expected a field (version {}), found version {}",
                lwnf::VERSION_FIELD,
                h.version
            )));
        }
        let values = lwnf::read_f64s(r, h.spec.total_cells())?;
        lwnf::expect_eof(r)?;
        GridField::new(h.spec, values, h.model_tag, h.seed)
            .map_err(|e| Error::Format(format!("invalid payload: {e}")))
    }
}

/// A test function sampled at the cell centres of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl TestFunction {
    pub fn from_fn<F: Fn(&[f64]) -> f64>(spec: GridSpec, f: F) -> Self {
        let values = (0..spec.total_cells()).map(|i| f(&spec.cell_center(i))).collect();
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.total_cells()],
        }
    }

    /// `(Σ |φ_i|^p vol)^(1/p)`, the Riemann approximation of `‖φ‖_p`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let vol = self.spec.cell_volume();
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * vol).powf(1.0 / p)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// `⟨w, φ⟩ ≈ Σ_i φ(x_i) · increment_i`.
pub fn pair(field: &GridField, phi: &TestFunction) -> Result<f64> {
    if field.spec != phi.spec || field.values.len() != phi.values.len() {
        return Err(Error::Shape("test function and field live on different grids".into()));
    }
    Ok(field.values.iter().zip(&phi.values).map(|(a, b)| a * b).sum())
}
