//! Periodized separable Daubechies transforms.
//!
//! `analyze` works on `c = 2^{Jd/2} · increment`, the finest-level scaling
//! coefficients of the noise, and returns orthonormal inner products
//! `⟨w, ψ_{j,G,m}⟩` with `ψ_{j,G,m} = 2^{jd/2} ψ_G(2^j · - m)`. Hence
//! `Σ coeff² = 2^{Jd} Σ increment²`.
//!
//! With `levels = ℓ`, the bands cover physical scales `j = J - ℓ .. J - 1`;
//! the father band (gender `F^d`) sits at the coarsest scale `J - ℓ`.
//! Coefficient `m` of scale `j` sits at position `m 2^{-j} - L` on each axis.

mod filters;

pub use filters::{build_basis, WaveletBasis};

use rayon::prelude::*;
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::lwnf::{self, Header};
use crate::sampler::{GridField, GridSpec};

/// Gender bit mask: bit `k` set means the mother wavelet along axis `k`.
pub type Gender = u8;

/// Genders valid at a level: all of `{F, M}^d` for the father level, the
/// mixed and mother ones otherwise.
pub fn genders(d: usize, father_level: bool) -> Vec<Gender> {
    let start = if father_level { 0 } else { 1 };
    (start..(1u8 << d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    /// Physical scale `j`.
    pub scale: i32,
    pub gender: Gender,
    /// Coefficients per axis (`S 2^j`).
    pub per_axis: usize,
    /// Row-major coefficients `⟨f, ψ_{j,G,m}⟩`.
    pub coeffs: Vec<f64>,
}

impl Band {
    /// Physical position `m 2^{-j} - L` of coefficient `index`.
    pub fn position(&self, index: usize, spec: &GridSpec) -> Vec<f64> {
        let d = spec.d;
        let step = (-(self.scale as f64)).exp2();
        let mut idx = index;
        let mut out = vec![0.0; d];
        for k in (0..d).rev() {
            out[k] = (idx % self.per_axis) as f64 * step - spec.half_width;
            idx /= self.per_axis;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPyramid {
    /// Daubechies order of the analysing basis.
    pub basis: usize,
    pub spec: GridSpec,
    pub levels: usize,
    /// Father band first, then mother bands from coarse to fine scale.
    pub bands: Vec<Band>,
    pub model_tag: String,
    pub seed: u64,
}

impl CoeffPyramid {
    pub fn coarsest_scale(&self) -> i32 {
        self.spec.j as i32 - self.levels as i32
    }

    /// Bands at physical scale `j` (father included at the coarsest scale).
    pub fn bands_at(&self, scale: i32) -> impl Iterator<Item = &Band> {
        self.bands.iter().filter(move |b| b.scale == scale)
    }

    pub fn scales(&self) -> std::ops::Range<i32> {
        self.coarsest_scale()..self.spec.j as i32
    }

    pub fn sum_squares(&self) -> f64 {
        self.bands.iter().flat_map(|b| &b.coeffs).map(|c| c * c).sum()
    }

    pub fn scale_by(&mut self, c: f64) {
        for b in &mut self.bands {
            for v in &mut b.coeffs {
                *v *= c;
            }
        }
    }

    /// Zero pyramid with the layout `analyze` produces.
    pub fn zeros(spec: GridSpec, basis: usize, levels: usize) -> Result<Self> {
        check_levels(&spec, levels)?;
        let d = spec.d;
        let coarse = spec.j as i32 - levels as i32;
        let per_axis = |scale: i32| (spec.side() as usize) << scale;
        let mut bands = vec![Band {
            scale: coarse,
            gender: 0,
            per_axis: per_axis(coarse),
            coeffs: vec![0.0; per_axis(coarse).pow(d as u32)],
        }];
        for scale in coarse..spec.j as i32 {
            for g in genders(d, false) {
                bands.push(Band {
                    scale,
                    gender: g,
                    per_axis: per_axis(scale),
                    coeffs: vec![0.0; per_axis(scale).pow(d as u32)],
                });
            }
        }
        Ok(Self {
            basis,
            spec,
            levels,
            bands,
            model_tag: String::new(),
            seed: 0,
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        lwnf::write_header(
            w,
            &Header {
                version: lwnf::VERSION_PYRAMID,
                spec: self.spec,
                model_tag: self.model_tag.clone(),
                seed: self.seed,
            },
        )?;
        w.write_all(&[self.basis as u8])?;
        w.write_all(&(self.levels as u16).to_le_bytes())?;
        w.write_all(&(self.bands.len() as u32).to_le_bytes())?;
        for b in &self.bands {
            w.write_all(&b.scale.to_le_bytes())?;
            w.write_all(&[b.gender])?;
            w.write_all(&(b.coeffs.len() as u64).to_le_bytes())?;
            lwnf::write_f64s(w, &b.coeffs)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let h = lwnf::read_header(r)?;
        if h.version != lwnf::VERSION_PYRAMID {
            return Err(Error::Format(format!(
                "expected a pyramid (version {}), found version {}",
                lwnf::VERSION_PYRAMID,
                h.version
            )));
        }
        let basis = lwnf::read_u8(r)? as usize;
        let levels = lwnf::read_u16(r)? as usize;
        let mut out = CoeffPyramid::zeros(h.spec, basis, levels)
            .map_err(|e| Error::Format(format!("invalid pyramid layout: {e}")))?;
        let count = lwnf::read_u32(r)? as usize;
        if count != out.bands.len() {
            return Err(Error::Format(format!(
                "{count} sections, layout needs {}",
                out.bands.len()
            )));
        }
        for band in &mut out.bands {
            let mut sb = [0u8; 4];
            lwnf::read_exact(r, &mut sb)?;
            let scale = i32::from_le_bytes(sb);
            let gender = lwnf::read_u8(r)?;
            let n = lwnf::read_u64(r)? as usize;
            if scale != band.scale || gender != band.gender || n != band.coeffs.len() {
                return Err(Error::Format(format!(
                    "section (j={scale}, G={gender:#b}, n={n}) out of order"
                )));
            }
            band.coeffs = lwnf::read_f64s(r, n)?;
        }
        lwnf::expect_eof(r)?;
        out.model_tag = h.model_tag;
        out.seed = h.seed;
        Ok(out)
    }
}

fn check_levels(spec: &GridSpec, levels: usize) -> Result<()> {
    spec.validate()?;
    if levels > spec.j as usize {
        return Err(invalid(format!(
            "{levels} levels requested on a grid with J = {}",
            spec.j
        )));
    }
    Ok(())
}

/// One periodic analysis step on a line: low half then high half.
fn analyze_line(basis: &WaveletBasis, x: &[f64], out: &mut [f64]) {
    let m = x.len();
    let half = m / 2;
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (n, (hn, gn)) in basis.h.iter().zip(&basis.g).enumerate() {
            let v = x[(2 * k + n) % m];
            a += hn * v;
            d += gn * v;
        }
        out[k] = a;
        out[half + k] = d;
    }
}

fn synthesize_line(basis: &WaveletBasis, y: &[f64], out: &mut [f64]) {
    let m = y.len();
    let half = m / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let (a, d) = (y[k], y[half + k]);
        for (n, (hn, gn)) in basis.h.iter().zip(&basis.g).enumerate() {
            out[(2 * k + n) % m] += hn * a + gn * d;
        }
    }
}

/// Applies `op` to every line of a `m^d` block along each axis in turn.
fn separable<F>(block: &mut [f64], m: usize, d: usize, op: F)
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let lines = block.len() / m;
        let results: Vec<Vec<f64>> = (0..lines)
            .into_par_iter()
            .with_min_len(64)
            .map(|l| {
                let (outer, inner) = (l / stride, l % stride);
                let base = outer * stride * m + inner;
                let line: Vec<f64> = (0..m).map(|i| block[base + i * stride]).collect();
                let mut out = vec![0.0; m];
                op(&line, &mut out);
                out
            })
            .collect();
        for (l, out) in results.into_iter().enumerate() {
            let (outer, inner) = (l / stride, l % stride);
            let base = outer * stride * m + inner;
            for (i, v) in out.into_iter().enumerate() {
                block[base + i * stride] = v;
            }
        }
    }
}

/// Copies the sub-band of gender `g` out of a transformed `m^d` block.
fn extract(block: &[f64], m: usize, d: usize, g: Gender) -> Vec<f64> {
    let half = m / 2;
    let n = half.pow(d as u32);
    (0..n)
        .map(|i| block[band_index(i, half, m, d, g)])
        .collect()
}

fn insert(block: &mut [f64], m: usize, d: usize, g: Gender, values: &[f64]) {
    let half = m / 2;
    for (i, v) in values.iter().enumerate() {
        block[band_index(i, half, m, d, g)] = *v;
    }
}

/// Block index of entry `i` (row-major in a `half^d` band) of gender `g`.
fn band_index(mut i: usize, half: usize, m: usize, d: usize, g: Gender) -> usize {
    let mut idx = 0;
    let mut mult = 1;
    for axis in (0..d).rev() {
        let c = i % half;
        i /= half;
        let off = if g >> axis & 1 == 1 { half } else { 0 };
        idx += (c + off) * mult;
        mult *= m;
    }
    idx
}

pub fn analyze(field: &GridField, basis: &WaveletBasis, levels: usize) -> Result<CoeffPyramid> {
    let spec = field.spec;
    check_levels(&spec, levels)?;
    let d = spec.d;
    let scale = ((spec.j as usize * d) as f64 / 2.0).exp2();
    let mut block: Vec<f64> = field.values.iter().map(|v| v * scale).collect();
    let mut m = spec.cells_per_axis();
    let mut details: Vec<Vec<Band>> = Vec::with_capacity(levels);
    for step in 0..levels {
        separable(&mut block, m, d, |x, out| analyze_line(basis, x, out));
        let j = spec.j as i32 - 1 - step as i32;
        let level: Vec<Band> = genders(d, false)
            .into_iter()
            .map(|g| Band {
                scale: j,
                gender: g,
                per_axis: m / 2,
                coeffs: extract(&block, m, d, g),
            })
            .collect();
        details.push(level);
        block = extract(&block, m, d, 0);
        m /= 2;
    }
    let mut bands = vec![Band {
        scale: spec.j as i32 - levels as i32,
        gender: 0,
        per_axis: m,
        coeffs: block,
    }];
    for level in details.into_iter().rev() {
        bands.extend(level);
    }
    Ok(CoeffPyramid {
        basis: basis.n,
        spec,
        levels,
        bands,
        model_tag: field.model_tag.clone(),
        seed: field.seed,
    })
}

pub fn synthesize(pyramid: &CoeffPyramid, basis: &WaveletBasis) -> Result<GridField> {
    if pyramid.basis != basis.n {
        return Err(invalid(format!(
            "pyramid analysed with DB{} cannot be synthesized with DB{}",
            pyramid.basis, basis.n
        )));
    }
    let spec = pyramid.spec;
    check_levels(&spec, pyramid.levels)?;
    let d = spec.d;
    let father = pyramid
        .bands
        .iter()
        .find(|b| b.gender == 0)
        .ok_or_else(|| Error::Shape("pyramid has no father band".into()))?;
    let mut block = father.coeffs.clone();
    let mut m = father.per_axis;
    for scale in pyramid.scales() {
        let m2 = 2 * m;
        let mut next = vec![0.0; m2.pow(d as u32)];
        insert(&mut next, m2, d, 0, &block);
        for band in pyramid.bands_at(scale).filter(|b| b.gender != 0) {
            if band.coeffs.len() != block.len() {
                return Err(Error::Shape(format!("band at scale {scale} has wrong size")));
            }
            insert(&mut next, m2, d, band.gender, &band.coeffs);
        }
        separable(&mut next, m2, d, |y, out| synthesize_line(basis, y, out));
        block = next;
        m = m2;
    }
    let scale = ((spec.j as usize * d) as f64 / 2.0).exp2();
    let values = block.into_iter().map(|v| v / scale).collect();
    Ok(GridField {
        spec,
        values,
        model_tag: pyramid.model_tag.clone(),
        seed: pyramid.seed,
    })
}

/// Pyramid of a Dirac mass `amplitude · δ(· - x_cell)` placed at the cell
/// with flat index `position`, analysed over all `J` levels.
pub fn dirac_pyramid(
    spec: GridSpec,
    basis: &WaveletBasis,
    position: usize,
    amplitude: f64,
) -> Result<CoeffPyramid> {
    spec.validate()?;
    if position >= spec.total_cells() {
        return Err(invalid(format!("cell {position} outside the grid")));
    }
    let mut field = GridField::zeros(spec);
    field.model_tag = "dirac".into();
    // a unit mass puts increment 1 on its cell
    field.values[position] = amplitude;
    analyze(&field, basis, spec.j as usize)
}
