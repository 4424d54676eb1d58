//! The LWNF binary container.
//!
//! Header layout (little endian): magic `LWNF`, version `u32`, `d: u8`,
//! `J: u16`, `L: f64`, one `u64` cell count per axis, model tag as a `u32`
//! byte length followed by UTF-8, seed `u64`. Version 1 files continue with
//! the field values as `f64` row-major; version 2 files hold a coefficient
//! pyramid (see [`crate::wavelet`]).

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::sampler::GridSpec;

pub const MAGIC: [u8; 4] = *b"LWNF";
pub const VERSION_FIELD: u32 = 1;
pub const VERSION_PYRAMID: u32 = 2;

/// Longest model tag accepted when reading.
const MAX_TAG: u32 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub version: u32,
    pub spec: GridSpec,
    pub model_tag: String,
    pub seed: u64,
}

pub fn write_header<W: Write>(w: &mut W, header: &Header) -> Result<()> {
    let spec = &header.spec;
    w.write_all(&MAGIC)?;
    w.write_all(&header.version.to_le_bytes())?;
    w.write_all(&[spec.d as u8])?;
    w.write_all(&(spec.j as u16).to_le_bytes())?;
    w.write_all(&spec.half_width.to_le_bytes())?;
    let n = spec.cells_per_axis() as u64;
    for _ in 0..spec.d {
        w.write_all(&n.to_le_bytes())?;
    }
    let tag = header.model_tag.as_bytes();
    w.write_all(&(tag.len() as u32).to_le_bytes())?;
    w.write_all(tag)?;
    w.write_all(&header.seed.to_le_bytes())?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic bytes {magic:02X?}")));
    }
    let version = read_u32(r)?;
    if version != VERSION_FIELD && version != VERSION_PYRAMID {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let d = read_u8(r)? as usize;
    let j = read_u16(r)? as u32;
    let half_width = read_f64(r)?;
    let spec = GridSpec::new(d, j, half_width)
        .map_err(|e| Error::Format(format!("invalid grid in header: {e}")))?;
    for axis in 0..d {
        let n = read_u64(r)?;
        if n != spec.cells_per_axis() as u64 {
            return Err(Error::Format(format!(
                "axis {axis} has {n} cells, grid implies {}",
                spec.cells_per_axis()
            )));
        }
    }
    let len = read_u32(r)?;
    if len > MAX_TAG {
        return Err(Error::Format(format!("model tag length {len} too large")));
    }
    let mut tag = vec![0u8; len as usize];
    read_exact(r, &mut tag)?;
    let model_tag =
        String::from_utf8(tag).map_err(|_| Error::Format("model tag is not UTF-8".into()))?;
    let seed = read_u64(r)?;
    Ok(Header {
        version,
        spec,
        model_tag,
        seed,
    })
}

pub(crate) fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    read_exact(r, &mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Fails unless the reader is exhausted.
pub(crate) fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after payload".into())),
    }
}

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Format("file is truncated".into()),
        _ => Error::Io(e),
    })
}

pub(crate) fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

pub(crate) fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
