//! Binary formats.
//!
//! TNSR: the 6 magic bytes `TNSR1\n`, three little-endian `u64` dimensions,
//! then `p1 p2 p3` little-endian `f64` values in linear tensor order.
//!
//! Regression datasets: one JSON header line `{"n":..,"dims":[..],"sigma":..}`
//! followed by `n` records, each a tensor payload (the TNSR value block, no
//! magic or dims) and an 8-byte little-endian response.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::RegressionDataset;
use crate::tensor::Tensor3;

pub const TNSR_MAGIC: &[u8; 6] = b"TNSR1\n";

fn format_err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Format { offset: offset as u64, message: message.into() })
}

pub fn write_tensor_to(mut w: impl Write, t: &Tensor3) -> Result<()> {
    w.write_all(TNSR_MAGIC)?;
    for d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    write_values(&mut w, t.data())?;
    Ok(())
}

fn write_values(w: &mut impl Write, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Cursor over an in-memory buffer that reports offsets on truncation.
struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return format_err(
                self.bytes.len(),
                format!("truncated input while reading {what} (needed {n} bytes at offset {})", self.pos),
            );
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let start = self.pos;
        let bytes = self.take(count.checked_mul(8).ok_or_else(|| Error::Format {
            offset: start as u64,
            message: "value count overflows".into(),
        })?, what)?;
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return format_err(start + 8 * i, format!("non-finite value in {what}"));
        }
        Ok(values)
    }
}

pub fn parse_tensor(bytes: &[u8]) -> Result<Tensor3> {
    let mut cur = ByteCursor { bytes, pos: 0 };
    let magic = cur.take(TNSR_MAGIC.len(), "magic")?;
    if magic != TNSR_MAGIC {
        return format_err(0, "bad magic: not a TNSR1 file");
    }
    let mut dims = [0usize; 3];
    for (j, d) in dims.iter_mut().enumerate() {
        let off = cur.pos;
        let v = cur.u64("dimension")?;
        if v == 0 {
            return format_err(off, format!("dimension {} is zero", j + 1));
        }
        *d = usize::try_from(v).or_else(|_| format_err(off, "dimension too large"))?;
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format { offset: 6, message: "dimensions overflow".into() })?;
    let values = cur.f64s(count, "tensor values")?;
    if cur.pos != bytes.len() {
        return format_err(cur.pos, format!("{} trailing bytes after tensor values", bytes.len() - cur.pos));
    }
    Tensor3::from_vec(dims, values)
}

pub fn read_tensor_from(mut r: impl Read) -> Result<Tensor3> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_tensor(&bytes)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor_to(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    read_tensor_from(BufReader::new(File::open(path)?))
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub n: usize,
    pub dims: [usize; 3],
    pub sigma: Option<f64>,
}

pub fn write_dataset_to(mut w: impl Write, data: &RegressionDataset) -> Result<()> {
    let header = DatasetHeader { n: data.n(), dims: data.dims(), sigma: data.sigma };
    let line = serde_json::to_string(&header).map_err(|e| Error::Argument(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    for (x, y) in data.covariates.iter().zip(&data.responses) {
        write_values(&mut w, x.data())?;
        w.write_all(&y.to_le_bytes())?;
    }
    Ok(())
}

pub fn parse_dataset_header(bytes: &[u8]) -> Result<(DatasetHeader, usize)> {
    let end = match bytes.iter().position(|&b| b == b'\n') {
        Some(e) => e,
        None => return format_err(bytes.len(), "missing newline after dataset header"),
    };
    let header: DatasetHeader = serde_json::from_slice(&bytes[..end])
        .or_else(|e| format_err(0, format!("invalid dataset header: {e}")))?;
    Ok((header, end + 1))
}

pub fn parse_dataset(bytes: &[u8]) -> Result<RegressionDataset> {
    let (header, start) = parse_dataset_header(bytes)?;
    if header.dims.iter().any(|&d| d == 0) {
        return format_err(0, "dataset dims must be positive");
    }
    let mut cur = ByteCursor { bytes, pos: start };
    let len: usize = header.dims.iter().product();
    let mut covariates = Vec::with_capacity(header.n);
    let mut responses = Vec::with_capacity(header.n);
    for i in 0..header.n {
        let x = cur.f64s(len, &format!("covariate {i}"))?;
        let y = cur.f64s(1, &format!("response {i}"))?;
        covariates.push(Tensor3::from_vec(header.dims, x)?);
        responses.push(y[0]);
    }
    if cur.pos != bytes.len() {
        return format_err(cur.pos, "trailing bytes after dataset records");
    }
    RegressionDataset::new(covariates, responses, header.sigma)
}

pub fn write_dataset(path: impl AsRef<Path>, data: &RegressionDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dataset_to(&mut w, data)?;
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<RegressionDataset> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    parse_dataset(&bytes)
}
