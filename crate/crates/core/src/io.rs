//! Binary field dumps: a one-line JSON header followed by little-endian
//! `(re, im)` pairs in row-major node order.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Boundary, ComplexField, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Complex128,
    Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub dim: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    pub dtype: Precision,
    pub boundary: Boundary,
}

impl DumpHeader {
    fn for_grid(grid: &Grid, dtype: Precision) -> Self {
        Self {
            dim: grid.dim(),
            a: grid.axes().iter().map(|ax| ax.lower).collect(),
            b: grid.axes().iter().map(|ax| ax.upper).collect(),
            m: grid.axes().iter().map(|ax| ax.intervals).collect(),
            dtype,
            boundary: grid.boundary(),
        }
    }

    fn grid(&self) -> Result<Grid> {
        if self.a.len() != self.dim || self.b.len() != self.dim || self.m.len() != self.dim {
            return Err(Error::Format("per-axis arrays do not match dim".into()));
        }
        let axes = (0..self.dim)
            .map(|k| Axis::new(self.a[k], self.b[k], self.m[k]))
            .collect::<Result<Vec<_>>>()?;
        Grid::with_boundary(axes, self.boundary)
    }
}

pub fn write_field<W: Write>(mut out: W, field: &ComplexField, dtype: Precision) -> Result<()> {
    let header = DumpHeader::for_grid(field.grid(), dtype);
    let line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(line.as_bytes())?;
    out.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(field.values().len() * 16);
    for z in field.values().iter() {
        match dtype {
            Precision::Complex128 => {
                bytes.extend_from_slice(&z.re.to_le_bytes());
                bytes.extend_from_slice(&z.im.to_le_bytes());
            }
            Precision::Complex64 => {
                bytes.extend_from_slice(&(z.re as f32).to_le_bytes());
                bytes.extend_from_slice(&(z.im as f32).to_le_bytes());
            }
        }
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_field<R: BufRead>(mut input: R) -> Result<ComplexField> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
    let grid = header.grid()?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let width = match header.dtype {
        Precision::Complex128 => 16,
        Precision::Complex64 => 8,
    };
    let n = grid.len();
    if bytes.len() != n * width {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            n * width,
            bytes.len()
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(width)
        .map(|c| match header.dtype {
            Precision::Complex128 => Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8-byte slice")),
                f64::from_le_bytes(c[8..].try_into().expect("8-byte slice")),
            ),
            Precision::Complex64 => Complex64::new(
                f32::from_le_bytes(c[..4].try_into().expect("4-byte slice")) as f64,
                f32::from_le_bytes(c[4..].try_into().expect("4-byte slice")) as f64,
            ),
        })
        .collect();
    let arr = ArrayD::from_shape_vec(IxDyn(&grid.shape()), values).map_err(|e| Error::Format(e.to_string()))?;
    ComplexField::from_values(&grid, arr)
}

pub fn save_field(path: &Path, field: &ComplexField, dtype: Precision) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(&mut w, field, dtype)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<ComplexField> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_complex128() {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        let f = ComplexField::from_fn(&g, |x| Complex64::new(x[0], x[1] * x[0]));
        let mut buf = Vec::new();
        write_field(&mut buf, &f, Precision::Complex128).unwrap();
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = Grid::uniform(1, -1.0, 1.0, 8).unwrap();
        let f = ComplexField::from_real_fn(&g, |x| 1.0 - x[0] * x[0]);
        let mut buf = Vec::new();
        write_field(&mut buf, &f, Precision::Complex64).unwrap();
        buf.pop();
        assert!(matches!(read_field(&buf[..]), Err(Error::Format(_))));
    }
}
