//! Field container files: one line of JSON metadata, then raw little-endian
//! `f64` values in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format_version: u32,
    pub dim: usize,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub endian: String,
    pub order: String,
}

impl FieldHeader {
    pub fn for_grid(grid: &PeriodicGrid) -> Self {
        FieldHeader {
            format_version: FORMAT_VERSION,
            dim: grid.dim(),
            shape: grid.shape().to_vec(),
            dtype: "f64".into(),
            endian: "little".into(),
            order: "row-major".into(),
        }
    }

    fn validate(&self) -> Result<PeriodicGrid> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format_version {}", self.format_version)));
        }
        if self.dtype != "f64" || self.endian != "little" || self.order != "row-major" {
            return Err(Error::Format(format!(
                "unsupported layout {}/{}/{}",
                self.dtype, self.endian, self.order
            )));
        }
        if self.dim != self.shape.len() {
            return Err(Error::Format(format!(
                "dim {} disagrees with shape of length {}",
                self.dim,
                self.shape.len()
            )));
        }
        PeriodicGrid::new(self.shape.clone())
    }
}

/// Serializes a field into `out`.
pub fn write_field(field: &ScalarField, mut out: impl Write) -> Result<()> {
    let header = serde_json::to_string(&FieldHeader::for_grid(field.grid()))?;
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(field.len() * 8);
    for v in field.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

/// Parses a field written by [`write_field`].
pub fn read_field(input: impl Read) -> Result<ScalarField> {
    let mut reader = BufReader::new(input);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header: FieldHeader = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    let grid = header.validate()?;
    let mut bytes = Vec::with_capacity(grid.len() * 8);
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Format(format!(
            "expected {} bytes of data, found {}",
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    ScalarField::new(grid, values)
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_field(File::open(path)?)
}

/// Writes `bytes` to `path` via a temporary file in the same directory and a
/// rename, so the target never holds a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = BufWriter::new(Vec::with_capacity(field.len() * 8 + 128));
    write_field(field, &mut buf)?;
    let bytes = buf.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}
