//! EMB1 binary layout (all integers little-endian):
//!
//! ```text
//! "EMB1" | u32 version=1 | u32 n_samples | u32 dim | u32 n_labels
//! n_labels x (u16 byte length, UTF-8 name)
//! n_samples x (u32 label, dim x f32)
//! ```

use std::path::Path;

use super::{Dataset, EmbeddingRecord};
use crate::{Error, Result};

pub const EMB1_MAGIC: &[u8; 4] = b"EMB1";
pub const EMB1_VERSION: u32 = 1;

pub fn encode_emb1(ds: &Dataset) -> Result<Vec<u8>> {
    let dim = ds.dim();
    let count = |n: usize, what: &str| {
        u32::try_from(n).map_err(|_| Error::InvalidInput(format!("{what} {n} exceeds u32")))
    };
    let mut out = Vec::with_capacity(20 + ds.len() * (4 + 4 * dim));
    out.extend_from_slice(EMB1_MAGIC);
    out.extend_from_slice(&EMB1_VERSION.to_le_bytes());
    out.extend_from_slice(&count(ds.len(), "sample count")?.to_le_bytes());
    out.extend_from_slice(&count(dim, "dimension")?.to_le_bytes());
    out.extend_from_slice(&count(ds.num_labels(), "label count")?.to_le_bytes());
    for name in &ds.manifest.label_names {
        let len = u16::try_from(name.len())
            .map_err(|_| Error::InvalidInput(format!("label name longer than 65535 bytes: {name:.20}...")))?;
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
    }
    for r in &ds.records {
        out.extend_from_slice(&(r.label as u32).to_le_bytes());
        for &v in &r.vector {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::CorruptFile(format!("truncated while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode_emb1(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < 4 || &bytes[..4] != EMB1_MAGIC {
        let found = &bytes[..bytes.len().min(4)];
        return Err(Error::Format(format!("bad magic {found:?}, expected \"EMB1\"")));
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u32("version")?;
    if version != EMB1_VERSION {
        return Err(Error::Format(format!("unsupported EMB1 version {version}")));
    }
    let n_samples = r.u32("sample count")? as usize;
    let dim = r.u32("dimension")? as usize;
    let n_labels = r.u32("label count")? as usize;
    let mut names = Vec::with_capacity(n_labels.min(1 << 16));
    for i in 0..n_labels {
        let len = r.u16("label name length")? as usize;
        let raw = r.take(len, "label name")?;
        let name = std::str::from_utf8(raw)
            .map_err(|_| Error::CorruptFile(format!("label name {i} is not UTF-8")))?;
        names.push(name.to_string());
    }
    let record_bytes = 4 + 4 * dim;
    let remaining = bytes.len() - r.pos;
    if remaining / record_bytes.max(1) < n_samples {
        return Err(Error::CorruptFile(format!(
            "header declares {n_samples} records but only {} fit in the payload",
            remaining / record_bytes.max(1)
        )));
    }
    let mut records = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = r.u32("label")? as usize;
        let name = names.get(label).ok_or_else(|| {
            Error::CorruptFile(format!("record {i} has label {label} but only {n_labels} labels"))
        })?;
        let vector = r
            .take(4 * dim, "vector")?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        records.push(EmbeddingRecord {
            label,
            label_name: name.clone(),
            vector,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::CorruptFile(format!(
            "{} trailing bytes after {n_samples} records",
            bytes.len() - r.pos
        )));
    }
    Dataset::new(names, dim, None, records).map_err(|e| Error::CorruptFile(e.to_string()))
}

pub fn write_emb1(path: &Path, ds: &Dataset) -> Result<()> {
    std::fs::write(path, encode_emb1(ds)?)?;
    Ok(())
}

pub fn read_emb1(path: &Path) -> Result<Dataset> {
    decode_emb1(&std::fs::read(path)?)
}
