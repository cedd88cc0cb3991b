//! Binary checkpoint format.
//!
//! ```text
//! "DPCV"  u32 version  u64 config_len  config (JSON, UTF-8)
//! u32 tensor_count
//! per tensor: u32 name_len  name  u32 rank  u64 dims[rank]  f64 values[...]
//! ```
//! All integers and floats are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{DpCdvae, ParamStore, Tensor};

pub const MAGIC: &[u8; 4] = b"DPCV";
pub const VERSION: u32 = 1;

pub fn encode(config: &RunConfig, params: &ParamStore) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(config).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (_, name, t) in params.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&2u32.to_le_bytes());
        out.extend_from_slice(&(t.rows as u64).to_le_bytes());
        out.extend_from_slice(&(t.cols as u64).to_le_bytes());
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflow".into()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<(RunConfig, ParamStore)> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes; not a checkpoint".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version} (expected {VERSION})")));
    }
    let n = c.len()?;
    let config: RunConfig = serde_json::from_slice(c.take(n)?).map_err(|e| Error::Checkpoint(format!("config: {e}")))?;
    let count = c.u32()?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let n = c.u32()? as usize;
        let name = std::str::from_utf8(c.take(n)?).map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        let rank = c.u32()?;
        let dims: Vec<usize> = (0..rank).map(|_| c.len()).collect::<Result<_>>()?;
        let (rows, cols) = match dims.as_slice() {
            [] => (1, 1),
            [n] => (1, *n),
            [r, k] => (*r, *k),
            _ => return Err(Error::Checkpoint(format!("tensor {name} has rank {rank}"))),
        };
        let total = rows.checked_mul(cols).ok_or_else(|| Error::Checkpoint("tensor size overflow".into()))?;
        let raw = c.take(total.checked_mul(8).ok_or_else(|| Error::Checkpoint("tensor size overflow".into()))?)?;
        let data = raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
        store.add(name, Tensor::from_vec(rows, cols, data));
    }
    if c.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok((config, store))
}

pub fn save(path: &Path, config: &RunConfig, params: &ParamStore) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(config, params)?)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(RunConfig, ParamStore)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Loads a checkpoint and rebuilds the model it describes.
pub fn load_model(path: &Path) -> Result<(RunConfig, DpCdvae)> {
    let (config, params) = load(path)?;
    let model = DpCdvae::from_params(config.model.clone(), params)?;
    Ok((config, model))
}
