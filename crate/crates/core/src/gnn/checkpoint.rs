//! Model checkpoint serialization.
//!
//! Flat binary container: a header carrying the model kind and tensor
//! dimensions, followed by every weight tensor as 64-bit little-endian
//! reals in declaration order (encoder layers, then head/discriminator).

use crate::graph::Graph;
use crate::linalg::Mat;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

use super::{GnnError, Model, ModelKind};

const MAGIC: &[u8; 4] = b"UGSC";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u16),
    #[error("truncated checkpoint")]
    Truncated,
    #[error(transparent)]
    Model(#[from] GnnError),
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Writes a model checkpoint.
pub fn save_checkpoint(model: &Model, path: &Path) -> Result<(), CheckpointError> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (kind_byte, k, collapse) = match model {
        Model::Dmon(m) => (0u8, m.k() as u32, m.head.collapse_weight),
        Model::Dgi(_) => (1u8, 0u32, 0.0),
    };
    out.push(kind_byte);
    out.extend_from_slice(&k.to_le_bytes());
    out.extend_from_slice(&collapse.to_le_bytes());
    let tensors = model.params();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in &tensors {
        out.extend_from_slice(&(t.rows as u32).to_le_bytes());
        out.extend_from_slice(&(t.cols as u32).to_le_bytes());
    }
    for t in &tensors {
        for v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(&out).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a checkpoint back, rebinding the encoder to `graph` (the
/// normalized-adjacency cache is rebuilt, so the graph must match the one
/// the model was trained on).
pub fn load_checkpoint(path: &Path, graph: &Graph) -> Result<Model, CheckpointError> {
    let buf = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let kind_byte = r.take(1)?[0];
    let k = r.u32()? as usize;
    let collapse = r.f64()?;
    let n_tensors = r.u32()? as usize;
    let mut shapes = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        shapes.push((rows, cols));
    }
    let mut tensors = Vec::with_capacity(n_tensors);
    for (rows, cols) in shapes {
        let mut m = Mat::zeros(rows, cols);
        for v in &mut m.data {
            *v = r.f64()?;
        }
        tensors.push(m);
    }
    let kind = match kind_byte {
        0 => ModelKind::Dmon,
        1 => ModelKind::Dgi,
        _ => return Err(CheckpointError::BadMagic),
    };
    Ok(Model::from_tensors(kind, graph, tensors, k, collapse)?)
}
