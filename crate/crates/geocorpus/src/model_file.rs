//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "GLID" | u32 version | u32 feature_dim | u32 hidden_dim | u32 n_labels
//! | n_labels × (u32 byte length, UTF-8 label)
//! | w1 (hidden_dim × feature_dim, row-major) | b1 | w2 (n_labels × hidden_dim) | b2   as f32
//! | u32 min_chars | u64 seed | u32 epochs | f64 learning_rate | u32 batch_size
//! ```
//!
//! The trailing block carries the training settings so a loaded model
//! compares equal to the one that was saved.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use geocorpus_core::lid::{LanguageLabel, LidError, LidModel, ModelConfig};

pub const MAGIC: &[u8; 4] = b"GLID";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file: bad magic bytes")]
    BadMagic,
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("model file is truncated")]
    TruncatedFile,
    #[error("{0} unexpected bytes after the model")]
    TrailingBytes(usize),
    #[error("label {0} is not a valid language code")]
    BadLabel(String),
    #[error("invalid model: {0}")]
    Invalid(#[from] LidError),
}

pub fn write_model<W: Write>(model: &LidModel, mut out: W) -> io::Result<()> {
    let cfg = model.config();
    let net = model.network();
    out.write_all(MAGIC)?;
    for v in [
        FORMAT_VERSION,
        cfg.feature_dim,
        cfg.hidden_dim,
        model.labels().len() as u32,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for label in model.labels() {
        let s = label.as_str().as_bytes();
        out.write_all(&(s.len() as u32).to_le_bytes())?;
        out.write_all(s)?;
    }
    // Rows of w1 are gathered one at a time; the in-memory layout is
    // feature-major.
    let mut row = Vec::with_capacity(cfg.feature_dim as usize * 4);
    for h in 0..cfg.hidden_dim as usize {
        row.clear();
        for f in 0..cfg.feature_dim as usize {
            row.extend_from_slice(&net.w1(h, f).to_le_bytes());
        }
        out.write_all(&row)?;
    }
    for part in [net.b1(), net.w2(), net.b2()] {
        for v in part {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.write_all(&cfg.min_chars.to_le_bytes())?;
    out.write_all(&cfg.seed.to_le_bytes())?;
    out.write_all(&cfg.epochs.to_le_bytes())?;
    out.write_all(&cfg.learning_rate.to_le_bytes())?;
    out.write_all(&cfg.batch_size.to_le_bytes())?;
    out.flush()
}

pub fn save_model(model: &LidModel, path: &Path) -> Result<(), ModelFileError> {
    let file = File::create(path)?;
    write_model(model, BufWriter::new(file))?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        if self.buf.len() < n {
            return Err(ModelFileError::TruncatedFile);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelFileError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, ModelFileError> {
        self.array().map(u32::from_le_bytes)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, ModelFileError> {
        let bytes = self.take(n.checked_mul(4).ok_or(ModelFileError::TruncatedFile)?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_model(bytes: &[u8]) -> Result<LidModel, ModelFileError> {
    let mut cur = Cursor { buf: bytes };
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    cur.take(4)?;
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(ModelFileError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let feature_dim = cur.u32()?;
    let hidden_dim = cur.u32()?;
    let n_labels = cur.u32()? as usize;

    let mut labels = Vec::new();
    for _ in 0..n_labels {
        let len = cur.u32()? as usize;
        let raw = cur.take(len)?;
        let s = String::from_utf8_lossy(raw);
        labels.push(
            s.parse::<LanguageLabel>()
                .map_err(|_| ModelFileError::BadLabel(s.into_owned()))?,
        );
    }

    let w1 = cur.f32s(hidden_dim as usize * feature_dim as usize)?;
    let b1 = cur.f32s(hidden_dim as usize)?;
    let w2 = cur.f32s(n_labels * hidden_dim as usize)?;
    let b2 = cur.f32s(n_labels)?;

    let config = ModelConfig {
        feature_dim,
        hidden_dim,
        min_chars: cur.u32()?,
        seed: cur.array().map(u64::from_le_bytes)?,
        epochs: cur.u32()?,
        learning_rate: cur.array().map(f64::from_le_bytes)?,
        batch_size: cur.u32()?,
    };
    if !cur.buf.is_empty() {
        return Err(ModelFileError::TrailingBytes(cur.buf.len()));
    }
    Ok(LidModel::from_parts(config, labels, &w1, b1, w2, b2)?)
}

pub fn load_model(path: &Path) -> Result<LidModel, ModelFileError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    read_model(&bytes)
}
