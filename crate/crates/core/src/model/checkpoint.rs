//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! "TRSAT"  u32 version
//! u32 encoder layers, u32 decoder layers, u32 channels, u32 heads, u32 ffn hidden
//! f64 tau, f64 epsilon threshold, f64 noise scale, u64 init seed
//! u32 parameter count
//! per parameter: u32 name length, name (UTF-8), u32 rows, u32 cols, rows*cols f64 (row-major)
//! ```

use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ModelConfig, ModelError, TrsatModel};
use crate::numeric::{DenseMatrix, ParamStore};

const MAGIC: &[u8; 5] = b"TRSAT";
pub const CHECKPOINT_VERSION: u32 = 1;

fn to_u32(v: usize, what: &str) -> Result<u32, ModelError> {
    u32::try_from(v).map_err(|_| ModelError::Checkpoint(format!("{what} {v} does not fit in u32")))
}

pub fn write_checkpoint(model: &TrsatModel, mut w: impl Write) -> Result<(), ModelError> {
    let c = model.config();
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for (what, v) in [
        ("encoder layers", c.num_encoder_layers),
        ("decoder layers", c.num_decoder_layers),
        ("channels", c.channels),
        ("heads", c.heads),
        ("ffn hidden", c.ffn_hidden),
    ] {
        w.write_all(&to_u32(v, what)?.to_le_bytes())?;
    }
    for v in [c.tau, c.epsilon_threshold, c.noise_scale] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&c.init_seed.to_le_bytes())?;
    w.write_all(&to_u32(model.params().len(), "parameter count")?.to_le_bytes())?;
    for (_, p) in model.params().iter() {
        w.write_all(&to_u32(p.name.len(), "name length")?.to_le_bytes())?;
        w.write_all(p.name.as_bytes())?;
        w.write_all(&to_u32(p.value.rows(), "rows")?.to_le_bytes())?;
        w.write_all(&to_u32(p.value.cols(), "cols")?.to_le_bytes())?;
        for v in p.value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(truncated)?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn usize(&mut self) -> Result<usize, ModelError> {
        Ok(self.u32()? as usize)
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

fn truncated(e: io::Error) -> ModelError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        ModelError::Checkpoint("truncated file".into())
    } else {
        ModelError::Io(e)
    }
}

/// Reads a checkpoint; the config stored in the file determines the architecture.
pub fn read_checkpoint(r: impl Read) -> Result<TrsatModel, ModelError> {
    let mut r = Reader { inner: r };
    if &r.bytes::<5>()? != MAGIC {
        return Err(ModelError::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(ModelError::CheckpointVersion { found: version, expected: CHECKPOINT_VERSION });
    }
    let config = ModelConfig {
        num_encoder_layers: r.usize()?,
        num_decoder_layers: r.usize()?,
        channels: r.usize()?,
        heads: r.usize()?,
        ffn_hidden: r.usize()?,
        tau: r.f64()?,
        epsilon_threshold: r.f64()?,
        noise_scale: r.f64()?,
        init_seed: u64::from_le_bytes(r.bytes()?),
    };
    config.validate()?;
    let expected = TrsatModel::zeroed(config.clone())?;
    let count = r.usize()?;
    if count != expected.params().len() {
        return Err(ModelError::Checkpoint(format!("{count} parameters stored, config needs {}", expected.params().len())));
    }
    let mut store = ParamStore::new();
    for (_, template) in expected.params().iter() {
        let len = r.usize()?;
        if len > 4096 {
            return Err(ModelError::Checkpoint(format!("implausible name length {len}")));
        }
        let mut name = vec![0u8; len];
        r.inner.read_exact(&mut name).map_err(truncated)?;
        let name = String::from_utf8(name).map_err(|_| ModelError::Checkpoint("parameter name is not UTF-8".into()))?;
        let (rows, cols) = (r.usize()?, r.usize()?);
        if name != template.name || (rows, cols) != template.value.shape() {
            return Err(ModelError::Checkpoint(format!(
                "parameter {name} {rows}x{cols} does not match expected {} {:?}",
                template.name,
                template.value.shape()
            )));
        }
        let data = (0..rows * cols).map(|_| r.f64()).collect::<Result<Vec<f64>, _>>()?;
        store.add(name, DenseMatrix::from_vec(rows, cols, data));
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(ModelError::Checkpoint("trailing bytes after last parameter".into()));
    }
    TrsatModel::from_parts(config, store)
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn save_checkpoint(model: &TrsatModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let file = fs::File::create(&tmp)?;
    write_checkpoint(model, BufWriter::new(&file))?;
    file.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TrsatModel, ModelError> {
    read_checkpoint(BufReader::new(fs::File::open(path)?))
}
