//! Flat little-endian checkpoint of named tensors.
//!
//! ```text
//! b"OSWLCKPT"  u32 version=1  u32 count
//! per tensor: u32 name_len, name (utf-8), u8 group, u32 ndim, u64 dims[ndim], f64 data[prod(dims)]
//! ```

use super::params::{Group, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"OSWLCKPT";
pub const VERSION: u32 = 1;

pub fn to_bytes(store: &ParamStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(store.len() as u32).to_le_bytes());
    for p in store.params() {
        out.extend_from_slice(&(p.name.len() as u32).to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.push(p.group.code());
        out.extend_from_slice(&(p.value.shape().len() as u32).to_le_bytes());
        for &d in p.value.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for x in p.value.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn corrupt(offset: usize, message: &str) -> Error {
    Error::Parse {
        line: 0,
        offset,
        message: message.to_string(),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| corrupt(self.pos, "truncated checkpoint"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Decoded `(name, group, value)` entries in file order.
pub fn from_bytes(buf: &[u8]) -> Result<Vec<(String, Group, Tensor)>> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(corrupt(r.pos, "not a checkpoint (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(corrupt(8, &format!("unsupported checkpoint version {version}")));
    }
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| corrupt(r.pos, "tensor name is not utf-8"))?
            .to_string();
        let group = Group::from_code(r.take(1)?[0]).ok_or_else(|| corrupt(r.pos, "bad group code"))?;
        let ndim = r.u32()? as usize;
        let mut shape = Vec::with_capacity(ndim.min(8));
        for _ in 0..ndim {
            shape.push(r.u64()? as usize);
        }
        let numel = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .filter(|&n| n <= (buf.len() - r.pos) / 8)
            .ok_or_else(|| corrupt(r.pos, "tensor larger than the file"))?;
        let bytes = r.take(numel * 8)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push((name, group, Tensor::from_vec(&shape, data)?));
    }
    if r.pos != buf.len() {
        return Err(corrupt(r.pos, "trailing bytes after checkpoint"));
    }
    Ok(out)
}

/// Copies checkpoint values into a store with the same names, groups and shapes.
pub fn restore(store: &mut ParamStore, entries: Vec<(String, Group, Tensor)>) -> Result<()> {
    if entries.len() != store.len() {
        return Err(Error::Shape(format!(
            "checkpoint has {} tensors, model has {}",
            entries.len(),
            store.len()
        )));
    }
    for (p, (name, group, value)) in store.params_mut().iter_mut().zip(entries) {
        if p.name != name || p.group != group || p.value.shape() != value.shape() {
            return Err(Error::Shape(format!("checkpoint tensor {name:?} does not match {:?}", p.name)));
        }
        p.value = value;
    }
    Ok(())
}

pub fn save(store: &ParamStore, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(store)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<Vec<(String, Group, Tensor)>> {
    let buf = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&buf)
}
