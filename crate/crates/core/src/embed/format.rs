//! `AEMB` v1 layout, all integers little-endian:
//!
//! ```text
//! "AEMB" | u32 version=1 | u32 dim | u32 count | u16 name_len | name (UTF-8)
//! count × dim × f32 (row-major)
//! count × (u16 len | clip id (UTF-8))
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{EmbedError, EmbeddingBackendId, EmbeddingSet};

pub const MAGIC: &[u8; 4] = b"AEMB";
pub const VERSION: u32 = 1;

pub fn write_embeddings<W: Write>(set: &EmbeddingSet, sink: &mut W) -> Result<(), EmbedError> {
    let mut buf = Vec::with_capacity(20 + set.as_slice().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&u32_len(set.dim(), "dimension")?.to_le_bytes());
    buf.extend_from_slice(&u32_len(set.len(), "row count")?.to_le_bytes());
    put_str(&mut buf, &set.backend().name, "backend name")?;
    for v in set.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for id in set.clip_ids() {
        put_str(&mut buf, id, "clip id")?;
    }
    sink.write_all(&buf).map_err(|source| EmbedError::Io {
        path: "<sink>".into(),
        source,
    })
}

pub fn read_embeddings<R: Read>(source: &mut R) -> Result<EmbeddingSet, EmbedError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes).map_err(|source| EmbedError::Io {
        path: "<source>".into(),
        source,
    })?;
    let mut cur = Reader { bytes: &bytes, pos: 0 };

    if cur.take(4).ok() != Some(MAGIC.as_slice()) {
        return Err(EmbedError::BadMagic);
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(EmbedError::UnsupportedVersion(version));
    }
    let dim = cur.u32()? as usize;
    let count = cur.u32()? as usize;
    if dim == 0 {
        return Err(EmbedError::ZeroDim);
    }
    if count == 0 {
        return Err(EmbedError::ZeroCount);
    }
    let name = cur.string("backend name")?;
    let n_values = dim.checked_mul(count).ok_or_else(|| {
        EmbedError::PayloadLength(format!("{count} rows of dimension {dim} overflow"))
    })?;
    let payload = cur.take(n_values.saturating_mul(4)).map_err(|_| {
        EmbedError::PayloadLength(format!(
            "header declares {count}×{dim} floats but only {} bytes remain",
            bytes.len() - cur.pos
        ))
    })?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(EmbedError::NonFinite {
            row: i / dim,
            col: i % dim,
        });
    }
    let mut clip_ids = Vec::with_capacity(count);
    for _ in 0..count {
        clip_ids.push(cur.string("clip id")?);
    }
    if cur.pos != bytes.len() {
        return Err(EmbedError::PayloadLength(format!(
            "{} trailing bytes after clip ids",
            bytes.len() - cur.pos
        )));
    }
    let backend = EmbeddingBackendId::new(name, dim, None)?;
    EmbeddingSet::new(backend, data, clip_ids)
}

pub fn write_embeddings_file(set: &EmbeddingSet, path: &Path) -> Result<(), EmbedError> {
    let mut buf = Vec::new();
    write_embeddings(set, &mut buf)?;
    std::fs::write(path, buf).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_embeddings_file(path: &Path) -> Result<EmbeddingSet, EmbedError> {
    let bytes = std::fs::read(path).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_embeddings(&mut bytes.as_slice())
}

fn u32_len(n: usize, what: &'static str) -> Result<u32, EmbedError> {
    u32::try_from(n).map_err(|_| EmbedError::PayloadLength(format!("{what} {n} exceeds u32")))
}

fn put_str(buf: &mut Vec<u8>, s: &str, what: &'static str) -> Result<(), EmbedError> {
    let len = u16::try_from(s.len()).map_err(|_| EmbedError::StringTooLong { what, len: s.len() })?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbedError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| EmbedError::PayloadLength("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, EmbedError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self, what: &'static str) -> Result<String, EmbedError> {
        let b = self.take(2)?;
        let len = usize::from(u16::from_le_bytes([b[0], b[1]]));
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| EmbedError::InvalidUtf8(what))
    }
}
