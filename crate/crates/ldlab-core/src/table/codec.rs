//! Binary table format.
//!
//! Layout: magic `LDT1` (4 bytes) · version (1 byte, value 1) · level `k`
//! (1 byte) · for `m = 1 .. 2^k−1` ascending: period `p_m` (u32 LE) followed
//! by the `p_m` row values (u32 LE each) · trailer: CRC-32 (IEEE) of every
//! payload byte after the magic, u32 LE.
//!
//! The CRC catches any single-byte corruption anywhere outside the magic
//! (and the magic check catches the rest); decoding additionally validates
//! row shape so a well-formed checksum can't smuggle in an impossible table.

use std::path::Path;

use thiserror::Error;

use super::{LaverTable, TableError};

pub(crate) const MAGIC: &[u8; 4] = b"LDT1";
pub(crate) const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a table file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("corrupt table file: {detail}")]
    Corrupt { detail: String },
}

impl CodecError {
    pub(crate) fn corrupt(detail: impl Into<String>) -> CodecError {
        CodecError::Corrupt { detail: detail.into() }
    }
}

pub(crate) fn encode(t: &LaverTable) -> Vec<u8> {
    let mut payload = Vec::with_capacity(2 + 4 * (t.data.len() + t.order() as usize));
    payload.push(VERSION);
    payload.push(t.level());
    for m in 1..t.order() {
        let row = t.row_values(m).expect("row in range");
        payload.extend_from_slice(&(row.len() as u32).to_le_bytes());
        for &v in row {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(4 + payload.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u32(&mut self) -> Result<u32, CodecError> {
        let end = self.pos + 4;
        if end > self.bytes.len() {
            return Err(CodecError::corrupt("truncated row data"));
        }
        let v = u32::from_le_bytes(self.bytes[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<LaverTable, TableError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(CodecError::BadMagic.into());
    }
    if bytes.len() < 4 + 2 + 4 {
        return Err(CodecError::corrupt("file shorter than any valid table").into());
    }
    let payload = &bytes[4..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(CodecError::ChecksumMismatch { stored, computed }.into());
    }
    if payload[0] != VERSION {
        return Err(CodecError::UnsupportedVersion(payload[0]).into());
    }
    let k = payload[1];
    if k == 0 || k > super::MAX_LEVEL {
        return Err(CodecError::corrupt(format!("level {k} out of range")).into());
    }
    let n: u32 = 1 << k;
    let mut cur = Cursor { bytes: payload, pos: 2 };
    let mut rows = Vec::with_capacity(n as usize - 1);
    for m in 1..n {
        let p = cur.u32()?;
        if p as usize > cur.remaining() / 4 {
            return Err(CodecError::corrupt(format!("row {m} period {p} overruns file")).into());
        }
        let mut row = Vec::with_capacity(p as usize);
        for _ in 0..p {
            row.push(cur.u32()?);
        }
        rows.push(row);
    }
    if cur.remaining() != 0 {
        return Err(CodecError::corrupt(format!("{} trailing bytes", cur.remaining())).into());
    }
    LaverTable::from_rows(k, rows)
}

pub(crate) fn save_table(t: &LaverTable, path: &Path) -> Result<(), TableError> {
    std::fs::write(path, encode(t)).map_err(CodecError::from)?;
    Ok(())
}

pub(crate) fn load_table(path: &Path) -> Result<LaverTable, TableError> {
    let bytes = std::fs::read(path).map_err(CodecError::from)?;
    decode(&bytes)
}
