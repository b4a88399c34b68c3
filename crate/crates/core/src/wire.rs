//! Length-prefixed binary encoding shared by key, signature and frame formats.
//!
//! Byte strings are written as a 4-byte big-endian length followed by the
//! bytes; scalars are 4-byte big-endian unless a format says otherwise.

use thiserror::Error;

/// Upper bound on any single length field (16 MiB).
pub const MAX_FIELD_LEN: usize = 16 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("truncated input: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("{0} trailing bytes after decoding")]
    TrailingBytes(usize),
    #[error("length field {0} exceeds limit")]
    LengthOverflow(usize),
    #[error("invalid value: {0}")]
    Invalid(String),
}

pub fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_be_bytes());
}

pub fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_be_bytes());
}

pub fn put_bytes(buf: &mut Vec<u8>, bytes: &[u8]) {
    assert!(bytes.len() <= MAX_FIELD_LEN, "field too long to encode");
    put_u32(buf, bytes.len() as u32);
    buf.extend_from_slice(bytes);
}

/// Encodes a list of byte strings as a count followed by each string length-prefixed.
pub fn put_list(buf: &mut Vec<u8>, items: &[Vec<u8>]) {
    put_u32(buf, items.len() as u32);
    for item in items {
        put_bytes(buf, item);
    }
}

/// Cursor over an encoded buffer.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.remaining() < n {
            return Err(WireError::Truncated {
                offset: self.pos,
                needed: n - self.remaining(),
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], WireError> {
        let len = self.u32()? as usize;
        if len > MAX_FIELD_LEN {
            return Err(WireError::LengthOverflow(len));
        }
        self.take(len)
    }

    pub fn list(&mut self) -> Result<Vec<Vec<u8>>, WireError> {
        let count = self.u32()? as usize;
        // every item needs at least its 4-byte length
        if count > self.remaining() / 4 {
            return Err(WireError::LengthOverflow(count));
        }
        (0..count).map(|_| self.bytes().map(<[u8]>::to_vec)).collect()
    }

    pub fn string(&mut self) -> Result<String, WireError> {
        let raw = self.bytes()?;
        String::from_utf8(raw.to_vec()).map_err(|_| WireError::Invalid("non-utf8 string".into()))
    }

    pub fn finish(self) -> Result<(), WireError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(WireError::TrailingBytes(n)),
        }
    }
}
