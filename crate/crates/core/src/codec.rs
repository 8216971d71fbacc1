//! Canonical length-prefixed encoding.
//!
//! Every field is written as a 4-byte big-endian length followed by the field
//! bytes. Integers are 8-byte big-endian, digests, keys and signatures are
//! lowercase hex. The same bytes are hashed and written to disk.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated input at offset {offset}")]
    Truncated { offset: usize },
    #[error("malformed field at offset {offset}: {what}")]
    Malformed { offset: usize, what: &'static str },
    #[error("{remaining} trailing bytes at offset {offset}")]
    Trailing { offset: usize, remaining: usize },
}

impl DecodeError {
    pub fn offset(&self) -> usize {
        match self {
            DecodeError::Truncated { offset }
            | DecodeError::Malformed { offset, .. }
            | DecodeError::Trailing { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, field: &[u8]) -> &mut Self {
        let len = u32::try_from(field.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(field);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_be_bytes())
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn hex(&mut self, raw: &[u8]) -> &mut Self {
        let encoded = hex::encode(raw);
        self.bytes(encoded.as_bytes())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let start = self.pos;
        let header = self
            .data
            .get(start..start + 4)
            .ok_or(DecodeError::Truncated { offset: start })?;
        let len = u32::from_be_bytes([header[0], header[1], header[2], header[3]]) as usize;
        let body = self
            .data
            .get(start + 4..start + 4 + len)
            .ok_or(DecodeError::Truncated { offset: start + 4 })?;
        self.pos = start + 4 + len;
        Ok(body)
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        let offset = self.pos;
        let raw = self.bytes()?;
        let arr: [u8; 8] = raw
            .try_into()
            .map_err(|_| DecodeError::Malformed { offset, what: "u64 width" })?;
        Ok(u64::from_be_bytes(arr))
    }

    pub fn str(&mut self) -> Result<String, DecodeError> {
        let offset = self.pos;
        let raw = self.bytes()?;
        core::str::from_utf8(raw)
            .map(String::from)
            .map_err(|_| DecodeError::Malformed { offset, what: "utf-8" })
    }

    pub fn hex(&mut self) -> Result<Vec<u8>, DecodeError> {
        let offset = self.pos;
        let raw = self.bytes()?;
        hex::decode(raw).map_err(|_| DecodeError::Malformed { offset, what: "hex" })
    }

    /// A list length, bounded by the remaining input so hostile counts cannot
    /// trigger huge allocations.
    pub fn count(&mut self) -> Result<usize, DecodeError> {
        let offset = self.pos;
        let n = self.u64()?;
        let remaining = (self.data.len() - self.pos) as u64;
        if n > remaining {
            return Err(DecodeError::Malformed { offset, what: "list length" });
        }
        Ok(n as usize)
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(DecodeError::Trailing { offset: self.pos, remaining: self.data.len() - self.pos })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_round_trip() {
        let mut enc = Encoder::new();
        enc.u64(42).str("addr").hex(&[0xde, 0xad]);
        let bytes = enc.finish();
        let mut dec = Decoder::new(&bytes);
        assert_eq!(dec.u64().unwrap(), 42);
        assert_eq!(dec.str().unwrap(), "addr");
        assert_eq!(dec.hex().unwrap(), vec![0xde, 0xad]);
        dec.finish().unwrap();
    }

    #[test]
    fn truncation_reports_offset() {
        let mut enc = Encoder::new();
        enc.u64(7).str("abcdef");
        let bytes = enc.finish();
        let cut = &bytes[..bytes.len() - 2];
        let mut dec = Decoder::new(cut);
        dec.u64().unwrap();
        assert_eq!(dec.str(), Err(DecodeError::Truncated { offset: 16 }));
    }

    #[test]
    fn length_prefix_is_big_endian() {
        let mut enc = Encoder::new();
        enc.bytes(b"xy");
        assert_eq!(enc.finish(), vec![0, 0, 0, 2, b'x', b'y']);
    }
}
