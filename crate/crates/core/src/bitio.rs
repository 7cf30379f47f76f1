//! Bit-granular writer and reader over byte buffers, MSB-first within each byte.
//!
//! The writer pads the last byte with zero bits. There is no header: the
//! finalized output is the raw byte sequence.

use crate::error::{Error, Result};

/// Appends bits MSB-first into a growable byte buffer.
///
/// Complete bytes can be drained while writing continues, which is how the
/// streaming encoder hands out output incrementally. `bit_count` always
/// counts every bit ever written, drained or not.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    buffer: Vec<u8>,
    bit_count: u64,
    drained_bytes: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        let local = self.bit_count - 8 * self.drained_bytes;
        let slot = (local % 8) as u32;
        if slot == 0 {
            self.buffer.push(0);
        }
        if bit {
            let last = self.buffer.len() - 1;
            self.buffer[last] |= 0x80 >> slot;
        }
        self.bit_count += 1;
    }

    /// Writes the `n` low-order bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        for i in (0..n).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Total number of bits written so far, including drained ones.
    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    /// Bytes still held by the writer (the last one may be partial).
    pub fn as_bytes(&self) -> &[u8] {
        &self.buffer
    }

    /// Removes and returns every byte whose eight bits have all been written.
    pub fn drain_complete_bytes(&mut self) -> Vec<u8> {
        let local = self.bit_count - 8 * self.drained_bytes;
        let complete = (local / 8) as usize;
        self.drained_bytes += complete as u64;
        self.buffer.drain(..complete).collect()
    }

    /// Consumes the writer and returns the held bytes, the tail zero-padded.
    pub fn into_bytes(self) -> Vec<u8> {
        self.buffer
    }
}

/// Reads bits MSB-first from a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    source: &'a [u8],
    position: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(source: &'a [u8]) -> Self {
        Self {
            source,
            position: 0,
        }
    }

    /// A reader positioned at bit `position`; positions past the end are
    /// allowed and simply yield `EndOfStream` on the next read.
    pub fn at(source: &'a [u8], position: u64) -> Self {
        Self { source, position }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        if self.position >= self.bit_len() {
            return Err(Error::EndOfStream);
        }
        let byte = self.source[(self.position / 8) as usize];
        let bit = (byte >> (7 - (self.position % 8))) & 1 == 1;
        self.position += 1;
        Ok(bit)
    }

    /// Reads `n <= 64` bits as an unsigned integer, first bit most significant.
    /// On `EndOfStream` the position is left unchanged.
    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        debug_assert!(n <= 64);
        if self.position + u64::from(n) > self.bit_len() {
            return Err(Error::EndOfStream);
        }
        let mut value = 0u64;
        for _ in 0..n {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Ok(value)
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn bit_len(&self) -> u64 {
        8 * self.source.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.bit_len().saturating_sub(self.position)
    }
}

/// The 64 bits of `source` starting at bit `position`, MSB-first.
///
/// Bits past the end of `source` read as zero; the second value is how many
/// of the 64 bits fell past the end.
pub(crate) fn window64(source: &[u8], position: u64) -> (u64, u32) {
    let len_bits = 8 * source.len() as u64;
    if position >= len_bits {
        return (0, 64);
    }
    let first = (position / 8) as usize;
    let skip = (position % 8) as u32;
    let mut acc: u128 = 0;
    for i in 0..9 {
        let byte = source.get(first + i).copied().unwrap_or(0);
        acc = (acc << 8) | u128::from(byte);
    }
    // 72 bits gathered; drop the `skip` leading ones and the trailing excess.
    let word = (acc >> (8 - skip)) as u64;
    let missing = (position + 64).saturating_sub(len_bits).min(64) as u32;
    (word, missing)
}
