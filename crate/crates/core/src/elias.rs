//! Elias penultimate (delta) code for positive integers.
//!
//! A value `x` with bit length `N` is written as the Elias gamma code of `N`
//! followed by the `N - 1` low-order bits of `x`. Every `u64` value `>= 1` is
//! representable.

use crate::bitio::{BitReader, BitWriter};
use crate::error::{domain, Error, Result};

#[inline]
fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// Codeword length in bits: `1` for `x = 1`, otherwise
/// `1 + floor(log2 x) + 2 * floor(log2(floor(log2 x) + 1))`.
pub fn elias_length(x: u64) -> Result<u32> {
    if x < 1 {
        return Err(domain("Elias code is defined for x >= 1"));
    }
    if x == 1 {
        return Ok(1);
    }
    let lg = floor_log2(x);
    Ok(1 + lg + 2 * floor_log2(u64::from(lg) + 1))
}

pub fn elias_encode(x: u64, w: &mut BitWriter) -> Result<()> {
    if x < 1 {
        return Err(domain("Elias code is defined for x >= 1"));
    }
    let len = floor_log2(x) + 1;
    let len_bits = floor_log2(u64::from(len));
    w.write_bits(0, len_bits);
    w.write_bits(u64::from(len), len_bits + 1);
    w.write_bits(x, len - 1);
    Ok(())
}

/// Decodes one codeword. Truncation surfaces as [`Error::EndOfStream`]; a
/// prefix that cannot start any codeword of a `u64` value is
/// [`Error::MalformedStream`].
pub fn elias_decode(r: &mut BitReader<'_>) -> Result<u64> {
    let mut zeros = 0u32;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 6 {
            return Err(Error::MalformedStream(
                "Elias length prefix longer than any 64-bit value".into(),
            ));
        }
    }
    let len = (1u64 << zeros) | r.read_bits(zeros)?;
    if len > 64 {
        return Err(Error::MalformedStream(format!(
            "Elias codeword announces a {len}-bit value"
        )));
    }
    let len = len as u32;
    let low = r.read_bits(len - 1)?;
    Ok(if len == 1 { 1 } else { (1u64 << (len - 1)) | low })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits_of(x: u64) -> String {
        let mut w = BitWriter::new();
        elias_encode(x, &mut w).unwrap();
        let n = w.bit_count();
        let bytes = w.into_bytes();
        let mut r = BitReader::new(&bytes);
        (0..n)
            .map(|_| if r.read_bit().unwrap() { '1' } else { '0' })
            .collect()
    }

    fn decode_str(s: &str) -> (u64, u64) {
        let mut w = BitWriter::new();
        for c in s.chars() {
            w.write_bit(c == '1');
        }
        let bytes = w.into_bytes();
        let mut r = BitReader::new(&bytes);
        let v = elias_decode(&mut r).unwrap();
        (v, r.position())
    }

    #[test]
    fn lengths() {
        assert_eq!(elias_length(1).unwrap(), 1);
        assert_eq!(elias_length(6).unwrap(), 5);
        assert_eq!(elias_length(2).unwrap(), 4);
        assert!(matches!(elias_length(0), Err(Error::Domain(_))));
    }

    #[test]
    fn worked_example_codewords() {
        assert_eq!(bits_of(1), "1");
        assert_eq!(bits_of(6), "01110");
        assert_eq!(bits_of(3), "0101");
    }

    #[test]
    fn decodes_worked_example_codewords() {
        assert_eq!(decode_str("1"), (1, 1));
        assert_eq!(decode_str("01110"), (6, 5));
        assert_eq!(decode_str("0101"), (3, 4));
        // trailing bits are left alone
        assert_eq!(decode_str("0101111"), (3, 4));
    }

    #[test]
    fn zero_is_rejected() {
        let mut w = BitWriter::new();
        assert!(matches!(elias_encode(0, &mut w), Err(Error::Domain(_))));
        assert_eq!(w.bit_count(), 0);
    }

    #[test]
    fn extremes() {
        for x in [u64::MAX, 1 << 63, (1 << 63) - 1, 1 << 32] {
            let mut w = BitWriter::new();
            elias_encode(x, &mut w).unwrap();
            assert_eq!(w.bit_count(), u64::from(elias_length(x).unwrap()));
            let bytes = w.into_bytes();
            assert_eq!(elias_decode(&mut BitReader::new(&bytes)).unwrap(), x);
        }
    }

    #[test]
    fn truncated_codeword() {
        let mut w = BitWriter::new();
        elias_encode(1000, &mut w).unwrap();
        let n = w.bit_count();
        let bytes = w.into_bytes();
        // keep only the first byte: the codeword is 16 bits long
        assert!(n > 8);
        assert_eq!(
            elias_decode(&mut BitReader::new(&bytes[..1])),
            Err(Error::EndOfStream)
        );
    }

    #[test]
    fn overlong_prefix_is_malformed() {
        let bytes = [0u8, 0x80];
        assert!(matches!(
            elias_decode(&mut BitReader::new(&bytes)),
            Err(Error::MalformedStream(_))
        ));
        // gamma part announcing 65 bits: 000000 1000001
        let mut w = BitWriter::new();
        w.write_bits(0, 6);
        w.write_bits(65, 7);
        w.write_bits(0, 64);
        let bytes = w.into_bytes();
        assert!(matches!(
            elias_decode(&mut BitReader::new(&bytes)),
            Err(Error::MalformedStream(_))
        ));
    }

    proptest! {
        #[test]
        fn roundtrip_any(x in 1u64..) {
            let mut w = BitWriter::new();
            elias_encode(x, &mut w).unwrap();
            prop_assert_eq!(w.bit_count(), u64::from(elias_length(x).unwrap()));
            let bytes = w.into_bytes();
            let mut r = BitReader::new(&bytes);
            prop_assert_eq!(elias_decode(&mut r).unwrap(), x);
            prop_assert_eq!(r.position(), u64::from(elias_length(x).unwrap()));
        }
    }
}
