//! Bit-oriented integer arithmetic coder with exact rational symbol
//! probabilities given as `(cum, freq, total)` triples.
//!
//! The coder keeps a 64-bit interval `[low, high]` and renormalizes by
//! doubling whenever the interval lies in the lower half, the upper half or
//! the middle half of the register (the latter deferring its output bit as a
//! pending bit). After renormalization the interval is wider than a quarter
//! of the register, so any `total <= 2^62` leaves every slot non-empty.
//!
//! [`RangeEncoder::flush_decodable`] terminates the current segment with the
//! shortest dyadic block contained in the interval (0, 1 or 2 bits plus the
//! pending bits) and restarts from the full interval. The decoder mirrors the
//! interval exactly, so it knows the flush length without any side
//! information and can hand the following bits to another code.

use crate::bitio::{window64, BitWriter};
use crate::error::{domain, Error, Result};

const HALF: u64 = 1 << 63;
const QUARTER: u64 = 1 << 62;
const THREE_QUARTERS: u64 = HALF | QUARTER;

/// Largest frequency total accepted by the coder.
pub const MAX_TOTAL: u64 = QUARTER;

fn check_triple(cum: u64, freq: u64, total: u64) -> Result<()> {
    if total > MAX_TOTAL {
        return Err(Error::PrecisionOverflow {
            total,
            capacity: MAX_TOTAL,
        });
    }
    if freq == 0 || cum.checked_add(freq).is_none_or(|end| end > total) {
        return Err(domain(format!(
            "invalid slot [{cum}, {cum}+{freq}) for total {total}"
        )));
    }
    Ok(())
}

/// The interval state shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Interval {
    low: u64,
    high: u64,
    /// Middle-half doublings whose output bit is not yet known.
    pending: u64,
    /// Doublings performed since the segment started.
    shifts: u64,
    /// Whether the most recent doubling was a middle-half one. The decoder's
    /// code register then equals the stream window with its top bit flipped.
    straddled: bool,
}

/// How a segment is terminated: the dyadic block `block` of size
/// `2^(64 - bits)` inside the current interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Termination {
    bits: u32,
    block: u64,
}

impl Interval {
    fn fresh() -> Self {
        Self {
            low: 0,
            high: u64::MAX,
            pending: 0,
            shifts: 0,
            straddled: false,
        }
    }

    fn width(&self) -> u128 {
        u128::from(self.high - self.low) + 1
    }

    fn narrow(&mut self, cum: u64, freq: u64, total: u64) {
        let range = self.width();
        let low = u128::from(self.low);
        let total = u128::from(total);
        let new_high = low + range * u128::from(cum + freq) / total - 1;
        let new_low = low + range * u128::from(cum) / total;
        self.low = new_low as u64;
        self.high = new_high as u64;
    }

    fn resolve(&mut self, bit: bool, emit: &mut impl FnMut(bool)) {
        emit(bit);
        for _ in 0..self.pending {
            emit(!bit);
        }
        self.pending = 0;
    }

    fn renormalize(&mut self, emit: &mut impl FnMut(bool)) {
        loop {
            if self.high < HALF {
                self.resolve(false, emit);
                self.straddled = false;
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.resolve(true, emit);
                self.straddled = false;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.pending += 1;
                self.straddled = true;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.shifts += 1;
        }
    }

    fn termination(&self) -> Termination {
        if self.pending == 0 && self.low == 0 && self.high == u64::MAX {
            return Termination { bits: 0, block: 0 };
        }
        for bits in 1..=64u32 {
            let size = 1u128 << (64 - bits);
            let first = u128::from(self.low).div_ceil(size);
            let last = first + 1;
            if last * size - 1 <= u128::from(self.high) {
                return Termination {
                    bits,
                    block: first as u64,
                };
            }
        }
        unreachable!("a non-empty interval contains a unit block")
    }

    /// Number of bits the encoder emits when terminating in this state.
    fn termination_cost(&self, t: Termination) -> u64 {
        if t.bits == 0 {
            0
        } else {
            self.pending + u64::from(t.bits)
        }
    }

    fn emit_termination(&mut self, t: Termination, emit: &mut impl FnMut(bool)) {
        if t.bits == 0 {
            return;
        }
        let first = (t.block >> (t.bits - 1)) & 1 == 1;
        self.resolve(first, emit);
        for i in (0..t.bits - 1).rev() {
            emit((t.block >> i) & 1 == 1);
        }
    }

    fn target(&self, code: u64, total: u64) -> u64 {
        let offset = u128::from(code - self.low) + 1;
        ((offset * u128::from(total) - 1) / self.width()) as u64
    }
}

/// Encoder half of the coder. Output goes to a caller-supplied [`BitWriter`]
/// so that other codes can be interleaved between segments.
#[derive(Debug, Clone)]
pub struct RangeEncoder {
    interval: Interval,
    emitted_bits: u64,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            interval: Interval::fresh(),
            emitted_bits: 0,
        }
    }

    /// Narrows the interval to the `[cum, cum + freq)` slice of `total` and
    /// writes out every bit that is already determined.
    pub fn encode_symbol(
        &mut self,
        w: &mut BitWriter,
        cum: u64,
        freq: u64,
        total: u64,
    ) -> Result<()> {
        check_triple(cum, freq, total)?;
        self.interval.narrow(cum, freq, total);
        let before = w.bit_count();
        self.interval.renormalize(&mut |b| w.write_bit(b));
        self.emitted_bits += w.bit_count() - before;
        Ok(())
    }

    /// Ends the current segment so that a decoder holding only the bits
    /// written so far recovers every symbol encoded so far, then restarts
    /// from the full interval. Returns the number of bits this call wrote.
    pub fn flush_decodable(&mut self, w: &mut BitWriter) -> u64 {
        let t = self.interval.termination();
        let before = w.bit_count();
        self.interval.emit_termination(t, &mut |b| w.write_bit(b));
        self.interval = Interval::fresh();
        let written = w.bit_count() - before;
        self.emitted_bits += written;
        written
    }

    /// Flushes and ends the stream.
    pub fn finalize(mut self, w: &mut BitWriter) -> u64 {
        self.flush_decodable(w);
        self.emitted_bits
    }

    /// Bits written by this encoder so far (pending bits not included).
    pub fn emitted_bits(&self) -> u64 {
        self.emitted_bits
    }
}

/// A view of the compressed bits available to a decoder.
///
/// `bytes` holds stream bits starting at absolute bit `base_bit`. When
/// `complete` is false more bytes may still arrive, so bits past the end are
/// unknown; when true they read as zero padding.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Input<'a> {
    pub bytes: &'a [u8],
    pub base_bit: u64,
    pub complete: bool,
}

impl Input<'_> {
    pub fn end_bit(&self) -> u64 {
        self.base_bit + 8 * self.bytes.len() as u64
    }

    /// Window at absolute bit `pos`, and how many of its trailing bits are
    /// unknown.
    fn window(&self, pos: u64) -> (u64, u32) {
        debug_assert!(pos >= self.base_bit);
        let (word, missing) = window64(self.bytes, pos - self.base_bit);
        (word, missing)
    }
}

/// Decoder-side mirror of the encoder interval, independent of where the
/// compressed bytes live.
#[derive(Debug, Clone)]
pub(crate) struct DecoderState {
    interval: Interval,
    segment_start: u64,
}

impl DecoderState {
    pub fn new(segment_start: u64) -> Self {
        Self {
            interval: Interval::fresh(),
            segment_start,
        }
    }

    /// First stream bit the decoder may still need to look at.
    pub fn window_position(&self) -> u64 {
        self.segment_start + self.interval.shifts
    }

    /// Decodes one slot. `locate` maps a target in `[0, total)` to
    /// `(slot, cum, freq)`. Returns `Ok(None)` when the input is incomplete
    /// and the slot still depends on bits that have not arrived.
    pub fn decode_symbol<T>(
        &mut self,
        input: &Input<'_>,
        total: u64,
        locate: impl Fn(u64) -> Result<(T, u64, u64)>,
    ) -> Result<Option<T>> {
        if total == 0 {
            return Err(domain("frequency total must be positive"));
        }
        if total > MAX_TOTAL {
            return Err(Error::PrecisionOverflow {
                total,
                capacity: MAX_TOTAL,
            });
        }
        let iv = &self.interval;
        let (word, missing) = input.window(self.window_position());
        let flip = if iv.straddled { HALF } else { 0 };
        let unknown = if input.complete { 0 } else { missing };
        let (code_lo, code_hi) = if unknown >= 64 {
            (0, u64::MAX)
        } else {
            let mask = if unknown == 0 { 0 } else { u64::MAX >> (64 - unknown) };
            let lo = (word ^ flip) & !mask;
            (lo, lo | mask)
        };
        let c1 = code_lo.max(iv.low);
        let c2 = code_hi.min(iv.high);
        if c1 > c2 {
            return Err(if missing > 0 {
                Error::EndOfStream
            } else {
                Error::MalformedStream("code value outside the coding interval".into())
            });
        }
        let (slot, cum, freq) = locate(iv.target(c1, total))?;
        if c1 != c2 {
            let (_, cum_hi, _) = locate(iv.target(c2, total))?;
            if cum_hi != cum {
                return Ok(None);
            }
        }
        check_triple(cum, freq, total)?;
        self.interval.narrow(cum, freq, total);
        self.interval.renormalize(&mut |_| {});
        if input.complete && self.window_position() > input.end_bit() {
            return Err(Error::EndOfStream);
        }
        Ok(Some(slot))
    }

    /// Mirrors [`RangeEncoder::flush_decodable`]. Checks that the stream
    /// carries exactly the termination bits the encoder would have written
    /// and returns the bit position right after them, where the next
    /// segment (or foreign data) starts. `Ok(None)` means more input is
    /// needed.
    pub fn flush(&mut self, input: &Input<'_>) -> Result<Option<u64>> {
        let t = self.interval.termination();
        let end = self.window_position() + u64::from(t.bits);
        if end > input.end_bit() {
            return if input.complete {
                Err(Error::EndOfStream)
            } else {
                Ok(None)
            };
        }
        if t.bits > 0 {
            let (word, _) = input.window(self.window_position());
            let flip = if self.interval.straddled { HALF } else { 0 };
            let code = word ^ flip;
            if code >> (64 - t.bits) != t.block {
                return Err(Error::MalformedStream(
                    "segment termination does not match the coding interval".into(),
                ));
            }
        }
        debug_assert_eq!(
            end - self.segment_start,
            self.interval.shifts - self.interval.pending
                + self.interval.termination_cost(t)
        );
        *self = Self::new(end);
        Ok(Some(end))
    }
}

/// Decoder over a complete byte slice.
#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    source: &'a [u8],
    state: DecoderState,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(source: &'a [u8]) -> Self {
        Self::at(source, 0)
    }

    /// Starts decoding a segment at bit `position` of `source`.
    pub fn at(source: &'a [u8], position: u64) -> Self {
        Self {
            source,
            state: DecoderState::new(position),
        }
    }

    fn input(&self) -> Input<'a> {
        Input {
            bytes: self.source,
            base_bit: 0,
            complete: true,
        }
    }

    pub fn decode_symbol<T>(
        &mut self,
        total: u64,
        locate: impl Fn(u64) -> Result<(T, u64, u64)>,
    ) -> Result<T> {
        let input = self.input();
        Ok(self
            .state
            .decode_symbol(&input, total, locate)?
            .expect("complete input always decides"))
    }

    /// Consumes the termination of the current segment; returns the bit
    /// position following it.
    pub fn flush(&mut self) -> Result<u64> {
        let input = self.input();
        Ok(self.state.flush(&input)?.expect("complete input always decides"))
    }
}

/// `locate` for a table of slot frequencies laid out in order.
pub fn locate_in(freqs: &[u64], target: u64) -> Result<(usize, u64, u64)> {
    let mut cum = 0u64;
    for (slot, &f) in freqs.iter().enumerate() {
        if target < cum + f {
            return Ok((slot, cum, f));
        }
        cum += f;
    }
    Err(Error::MalformedStream(format!(
        "target {target} beyond table total {cum}"
    )))
}
