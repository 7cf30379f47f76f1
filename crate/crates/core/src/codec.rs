//! The adaptive censoring codec for sequences of positive integers.
//!
//! Two codes share one bitstream:
//!
//! * **C1**, the arithmetic code of the censored sequence under
//!   [`CensorModel`], where every symbol above the running maximum is
//!   replaced by an escape and one extra escape terminates the message;
//! * **C2**, the Elias codes of the maxima increments `m_new - m_old + 1`,
//!   followed by a final `1`.
//!
//! Each escape closes the current C1 segment with a decodable flush and is
//! immediately followed by its C2 codeword. The first symbol is always an
//! escape of probability one, whose flush is empty, so every non-empty
//! stream starts with the Elias code of `x_1 + 1`. The terminator escape is
//! followed by `Elias(1)`, which no real escape can produce. The stream is
//! therefore self-delimiting and the codec is online in both directions.
//!
//! ```
//! let bytes = accode::encode_message(&[5, 3, 2, 7]).unwrap();
//! assert_eq!(accode::decode_message(&bytes).unwrap(), vec![5, 3, 2, 7]);
//! ```

use crate::arith::{DecoderState, Input, RangeEncoder};
use crate::bitio::{BitReader, BitWriter};
use crate::elias::{elias_decode, elias_encode, elias_length};
use crate::error::{domain, Error, Result};
use crate::model::{CensorModel, Censored};

/// Bookkeeping of one encoding run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncodeTrace {
    /// Censored symbols in coding order, ending with the terminator escape.
    pub censored: Vec<Censored>,
    /// `m_k - m_{k-1} + 1` for each new maximum, then the final `1`.
    pub maxima_increments: Vec<u64>,
    pub c1_bits: u64,
    pub c2_bits: u64,
    /// `-log2` of the product of coded probabilities, in double precision.
    pub c1_information: f64,
}

impl EncodeTrace {
    /// Codeword length without byte padding.
    pub fn total_bits(&self) -> u64 {
        self.c1_bits + self.c2_bits
    }

    /// Escapes caused by new maxima (the terminator is not counted).
    pub fn escapes(&self) -> usize {
        self.maxima_increments.len().saturating_sub(1)
    }
}

/// Incremental encoder. Bytes returned by [`push`](Self::push) and
/// [`finish`](Self::finish), concatenated, equal
/// [`encode_message`] of the same symbols.
#[derive(Debug, Clone, Default)]
pub struct StreamEncoder {
    writer: BitWriter,
    coder: RangeEncoder,
    model: CensorModel,
    trace: EncodeTrace,
    finished: bool,
}

impl StreamEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn code_c1(&mut self, symbol: Censored) -> Result<()> {
        let (cum, freq, total) = self.model.conditional(symbol)?;
        let before = self.writer.bit_count();
        self.coder.encode_symbol(&mut self.writer, cum, freq, total)?;
        if symbol == Censored::Escape {
            self.coder.flush_decodable(&mut self.writer);
        }
        self.trace.c1_bits += self.writer.bit_count() - before;
        self.trace.c1_information += (total as f64).log2() - (freq as f64).log2();
        self.trace.censored.push(symbol);
        Ok(())
    }

    fn code_c2(&mut self, increment: u64) -> Result<()> {
        elias_encode(increment, &mut self.writer)?;
        self.trace.c2_bits += u64::from(elias_length(increment)?);
        self.trace.maxima_increments.push(increment);
        Ok(())
    }

    /// Encodes one symbol and returns the output bytes completed by it.
    pub fn push(&mut self, x: u64) -> Result<Vec<u8>> {
        if self.finished {
            return Err(Error::AlreadyFinished);
        }
        if x < 1 {
            return Err(domain("symbol must be >= 1"));
        }
        // Refuse symbols after which the model total would no longer fit
        // the coder, before touching any state.
        let next_max = self.model.max().max(x);
        let next_total = (self.model.steps() + 1)
            .checked_mul(2)
            .and_then(|v| v.checked_add(next_max))
            .and_then(|v| v.checked_add(1));
        match next_total {
            Some(t) if t <= crate::arith::MAX_TOTAL => {}
            _ => {
                return Err(Error::PrecisionOverflow {
                    total: next_total.unwrap_or(u64::MAX),
                    capacity: crate::arith::MAX_TOTAL,
                })
            }
        }
        let symbol = self.model.censor(x);
        let previous_max = self.model.max();
        self.code_c1(symbol)?;
        if symbol == Censored::Escape {
            self.code_c2(x - previous_max + 1)?;
        }
        self.model.update(x)?;
        Ok(self.writer.drain_complete_bytes())
    }

    /// Codes the terminator and returns the remaining bytes, zero-padded.
    pub fn finish(&mut self) -> Result<Vec<u8>> {
        if self.finished {
            return Err(Error::AlreadyFinished);
        }
        self.code_c1(Censored::Escape)?;
        self.code_c2(1)?;
        self.finished = true;
        Ok(std::mem::take(&mut self.writer).into_bytes())
    }

    pub fn trace(&self) -> &EncodeTrace {
        &self.trace
    }

    pub fn model(&self) -> &CensorModel {
        &self.model
    }
}

/// Encodes a whole message.
pub fn encode_message(xs: &[u64]) -> Result<Vec<u8>> {
    Ok(encode_with_trace(xs)?.0)
}

/// Encodes a whole message and returns the bookkeeping alongside.
pub fn encode_with_trace(xs: &[u64]) -> Result<(Vec<u8>, EncodeTrace)> {
    let mut enc = StreamEncoder::new();
    let mut out = Vec::new();
    for &x in xs {
        out.extend(enc.push(x)?);
    }
    out.extend(enc.finish()?);
    Ok((out, enc.trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Symbol,
    Flush,
    Increment { at: u64 },
    Done { consumed: u64 },
}

/// Incremental decoder.
///
/// Feed compressed bytes in any chunking; each call returns the symbols
/// whose value no longer depends on bytes still to come. After the
/// terminator has been read further input is ignored.
#[derive(Debug, Clone)]
pub struct StreamDecoder {
    buffer: Vec<u8>,
    base_bit: u64,
    model: CensorModel,
    coder: DecoderState,
    phase: Phase,
}

impl Default for StreamDecoder {
    fn default() -> Self {
        Self::new()
    }
}

fn malformed(e: Error) -> Error {
    match e {
        Error::EndOfStream => Error::MalformedStream("stream ends inside a codeword".into()),
        Error::Domain(m) => Error::MalformedStream(m),
        other => other,
    }
}

impl StreamDecoder {
    pub fn new() -> Self {
        Self {
            buffer: Vec::new(),
            base_bit: 0,
            model: CensorModel::new(),
            coder: DecoderState::new(0),
            phase: Phase::Symbol,
        }
    }

    /// True once the terminator has been decoded.
    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done { .. })
    }

    /// Bits of the codeword, available once decoding is done.
    pub fn consumed_bits(&self) -> Option<u64> {
        match self.phase {
            Phase::Done { consumed } => Some(consumed),
            _ => None,
        }
    }

    /// The model as rebuilt from the symbols decoded so far.
    pub fn model(&self) -> &CensorModel {
        &self.model
    }

    pub fn feed(&mut self, bytes: &[u8]) -> Result<Vec<u64>> {
        if self.is_done() {
            return Ok(Vec::new());
        }
        self.buffer.extend_from_slice(bytes);
        let out = self.run(false)?;
        self.compact();
        Ok(out)
    }

    /// Declares the end of input and decodes what is left. Bits past the
    /// end read as zero padding; a stream that still lacks its terminator is
    /// malformed.
    pub fn finish(&mut self) -> Result<Vec<u64>> {
        let out = self.run(true)?;
        if !self.is_done() {
            return Err(Error::MalformedStream("missing terminator".into()));
        }
        Ok(out)
    }

    fn run(&mut self, complete: bool) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        while let Some(x) = self.step(complete).map_err(malformed)? {
            if let Some(x) = x {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// One state-machine transition: `Ok(None)` when blocked on input (or
    /// done), `Ok(Some(Some(x)))` when symbol `x` completed.
    fn step(&mut self, complete: bool) -> Result<Option<Option<u64>>> {
        let input = Input {
            bytes: &self.buffer,
            base_bit: self.base_bit,
            complete,
        };
        match self.phase {
            Phase::Done { .. } => Ok(None),
            Phase::Symbol => {
                let total = self.model.total();
                let model = &self.model;
                match self.coder.decode_symbol(&input, total, |t| model.locate(t))? {
                    None => Ok(None),
                    Some(Censored::Symbol(j)) => {
                        self.model.update(j)?;
                        Ok(Some(Some(j)))
                    }
                    Some(Censored::Escape) => {
                        self.phase = Phase::Flush;
                        Ok(Some(None))
                    }
                }
            }
            Phase::Flush => match self.coder.flush(&input)? {
                None => Ok(None),
                Some(at) => {
                    self.phase = Phase::Increment { at };
                    Ok(Some(None))
                }
            },
            Phase::Increment { at } => {
                let mut r = BitReader::at(&self.buffer, at - self.base_bit);
                let increment = match elias_decode(&mut r) {
                    Ok(v) => v,
                    Err(Error::EndOfStream) if !complete => return Ok(None),
                    Err(e) => return Err(e),
                };
                let end = self.base_bit + r.position();
                if increment == 1 {
                    self.phase = Phase::Done { consumed: end };
                    return Ok(None);
                }
                let x = self
                    .model
                    .max()
                    .checked_add(increment - 1)
                    .ok_or_else(|| Error::MalformedStream("maximum overflows u64".into()))?;
                self.model.update(x)?;
                self.coder = DecoderState::new(end);
                self.phase = Phase::Symbol;
                Ok(Some(Some(x)))
            }
        }
    }

    /// Drops buffered bytes that no future step can look at.
    fn compact(&mut self) {
        let needed = match self.phase {
            Phase::Symbol | Phase::Flush => self.coder.window_position(),
            Phase::Increment { at } => at,
            Phase::Done { .. } => return,
        };
        let droppable = ((needed - self.base_bit) / 8) as usize;
        if droppable >= 4096 {
            self.buffer.drain(..droppable);
            self.base_bit += 8 * droppable as u64;
        }
    }
}

/// Decodes a complete message.
///
/// Trailing bytes after the codeword are allowed and ignored.
pub fn decode_message(bytes: &[u8]) -> Result<Vec<u64>> {
    Ok(decode_with_length(bytes)?.0)
}

/// Decodes a complete message and reports the codeword length in bits.
pub fn decode_with_length(bytes: &[u8]) -> Result<(Vec<u64>, u64)> {
    let mut dec = StreamDecoder::new();
    dec.buffer = bytes.to_vec();
    let out = dec.finish()?;
    let consumed = dec.consumed_bits().expect("finish succeeded");
    Ok((out, consumed))
}
