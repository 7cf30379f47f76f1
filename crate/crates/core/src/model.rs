//! The censoring probability model.
//!
//! After `i` symbols with running maximum `m`, the next symbol is coded over
//! the slots `1..=m` followed by an escape slot. Symbol `j` gets frequency
//! `2 n_j + 1` and the escape gets `1`, out of a total of `2 i + m + 1`;
//! this is the add-one-half (Krichevsky–Trofimov) estimate on the alphabet
//! `{1..m}` with half a count reserved for "larger than anything seen".
//!
//! A symbol above the maximum is coded as an escape but is still counted,
//! so counts always sum to `i` and every counted symbol is `<= m`.

use crate::error::{domain, Error, Result};

/// A symbol after censoring: either a value already inside `1..=m` or the
/// escape standing for "new maximum" (and, at the very end, termination).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Censored {
    Symbol(u64),
    Escape,
}

/// Counts, running maximum and step index of the model.
///
/// Counts are stored sparsely as `(symbol, count)` pairs sorted by symbol,
/// so memory grows with the number of distinct symbols rather than with `m`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CensorModel {
    steps: u64,
    max: u64,
    counts: Vec<(u64, u64)>,
}

impl CensorModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of symbols processed so far (`i`).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Running maximum (`m`), zero before the first symbol.
    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn count(&self, symbol: u64) -> u64 {
        match self.counts.binary_search_by_key(&symbol, |&(s, _)| s) {
            Ok(k) => self.counts[k].1,
            Err(_) => 0,
        }
    }

    /// Distinct symbols seen with their counts, in increasing symbol order.
    pub fn counts(&self) -> &[(u64, u64)] {
        &self.counts
    }

    /// `2 i + m + 1`, the denominator shared by every slot. Saturates on
    /// overflow so that the coder rejects it as a precision overflow.
    pub fn total(&self) -> u64 {
        self.steps
            .saturating_mul(2)
            .saturating_add(self.max)
            .saturating_add(1)
    }

    pub fn censor(&self, x: u64) -> Censored {
        if x >= 1 && x <= self.max {
            Censored::Symbol(x)
        } else {
            Censored::Escape
        }
    }

    /// `(cum, freq, total)` of a censored symbol under the current state.
    pub fn conditional(&self, symbol: Censored) -> Result<(u64, u64, u64)> {
        let total = self.total();
        match symbol {
            Censored::Escape => Ok((total - 1, 1, total)),
            Censored::Symbol(j) => {
                if j < 1 || j > self.max {
                    return Err(domain(format!(
                        "symbol {j} is outside the current alphabet 1..={}",
                        self.max
                    )));
                }
                let mut below = 0u64;
                let mut freq = 1u64;
                for &(s, c) in &self.counts {
                    if s < j {
                        below += c;
                    } else {
                        if s == j {
                            freq += 2 * c;
                        }
                        break;
                    }
                }
                Ok(((j - 1) + 2 * below, freq, total))
            }
        }
    }

    /// Inverse of [`conditional`](Self::conditional): the slot whose
    /// `[cum, cum + freq)` contains `target`.
    pub fn locate(&self, target: u64) -> Result<(Censored, u64, u64)> {
        let total = self.total();
        if target >= total {
            return Err(Error::MalformedStream(format!(
                "target {target} outside model total {total}"
            )));
        }
        // `doubled` is twice the count mass of symbols strictly below the
        // current position; symbol j starts at (j - 1) + doubled.
        let mut doubled = 0u64;
        for &(s, c) in &self.counts {
            let start = (s - 1) + doubled;
            if target < start {
                let j = target - doubled + 1;
                return Ok((Censored::Symbol(j), target, 1));
            }
            let freq = 2 * c + 1;
            if target < start + freq {
                return Ok((Censored::Symbol(s), start, freq));
            }
            doubled += 2 * c;
        }
        if target < self.max + doubled {
            let j = target - doubled + 1;
            return Ok((Censored::Symbol(j), target, 1));
        }
        Ok((Censored::Escape, total - 1, 1))
    }

    /// Records symbol `x`, including the case where it was coded as an
    /// escape.
    pub fn update(&mut self, x: u64) -> Result<()> {
        if x < 1 {
            return Err(domain("symbols must be >= 1"));
        }
        match self.counts.binary_search_by_key(&x, |&(s, _)| s) {
            Ok(k) => self.counts[k].1 += 1,
            Err(k) => self.counts.insert(k, (x, 1)),
        }
        self.max = self.max.max(x);
        self.steps += 1;
        Ok(())
    }
}
