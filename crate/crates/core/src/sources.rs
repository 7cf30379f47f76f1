//! Envelope classes and concrete memoryless sources on the positive
//! integers.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

/// Series are cut once every remaining tail mass is below this.
pub const TAIL_TOLERANCE: f64 = 1e-16;

/// Allowed deviation of an explicit pmf's total mass from one.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A non-increasing envelope `f` on the positive integers, with its tail
/// sums `sum_{k > n} f(k)`.
pub trait Envelope {
    fn f(&self, k: u64) -> f64;

    /// `sum_{k >= n + 1} f(k)`.
    fn tail(&self, n: u64) -> f64;

    /// `sum_{k >= 1} f(k)`.
    fn total(&self) -> f64 {
        self.tail(0)
    }
}

/// Parameters `(C, alpha)` of the exponentially decreasing envelope
/// `f(k) = min(1, C e^{-alpha k})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSpec {
    c: f64,
    alpha: f64,
}

impl EnvelopeSpec {
    /// Requires `alpha > 0` and `C > e^{2 alpha}`, which makes `f(1) = f(2) = 1`.
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(c.is_finite() && c > (2.0 * alpha).exp()) {
            return Err(domain(format!(
                "C must exceed e^(2 alpha) = {}, got {c}",
                (2.0 * alpha).exp()
            )));
        }
        Ok(Self { c, alpha })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Unclamped bound `C e^{-alpha k}`.
    pub fn bound(&self, k: u64) -> f64 {
        self.c * (-self.alpha * k as f64).exp()
    }

    /// Largest `k` with `C e^{-alpha k} >= 1`: the envelope is 1 on `1..=k`.
    pub fn clamp_end(&self) -> u64 {
        let mut k = (self.c.ln() / self.alpha).floor().max(0.0) as u64;
        while k > 0 && self.bound(k) < 1.0 {
            k -= 1;
        }
        while self.bound(k + 1) >= 1.0 {
            k += 1;
        }
        k
    }
}

impl Envelope for EnvelopeSpec {
    fn f(&self, k: u64) -> f64 {
        self.bound(k).min(1.0)
    }

    fn tail(&self, n: u64) -> f64 {
        let clamp = self.clamp_end();
        let ones = clamp.saturating_sub(n) as f64;
        let start = n.max(clamp) + 1;
        ones + self.bound(start) / (1.0 - (-self.alpha).exp())
    }
}

/// An envelope given by finitely many values (zero beyond the table).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedEnvelope {
    values: Vec<f64>,
    suffix: Vec<f64>,
}

impl TabulatedEnvelope {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0 && *v <= 1.0)) {
            return Err(domain("envelope values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(domain("envelope must be non-increasing"));
        }
        let mut suffix = vec![0.0; values.len() + 1];
        for k in (0..values.len()).rev() {
            suffix[k] = suffix[k + 1] + values[k];
        }
        Ok(Self { values, suffix })
    }
}

impl Envelope for TabulatedEnvelope {
    fn f(&self, k: u64) -> f64 {
        match k {
            0 => 1.0,
            k => self.values.get(k as usize - 1).copied().unwrap_or(0.0),
        }
    }

    fn tail(&self, n: u64) -> f64 {
        self.suffix.get(n as usize).copied().unwrap_or(0.0)
    }
}

/// An explicit pmf `theta_1, theta_2, ...` with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitPmf {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl ExplicitPmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(domain("explicit pmf needs at least one probability"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("probabilities must be finite and non-negative"));
        }
        let mut acc = 0.0;
        let cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if (acc - 1.0).abs() > MASS_TOLERANCE {
            return Err(domain(format!("probabilities sum to {acc}, not 1")));
        }
        Ok(Self { probs, cdf })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn last_support(&self) -> u64 {
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64 + 1
    }
}

/// A concrete memoryless source on the positive integers.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceDist {
    /// `P(k) = (1 - q) q^{k-1}`, `0 <= q < 1`.
    Geometric { q: f64 },
    /// Geometric law moved up by `shift`: `P(k) = (1 - q) q^{k-1-shift}` for `k > shift`.
    ShiftedGeometric { q: f64, shift: u64 },
    /// Geometric law conditioned on `k <= max`.
    TruncatedGeometric { q: f64, max: u64 },
    /// All mass on `k`.
    Point { k: u64 },
    Explicit(ExplicitPmf),
}

fn check_q(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(domain(format!("geometric parameter must be in [0, 1), got {q}")))
    }
}

/// Binary entropy in bits.
fn binary_entropy(q: f64) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    h(q) + h(1.0 - q)
}

impl SourceDist {
    pub fn geometric(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(Self::Geometric { q })
    }

    pub fn shifted_geometric(q: f64, shift: u64) -> Result<Self> {
        check_q(q)?;
        Ok(Self::ShiftedGeometric { q, shift })
    }

    pub fn truncated_geometric(q: f64, max: u64) -> Result<Self> {
        check_q(q)?;
        if max == 0 {
            return Err(domain("truncation point must be >= 1"));
        }
        Ok(Self::TruncatedGeometric { q, max })
    }

    pub fn point(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(domain("point mass must sit on k >= 1"));
        }
        Ok(Self::Point { k })
    }

    pub fn explicit(probs: Vec<f64>) -> Result<Self> {
        Ok(Self::Explicit(ExplicitPmf::new(probs)?))
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            Self::Geometric { q } => (1.0 - q) * q.powf((k - 1) as f64),
            Self::ShiftedGeometric { q, shift } => {
                if k <= *shift {
                    0.0
                } else {
                    (1.0 - q) * q.powf((k - 1 - shift) as f64)
                }
            }
            Self::TruncatedGeometric { q, max } => {
                if k > *max {
                    0.0
                } else {
                    (1.0 - q) * q.powf((k - 1) as f64) / (1.0 - q.powf(*max as f64))
                }
            }
            Self::Point { k: at } => {
                if k == *at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Explicit(e) => e.probs.get(k as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// `P(X > k)`.
    pub fn tail(&self, k: u64) -> f64 {
        match self {
            Self::Geometric { q } => q.powf(k as f64),
            Self::ShiftedGeometric { q, shift } => {
                if k <= *shift {
                    1.0
                } else {
                    q.powf((k - shift) as f64)
                }
            }
            Self::TruncatedGeometric { q, max } => {
                if k >= *max {
                    0.0
                } else {
                    let qm = q.powf(*max as f64);
                    (q.powf(k as f64) - qm) / (1.0 - qm)
                }
            }
            Self::Point { k: at } => {
                if k < *at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Explicit(e) => {
                if k as usize >= e.probs.len() {
                    0.0
                } else if k == 0 {
                    1.0
                } else {
                    (1.0 - e.cdf[k as usize - 1]).max(0.0)
                }
            }
        }
    }

    /// Largest symbol with positive probability, if the support is finite.
    pub fn support_max(&self) -> Option<u64> {
        match self {
            Self::Geometric { q } | Self::ShiftedGeometric { q, .. } if *q > 0.0 => None,
            Self::Geometric { .. } => Some(1),
            Self::ShiftedGeometric { shift, .. } => Some(shift + 1),
            Self::TruncatedGeometric { q, max } => Some(if *q > 0.0 { *max } else { 1 }),
            Self::Point { k } => Some(*k),
            Self::Explicit(e) => Some(e.last_support()),
        }
    }

    /// Whether `theta_k <= C e^{-alpha k}` for every `k`.
    pub fn is_member(&self, spec: &EnvelopeSpec) -> bool {
        let a = spec.alpha();
        match self {
            // The ratio theta_k / (C e^{-alpha k}) is monotone in k, so it
            // suffices to look at the first support point and at the rate.
            Self::Geometric { q } => {
                (*q == 0.0 || *q <= (-a).exp()) && 1.0 - q <= spec.bound(1)
            }
            Self::ShiftedGeometric { q, shift } => {
                (*q == 0.0 || *q <= (-a).exp()) && 1.0 - q <= spec.bound(shift + 1)
            }
            Self::Point { k } => 1.0 <= spec.bound(*k),
            Self::TruncatedGeometric { .. } | Self::Explicit(_) => {
                let last = self.support_max().unwrap_or(0);
                (1..=last).all(|k| self.pmf(k) <= spec.bound(k))
            }
        }
    }

    /// Shannon entropy in bits per symbol.
    pub fn entropy_bits(&self) -> f64 {
        match self {
            Self::Geometric { q } | Self::ShiftedGeometric { q, .. } => {
                binary_entropy(*q) / (1.0 - q)
            }
            Self::Point { .. } => 0.0,
            Self::TruncatedGeometric { .. } | Self::Explicit(_) => {
                let last = self.support_max().unwrap_or(0);
                (1..=last)
                    .map(|k| self.pmf(k))
                    .filter(|&p| p > 0.0)
                    .map(|p| -p * p.log2())
                    .sum()
            }
        }
    }

    /// One draw by inversion of the distribution function.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        match self {
            Self::Geometric { q } => geometric_inverse(*q, u),
            Self::ShiftedGeometric { q, shift } => shift + geometric_inverse(*q, u),
            Self::TruncatedGeometric { q, max } => {
                if *q == 0.0 {
                    return 1;
                }
                // P(X <= k) = (1 - q^k) / (1 - q^max); draw the smallest k
                // with P(X > k) < u.
                let qm = q.powf(*max as f64);
                let target = qm + u * (1.0 - qm);
                let k = (target.ln() / q.ln()).floor() as u64 + 1;
                k.clamp(1, *max)
            }
            Self::Point { k } => *k,
            Self::Explicit(e) => {
                let v = 1.0 - u;
                let idx = e.cdf.partition_point(|&c| c <= v);
                (idx as u64 + 1).min(e.last_support())
            }
        }
    }

    pub fn sample_iid<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<u64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Mean, when it is available in closed form.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Geometric { q } => Some(1.0 / (1.0 - q)),
            Self::ShiftedGeometric { q, shift } => Some(*shift as f64 + 1.0 / (1.0 - q)),
            Self::Point { k } => Some(*k as f64),
            _ => None,
        }
    }
}

fn geometric_inverse(q: f64, u: f64) -> u64 {
    if q == 0.0 {
        return 1;
    }
    // P(X > k) = q^k; the draw is the smallest k with q^k < u.
    let k = (u.ln() / q.ln()).floor();
    if k >= (u64::MAX / 2) as f64 {
        u64::MAX / 2
    } else {
        k as u64 + 1
    }
}

/// Hellinger distance `sqrt(sum_k (sqrt P(k) - sqrt Q(k))^2)`, summed until
/// both remaining tails are below [`TAIL_TOLERANCE`].
pub fn hellinger(p: &SourceDist, q: &SourceDist) -> f64 {
    let mut sum = 0.0;
    let mut k = 1u64;
    loop {
        let d = p.pmf(k).sqrt() - q.pmf(k).sqrt();
        sum += d * d;
        if p.tail(k) < TAIL_TOLERANCE && q.tail(k) < TAIL_TOLERANCE {
            break;
        }
        k += 1;
    }
    sum.sqrt().min(std::f64::consts::SQRT_2)
}

/// Per-trial seed derived from a base seed. Trials can then run in any
/// order or in parallel and still draw the same messages.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut z = base ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

impl fmt::Display for SourceDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric { q } => write!(f, "geom:q={q}"),
            Self::ShiftedGeometric { q, shift } => write!(f, "shifted-geom:q={q};shift={shift}"),
            Self::TruncatedGeometric { q, max } => write!(f, "trunc-geom:q={q};max={max}"),
            Self::Point { k } => write!(f, "point:k={k}"),
            Self::Explicit(e) => write!(f, "explicit:{}-point", e.probs.len()),
        }
    }
}

fn parse_params(body: &str) -> Result<Vec<(&str, &str)>> {
    body.split(';')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| domain(format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

fn param<T: FromStr>(params: &[(&str, &str)], key: &str) -> Result<Option<T>> {
    params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| {
            v.parse::<T>()
                .map_err(|_| domain(format!("cannot parse {key}=`{v}`")))
        })
        .transpose()
}

fn required<T: FromStr>(params: &[(&str, &str)], key: &str) -> Result<T> {
    param(params, key)?.ok_or_else(|| domain(format!("missing parameter `{key}`")))
}

/// Geometric parameter from either `q=<value>` or `rate=<r>` (`q = e^{-r}`).
fn geometric_q(params: &[(&str, &str)]) -> Result<f64> {
    match (param::<f64>(params, "q")?, param::<f64>(params, "rate")?) {
        (Some(q), None) => Ok(q),
        (None, Some(r)) => Ok((-r).exp()),
        _ => Err(domain("give exactly one of q=<value> or rate=<value>")),
    }
}

/// Reads an explicit pmf: one probability per line, line `k` holding
/// `P(k)`. Blank lines are skipped.
pub fn read_explicit(path: &Path) -> Result<SourceDist> {
    let text = std::fs::read_to_string(path)?;
    let mut probs = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: f64 = line.parse().map_err(|_| {
            domain(format!(
                "{}:{}: not a probability: `{line}`",
                path.display(),
                line_no + 1
            ))
        })?;
        probs.push(p);
    }
    SourceDist::explicit(probs)
}

impl SourceDist {
    /// Parses a source description:
    ///
    /// * `geom:q=0.3679` or `geom:rate=1`
    /// * `shifted-geom:q=0.3;shift=2`
    /// * `trunc-geom:q=0.5;max=10`
    /// * `point:k=3`
    /// * `explicit:path/to/file.csv`
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("source `{s}` lacks a `kind:` prefix")))?;
        if kind == "explicit" {
            return read_explicit(Path::new(body));
        }
        let params = parse_params(body)?;
        match kind {
            "geom" => Self::geometric(geometric_q(&params)?),
            "shifted-geom" => Self::shifted_geometric(geometric_q(&params)?, required(&params, "shift")?),
            "trunc-geom" => Self::truncated_geometric(geometric_q(&params)?, required(&params, "max")?),
            "point" => Self::point(required(&params, "k")?),
            other => Err(domain(format!("unknown source kind `{other}`"))),
        }
    }
}

impl FromStr for SourceDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
