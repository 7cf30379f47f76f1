//! Closed-form bounds and asymptotes for the envelope classes: metric
//! entropy brackets (nats), redundancy asymptotes (bits), running-maximum
//! moments, power-law envelope bounds and the affinity bound.

use std::f64::consts::{LN_2, LOG2_E, PI};
use std::io::Write;

use crate::error::{domain, Result};
use crate::sources::{Envelope, EnvelopeSpec};

/// Smallest `n >= start` with `pred(n)`, for a predicate that stays true
/// once it becomes true.
fn first_true(start: u64, pred: impl Fn(u64) -> bool) -> Result<u64> {
    if pred(start) {
        return Ok(start);
    }
    let mut lo = start;
    let mut step = 1u64;
    let hi = loop {
        let probe = lo
            .checked_add(step)
            .filter(|&p| p < 1 << 62)
            .ok_or_else(|| domain("tail condition never met"))?;
        if pred(probe) {
            break probe;
        }
        lo = probe;
        step *= 2;
    };
    // pred(lo) is false, pred(hi) is true
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("epsilon must be positive, got {eps}")))
    }
}

/// Smallest `n >= 1` with `sum_{k > n} f(k) <= eps^2 / 16`.
pub fn n_epsilon<E: Envelope + ?Sized>(env: &E, eps: f64) -> Result<u64> {
    check_epsilon(eps)?;
    let threshold = eps * eps / 16.0;
    if threshold == 0.0 {
        return Err(domain(format!("epsilon {eps} is too small to evaluate")));
    }
    first_true(1, |n| env.tail(n) <= threshold)
}

/// Smallest `l >= 0` with `sum_{k > l} f(k) <= 1`.
pub fn l_f<E: Envelope + ?Sized>(env: &E) -> Result<u64> {
    first_true(0, |l| env.tail(l) <= 1.0)
}

/// Minus the log-volume of the unit ball in `R^dim`:
/// `ln Gamma(dim/2 + 1) - (dim/2) ln pi`.
pub fn log_ball_volume_neg(dim: u64) -> Result<f64> {
    if dim < 1 {
        return Err(domain("dimension must be >= 1"));
    }
    let half = dim as f64 / 2.0;
    Ok(libm::lgamma(half + 1.0) - half * PI.ln())
}

/// `sum_{k=1}^{N_eps} ln(sqrt f(k) + eps/4)`.
pub fn b_epsilon<E: Envelope + ?Sized>(env: &E, eps: f64) -> Result<f64> {
    let n = n_epsilon(env, eps)?;
    let b: f64 = (1..=n).map(|k| (env.f(k).sqrt() + eps / 4.0).ln()).sum();
    debug_assert!(b >= -(n as f64) * ((1.0 / eps).ln() + 2.0 * LN_2) - 1e-9);
    debug_assert!(b <= eps / 4.0 * n as f64 + 1e-12);
    Ok(b)
}

/// Upper bound on the metric entropy at scale `eps`, in nats.
pub fn entropy_upper<E: Envelope + ?Sized>(env: &E, eps: f64) -> Result<f64> {
    let n = n_epsilon(env, eps)?;
    let nf = n as f64;
    Ok(nf * (1.0 / eps).ln() + 3.0 * nf * LN_2 + log_ball_volume_neg(n)? + b_epsilon(env, eps)?)
}

/// Default dimension of the lower-bound construction, `floor((2/alpha) ln(1/eps))`.
pub fn default_lower_dimension(alpha: f64, eps: f64) -> i64 {
    ((2.0 / alpha) * (1.0 / eps).ln()).floor() as i64
}

/// Lower bound on the metric entropy at scale `eps`, in nats, using the
/// coordinates `l_f + 1 ..= l_f + m`.
pub fn entropy_lower_with<E: Envelope + ?Sized>(env: &E, eps: f64, m: u64) -> Result<f64> {
    check_epsilon(eps)?;
    if m < 1 {
        return Err(domain("lower-bound dimension m must be >= 1"));
    }
    if env.total() < 2.0 {
        return Err(domain("envelope mass must be at least 2"));
    }
    let l = l_f(env)?;
    let mut log_f = 0.0;
    for k in l + 1..=l + m {
        let f = env.f(k);
        if f <= 0.0 {
            return Err(domain(format!("envelope vanishes at k = {k}")));
        }
        log_f += f.ln();
    }
    Ok(0.5 * log_f + m as f64 * (1.0 / eps).ln() + log_ball_volume_neg(m)?)
}

/// Lower bound for an exponential envelope; `m` defaults to
/// `floor((2/alpha) ln(1/eps))`.
pub fn entropy_lower(spec: &EnvelopeSpec, eps: f64, m: Option<u64>) -> Result<f64> {
    check_epsilon(eps)?;
    let m = match m {
        Some(m) => m,
        None => {
            let m = default_lower_dimension(spec.alpha(), eps);
            if m < 1 {
                return Err(domain(format!(
                    "epsilon {eps} is too large: default dimension is {m}"
                )));
            }
            m as u64
        }
    };
    entropy_lower_with(spec, eps, m)
}

/// The common leading term `(1/alpha) ln^2(1/eps)` of both entropy bounds.
pub fn entropy_normalizer(alpha: f64, eps: f64) -> f64 {
    let l = (1.0 / eps).ln();
    l * l / alpha
}

/// `log2 e * h(sqrt n)`: the redundancy implied by a metric entropy
/// function `h` (in nats).
pub fn redundancy_from_entropy(h: impl Fn(f64) -> f64, n: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(domain(format!("message length must be >= 2, got {n}")));
    }
    Ok(LOG2_E * h(n.sqrt()))
}

/// Leading term of the minimax redundancy, `log2^2(n) / (4 alpha log2 e)` bits.
pub fn minimax_asymptote(n: f64, alpha: f64) -> Result<f64> {
    if !(n >= 2.0) {
        return Err(domain(format!("message length must be >= 2, got {n}")));
    }
    if !(alpha > 0.0) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    let l = n.log2();
    Ok(l * l / (4.0 * alpha * LOG2_E))
}

/// Upper bound on the expected running maximum of `n` draws:
/// `(1/alpha)(ln n + ln(C / (1 - e^{-alpha})) + 1)`.
pub fn expected_max_bound(spec: &EnvelopeSpec, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(domain("message length must be >= 1"));
    }
    let a = spec.alpha();
    Ok(((n as f64).ln() + (spec.c() / -(-a).exp_m1()).ln() + 1.0) / a)
}

/// Riemann zeta for real `s > 1`: partial sum plus an Euler-Maclaurin
/// remainder.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(domain(format!("zeta needs s > 1, got {s}")));
    }
    const N: u32 = 64;
    let head: f64 = (1..N).rev().map(|k| f64::from(k).powf(-s)).sum();
    let n = f64::from(N);
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0;
    Ok(head + tail)
}

/// `(1/alpha) int_1^inf (1 - exp(-1/(zeta(alpha) u))) u^{1/alpha - 1} du`.
pub fn a_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(domain(format!("power-law exponent must exceed 1, got {alpha}")));
    }
    let z = zeta(alpha)?;
    let inv = 1.0 / alpha;
    // Body on [1, U] in t = ln u, where du u^{1/alpha - 1} = u^{1/alpha} dt.
    const SPLIT: f64 = 1e4;
    let body = quadrature::double_exponential::integrate(
        |t: f64| -(-(-t).exp() / z).exp_m1() * (t * inv).exp(),
        0.0,
        SPLIT.ln(),
        1e-13,
    )
    .integral;
    // Beyond U expand 1 - e^{-x} = sum_j (-1)^{j+1} x^j / j! and integrate
    // term by term.
    let mut tail = 0.0;
    let mut coeff = 1.0;
    for j in 1..40u32 {
        let jf = f64::from(j);
        coeff /= z * jf;
        let term = coeff * SPLIT.powf(inv - jf) / (jf - inv);
        tail += if j % 2 == 1 { term } else { -term };
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
    }
    Ok((body + tail) * inv)
}

/// Bounds in bits on the minimax redundancy of the power-law envelope
/// `f(k) = min(1, C k^{-alpha})`: `(lower, upper)`.
pub fn power_law_bounds(c: f64, alpha: f64, n: u64) -> Result<(f64, f64)> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(domain(format!("power-law exponent must exceed 1, got {alpha}")));
    }
    if !(c > 1.0 && c.is_finite()) {
        return Err(domain(format!("C must exceed 1, got {c}")));
    }
    if n < 2 {
        return Err(domain("message length must be >= 2"));
    }
    let cz = (c * zeta(alpha)?).floor();
    if cz < 2.0 {
        return Err(domain(format!("floor(C zeta(alpha)) = {cz} must be >= 2")));
    }
    let nf = n as f64;
    let inv = 1.0 / alpha;
    let lower = a_alpha(alpha)? * nf.powf(inv) * cz.log2();
    let upper = (2.0 * c * nf / (alpha - 1.0)).powf(inv) * nf.log2().powf(1.0 - inv);
    Ok((lower, upper))
}

/// `(sum_k f(k))^lambda`.
pub fn affinity_bound<E: Envelope + ?Sized>(env: &E, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(env.total().powf(lambda))
}

/// Which evaluator produced a [`BoundCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Entropy,
    Redundancy,
    PowerLaw,
    MaxMoment,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Entropy => "entropy",
            Self::Redundancy => "redundancy",
            Self::PowerLaw => "powerlaw",
            Self::MaxMoment => "maxmoment",
        }
    }
}

/// A bound evaluated over a grid of `eps` or `n` values.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub kind: BoundKind,
    /// Parameters of the class, e.g. `C=8;alpha=1`.
    pub params: String,
    pub grid_name: &'static str,
    /// Unit of the bound columns: `nats`, `bits` or `symbols`.
    pub unit: &'static str,
    /// Multiply bound values by this to get bits.
    pub to_bits: f64,
    pub columns: Vec<&'static str>,
    pub grid: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("grid is empty"));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(domain("grid values must be finite"));
    }
    let up = grid.windows(2).all(|w| w[0] < w[1]);
    let down = grid.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(domain("grid must be strictly monotone"));
    }
    Ok(())
}

fn check_rows(rows: &[Vec<f64>]) -> Result<()> {
    if rows.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(domain("bound evaluated to a non-finite value"))
    }
}

fn spec_params(spec: &EnvelopeSpec) -> String {
    format!("C={};alpha={}", spec.c(), spec.alpha())
}

fn as_count(n: f64) -> Result<u64> {
    if n >= 1.0 && n.fract() == 0.0 && n < 2f64.powi(63) {
        Ok(n as u64)
    } else {
        Err(domain(format!("message length must be a positive integer, got {n}")))
    }
}

impl BoundCurve {
    /// Both entropy bounds over a grid of `eps` values, with their ratios to
    /// `(1/alpha) ln^2(1/eps)`.
    pub fn entropy(spec: &EnvelopeSpec, eps_grid: &[f64], m: Option<u64>) -> Result<Self> {
        check_grid(eps_grid)?;
        let mut rows = Vec::with_capacity(eps_grid.len());
        for &eps in eps_grid {
            let n = n_epsilon(spec, eps)?;
            let dim = match m {
                Some(m) => m as f64,
                None => default_lower_dimension(spec.alpha(), eps) as f64,
            };
            let lower = entropy_lower(spec, eps, m)?;
            let upper = entropy_upper(spec, eps)?;
            let norm = entropy_normalizer(spec.alpha(), eps);
            rows.push(vec![n as f64, dim, lower, upper, norm, lower / norm, upper / norm]);
        }
        check_rows(&rows)?;
        Ok(Self {
            kind: BoundKind::Entropy,
            params: spec_params(spec),
            grid_name: "epsilon",
            unit: "nats",
            to_bits: LOG2_E,
            columns: vec!["n_epsilon", "m", "lower", "upper", "normalizer", "lower_ratio", "upper_ratio"],
            grid: eps_grid.to_vec(),
            rows,
        })
    }

    /// Minimax redundancy asymptote over a grid of message lengths.
    pub fn redundancy(alpha: f64, n_grid: &[f64]) -> Result<Self> {
        check_grid(n_grid)?;
        let rows = n_grid
            .iter()
            .map(|&n| Ok(vec![minimax_asymptote(n, alpha)?]))
            .collect::<Result<Vec<_>>>()?;
        check_rows(&rows)?;
        Ok(Self {
            kind: BoundKind::Redundancy,
            params: format!("alpha={alpha}"),
            grid_name: "n",
            unit: "bits",
            to_bits: 1.0,
            columns: vec!["asymptote"],
            grid: n_grid.to_vec(),
            rows,
        })
    }

    pub fn power_law(c: f64, alpha: f64, n_grid: &[f64]) -> Result<Self> {
        check_grid(n_grid)?;
        let rows = n_grid
            .iter()
            .map(|&n| {
                let (lo, hi) = power_law_bounds(c, alpha, as_count(n)?)?;
                Ok(vec![lo, hi])
            })
            .collect::<Result<Vec<_>>>()?;
        check_rows(&rows)?;
        Ok(Self {
            kind: BoundKind::PowerLaw,
            params: format!("C={c};alpha={alpha}"),
            grid_name: "n",
            unit: "bits",
            to_bits: 1.0,
            columns: vec!["lower", "upper"],
            grid: n_grid.to_vec(),
            rows,
        })
    }

    pub fn max_moment(spec: &EnvelopeSpec, n_grid: &[f64]) -> Result<Self> {
        check_grid(n_grid)?;
        let rows = n_grid
            .iter()
            .map(|&n| Ok(vec![expected_max_bound(spec, as_count(n)?)?]))
            .collect::<Result<Vec<_>>>()?;
        check_rows(&rows)?;
        Ok(Self {
            kind: BoundKind::MaxMoment,
            params: spec_params(spec),
            grid_name: "n",
            unit: "symbols",
            to_bits: f64::NAN,
            columns: vec!["expected_max_bound"],
            grid: n_grid.to_vec(),
            rows,
        })
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["bound", "params", "unit", "to_bits", self.grid_name]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(self.columns.iter().map(|s| s.to_string()));
        h
    }

    /// Writes one CSV row per grid point. Floats use the shortest decimal
    /// that reads back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for (g, row) in self.grid.iter().zip(&self.rows) {
            let mut rec = vec![
                self.kind.name().to_string(),
                self.params.clone(),
                self.unit.to_string(),
                self.to_bits.to_string(),
                g.to_string(),
            ];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::TabulatedEnvelope;
    use proptest::prelude::*;

    fn spec81() -> EnvelopeSpec {
        EnvelopeSpec::new(8.0, 1.0).unwrap()
    }

    fn decades(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|d| 10f64.powi(-d)).collect()
    }

    #[test]
    fn n_epsilon_worked_value() {
        let s = spec81();
        assert_eq!(n_epsilon(&s, 0.1).unwrap(), 9);
        // by hand: tail beyond 9 passes, beyond 8 does not
        let t = 0.01 / 16.0;
        let tail = |n: i32| 8.0 * (-(n as f64 + 1.0)).exp() / (1.0 - (-1.0f64).exp());
        assert!(tail(9) <= t && tail(8) > t);
    }

    #[test]
    fn n_epsilon_large_epsilon_is_one() {
        let s = spec81();
        assert_eq!(n_epsilon(&s, 100.0).unwrap(), 1);
        assert!(n_epsilon(&s, 0.0).is_err());
        assert!(n_epsilon(&s, -1.0).is_err());
    }

    #[test]
    fn n_epsilon_closed_form_ceiling() {
        for (c, a) in [(8.0, 1.0), (50.0, 0.5), (1e3, 2.0)] {
            let s = EnvelopeSpec::new(c, a).unwrap();
            for eps in decades(1, 8) {
                let n = n_epsilon(&s, eps).unwrap() as f64;
                let cap = (2.0 / a) * (1.0 / eps).ln() + (1.0 / a) * (16.0 * c / (1.0 - (-a).exp())).ln();
                assert!(n <= cap, "C={c} a={a} eps={eps}");
            }
        }
    }

    #[test]
    fn tabulated_envelope_uses_the_loop() {
        let t = TabulatedEnvelope::new(vec![1.0, 1.0, 0.5, 0.1, 0.01]).unwrap();
        // tails beyond 0..=5: 2.61, 1.61, 0.61, 0.11, 0.01, 0
        assert_eq!(l_f(&t).unwrap(), 2);
        assert_eq!(n_epsilon(&t, 0.4).unwrap(), 4); // 0.01 <= 0.01
        assert_eq!(n_epsilon(&t, 0.3).unwrap(), 5);
    }

    #[test]
    fn l_f_worked_value() {
        assert_eq!(l_f(&spec81()).unwrap(), 2);
    }

    #[test]
    fn ball_volume_values() {
        assert!((log_ball_volume_neg(2).unwrap() + PI.ln()).abs() < 1e-12);
        assert!((log_ball_volume_neg(2).unwrap() - -1.144_729_886).abs() < 1e-9);
        assert!((log_ball_volume_neg(1).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!(log_ball_volume_neg(0).is_err());
        // even dimensions: ln k! - k ln pi
        for k in 1..60u64 {
            let lnfact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
            let want = lnfact - k as f64 * PI.ln();
            let got = log_ball_volume_neg(2 * k).unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn ball_volume_growth_trend() {
        let ratios: Vec<f64> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&n: &f64| log_ball_volume_neg(n as u64).unwrap() / (n / 2.0 * n.ln()))
            .collect();
        assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{ratios:?}");
        assert!(ratios.iter().all(|&r| r < 1.0));
    }

    #[test]
    fn b_epsilon_against_term_by_term_sum() {
        let eps = 0.1f64;
        let mut b = 0.0f64;
        for k in 1..=9 {
            let f = if k <= 2 { 1.0 } else { 8.0 * (-(k as f64)).exp() };
            b += (f.sqrt() + eps / 4.0).ln();
        }
        assert!((b_epsilon(&spec81(), eps).unwrap() - b).abs() < 1e-12);
    }

    #[test]
    fn b_epsilon_in_the_clamp_region() {
        let t = TabulatedEnvelope::new(vec![1.0; 3]).unwrap();
        let eps = 1e-3;
        let b = b_epsilon(&t, eps).unwrap();
        assert_eq!(n_epsilon(&t, eps).unwrap(), 3);
        assert!((b - 3.0 * (1.0 + eps / 4.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn b_epsilon_sandwich() {
        let s = spec81();
        for eps in decades(1, 8) {
            let n = n_epsilon(&s, eps).unwrap() as f64;
            let b = b_epsilon(&s, eps).unwrap();
            assert!(b >= -n * (1.0 / eps).ln() - 2.0 * n * LN_2);
            assert!(b <= eps / 4.0 * n);
        }
    }

    #[test]
    fn entropy_bounds_bracket() {
        let s = spec81();
        for eps in decades(1, 6) {
            let lo = entropy_lower(&s, eps, None).unwrap();
            let hi = entropy_upper(&s, eps).unwrap();
            assert!(lo <= hi, "eps={eps}: {lo} > {hi}");
        }
    }

    #[test]
    fn entropy_lower_explicit_m() {
        let s = spec81();
        // m = 1: one coordinate just past l_f = 2
        let want = 0.5 * (8.0 * (-3.0f64).exp()).ln() + (10.0f64).ln() + 0.5f64.ln();
        assert!((entropy_lower(&s, 0.1, Some(1)).unwrap() - want).abs() < 1e-12);
        assert!(entropy_lower(&s, 0.1, Some(0)).is_err());
        // default m is floor(2 ln 1.5) = 0
        assert!(entropy_lower(&s, 1.0 / 1.5, None).is_err());
    }

    #[test]
    fn asymptote_values() {
        let v = minimax_asymptote(1024.0, 1.0).unwrap();
        assert!((v - 100.0 / (4.0 * LOG2_E)).abs() < 1e-12);
        assert!((v - 17.328).abs() < 1e-3);
        assert!(minimax_asymptote(1.0, 1.0).is_err());
        for n in [2.0, 100.0, 1e6] {
            let a = minimax_asymptote(n, 1.0).unwrap();
            let b = minimax_asymptote(n, 2.0).unwrap();
            assert!((b - a / 2.0).abs() <= 1e-14 * a);
        }
    }

    #[test]
    fn asymptote_matches_entropy_mapping() {
        for alpha in [0.5, 1.0, 3.0] {
            for n in [2.0, 17.0, 1024.0, 1e9] {
                let h = |x: f64| x.ln() * x.ln() / alpha;
                let a = minimax_asymptote(n, alpha).unwrap();
                let b = redundancy_from_entropy(h, n).unwrap();
                assert!((a - b).abs() <= 1e-12 * a, "{a} {b}");
            }
        }
    }

    #[test]
    fn expected_max_values() {
        let s = spec81();
        let v = expected_max_bound(&s, 100).unwrap();
        assert!((v - 8.143).abs() < 1e-3, "{v}");
        let want = 100f64.ln() + (8.0 / (1.0 - (-1.0f64).exp())).ln() + 1.0;
        assert!((v - want).abs() < 1e-12);
        assert!(expected_max_bound(&s, 1000).unwrap() > v);
        let s2 = EnvelopeSpec::new(9.0, 1.0).unwrap();
        assert!(expected_max_bound(&s2, 100).unwrap() > v);
        assert!(expected_max_bound(&s, 0).is_err());
    }

    /// Partial sum to `n` plus the midpoint of the integral bracket on the tail.
    fn zeta_oracle(s: f64, n: u64) -> (f64, f64) {
        let head: f64 = (1..=n).rev().map(|k| (k as f64).powf(-s)).sum();
        let lo = (n as f64 + 1.0).powf(1.0 - s) / (s - 1.0);
        let hi = (n as f64).powf(1.0 - s) / (s - 1.0);
        (head + (lo + hi) / 2.0, (hi - lo) / 2.0)
    }

    #[test]
    fn zeta_values() {
        let z2 = zeta(2.0).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-13);
        for s in [1.1, 1.5, 2.0, 3.3, 7.0] {
            let (v, slack) = zeta_oracle(s, 2_000_000);
            assert!((zeta(s).unwrap() - v).abs() <= slack + 1e-10, "s={s}");
        }
        assert!(zeta(1.0).is_err());
    }

    /// Midpoint rule in t = ln u on a long range; the neglected tail is
    /// below e^{-(1 - 1/alpha) T}.
    fn a_alpha_oracle(alpha: f64) -> f64 {
        let z = zeta(alpha).unwrap();
        let t_max = 60.0 * alpha / (alpha - 1.0);
        let steps = 2_000_000;
        let h = t_max / steps as f64;
        let mut s = 0.0;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * h;
            s += -(-(-t).exp() / z).exp_m1() * (t / alpha).exp();
        }
        s * h / alpha
    }

    #[test]
    fn a_alpha_against_midpoint_rule() {
        for alpha in [1.5, 2.0, 4.0] {
            let got = a_alpha(alpha).unwrap();
            let want = a_alpha_oracle(alpha);
            assert!(((got - want) / want).abs() < 1e-6, "alpha={alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn a_alpha_positive() {
        for i in 1..=90 {
            let alpha = 1.0 + i as f64 * 0.1;
            let a = a_alpha(alpha).unwrap();
            assert!(a > 0.0 && a.is_finite(), "alpha={alpha}");
        }
        assert!(a_alpha(1.0).is_err());
    }

    #[test]
    fn power_law_bracket() {
        for d in 2..=6 {
            let (lo, hi) = power_law_bounds(2.0, 2.0, 10u64.pow(d)).unwrap();
            assert!(0.0 < lo && lo <= hi, "n=1e{d}: {lo} {hi}");
        }
        assert!(power_law_bounds(2.0, 1.0, 100).is_err());
        assert!(power_law_bounds(1.0, 2.0, 100).is_err());
        // floor(1.1 * zeta(2)) = 1
        assert!(power_law_bounds(1.1, 2.0, 100).is_err());
    }

    #[test]
    fn affinity_values() {
        let s = spec81();
        let sum = 2.0 + 8.0 * (-3.0f64).exp() / (1.0 - (-1.0f64).exp());
        assert!((affinity_bound(&s, 1.0).unwrap() - sum).abs() < 1e-12);
        assert!((sum - 2.6301).abs() < 1e-4);
        assert!((affinity_bound(&s, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(affinity_bound(&s, 0.5).unwrap() < affinity_bound(&s, 0.6).unwrap());
        assert!(affinity_bound(&s, 0.0).is_err());
    }

    #[test]
    fn curves_and_csv() {
        let s = spec81();
        let c = BoundCurve::entropy(&s, &decades(1, 3), None).unwrap();
        assert_eq!(c.rows.len(), 3);
        assert_eq!(c.rows[0][0], 9.0);
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "bound,params,unit,to_bits,epsilon,n_epsilon,m,lower,upper,normalizer,lower_ratio,upper_ratio"
        );
        assert!(lines.next().unwrap().starts_with("entropy,C=8;alpha=1,nats,1.4426950408889634,0.1,9,4,"));
        assert_eq!(text.lines().count(), 4);

        let r = BoundCurve::redundancy(1.0, &[1024.0]).unwrap();
        assert!((r.rows[0][0] - 17.328).abs() < 1e-3);
        assert!(BoundCurve::redundancy(1.0, &[1024.0, 16.0, 4096.0]).is_err());
        assert!(BoundCurve::redundancy(1.0, &[]).is_err());
        assert!(BoundCurve::power_law(2.0, 2.0, &[100.0, 1000.0]).is_ok());
        assert!(BoundCurve::max_moment(&s, &[10.0, 2.5]).is_err());
    }

    proptest! {
        #[test]
        fn lower_never_exceeds_upper(c in 7.5f64..1e4, alpha in 0.2f64..3.0, d in 1.0f64..8.0) {
            prop_assume!(c > (2.0 * alpha).exp());
            let s = EnvelopeSpec::new(c, alpha).unwrap();
            let eps = 10f64.powf(-d);
            if let Ok(lo) = entropy_lower(&s, eps, None) {
                prop_assert!(lo <= entropy_upper(&s, eps).unwrap());
            }
        }

        #[test]
        fn n_epsilon_is_minimal(c in 7.5f64..1e4, alpha in 0.2f64..3.0, eps in 1e-6f64..1.0) {
            prop_assume!(c > (2.0 * alpha).exp());
            let s = EnvelopeSpec::new(c, alpha).unwrap();
            let n = n_epsilon(&s, eps).unwrap();
            prop_assert!(s.tail(n) <= eps * eps / 16.0);
            prop_assert!(n == 1 || s.tail(n - 1) > eps * eps / 16.0);
        }
    }
}
