//! Monte-Carlo experiments: redundancy of the codec on iid sources and the
//! empirical mean of the running maximum.

use std::io::Write;

use rayon::prelude::*;

use crate::bounds::{expected_max_bound, minimax_asymptote};
use crate::codec::encode_with_trace;
use crate::error::{domain, Error, Result};
use crate::sources::{seeded_rng, trial_seed, EnvelopeSpec, SourceDist};

/// CSV header of [`emit_csv`].
pub const REDUNDANCY_HEADER: [&str; 12] = [
    "alpha",
    "C",
    "source",
    "n",
    "trials",
    "seed",
    "mean_code_bits",
    "std_code_bits",
    "entropy_bits",
    "mean_redundancy",
    "theory_asymptote",
    "ratio",
];

/// CSV header of [`emit_max_csv`].
pub const MAX_HEADER: [&str; 9] = [
    "alpha",
    "C",
    "source",
    "n",
    "trials",
    "seed",
    "mean_max",
    "std_max",
    "bound",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: EnvelopeSpec,
    pub source: SourceDist,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.source.is_member(&self.spec) {
            return Err(Error::Membership(format!(
                "{} is not dominated by min(1, {} e^(-{} k))",
                self.source,
                self.spec.c(),
                self.spec.alpha()
            )));
        }
        if self.trials < 1 {
            return Err(domain("trials must be >= 1"));
        }
        if self.n_list.is_empty() || self.n_list[0] < 1 {
            return Err(domain("message lengths must be >= 1"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("message lengths must be strictly increasing"));
        }
        Ok(())
    }

    /// Message of trial `t`: the first `n` draws of that trial's generator.
    pub fn message(&self, trial: usize, n: usize) -> Vec<u64> {
        let mut rng = seeded_rng(trial_seed(self.seed, trial as u64));
        self.source.sample_iid(n, &mut rng)
    }
}

/// Mean and sample standard deviation, summed in slice order.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyRow {
    pub n: usize,
    pub mean_code_bits: f64,
    pub std_code_bits: f64,
    /// `n H(P)`.
    pub entropy_bits: f64,
    pub mean_redundancy: f64,
    /// Zero for `n = 1`, where the asymptote is undefined.
    pub theory_asymptote: f64,
    pub ratio: f64,
    /// Trials whose arithmetic-coded length exceeded its budget.
    pub budget_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyReport {
    pub config: ExperimentConfig,
    pub rows: Vec<RedundancyRow>,
}

/// Allowed arithmetic-coded length: `ceil(-log2 Q) + 1` plus two bits per
/// flush plus the rounding slack of the integer frequencies.
pub fn c1_budget(information: f64, escapes: usize, n: usize) -> f64 {
    information.ceil() + 1.0 + 2.0 * (escapes as f64 + 1.0) + n as f64 * 2f64.powi(-20)
}

/// Codeword length (without byte padding) and budget check of one trial.
fn code_trial(config: &ExperimentConfig, trial: usize, n: usize) -> Result<(f64, bool)> {
    let xs = config.message(trial, n);
    let (_, trace) = encode_with_trace(&xs)?;
    // small slack for the floating-point evaluation of -log2 Q
    let within = trace.c1_bits as f64
        <= c1_budget(trace.c1_information, trace.escapes(), n) + 1e-9 * trace.c1_information;
    Ok((trace.total_bits() as f64, within))
}

pub fn run_redundancy(config: &ExperimentConfig) -> Result<RedundancyReport> {
    config.validate()?;
    let h = config.source.entropy_bits();
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let results = (0..config.trials)
            .into_par_iter()
            .map(|t| code_trial(config, t, n))
            .collect::<Result<Vec<_>>>()?;
        let bits: Vec<f64> = results.iter().map(|r| r.0).collect();
        let budget_violations = results.iter().filter(|r| !r.1).count();
        let (mean, std) = mean_std(&bits);
        let entropy_bits = n as f64 * h;
        let mean_redundancy = mean - entropy_bits;
        let theory_asymptote = if n >= 2 {
            minimax_asymptote(n as f64, config.spec.alpha())?
        } else {
            0.0
        };
        rows.push(RedundancyRow {
            n,
            mean_code_bits: mean,
            std_code_bits: std,
            entropy_bits,
            mean_redundancy,
            theory_asymptote,
            ratio: mean_redundancy / theory_asymptote,
            budget_violations,
        });
    }
    Ok(RedundancyReport {
        config: config.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxRow {
    pub n: usize,
    pub mean_max: f64,
    pub std_max: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxReport {
    pub config: ExperimentConfig,
    pub rows: Vec<MaxRow>,
}

pub fn run_max_experiment(config: &ExperimentConfig) -> Result<MaxReport> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let maxima: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|t| config.message(t, n).into_iter().max().unwrap_or(0) as f64)
            .collect();
        let (mean_max, std_max) = mean_std(&maxima);
        rows.push(MaxRow {
            n,
            mean_max,
            std_max,
            bound: expected_max_bound(&config.spec, n as u64)?,
        });
    }
    Ok(MaxReport {
        config: config.clone(),
        rows,
    })
}

fn config_fields(c: &ExperimentConfig) -> [String; 3] {
    [c.spec.alpha().to_string(), c.spec.c().to_string(), c.source.to_string()]
}

pub fn emit_csv<W: Write>(report: &RedundancyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REDUNDANCY_HEADER)?;
    let c = &report.config;
    for r in &report.rows {
        let mut rec = config_fields(c).to_vec();
        rec.extend([
            r.n.to_string(),
            c.trials.to_string(),
            c.seed.to_string(),
            r.mean_code_bits.to_string(),
            r.std_code_bits.to_string(),
            r.entropy_bits.to_string(),
            r.mean_redundancy.to_string(),
            r.theory_asymptote.to_string(),
            r.ratio.to_string(),
        ]);
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_max_csv<W: Write>(report: &MaxReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MAX_HEADER)?;
    let c = &report.config;
    for r in &report.rows {
        let mut rec = config_fields(c).to_vec();
        rec.extend([
            r.n.to_string(),
            c.trials.to_string(),
            c.seed.to_string(),
            r.mean_max.to_string(),
            r.std_max.to_string(),
            r.bound.to_string(),
        ]);
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_message;

    fn spec81() -> EnvelopeSpec {
        EnvelopeSpec::new(8.0, 1.0).unwrap()
    }

    fn config(source: SourceDist, n_list: Vec<usize>, trials: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            spec: spec81(),
            source,
            n_list,
            trials,
            seed,
        }
    }

    fn geom() -> SourceDist {
        SourceDist::geometric((-1.0f64).exp()).unwrap()
    }

    #[test]
    fn point_mass_single_symbol() {
        let cfg = config(SourceDist::point(1).unwrap(), vec![1], 5, 0);
        let rep = run_redundancy(&cfg).unwrap();
        let (_, trace) = encode_with_trace(&[1]).unwrap();
        let r = &rep.rows[0];
        assert_eq!(r.mean_code_bits, trace.total_bits() as f64);
        assert_eq!(r.std_code_bits, 0.0);
        assert_eq!(r.entropy_bits, 0.0);
        assert_eq!(r.mean_redundancy, r.mean_code_bits);
        // Elias(2) then Elias(1)
        assert_eq!(trace.c2_bits, 5);
        assert!(trace.c1_bits <= 3);
        assert!(encode_message(&[1]).unwrap().len() * 8 >= trace.total_bits() as usize);
    }

    #[test]
    fn membership_is_enforced() {
        let cfg = config(SourceDist::point(10).unwrap(), vec![4], 1, 0);
        assert!(matches!(run_redundancy(&cfg), Err(Error::Membership(_))));
        assert!(matches!(run_max_experiment(&cfg), Err(Error::Membership(_))));
    }

    #[test]
    fn config_validation() {
        assert!(config(geom(), vec![4, 4], 1, 0).validate().is_err());
        assert!(config(geom(), vec![0, 4], 1, 0).validate().is_err());
        assert!(config(geom(), vec![], 1, 0).validate().is_err());
        assert!(config(geom(), vec![4], 0, 0).validate().is_err());
        assert!(config(geom(), vec![1, 4], 1, 0).validate().is_ok());
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = config(geom(), vec![16, 64], 20, 42);
        let mut a = Vec::new();
        let mut b = Vec::new();
        emit_csv(&run_redundancy(&cfg).unwrap(), &mut a).unwrap();
        emit_csv(&run_redundancy(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let other = config(geom(), vec![16, 64], 20, 43);
        let mut c = Vec::new();
        emit_csv(&run_redundancy(&other).unwrap(), &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn csv_layout() {
        let cfg = config(geom(), vec![8, 32, 128], 4, 7);
        let rep = run_redundancy(&cfg).unwrap();
        let mut out = Vec::new();
        emit_csv(&rep, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "alpha,C,source,n,trials,seed,mean_code_bits,std_code_bits,entropy_bits,mean_redundancy,theory_asymptote,ratio"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,8,geom:q=0.36787944117144233,8,4,7,"));
        // shortest round-trip formatting
        let fields: Vec<&str> = lines[2].split(',').collect();
        let mean: f64 = fields[6].parse().unwrap();
        assert_eq!(mean, rep.rows[1].mean_code_bits);
        assert_eq!(fields[6], rep.rows[1].mean_code_bits.to_string());
    }

    #[test]
    fn rows_are_consistent() {
        let cfg = config(geom(), vec![64, 256], 30, 1);
        let rep = run_redundancy(&cfg).unwrap();
        for r in &rep.rows {
            assert_eq!(r.budget_violations, 0);
            assert!(r.mean_code_bits >= r.entropy_bits - 2.0);
            assert!((r.ratio - r.mean_redundancy / r.theory_asymptote).abs() < 1e-12);
            assert!((r.entropy_bits - r.n as f64 * geom().entropy_bits()).abs() < 1e-9);
        }
    }

    #[test]
    fn point_mass_redundancy_stays_small() {
        let cfg = config(SourceDist::point(1).unwrap(), vec![1024], 1, 0);
        let r = &run_redundancy(&cfg).unwrap().rows[0];
        assert!(r.mean_redundancy < 0.5 * 10.0 + 20.0, "{}", r.mean_redundancy);
    }

    #[test]
    fn max_experiment_point_mass() {
        let cfg = config(SourceDist::point(2).unwrap(), vec![1, 10, 100], 50, 3);
        let rep = run_max_experiment(&cfg).unwrap();
        for r in &rep.rows {
            assert_eq!(r.mean_max, 2.0);
            assert_eq!(r.std_max, 0.0);
            let b = expected_max_bound(&spec81(), r.n as u64).unwrap();
            assert!((r.bound - b).abs() <= 1e-12);
        }
        let mut out = Vec::new();
        emit_max_csv(&rep, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), MAX_HEADER.join(","));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn max_experiment_geometric_under_bound() {
        let cfg = config(geom(), vec![10, 100, 1000], 2000, 9);
        for r in run_max_experiment(&cfg).unwrap().rows {
            assert!(r.mean_max <= r.bound, "n={}: {} > {}", r.n, r.mean_max, r.bound);
        }
    }
}
