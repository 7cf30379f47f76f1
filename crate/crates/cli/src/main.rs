use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accode::bounds::BoundCurve;
use accode::lab::{self, ExperimentConfig};
use accode::{EnvelopeSpec, SourceDist};
use clap::{Args, Parser, Subcommand, ValueEnum};
use integer_encoding::VarInt;

/// Adaptive censoring codec for sequences of positive integers.
#[derive(Debug, Parser)]
#[command(name = "accode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a list of positive integers.
    Encode(CodecArgs),
    /// Decompress a stream back into integers.
    Decode(CodecArgs),
    /// Measure codec redundancy (or the running maximum) on a simulated source.
    Bench(BenchArgs),
    /// Evaluate a bound over a grid and write it as CSV.
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One decimal integer per line (LF or CRLF).
    Text,
    /// LEB128: 7 bits per byte, low group first, high bit marks continuation.
    Varint,
}

#[derive(Debug, Args)]
struct CodecArgs {
    /// Input file.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output file.
    #[arg(long = "out", value_name = "PATH")]
    output: PathBuf,
    /// Layout of the uncompressed side.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// Mean codeword length against n H(P).
    Redundancy,
    /// Mean running maximum against its bound.
    Max,
}

#[derive(Debug, Args)]
struct EnvelopeArgs {
    /// Envelope decay rate (alpha > 0).
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Envelope constant (C > e^(2 alpha)).
    #[arg(long = "C", value_name = "C", allow_negative_numbers = true)]
    c: f64,
}

impl EnvelopeArgs {
    fn spec(&self) -> Result<EnvelopeSpec, CliError> {
        Ok(EnvelopeSpec::new(self.c, self.alpha)?)
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    envelope: EnvelopeArgs,
    /// Source: geom:q=..|geom:rate=..|shifted-geom:q=..;shift=..|trunc-geom:q=..;max=..|point:k=..|explicit:FILE
    #[arg(long)]
    source: String,
    /// Comma-separated, strictly increasing message lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    /// Messages per length.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Base seed; trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Experiment::Redundancy)]
    experiment: Experiment,
    /// CSV destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Subcommand)]
enum BoundsCommand {
    /// Lower and upper metric entropy bounds (nats) over an epsilon grid.
    Entropy {
        #[command(flatten)]
        envelope: EnvelopeArgs,
        /// Comma-separated epsilon values.
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")]
        eps: Vec<f64>,
        /// Dimension of the lower-bound construction (default floor((2/alpha) ln(1/eps))).
        #[arg(long)]
        m: Option<u64>,
        /// CSV destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Minimax redundancy asymptote (bits) of the exponential envelope class.
    Redundancy {
        /// Envelope decay rate (alpha > 0).
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Comma-separated message lengths.
        #[arg(long, alias = "n-list", value_delimiter = ',', required = true)]
        n: Vec<f64>,
        /// CSV destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Lower and upper redundancy bounds (bits) for the power-law envelope class.
    Powerlaw {
        /// Power-law exponent (alpha > 1).
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Envelope constant (C > 1).
        #[arg(long = "C", value_name = "C", allow_negative_numbers = true)]
        c: f64,
        /// Comma-separated message lengths.
        #[arg(long, alias = "n-list", value_delimiter = ',', required = true)]
        n: Vec<f64>,
        /// CSV destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Upper bound on the expected running maximum.
    Maxmoment {
        #[command(flatten)]
        envelope: EnvelopeArgs,
        /// Comma-separated message lengths.
        #[arg(long, alias = "n-list", value_delimiter = ',', required = true)]
        n: Vec<f64>,
        /// CSV destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Invalid(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Invalid(_) => 2,
        }
    }
}

impl From<accode::Error> for CliError {
    fn from(e: accode::Error) -> Self {
        match e {
            accode::Error::Io(m) => Self::Io(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_text(bytes: &[u8]) -> Result<Vec<u64>, CliError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::Invalid(format!("input is not UTF-8: {e}")))?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('\n')
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 1;
            let token = line.strip_suffix('\r').unwrap_or(line).trim();
            match token.parse::<u64>() {
                Ok(0) => Err(CliError::Invalid(format!("line {line_no}: symbol must be ≥ 1"))),
                Ok(x) => Ok(x),
                Err(_) if token.starts_with('-') && token[1..].bytes().all(|b| b.is_ascii_digit()) => {
                    Err(CliError::Invalid(format!("line {line_no}: symbol must be ≥ 1")))
                }
                Err(e) => Err(CliError::Invalid(format!("line {line_no}: `{token}`: {e}"))),
            }
        })
        .collect()
}

fn parse_varint(bytes: &[u8]) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let (x, used) = u64::decode_var(&bytes[offset..]).ok_or_else(|| {
            CliError::Invalid(format!("byte offset {offset}: truncated or oversized varint"))
        })?;
        if x == 0 {
            return Err(CliError::Invalid(format!("byte offset {offset}: symbol must be ≥ 1")));
        }
        out.push(x);
        offset += used;
    }
    Ok(out)
}

fn render(xs: &[u64], format: Format) -> Vec<u8> {
    match format {
        Format::Text => xs.iter().map(|x| format!("{x}\n")).collect::<String>().into_bytes(),
        Format::Varint => xs.iter().flat_map(|x| x.encode_var_vec()).collect(),
    }
}

fn cmd_encode(args: &CodecArgs) -> Result<(), CliError> {
    let raw = read_file(&args.input)?;
    let xs = match args.format {
        Format::Text => parse_text(&raw)?,
        Format::Varint => parse_varint(&raw)?,
    };
    let bytes = accode::encode_message(&xs)?;
    write_file(&args.output, &bytes)
}

fn cmd_decode(args: &CodecArgs) -> Result<(), CliError> {
    let raw = read_file(&args.input)?;
    let (xs, consumed) = accode::decode_with_length(&raw)?;
    let used = consumed.div_ceil(8) as usize;
    if used < raw.len() {
        eprintln!(
            "warning: ignored {} trailing byte(s) after the codeword",
            raw.len() - used
        );
    }
    write_file(&args.output, &render(&xs, args.format))
}

/// Buffers CSV output and sends it to a file or, for `-`, to stdout.
fn emit(out: &str, write: impl FnOnce(&mut Vec<u8>) -> accode::Result<()>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    if out == "-" {
        io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::Io(format!("stdout: {e}")))
    } else {
        write_file(Path::new(out), &buf)
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let config = ExperimentConfig {
        spec: args.envelope.spec()?,
        source: SourceDist::parse(&args.source)?,
        n_list: args.n_list.clone(),
        trials: args.trials,
        seed: args.seed,
    };
    match args.experiment {
        Experiment::Redundancy => {
            let report = lab::run_redundancy(&config)?;
            let violations: usize = report.rows.iter().map(|r| r.budget_violations).sum();
            if violations > 0 {
                eprintln!("warning: {violations} message(s) exceeded the arithmetic-code length budget");
            }
            emit(&args.out, |w| lab::emit_csv(&report, w))
        }
        Experiment::Max => {
            let report = lab::run_max_experiment(&config)?;
            emit(&args.out, |w| lab::emit_max_csv(&report, w))
        }
    }
}

fn cmd_bounds(cmd: &BoundsCommand) -> Result<(), CliError> {
    let (curve, out) = match cmd {
        BoundsCommand::Entropy { envelope, eps, m, out } => {
            (BoundCurve::entropy(&envelope.spec()?, eps, *m)?, out)
        }
        BoundsCommand::Redundancy { alpha, n, out } => (BoundCurve::redundancy(*alpha, n)?, out),
        BoundsCommand::Powerlaw { alpha, c, n, out } => (BoundCurve::power_law(*c, *alpha, n)?, out),
        BoundsCommand::Maxmoment { envelope, n, out } => {
            (BoundCurve::max_moment(&envelope.spec()?, n)?, out)
        }
    };
    emit(out, |w| curve.write_csv(w))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Bounds(b) => cmd_bounds(b),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Io(m) => eprintln!("error: {m}"),
                CliError::Invalid(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
