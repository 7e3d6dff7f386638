//! Command-line front end for the xprec library: stream generation,
//! statistical testing, exhaustive small-grid verification, and a
//! throughput comparison of raw versus composed draws.
//!
//! Exit codes are a stable scripting contract: 0 success or all tests
//! passed, 1 runtime failure, 2 usage error, 3 test failure.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xprec::combine::index_from_value;
use xprec::generate::{ExtendedGenerator, ExtendedSample};
use xprec::grid::Resolution;
use xprec::sources::{expand_seed, Counter, Mrg32k3a, ReduceToWidth, UniformSource, Xorshift32};
use xprec::stats::{
    chi_square_uniformity, exhaustive_oracle, ks_uniformity, low_bits_uniformity, PValueBand,
};
use xprec::stream::{read_stream, write_stream, Format};

const EXIT_TEST_FAIL: u8 = 3;

/// Warm-up draws before each timed benchmark stage.
const WARMUP_DRAWS: u64 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "xprec",
    version,
    about = "Extended-precision uniform pseudorandom numbers: generate, test, verify, benchmark",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit extended-precision uniform samples composed from two base draws
    Gen(GenArgs),
    /// Run uniformity tests on a generated or supplied sample stream
    Test(TestArgs),
    /// Enumerate every input pair of a small grid and verify exact uniformity
    Oracle(OracleArgs),
    /// Compare raw base-source throughput against the composed pipeline
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum SourceKind {
    /// Combined multiple recursive generator, strong statistical quality
    Mrg32k3a,
    /// Small xorshift generator, a deliberately weaker alternative
    Xorshift32,
    /// Deterministic 0..m-1 cycle, for enumeration and debugging
    Counter,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum FormatArg {
    /// Raw IEEE 754 binary64, little-endian, no header
    Bin,
    /// Newline-delimited decimal, 17 significant digits (exact round trip)
    Text,
    /// Newline-delimited hexadecimal floating point (exact round trip)
    Hex,
}

impl FormatArg {
    fn to_format(self) -> Format {
        match self {
            FormatArg::Bin => Format::Binary,
            FormatArg::Text => Format::Text,
            FormatArg::Hex => Format::Hex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum TestKind {
    /// Chi-square binned uniformity test
    Chi2,
    /// Kolmogorov-Smirnov test against the uniform CDF
    Ks,
    /// Chi-square on the low-order bits of the lattice index
    Lowbits,
    /// All of the above
    All,
}

#[derive(Args)]
struct GenArgs {
    /// Base generator producing the two low-precision draws
    #[arg(long, value_enum, default_value_t = SourceKind::Mrg32k3a)]
    source: SourceKind,
    /// Seed expanded into the base generator state
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of samples to emit
    #[arg(long)]
    n: u64,
    /// Word size of one base draw in bits; the grid step is 2^-w
    #[arg(long, default_value_t = 26)]
    w: u32,
    /// Grid modulus for the counter source (defaults to 2^w)
    #[arg(long)]
    m: Option<u64>,
    /// Output encoding
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Map each value z to 1-z so no output is zero (log-safe)
    #[arg(long)]
    open_interval: bool,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shard generation across this many independently seeded streams
    #[arg(long, default_value_t = 1)]
    jobs: u64,
}

#[derive(Args)]
struct TestArgs {
    /// Which tests to run
    #[arg(long, value_enum, default_value_t = TestKind::All)]
    test: TestKind,
    /// Read samples from this file ("-" for standard input) instead of generating
    #[arg(long = "in", value_name = "PATH", conflicts_with_all = ["source", "seed", "n"])]
    input: Option<PathBuf>,
    /// Encoding of the input stream
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Base generator for internally produced streams
    #[arg(long, value_enum, default_value_t = SourceKind::Mrg32k3a)]
    source: SourceKind,
    /// Seed for internally produced streams
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of samples to generate when no input file is given (default 1000000)
    #[arg(long)]
    n: Option<u64>,
    /// Word size of one base draw in bits
    #[arg(long, default_value_t = 26)]
    w: u32,
    /// Grid modulus: counter configuration, or lattice-index recovery for --in
    #[arg(long)]
    m: Option<u64>,
    /// Bin count for the chi-square test (default 1024); with --test lowbits,
    /// the bin count of the low-bits test instead
    #[arg(long)]
    bins: Option<usize>,
    /// Two-sided p-value acceptance band, as "lo,hi"
    #[arg(long, value_parser = parse_band, default_value = "0.001,0.999")]
    p_band: PValueBand,
}

#[derive(Args)]
struct OracleArgs {
    /// Grid modulus to enumerate exhaustively
    #[arg(long)]
    m: u64,
    /// Word size; defaults to the smallest grid that holds m points
    #[arg(long)]
    w: Option<u32>,
}

#[derive(Args)]
struct BenchArgs {
    /// Base generator to measure
    #[arg(long, value_enum, default_value_t = SourceKind::Mrg32k3a)]
    source: SourceKind,
    /// Seed expanded into the base generator state
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timed iterations per stage
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Word size of one base draw in bits
    #[arg(long, default_value_t = 26)]
    w: u32,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn parse_band(s: &str) -> Result<PValueBand, String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| String::from("expected \"lo,hi\""))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    PValueBand::new(lo, hi).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Test(a) => run_test(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// One concrete base-source pipeline, already reduced to `w` bits where
/// the raw generator is wider than the requested grid.
enum BaseSource {
    Mrg(ReduceToWidth<Mrg32k3a>),
    Xor(ReduceToWidth<Xorshift32>),
    Count(Counter),
}

impl UniformSource for BaseSource {
    fn modulus(&self) -> u64 {
        match self {
            BaseSource::Mrg(s) => s.modulus(),
            BaseSource::Xor(s) => s.modulus(),
            BaseSource::Count(s) => s.modulus(),
        }
    }

    fn next_value(&mut self) -> Option<u64> {
        match self {
            BaseSource::Mrg(s) => s.next_value(),
            BaseSource::Xor(s) => s.next_value(),
            BaseSource::Count(s) => s.next_value(),
        }
    }
}

fn base_source(kind: SourceKind, seed: u64, w: u32, m: Option<u64>) -> Result<BaseSource, Failure> {
    if m.is_some() && kind != SourceKind::Counter {
        return Err(Failure::Usage(String::from("--m applies only to the counter source")));
    }
    match kind {
        SourceKind::Mrg32k3a => {
            let src = ReduceToWidth::new(Mrg32k3a::from_seed(seed), w).map_err(usage)?;
            Ok(BaseSource::Mrg(src))
        }
        SourceKind::Xorshift32 => {
            let src = ReduceToWidth::new(Xorshift32::from_seed(seed), w).map_err(usage)?;
            Ok(BaseSource::Xor(src))
        }
        SourceKind::Counter => {
            let modulus = m.unwrap_or(1u64 << w);
            Ok(BaseSource::Count(Counter::new(modulus).map_err(usage)?))
        }
    }
}

fn shard_values(
    kind: SourceKind,
    seed: u64,
    w: u32,
    m: Option<u64>,
    res: Resolution,
    count: u64,
    open: bool,
) -> Result<Vec<f64>, Failure> {
    let src = base_source(kind, seed, w, m)?;
    let mut gen = ExtendedGenerator::new(src, res).map_err(usage)?;
    (0..count)
        .map(|_| if open { gen.next_open() } else { gen.next_value() }.map_err(runtime))
        .collect()
}

fn run_gen(a: GenArgs) -> Result<u8, Failure> {
    let res = Resolution::new(a.w).map_err(usage)?;
    if a.n == 0 {
        return Err(Failure::Usage(String::from("--n must be at least 1")));
    }
    if a.jobs == 0 {
        return Err(Failure::Usage(String::from("--jobs must be at least 1")));
    }
    if a.jobs > 1 && a.source == SourceKind::Counter {
        return Err(Failure::Usage(String::from(
            "the counter source is a fixed enumeration and cannot shard; use --jobs 1",
        )));
    }
    // Surface configuration problems before any thread is spawned.
    let probe = base_source(a.source, a.seed, a.w, a.m)?;
    ExtendedGenerator::new(probe, res).map_err(usage)?;

    let shares: Vec<u64> =
        (0..a.jobs).map(|i| a.n / a.jobs + u64::from(i < a.n % a.jobs)).collect();
    let (kind, seed, w, m, open) = (a.source, a.seed, a.w, a.m, a.open_interval);
    let chunks: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = shares
            .iter()
            .enumerate()
            .map(|(i, &count)| {
                // A single job reproduces the unsharded stream; sharded
                // jobs run disjoint seed expansions in fixed order.
                let shard_seed =
                    if a.jobs == 1 { seed } else { expand_seed(seed, i as u64) };
                scope.spawn(move || shard_values(kind, shard_seed, w, m, res, count, open))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("generation thread panicked"))
            .collect::<Result<_, Failure>>()
    })?;

    let format = a.format.to_format();
    match &a.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut out = BufWriter::new(file);
            for chunk in &chunks {
                write_stream(&mut out, chunk, format).map_err(runtime)?;
            }
            out.flush().map_err(runtime)?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for chunk in &chunks {
                write_stream(&mut out, chunk, format).map_err(runtime)?;
            }
            out.flush().map_err(runtime)?;
        }
    }
    Ok(0)
}

enum TestStream {
    /// Samples generated here, carrying their lattice indices.
    Indexed(Vec<ExtendedSample>),
    /// Bare values read from a file or stdin.
    Plain(Vec<f64>),
}

fn read_values(path: &Path, format: Format) -> Result<Vec<f64>, Failure> {
    let parsed = if path.as_os_str() == "-" {
        read_stream(io::stdin().lock(), format)
    } else {
        let file = File::open(path)
            .map_err(|e| Failure::Runtime(format!("cannot open {}: {e}", path.display())))?;
        read_stream(io::BufReader::new(file), format)
    };
    parsed.map_err(runtime)
}

fn run_test(a: TestArgs) -> Result<u8, Failure> {
    let res = Resolution::new(a.w).map_err(usage)?;
    let run_chi2 = matches!(a.test, TestKind::Chi2 | TestKind::All);
    let run_ks = matches!(a.test, TestKind::Ks | TestKind::All);
    let run_low = matches!(a.test, TestKind::Lowbits | TestKind::All);

    let chi_bins = a.bins.unwrap_or(1024);
    let low_bins = match (a.test, a.bins) {
        (TestKind::Lowbits, Some(b)) => b,
        _ => 1usize << a.w.min(8),
    };
    if run_chi2 && chi_bins < 2 {
        return Err(Failure::Usage(format!("--bins must be at least 2, got {chi_bins}")));
    }
    if run_low && (low_bins < 2 || !low_bins.is_power_of_two() || low_bins > 1usize << a.w) {
        return Err(Failure::Usage(format!(
            "low-bits bin count must be a power of two in [2, 2^w], got {low_bins}"
        )));
    }

    let stream = match &a.input {
        Some(path) => TestStream::Plain(read_values(path, a.format.to_format())?),
        None => {
            let n = a.n.unwrap_or(1_000_000);
            if n == 0 {
                return Err(Failure::Usage(String::from("--n must be at least 1")));
            }
            if run_chi2 && n < 10 * chi_bins as u64 {
                return Err(Failure::Usage(format!(
                    "chi-square with {chi_bins} bins needs at least {} samples, got {n}",
                    10 * chi_bins
                )));
            }
            if run_ks && n < 100 {
                return Err(Failure::Usage(format!("KS needs at least 100 samples, got {n}")));
            }
            if run_low && n < low_bins as u64 {
                return Err(Failure::Usage(format!(
                    "low-bits test with {low_bins} bins needs at least {low_bins} samples, got {n}"
                )));
            }
            let src = base_source(a.source, a.seed, a.w, a.m)?;
            let mut gen = ExtendedGenerator::new(src, res).map_err(usage)?;
            let mut samples = Vec::with_capacity(n as usize);
            for _ in 0..n {
                samples.push(gen.next_sample().map_err(runtime)?);
            }
            TestStream::Indexed(samples)
        }
    };

    let mut reports = Vec::new();
    if run_chi2 || run_ks {
        let projected: Vec<f64>;
        let values: &[f64] = match &stream {
            TestStream::Indexed(s) => {
                projected = s.iter().map(|x| x.value).collect();
                &projected
            }
            TestStream::Plain(v) => v,
        };
        if run_chi2 {
            reports.push(chi_square_uniformity(values, chi_bins, a.p_band).map_err(runtime)?);
        }
        if run_ks {
            reports.push(ks_uniformity(values, a.p_band).map_err(runtime)?);
        }
    }
    if run_low {
        let report = match &stream {
            TestStream::Indexed(s) => low_bits_uniformity(s, res, low_bins, a.p_band),
            TestStream::Plain(v) => {
                let m = a.m.unwrap_or(1u64 << a.w);
                let rebuilt: Vec<ExtendedSample> = v
                    .iter()
                    .map(|&value| {
                        index_from_value(value, m, res)
                            .map(|j| ExtendedSample { j, value })
                            .ok_or_else(|| {
                                Failure::Runtime(format!(
                                    "value {value:e} is not on the {m}-point composition \
                                     lattice at w={}, cannot recover index bits",
                                    a.w
                                ))
                            })
                    })
                    .collect::<Result<_, _>>()?;
                low_bits_uniformity(&rebuilt, res, low_bins, a.p_band)
            }
        }
        .map_err(runtime)?;
        reports.push(report);
    }

    let mut all_passed = true;
    for r in &reports {
        println!(
            "test={} n={} statistic={:.6e} p={:.6e} verdict={}",
            r.test_name, r.n, r.statistic, r.p_value, r.verdict
        );
        all_passed &= r.verdict.passed();
    }
    Ok(if all_passed { 0 } else { EXIT_TEST_FAIL })
}

fn run_oracle(a: OracleArgs) -> Result<u8, Failure> {
    let w = match a.w {
        Some(w) => w,
        // Smallest word size whose grid holds m points, floor of 2.
        None => (64 - a.m.saturating_sub(1).leading_zeros()).max(2),
    };
    let res = Resolution::new(w).map_err(usage)?;
    let result = exhaustive_oracle(a.m, res).map_err(usage)?;
    println!("{result}");
    Ok(if result.uniform { 0 } else { EXIT_TEST_FAIL })
}

fn run_bench(a: BenchArgs) -> Result<u8, Failure> {
    if a.n == 0 {
        return Err(Failure::Usage(String::from("--n must be at least 1")));
    }
    let res = Resolution::new(a.w).map_err(usage)?;

    let mut raw = base_source(a.source, a.seed, a.w, None)?;
    for _ in 0..WARMUP_DRAWS {
        std::hint::black_box(raw.next_value());
    }
    let start = Instant::now();
    for _ in 0..a.n {
        if std::hint::black_box(raw.next_value()).is_none() {
            return Err(Failure::Runtime(String::from("base source exhausted during bench")));
        }
    }
    let raw_secs = start.elapsed().as_secs_f64().max(1e-9);

    let src = base_source(a.source, a.seed, a.w, None)?;
    let mut gen = ExtendedGenerator::new(src, res).map_err(usage)?;
    for _ in 0..WARMUP_DRAWS {
        std::hint::black_box(gen.next_value().map_err(runtime)?);
    }
    let start = Instant::now();
    for _ in 0..a.n {
        std::hint::black_box(gen.next_value().map_err(runtime)?);
    }
    let ext_secs = start.elapsed().as_secs_f64().max(1e-9);

    let raw_rate = a.n as f64 / raw_secs;
    let ext_rate = a.n as f64 / ext_secs;
    println!("raw: {raw_rate:.4e} samples/s");
    println!("extended: {ext_rate:.4e} samples/s");
    println!("ratio: {:.3}", raw_rate / ext_rate);
    Ok(0)
}
