use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpp_core::analysis::{csv_header, CollisionReport};
use qpp_core::imaging::{
    benchmark_image, encode_pnm, figure1_panel, read_pnm, FIGURE_DIMS, FIGURE_PAD_SIZE,
};
use qpp_core::{Cipher, CiphertextContainer, PadKey, QppError, Seed, ShuffleMode};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_KEY_MISMATCH: u8 = 3;
const EXIT_CORRUPT: u8 = 4;
const EXIT_UNSUPPORTED: u8 = 5;

/// Quantum permutation pad cipher and collision analysis.
#[derive(Parser, Debug)]
#[command(name = "qpp", version, about)]
#[command(
    after_help = "Exit codes: 0 ok, 1 I/O or other failure, 2 usage or bad parameter, \
3 key mismatch, 4 corrupt input, 5 unsupported format."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a new QPPK key file.
    Keygen(KeygenArgs),
    /// Encrypt a file into a QPPC container.
    Encrypt(StreamArgs),
    /// Decrypt a QPPC container.
    Decrypt(StreamArgs),
    /// Print collision probabilities over a parameter grid.
    Analyze(AnalyzeArgs),
    /// Encrypt an image at several chunk sizes and tabulate what survives.
    DemoImage(DemoArgs),
}

#[derive(Args, Debug)]
struct KeygenArgs {
    /// Chunk size in bits (multiple of 8, at least 8).
    #[arg(long, default_value_t = 2048)]
    n: usize,
    /// Number of permutations in the pad.
    #[arg(long, default_value_t = 256)]
    m: usize,
    /// Draw every shuffle index from 1..=n instead of 1..=i (biased).
    #[arg(long)]
    paper_shuffle: bool,
    /// 32 hex characters; drawn from the OS and echoed to stderr if omitted.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<Seed>,
    /// Output path; stdout if omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StreamArgs {
    #[arg(long)]
    key: PathBuf,
    /// Input path; stdin if omitted or `-`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output path; stdout if omitted or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Chunk sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Chunk popcounts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    p: Vec<usize>,
    /// Pad sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    m: Vec<usize>,
    /// Monte Carlo trials per cell; 0 skips simulation.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<Seed>,
    /// Also count pads exhaustively (small n only).
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// Binary PGM or PPM image.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Use the built-in 1024x1024 benchmark image.
    #[arg(long, conflicts_with = "image", required_unless_present = "image")]
    benchmark: bool,
    #[arg(long, value_delimiter = ',', default_values_t = FIGURE_DIMS)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = FIGURE_PAD_SIZE)]
    m: usize,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<Seed>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_seed(s: &str) -> Result<Seed, String> {
    s.parse().map_err(|e: QppError| e.to_string())
}

#[derive(Debug)]
enum CliError {
    Core(QppError),
    Io(io::Error),
}

impl From<QppError> for CliError {
    fn from(e: QppError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                QppError::KeyMismatch(_) => EXIT_KEY_MISMATCH,
                QppError::Corrupt(_) => EXIT_CORRUPT,
                QppError::UnsupportedFormat(_) => EXIT_UNSUPPORTED,
                QppError::InvalidParameter(_)
                | QppError::Infeasible { .. }
                | QppError::DimensionMismatch { .. } => EXIT_USAGE,
                _ => EXIT_OTHER,
            },
            CliError::Io(_) => EXIT_OTHER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(QppError::Infeasible { what, guidance }) => {
                write!(f, "{what} is infeasible: {guidance}")
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn is_std(path: &Option<PathBuf>) -> bool {
    path.as_deref().is_none_or(|p| p == Path::new("-"))
}

fn read_input(path: &Option<PathBuf>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) if !is_std(path) => {
            File::open(p)?.read_to_end(&mut buf)?;
        }
        _ => {
            io::stdin().lock().read_to_end(&mut buf)?;
        }
    }
    Ok(buf)
}

/// Writes to a temporary file beside `path` and renames it into place, so a
/// failed run never leaves a truncated file behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_output(path: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) if !is_std(path) => write_atomic(p, bytes),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn seed_or_entropy(seed: Option<Seed>) -> CliResult<Seed> {
    match seed {
        Some(s) => Ok(s),
        None => {
            let s = Seed::from_entropy()?;
            eprintln!("seed: {s}");
            Ok(s)
        }
    }
}

fn load_key(path: &Path) -> CliResult<PadKey> {
    Ok(PadKey::read_from(File::open(path)?)?)
}

fn cmd_keygen(args: KeygenArgs) -> CliResult<()> {
    let mode = if args.paper_shuffle {
        ShuffleMode::PaperMode
    } else {
        ShuffleMode::UnbiasedMode
    };
    // Validate before drawing entropy, so bad parameters never echo a seed.
    PadKey::new(Seed([0; 16]), args.n, args.m, mode)?;
    let key = PadKey::new(seed_or_entropy(args.seed)?, args.n, args.m, mode)?;
    write_output(&args.out, &key.to_bytes())
}

fn cmd_encrypt(args: StreamArgs) -> CliResult<()> {
    let key = load_key(&args.key)?;
    let data = read_input(&args.input)?;
    let container = Cipher::new(key).encrypt(&data);
    write_output(&args.out, &container.to_bytes())
}

fn cmd_decrypt(args: StreamArgs) -> CliResult<()> {
    let key = load_key(&args.key)?;
    let data = read_input(&args.input)?;
    let container = CiphertextContainer::from_bytes(&data)?;
    let plain = Cipher::new(key).decrypt(&container)?;
    write_output(&args.out, &plain)
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let seed = if args.trials > 0 {
        Some(seed_or_entropy(args.seed)?)
    } else {
        None
    };
    let mut reports = Vec::new();
    for &n in &args.n {
        for &p in &args.p {
            for &m in &args.m {
                let mut r = CollisionReport::new(n, p, m)?;
                if args.exhaustive {
                    r = r.with_enumeration()?;
                }
                if let Some(seed) = &seed {
                    r = r.with_monte_carlo(args.trials, seed)?;
                }
                reports.push(r);
            }
        }
    }
    let mut out = String::new();
    match args.format {
        Format::Text => {
            for r in &reports {
                out.push_str(&r.to_text());
            }
        }
        Format::Csv => {
            out.push_str(&csv_header());
            out.push('\n');
            for r in &reports {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
        }
    }
    write_output(&None, out.as_bytes())
}

fn cmd_demo_image(args: DemoArgs) -> CliResult<()> {
    let img = match &args.image {
        Some(path) => read_pnm(io::BufReader::new(File::open(path)?))?,
        None => benchmark_image(),
    };
    let seed = seed_or_entropy(args.seed)?;
    let panel = figure1_panel(&img, &args.dims, args.m, &seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let ext = if img.channels() == 1 { "pgm" } else { "ppm" };
    for entry in &panel.entries {
        let path = args.out_dir.join(format!("cipher_{}.{ext}", entry.key.n()));
        write_atomic(&path, &encode_pnm(&entry.cipher.image))?;
    }
    write_atomic(
        &args.out_dir.join("metrics.csv"),
        panel.metrics_csv().as_bytes(),
    )?;
    for entry in &panel.entries {
        eprintln!(
            "n={:<5} chunk_collision_fraction={:.6}",
            entry.key.n(),
            entry.metrics.chunk_collision_fraction
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Encrypt(a) => cmd_encrypt(a),
        Command::Decrypt(a) => cmd_decrypt(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::DemoImage(a) => cmd_demo_image(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
