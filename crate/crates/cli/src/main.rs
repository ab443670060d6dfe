//! `superspecial`: class sets, Brandt matrices, isogeny graphs and spectra
//! for superspecial abelian varieties.

mod commands;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "superspecial", version, about)]
struct Cli {
    /// Directory for cached class sets.
    #[arg(long, global = true, env = "CACHE_DIR", default_value = ".superspecial-cache")]
    cache_dir: PathBuf,

    /// Ignore and do not write the class-set cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Report elapsed time on stderr.
    #[arg(long, global = true)]
    timing: bool,

    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the classes of principal polarizations.
    Classes {
        #[command(flatten)]
        base: Base,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compute a Brandt matrix.
    Brandt {
        #[command(flatten)]
        base: Base,
        /// Level `n` (a prime different from p when g > 1).
        #[arg(long, visible_alias = "ell")]
        n: u64,
        #[arg(long, value_enum, default_value_t = Method::Hermitian)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build an isogeny graph.
    Graph {
        #[command(flatten)]
        base: Base,
        #[arg(long, visible_alias = "n")]
        ell: u64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        strip_half_edges: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Characteristic polynomial, eigenvalues and the Ramanujan bound.
    Spectrum {
        #[command(flatten)]
        base: Base,
        #[arg(long, visible_alias = "n")]
        ell: u64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the invariant checks for one `(p, g, l)`.
    Verify {
        #[command(flatten)]
        base: Base,
        #[arg(long, visible_alias = "n")]
        ell: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Base {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    g: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Big,
    Little,
    Enhanced,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Count polarized isogenies between hermitian lattices.
    Hermitian,
    /// Count isometry classes of l-neighbors.
    Neighbors,
    /// Classical right-ideal formulation (g = 1 only).
    Ideals,
}

pub struct RunConfig {
    pub p: u64,
    pub g: usize,
    pub cache_dir: Option<PathBuf>,
    pub verbose: bool,
}

/// A failure with its exit code and, for verification, the failing check.
pub enum Failure {
    Usage(String),
    Computation { check: &'static str, message: String },
    /// Verification ran to completion but some checks failed.
    Checks { failed: Vec<String>, output: String },
}

impl From<superspecial::Error> for Failure {
    fn from(e: superspecial::Error) -> Self {
        use superspecial::Error as E;
        match e {
            E::NotPrime(_) | E::InvalidParameter(_) | E::UnsupportedDiscriminant(_) => Failure::Usage(e.to_string()),
            E::CacheIntegrity(_) => Failure::Computation { check: "cache-integrity", message: e.to_string() },
            E::MassMismatch { .. } => Failure::Computation { check: "mass", message: e.to_string() },
            E::Io(_) | E::Json(_) => Failure::Computation { check: "io", message: e.to_string() },
            _ => Failure::Computation { check: "consistency", message: e.to_string() },
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let cfg = |b: &Base| RunConfig {
        p: b.p,
        g: b.g,
        cache_dir: (!cli.no_cache).then(|| cli.cache_dir.clone()),
        verbose: cli.verbose,
    };
    match &cli.command {
        Command::Classes { base, format } => commands::classes(&cfg(base), *format),
        Command::Brandt { base, n, method, format } => commands::brandt(&cfg(base), *n, *method, *format),
        Command::Graph { base, ell, kind, strip_half_edges, format } => {
            commands::graph(&cfg(base), *ell, *kind, *strip_half_edges, *format)
        }
        Command::Spectrum { base, ell, kind, format } => commands::spectrum(&cfg(base), *ell, *kind, *format),
        Command::Verify { base, ell, format } => verify::verify(&cfg(base), *ell, *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let start = std::time::Instant::now();
    let result = pool.install(|| run(&cli));
    if cli.timing {
        eprintln!("elapsed_ms={}", start.elapsed().as_millis());
    }
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Computation { check, message }) => {
            eprintln!("error [{check}]: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Checks { failed, output }) => {
            print!("{output}");
            eprintln!("verification failed: {}", failed.join(", "));
            ExitCode::from(1)
        }
    }
}
