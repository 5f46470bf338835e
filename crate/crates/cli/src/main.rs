//! `gf2mm`: verify, run, compose, search and convert bilinear matrix
//! multiplication schemes over GF(2).
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage/parse/shape error,
//! 3 I/O error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gf2mm::evaluator::PlanError;
use gf2mm::flipsearch::{best_of_walks, SearchError};
use gf2mm::scheme_io::ReadError;
use gf2mm::{
    bench, brent_residual, multiply_recursive, read_scheme, rotate, serialize_expression, tensor, write_canonical,
    BitMatrix, RecursionPlan, RingKind, Scheme, SearchConfig,
};

#[derive(Parser)]
#[command(name = "gf2mm", version, about = "Bilinear matrix multiplication schemes over GF(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Brent equations of a scheme exactly.
    Verify {
        path: PathBuf,
        /// Also compare against naive multiplication on this many random pairs.
        #[arg(long, value_name = "TRIALS")]
        randomized: Option<usize>,
        /// Coefficient ring for --randomized (GF2, GF4, ..., GF256).
        #[arg(long, default_value = "GF2")]
        ring: RingKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the equation count and the first violated equation.
        #[arg(long)]
        report: bool,
    },
    /// Multiply two square 0/1 grid matrices recursively with a square scheme.
    Mul {
        scheme: PathBuf,
        a: PathBuf,
        b: PathBuf,
        /// Recurse while blocks are larger than this.
        #[arg(long, default_value_t = 1)]
        cutoff: usize,
        /// Cap on the recursion depth.
        #[arg(long)]
        levels: Option<usize>,
        /// Print `count=<scalar multiplications>` after the product.
        #[arg(long)]
        count: bool,
        /// Use the classical product instead of the scheme.
        #[arg(long)]
        naive: bool,
    },
    /// Tensor product of two schemes.
    Compose {
        first: PathBuf,
        second: PathBuf,
        out: PathBuf,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Cyclic rotation: an n x m x p scheme becomes m x p x n.
    Rotate {
        input: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Random flip walk looking for a lower-rank scheme.
    Search {
        path: PathBuf,
        /// Stop at this rank; defaults to one below the start.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 20)]
        restarts: u64,
        /// Independent walks with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        walks: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Write the classical n*m*p-product scheme.
    Standard {
        n: usize,
        m: usize,
        p: usize,
        out: PathBuf,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Rewrite a scheme in the other file format.
    Convert {
        input: PathBuf,
        out: PathBuf,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Time recursive against naive multiplication of random matrices.
    Bench {
        scheme: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        cutoff: usize,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Expr,
    Canonical,
}

impl Format {
    fn for_path(path: &Path, explicit: Option<Format>) -> Format {
        explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some("bmms") => Format::Canonical,
            _ => Format::Expr,
        })
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn verification(message: impl fmt::Display) -> Self {
        Failure { code: 1, message: message.to_string() }
    }

    fn usage(message: impl fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure { code: 3, message: format!("{}: {err}", path.display()) }
    }
}

impl From<PlanError> for Failure {
    fn from(err: PlanError) -> Self {
        match err {
            PlanError::Unverified => Failure::verification(err),
            other => Failure::usage(other),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn load_scheme(path: &Path) -> Result<Scheme, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    read_scheme(&bytes).map_err(|e| match e {
        ReadError::Parse(p) => Failure::usage(format!("{}: parse error: {p}", path.display())),
        other => Failure::usage(format!("{}: {other}", path.display())),
    })
}

fn load_grid(path: &Path) -> Result<BitMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    text.parse().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn save_scheme(s: &Scheme, path: &Path, format: Option<Format>) -> CmdResult {
    let bytes = match Format::for_path(path, format) {
        Format::Canonical => write_canonical(s),
        Format::Expr => {
            let mut text = serialize_expression(s);
            text.push('\n');
            text.into_bytes()
        }
    };
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn describe(s: &Scheme) -> String {
    let (n, m, p) = s.dims();
    format!("dims={n}x{m}x{p} rank={}", s.rank())
}

fn cmd_verify(path: &Path, randomized: Option<usize>, ring: RingKind, seed: u64, report: bool) -> CmdResult {
    let s = load_scheme(path)?;
    let residual = brent_residual(&s);
    let mut ok = residual.is_correct();
    let mut line = describe(&s);
    if ok {
        line.push_str(" brent=ok");
    } else {
        line.push_str(&format!(" brent=FAIL violations={}", residual.violations));
    }
    if let Some(trials) = randomized {
        let passed = ring.verify_randomized(&s, trials, seed);
        ok &= passed;
        line.push_str(&format!(
            " randomized={} ring={} trials={trials} seed={seed}",
            if passed { "ok" } else { "FAIL" },
            ring.name()
        ));
    }
    println!("{line}");
    if report {
        println!("equations={}", residual.total_equations);
        println!("violations={}", residual.violations);
        if let Some(eq) = residual.first_violation {
            println!("first_violation={eq}");
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure { code: 1, message: String::new() })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_mul(
    scheme: &Path,
    a: &Path,
    b: &Path,
    cutoff: usize,
    levels: Option<usize>,
    count: bool,
    naive: bool,
) -> CmdResult {
    let s = load_scheme(scheme)?;
    let a = load_grid(a)?;
    let b = load_grid(b)?;
    if a.cols() != b.rows() {
        return Err(Failure::usage(format!(
            "shape mismatch: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (c, scalar) = if naive {
        let c = a.mul_naive(&b).map_err(Failure::usage)?;
        (c, (a.rows() * a.cols() * b.cols()) as u64)
    } else {
        if a.rows() != a.cols() || b.rows() != b.cols() {
            return Err(Failure::usage("recursive multiplication needs square operands; use --naive"));
        }
        let mut plan = RecursionPlan::new(s, cutoff)?;
        if let Some(l) = levels {
            plan = plan.with_max_levels(l);
        }
        let (c, counter) = multiply_recursive(&plan, &a, &b)?;
        (c, counter.base_multiplications)
    };
    print!("{c}");
    if count {
        println!("count={scalar}");
    }
    Ok(())
}

fn cmd_compose(first: &Path, second: &Path, out: &Path, format: Option<Format>) -> CmdResult {
    let t = tensor(&load_scheme(first)?, &load_scheme(second)?);
    save_scheme(&t, out, format)?;
    println!("{}", describe(&t));
    Ok(())
}

fn cmd_rotate(input: &Path, out: &Path, times: usize, format: Option<Format>) -> CmdResult {
    let mut s = load_scheme(input)?;
    for _ in 0..times % 3 {
        s = rotate(&s);
    }
    save_scheme(&s, out, format)?;
    println!("{}", describe(&s));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    path: &Path,
    target: Option<usize>,
    seed: u64,
    budget: u64,
    restarts: u64,
    walks: u64,
    out: Option<&Path>,
    format: Option<Format>,
) -> CmdResult {
    let start = load_scheme(path)?;
    let target = target.unwrap_or(start.rank().saturating_sub(1));
    let config = SearchConfig::new(budget, target, seed, restarts);
    let seeds: Vec<u64> = (0..walks.max(1)).map(|i| seed.wrapping_add(i)).collect();
    let (best, stats, best_seed) = best_of_walks(&start, &config, &seeds).map_err(|e| match e {
        SearchError::UnverifiedStart => Failure::verification(format!("{}: {e}", path.display())),
        other => Failure::usage(other),
    })?;
    if let Some(out) = out {
        save_scheme(&best, out, format)?;
    }
    println!("{}", describe(&best));
    println!("seed={best_seed}");
    print!("{stats}");
    Ok(())
}

fn cmd_standard(n: usize, m: usize, p: usize, out: &Path, format: Option<Format>) -> CmdResult {
    if n == 0 || m == 0 || p == 0 {
        return Err(Failure::usage("dimensions must be positive"));
    }
    let s = Scheme::standard(n, m, p);
    save_scheme(&s, out, format)?;
    println!("{}", describe(&s));
    Ok(())
}

fn cmd_convert(input: &Path, out: &Path, format: Option<Format>) -> CmdResult {
    let s = load_scheme(input)?;
    save_scheme(&s, out, format)?;
    println!("{}", describe(&s));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    scheme: &Path,
    size: usize,
    cutoff: usize,
    levels: Option<usize>,
    reps: usize,
    seed: u64,
    json: bool,
) -> CmdResult {
    let mut plan = RecursionPlan::new(load_scheme(scheme)?, cutoff)?;
    if let Some(l) = levels {
        plan = plan.with_max_levels(l);
    }
    let report = bench(&plan, size, reps, seed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{report}");
    }
    if report.matches_naive {
        Ok(())
    } else {
        Err(Failure::verification("recursive product differs from the naive product"))
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Verify { path, randomized, ring, seed, report } => cmd_verify(&path, randomized, ring, seed, report),
        Command::Mul { scheme, a, b, cutoff, levels, count, naive } => {
            cmd_mul(&scheme, &a, &b, cutoff, levels, count, naive)
        }
        Command::Compose { first, second, out, format } => cmd_compose(&first, &second, &out, format),
        Command::Rotate { input, out, times, format } => cmd_rotate(&input, &out, times, format),
        Command::Search { path, target, seed, budget, restarts, walks, out, format } => {
            cmd_search(&path, target, seed, budget, restarts, walks, out.as_deref(), format)
        }
        Command::Standard { n, m, p, out, format } => cmd_standard(n, m, p, &out, format),
        Command::Convert { input, out, format } => cmd_convert(&input, &out, format),
        Command::Bench { scheme, size, cutoff, levels, reps, seed, json } => {
            cmd_bench(&scheme, size, cutoff, levels, reps, seed, json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
