//! Command-line front end: generate chains, solve for stationary
//! distributions, sweep block/window sizes, dump CSV artifacts.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use blockpower::chains::{
    generate, spectrum_oracle_reversible, stationary_oracle_dense, ChainSpec,
};
use blockpower::io::{load_matrix_market, write_matrix_market};
use blockpower::{solve, ConvergenceReport, Error, Extraction, SolverConfig, Status};

#[derive(Parser)]
#[command(
    name = "blockpower",
    version,
    about = "Stationary distributions of Markov chains by (block) power iteration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one matrix and write distribution, history, and manifest.
    Solve(SolveArgs),
    /// Run a block-size x window grid and tabulate iteration costs.
    Sweep(SweepArgs),
    /// Generate a named test chain as a MatrixMarket file plus sidecar.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtractionArg {
    MinResidual,
    DominantRitz,
}

#[derive(Args)]
struct SolverFlags {
    /// MatrixMarket transition matrix to load
    #[arg(long)]
    matrix: PathBuf,
    /// Block size s (columns iterated together)
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    /// Sliding-window length t (1 = no window)
    #[arg(long, default_value_t = 1)]
    window: usize,
    /// Residual tolerance on the extracted vector
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iterations between decomposition checkpoints
    #[arg(long = "check-every", default_value_t = 100)]
    check_every: usize,
    /// Iteration cap
    #[arg(long = "max-iters", default_value_t = 1_000_000)]
    max_iters: usize,
    /// Seed for the initial block
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Checkpoint extraction procedure
    #[arg(long, value_enum, default_value_t = ExtractionArg::MinResidual)]
    extraction: ExtractionArg,
    /// Disable span-preserving reorthonormalization at checkpoints
    #[arg(long = "no-reorth")]
    no_reorth: bool,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            block_size: self.block_size,
            window: self.window,
            tol: self.tol,
            check_interval: self.check_every,
            max_iterations: self.max_iters,
            seed: self.seed,
            reorthonormalize: !self.no_reorth,
            extraction: match self.extraction {
                ExtractionArg::MinResidual => Extraction::MinResidual,
                ExtractionArg::DominantRitz => Extraction::DominantRitz,
            },
            ..SolverConfig::default()
        }
    }

    fn config_json(&self) -> serde_json::Value {
        let cfg = self.config();
        serde_json::json!({
            "block_size": cfg.block_size,
            "window": cfg.window,
            "tol": cfg.tol,
            "check_interval": cfg.check_interval,
            "max_iterations": cfg.max_iterations,
            "seed": cfg.seed,
            "reorthonormalize": cfg.reorthonormalize,
            "extraction": match cfg.extraction {
                Extraction::MinResidual => "min-residual",
                Extraction::DominantRitz => "dominant-ritz",
            },
            "drop_tol": cfg.drop_tol,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverFlags,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    solver: SolverFlags,
    /// Comma-separated block sizes, e.g. 1,2,4
    #[arg(long = "block-sizes", value_delimiter = ',')]
    block_sizes: Vec<usize>,
    /// Comma-separated window lengths
    #[arg(long = "windows", value_delimiter = ',', default_value = "1")]
    windows: Vec<usize>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Chain family
    #[arg(long)]
    family: Family,
    /// State count (birth-death, reversible)
    #[arg(long)]
    n: Option<usize>,
    /// Up-step probability (birth-death)
    #[arg(long)]
    p: Option<f64>,
    /// Down-step probability (birth-death)
    #[arg(long)]
    q: Option<f64>,
    /// Cluster count (clustered)
    #[arg(long)]
    m: Option<usize>,
    /// States per cluster (clustered)
    #[arg(long = "cluster-size")]
    cluster_size: Option<usize>,
    /// Inter-cluster coupling (clustered)
    #[arg(long)]
    eps: Option<f64>,
    /// Generator seed (reversible, clustered)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output MatrixMarket path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Fig1,
    BirthDeath,
    Reversible,
    Clustered,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Gen(args) => cmd_gen(&args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn sha256_hex(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    Ok(out)
}

fn status_name(status: Status) -> &'static str {
    match status {
        Status::Converged => "Converged",
        Status::MaxIterations => "MaxIterations",
        Status::NumericalBreakdown => "NumericalBreakdown",
    }
}

/// Everything else may stream, but the manifest lands atomically: a
/// half-written manifest would defeat its role as the run's receipt.
fn write_manifest_atomic(dir: &Path, manifest: &serde_json::Value) -> Result<PathBuf, Error> {
    let final_path = dir.join("manifest.json");
    let tmp_path = dir.join(".manifest.json.tmp");
    let mut f = fs::File::create(&tmp_path)?;
    f.write_all(serde_json::to_string_pretty(manifest).expect("serializable").as_bytes())?;
    f.write_all(b"\n")?;
    f.sync_all()?;
    fs::rename(&tmp_path, &final_path)?;
    Ok(final_path)
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn cmd_solve(args: &SolveArgs) -> Result<i32, Error> {
    let cfg = args.solver.config();
    let matrix = load_matrix_market(&args.solver.matrix)?;
    let checksum = sha256_hex(&args.solver.matrix)?;

    let started = Instant::now();
    let report = solve(&matrix, &cfg)?;
    let wall_ms = started.elapsed().as_millis() as u64;

    fs::create_dir_all(&args.out)?;
    let dist_path = args.out.join("distribution.csv");
    let mut dist = String::from("state,probability\n");
    for (i, p) in report.distribution.iter().enumerate() {
        dist.push_str(&format!("{i},{p:.16e}\n"));
    }
    fs::write(&dist_path, dist)?;

    let hist_path = args.out.join("history.csv");
    fs::write(&hist_path, report.history_csv())?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let manifest = serde_json::json!({
        "command": command_echo(),
        "config": args.solver.config_json(),
        "matrix": {
            "path": args.solver.matrix.display().to_string(),
            "sha256": checksum,
        },
        "status": status_name(report.status),
        "total_matvecs": report.total_matvecs,
        "total_iterations": report.total_iterations,
        "wall_ms": wall_ms,
        "outputs": [
            dist_path.display().to_string(),
            hist_path.display().to_string(),
        ],
        "warnings": report.warnings,
    });
    write_manifest_atomic(&args.out, &manifest)?;

    println!(
        "{}: {} iterations, {} matvecs, final residual {:.3e}",
        status_name(report.status),
        report.total_iterations,
        report.total_matvecs,
        report.residual_history.last().map(|r| r.residual).unwrap_or(f64::NAN)
    );
    Ok(match report.status {
        Status::Converged => 0,
        Status::MaxIterations => 2,
        Status::NumericalBreakdown => 1,
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, Error> {
    if args.block_sizes.is_empty() {
        return Err(Error::InvalidParameters { msg: "block-size list is empty".into() });
    }
    if args.windows.is_empty() {
        return Err(Error::InvalidParameters { msg: "window list is empty".into() });
    }
    let matrix = load_matrix_market(&args.solver.matrix)?;
    let checksum = sha256_hex(&args.solver.matrix)?;

    let started = Instant::now();
    let mut rows = String::from("block_size,window,converged,iterations,matvecs,final_residual\n");
    let mut total_matvecs = 0usize;
    let mut total_iterations = 0usize;
    for &s in &args.block_sizes {
        for &t in &args.windows {
            let cfg = SolverConfig {
                block_size: s,
                window: t,
                ..args.solver.config()
            };
            let report: ConvergenceReport = solve(&matrix, &cfg)?;
            let final_residual =
                report.residual_history.last().map(|r| r.residual).unwrap_or(f64::NAN);
            rows.push_str(&format!(
                "{s},{t},{},{},{},{final_residual:.16e}\n",
                report.status == Status::Converged,
                report.total_iterations,
                report.total_matvecs,
            ));
            total_matvecs += report.total_matvecs;
            total_iterations += report.total_iterations;
        }
    }
    let wall_ms = started.elapsed().as_millis() as u64;

    fs::create_dir_all(&args.out)?;
    let sweep_path = args.out.join("sweep.csv");
    fs::write(&sweep_path, rows)?;

    let manifest = serde_json::json!({
        "command": command_echo(),
        "config": args.solver.config_json(),
        "block_sizes": args.block_sizes,
        "windows": args.windows,
        "matrix": {
            "path": args.solver.matrix.display().to_string(),
            "sha256": checksum,
        },
        "status": "Completed",
        "total_matvecs": total_matvecs,
        "total_iterations": total_iterations,
        "wall_ms": wall_ms,
        "outputs": [sweep_path.display().to_string()],
    });
    write_manifest_atomic(&args.out, &manifest)?;
    println!("swept {} cells", args.block_sizes.len() * args.windows.len());
    Ok(0)
}

fn require<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidParameters {
        msg: format!("--{flag} is required for family {family}"),
    })
}

fn cmd_gen(args: &GenArgs) -> Result<i32, Error> {
    let spec = match args.family {
        Family::Fig1 => ChainSpec::Fig1,
        Family::BirthDeath => ChainSpec::BirthDeath {
            n: require(args.n, "n", "birth-death")?,
            p: require(args.p, "p", "birth-death")?,
            q: require(args.q, "q", "birth-death")?,
        },
        Family::Reversible => ChainSpec::RandomReversible {
            n: require(args.n, "n", "reversible")?,
            seed: args.seed,
        },
        Family::Clustered => ChainSpec::Clustered {
            m: require(args.m, "m", "clustered")?,
            cluster_size: require(args.cluster_size, "cluster-size", "clustered")?,
            eps: require(args.eps, "eps", "clustered")?,
            seed: args.seed,
        },
    };
    let started = Instant::now();
    let matrix = generate(&spec)?;

    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    write_matrix_market(&args.out, &matrix)?;
    let checksum = sha256_hex(&args.out)?;

    let mut sidecar = String::new();
    match &spec {
        ChainSpec::Fig1 => sidecar.push_str("family=fig1\n"),
        ChainSpec::BirthDeath { n, p, q } => {
            sidecar.push_str(&format!("family=birth-death\nn={n}\np={p}\nq={q}\n"));
        }
        ChainSpec::RandomReversible { n, seed } => {
            sidecar.push_str(&format!("family=reversible\nn={n}\nseed={seed}\n"));
        }
        ChainSpec::Clustered { m, cluster_size, eps, seed } => {
            sidecar.push_str(&format!(
                "family=clustered\nm={m}\ncluster_size={cluster_size}\neps={eps}\nseed={seed}\n"
            ));
        }
    }
    sidecar.push_str(&format!("n={}\nnnz={}\n", matrix.n(), matrix.nnz()));

    // Reversible families carry their spectrum; Fig1 is not reversible.
    let spectrum = match &spec {
        ChainSpec::Fig1 => None,
        _ => {
            let pi = stationary_oracle_dense(&matrix)?;
            Some(spectrum_oracle_reversible(&matrix, &pi)?)
        }
    };
    if let Some(mags) = &spectrum {
        sidecar.push_str("spectrum:\nindex,magnitude\n");
        for (i, mag) in mags.iter().enumerate() {
            sidecar.push_str(&format!("{},{mag:.16e}\n", i + 1));
        }
    }
    let sidecar_path = args.out.with_extension("sidecar.txt");
    fs::write(&sidecar_path, &sidecar)?;

    println!("n={} nnz={}", matrix.n(), matrix.nnz());
    if let Some(mags) = &spectrum {
        let top: Vec<String> = mags.iter().take(5).map(|m| format!("{m:.10}")).collect();
        println!("top |lambda|: {}", top.join(" "));
    }

    let wall_ms = started.elapsed().as_millis() as u64;
    let manifest = serde_json::json!({
        "command": command_echo(),
        "family": match args.family {
            Family::Fig1 => "fig1",
            Family::BirthDeath => "birth-death",
            Family::Reversible => "reversible",
            Family::Clustered => "clustered",
        },
        "matrix": {
            "path": args.out.display().to_string(),
            "sha256": checksum,
        },
        "status": "Completed",
        "wall_ms": wall_ms,
        "outputs": [
            args.out.display().to_string(),
            sidecar_path.display().to_string(),
        ],
    });
    let manifest_dir = args.out.parent().unwrap_or_else(|| Path::new("."));
    let final_path = manifest_dir.join(format!(
        "{}.manifest.json",
        args.out.file_stem().and_then(|s| s.to_str()).unwrap_or("gen")
    ));
    let tmp_path = manifest_dir.join(".gen-manifest.tmp");
    fs::write(&tmp_path, serde_json::to_string_pretty(&manifest).expect("serializable"))?;
    fs::rename(&tmp_path, &final_path)?;
    Ok(0)
}
