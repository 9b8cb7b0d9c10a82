//! `wedge`: batch verification driver.

mod config;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Suite};
use suites::Abort;

#[derive(Parser)]
#[command(name = "wedge", version, about = "Verification suites for the Dirichlet Laplacian on weighted wedges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball-measure, doubling, windshield and A_p suites.
    CheckWeights(Common),
    /// Manufactured-solution, a-priori and excluded-weight suites.
    SolvePoisson(Common),
    /// Heat-kernel oracles and bounds.
    Kernel(Common),
    /// Sectoriality and functional-calculus suites.
    Calculus(Common),
    /// Every suite selected in the config.
    VerifyAll(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[run] out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian constant in the refined kernel bound.
    #[arg(long = "c-gauss")]
    c_gauss: Option<f64>,
    /// Exponent in the refined kernel bound (default 0.9·π/κ).
    #[arg(long)]
    lambda: Option<f64>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_REJECTED: u8 = 2;
const EXIT_CONDITIONING: u8 = 3;

fn load(c: &Common) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::from_file(&c.config).map_err(|e| format!("{}: {e}", c.config.display()))?;
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(v) = c.c_gauss {
        if !(v > 0.0) {
            return Err(format!("--c-gauss must be positive (got {v})"));
        }
        cfg.c_gauss = v;
    }
    if let Some(v) = c.lambda {
        cfg.lambda = Some(v);
    }
    Ok(cfg)
}

fn set_threads() {
    if let Some(n) = std::env::var("WEDGE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run_suites(cfg: &RunConfig, suites: &[Suite], out: &Path) -> anyhow::Result<u8> {
    let mut code = 0u8;
    for &s in suites {
        let dir = out.join(s.name());
        let run = suites::run(s, cfg, &dir)?;
        run.reporter.write(&dir)?;
        let fails = run.reporter.failures();
        let total = run.reporter.records.len();
        match run.abort {
            Some(Abort::NoAdmissible) => {
                eprintln!("{}: no admissible parameters", s.name());
                code = code.max(EXIT_REJECTED);
            }
            Some(Abort::Conditioning { witness, modulus, nu }) => {
                eprintln!("{}: conditioning abort at ν = {nu}: symbol modulus {modulus:e}, excluded lattice witness n={witness}", s.name());
                return Ok(EXIT_CONDITIONING);
            }
            None => {
                println!("{}: {} records, {} failed -> {}", s.name(), total, fails, dir.display());
                if fails > 0 {
                    code = code.max(EXIT_FAIL);
                }
            }
        }
    }
    // a rejection outranks suite failures
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, suites): (&Common, Vec<Suite>) = match &cli.command {
        Command::CheckWeights(c) => (c, vec![Suite::Geometry]),
        Command::SolvePoisson(c) => (c, vec![Suite::Poisson]),
        Command::Kernel(c) => (c, vec![Suite::Kernel]),
        Command::Calculus(c) => (c, vec![Suite::Calculus]),
        Command::VerifyAll(c) => (c, Vec::new()),
    };
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_REJECTED);
        }
    };
    let suites = if suites.is_empty() { cfg.suites.clone() } else { suites };
    set_threads();
    match run_suites(&cfg, &suites, &cfg.out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
