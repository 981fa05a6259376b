use clap::{Parser, Subcommand};
use hecke_tyurin::report::{self, scenario::Scenario, RunFlags};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "tyurin", version, about = "Hecke-Tyurin parametrization checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print period matrix, kappa characteristic and curve hash.
    Periods {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict to these suites (repeatable).
        #[arg(long)]
        suite: Vec<String>,
        /// Levels for the operator suite (repeatable).
        #[arg(long, allow_negative_numbers = true)]
        k: Vec<f64>,
    },
    /// Commutator residuals of the quantum Hamiltonians at several levels.
    Contrast {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        k: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute period data and store it in a cache file.
    Cache {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c.clamp(0, 255) as u8)
}

fn fail(e: hecke_tyurin::Error) -> ExitCode {
    eprintln!("error: {e}");
    code(if e.is_numeric() { 3 } else { 2 })
}

fn write(out: &Option<PathBuf>, text: &str) -> Result<(), hecke_tyurin::Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Periods { scenario, out } => {
            let run = || -> hecke_tyurin::Result<()> {
                let s = Scenario::load(&scenario)?;
                let pd = s.period_data()?;
                let v = serde_json::json!({
                    "genus": pd.genus(),
                    "curve_hash": pd.hash(),
                    "tau": pd.tau.iter().map(|r| r.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "kappa_characteristic": pd.kappa_characteristic,
                    "tau_asymmetry": pd.tau_asymmetry(),
                    "bilinear_asymmetry": pd.bilinear_asymmetry(),
                });
                write(&out, &serde_json::to_string_pretty(&v).unwrap_or_default())
            };
            match run() {
                Ok(()) => code(0),
                Err(e) => fail(e),
            }
        }
        Cmd::Verify { scenario, out, seed, suite, k } => {
            let flags = RunFlags {
                seed,
                suites: (!suite.is_empty()).then_some(suite),
                k: (!k.is_empty()).then_some(k),
            };
            let (rep, c) = report::run(&scenario, out.as_deref(), &flags);
            let _ = write!(std::io::stdout(), "{}", rep.summary());
            code(c)
        }
        Cmd::Contrast { scenario, k, out } => {
            let ks = if k.is_empty() { vec![-2.0, 0.0, 1.0] } else { k };
            let run = || -> hecke_tyurin::Result<()> {
                let s = Scenario::load(&scenario)?;
                let rows = report::contrast(&s, &ks)?;
                let v: Vec<_> = rows.iter().map(|(k, r)| serde_json::json!({ "k": k, "max_commutator": r })).collect();
                for (k, r) in &rows {
                    eprintln!("k = {k:>6}  max |[T_a, T_b] f| = {r:.3e}");
                }
                write(&out, &serde_json::to_string_pretty(&v).unwrap_or_default())
            };
            match run() {
                Ok(()) => code(0),
                Err(e) => fail(e),
            }
        }
        Cmd::Cache { scenario, out } => {
            let run = || -> hecke_tyurin::Result<()> {
                let s = Scenario::load(&scenario)?;
                let pd = hecke_tyurin::curve::PeriodData::compute_with(&s.spec()?, s.settings())?;
                pd.cache_store(&out)?;
                println!("cached {} ({})", out.display(), pd.hash());
                Ok(())
            };
            match run() {
                Ok(()) => code(0),
                Err(e) => fail(e),
            }
        }
    }
}
