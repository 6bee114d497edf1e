//! `symdyn`: entropies, measures, periodic points, cover scans, bounds,
//! constructions and block-map checks from the command line.
//!
//! Exit status is 0 on success, 1 when a verdict fails and 2 on bad input.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "symdyn", version, about = "Symbolic dynamics toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Report entropic quantities in bits.
    #[arg(long, global = true)]
    pub bits: bool,
    /// Power-iteration tolerance, in (0, 1e-3].
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Largest recoded state count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub state_cap: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Topological entropy and Perron data of a forbidden-word SFT.
    Entropy {
        spec: PathBuf,
    },
    /// Parry cylinder probabilities, for one SFT or across cover stages of an oracle.
    Mme {
        /// Forbidden-word spec file.
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        ell: usize,
        /// Oracle file; tabulates the Parry measures of its cover stages.
        #[arg(long, conflicts_with = "spec")]
        oracle: Option<PathBuf>,
        /// Stages as `2-8` or `1,3,5`.
        #[arg(long, requires = "oracle")]
        stages: Option<String>,
        /// Comma-separated words; defaults to every word of length up to `ell`.
        #[arg(long)]
        words: Option<String>,
    },
    /// Periodic-point counts and orbits up to a period.
    Periodic {
        spec: PathBuf,
        #[arg(long, default_value_t = 6)]
        p_max: usize,
    },
    /// Stability scans over SFT covers, and certificate replay.
    #[command(args_conflicts_with_subcommands = true)]
    Cover {
        #[command(subcommand)]
        scan: Option<CoverScan>,
        /// Certificate to replay.
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Oracle to re-query during replay.
        #[arg(long, requires = "verify")]
        oracle: Option<PathBuf>,
    },
    /// Evaluate the explicit constants and entropy bounds.
    Bounds {
        #[command(subcommand)]
        kind: BoundKind,
    },
    /// Build explicit objects: construction stages, Sturmian words.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Check that two block maps are mutually inverse automorphisms of an oracle.
    VerifyBlockmap {
        map: PathBuf,
        inverse: PathBuf,
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Check the induced action on periodic orbits up to this period.
        #[arg(long, default_value_t = 6)]
        p_max: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum CoverScan {
    /// Lengths where the cover changes, and the stable run after each stage.
    ScanLanguage {
        oracle: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Write the certificate for the longest stable run here.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Entropy drops `h_m − h_{m+j}` against the threshold Ξ.
    ScanEntropy {
        oracle: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        ell: u64,
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// First `(n, p)` with `℘_p(X_n) = ℘_p(X_{n+m})`.
    ScanPeriod {
        oracle: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 8)]
        p_max: usize,
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundKind {
    /// `ξ(s)`
    Xi {
        #[arg(long)]
        s: u64,
    },
    /// Entropy-gap threshold `ε² / ((4/3)^{2ℓ} ξ(s)²)`.
    Gap {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        s: u64,
    },
    /// `Ξ(ε, ℓ, j)` with `s_m` states at stage `m`.
    #[command(name = "Xi")]
    BigXi {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 1)]
        j: u64,
        #[arg(long)]
        s_m: u64,
    },
    /// Transfer-operator constants `A`, `β`.
    Prop {
        #[arg(long)]
        s: u64,
    },
    /// Lower bound `h·e^{−2(3n+4k)h}` on the drop from removing one word.
    Drop {
        /// Entropy in nats; `ln2`, `ln(3)` and plain numbers are accepted.
        #[arg(long)]
        h: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
    /// Lower bound on the drop between cover stages.
    CoverDrop {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 2)]
        a: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstructKind {
    /// A finite stage of the period-stable, non-language-stable shift.
    X3Stage {
        #[arg(long, default_value_t = 4)]
        n1: usize,
        #[arg(long, default_value_t = 2)]
        n11: usize,
        #[arg(long, default_value_t = 1)]
        n00: usize,
        #[arg(long, default_value_t = 2)]
        n000: usize,
        #[arg(long, default_value_t = 100)]
        mult: usize,
        #[arg(long, default_value_t = 20)]
        period_cap: usize,
        #[arg(long)]
        horizon: Option<usize>,
        /// Also write the replayable ledger here.
        #[arg(long)]
        ledger_out: Option<PathBuf>,
        /// Also write an oracle file reproducing the stage.
        #[arg(long)]
        oracle_out: Option<PathBuf>,
    },
    /// Rebuild a stage from its ledger, checking every template.
    Replay {
        ledger: PathBuf,
    },
    /// Letters `y(from) … y(to)` of the mechanical word.
    Sturmian {
        #[arg(long, default_value_t = 1)]
        from: i64,
        #[arg(long, default_value_t = 100)]
        to: i64,
        /// `a b c d` for `(a + b√d)/c`.
        #[arg(long)]
        slope: Option<String>,
        #[arg(long)]
        intercept: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = cli.run.clone();
    let result = commands::run(cli).and_then(|report| {
        let bytes = report.render(run.format)?;
        emit(&bytes, run.output.as_deref())?;
        Ok(report.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
