//! `hmn`: classification runs and inequality reports for h-MN-convexity.

mod commands;
mod config;
mod points;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Debug, Parser)]
#[command(
    name = "hmn",
    version,
    about = "Sampled checks of h-MN-convexity with JSON reports",
    after_help = "Exit status is 0 whenever a run completes, whatever the verdicts; \
                  2 on configuration or input errors."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file of `key = value` lines with optional [command] sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Pretty-print the JSON report
    #[arg(long, global = true)]
    json: bool,

    /// Also write tabular data as CSV to OUT (classify, chord)
    #[arg(long, global = true, value_name = "OUT")]
    csv: Option<PathBuf>,

    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Verdicts for all nine classes
    Classify,
    /// Verdict for one class (--label)
    Check,
    /// Midpoint h-convexity
    Midconvex,
    /// Direct verdicts against the transformed h-convexity verdicts
    Crosscheck,
    /// Three-point inequality for x^λ under t^r (--label, --r, --lambda)
    Schur,
    /// Three-point inequality for f (--label, --direction)
    ThreePoint,
    /// Composition table lookup and numeric check of f∘g (--label, --g-label)
    Compose,
    /// Product rule for f·g (--label, --c, --direction)
    Product,
    /// Functional inequality family AG, GA or GG (--label)
    Functional,
    /// Discrete Jensen inequality (--label, --weights or --points)
    Jensen,
    /// Converse Jensen bound and the full chain (--m, --M)
    Converse,
    /// Mean axioms and H_h ≤ G_h ≤ A_h
    Axioms,
    /// h-chord data over --domain for each --h
    Chord,
    /// Predicates on h
    CheckH,
}

impl Command {
    pub const NAMES: [&'static str; 14] = [
        "classify",
        "check",
        "midconvex",
        "crosscheck",
        "schur",
        "three-point",
        "compose",
        "product",
        "functional",
        "jensen",
        "converse",
        "axioms",
        "chord",
        "check-h",
    ];

    pub fn name(self) -> &'static str {
        use Command::*;
        let i = match self {
            Classify => 0,
            Check => 1,
            Midconvex => 2,
            Crosscheck => 3,
            Schur => 4,
            ThreePoint => 5,
            Compose => 6,
            Product => 7,
            Functional => 8,
            Jensen => 9,
            Converse => 10,
            Axioms => 11,
            Chord => 12,
            CheckH => 13,
        };
        Self::NAMES[i]
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let name = cli.command.name();
    let settings = match &cli.config {
        Some(p) => config::load(p, name, &Command::NAMES)?.merge(cli.settings),
        None => cli.settings,
    };
    let out = commands::dispatch(cli.command, &settings, cli.csv.as_deref())?;
    let envelope = commands::Envelope {
        command: name,
        config: &settings,
        result: out,
    };
    let text = if cli.json {
        serde_json::to_string_pretty(&envelope)?
    } else {
        serde_json::to_string(&envelope)?
    };
    println!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
