//! Command-line front end: scenario ingestion, subcommands and table output.

pub mod commands;
pub mod scenario;
pub mod table;

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::scenario::Scenario;
use crate::table::{Format, Meta, ResultTable};

#[derive(Debug, Parser)]
#[command(name = "mpt", version, about = "Microwave power transfer link, safety, beam and coverage calculator")]
pub struct Cli {
    /// TOML scenario file; the built-in reference setup when omitted.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Overrides the network seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo replications. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Link budget at given distances.
    Link {
        /// Comma-separated distances (m).
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        distance: Vec<f64>,
        /// Restrict to one device.
        #[arg(long)]
        device: Option<String>,
    },
    /// Power transfer range per device and radiated power.
    Fig4 {
        /// Comma-separated radiated powers (W).
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 10.0, 20.0, 50.0], allow_negative_numbers = true)]
        powers: Vec<f64>,
        /// Device the others' ranges are divided by.
        #[arg(long, default_value = "laptop")]
        reference: String,
    },
    /// Unsafe beam-interception distances and duty-cycle limits.
    Ubid {
        /// Comma-separated distances (m) for duty-cycle columns.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        distances: Vec<f64>,
    },
    /// Ambient RF power available to a device.
    Scavenge {
        /// Device aperture area (m^2).
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        area: f64,
    },
    /// Power density map of coordinated beacons around the target.
    Beam {
        /// Treat beacon phases as unsynchronized.
        #[arg(long)]
        incoherent: bool,
    },
    /// Monte Carlo coverage of power and information transfer.
    Coverage {
        /// Emit the PB/BS density tradeoff instead.
        #[arg(long)]
        frontier: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Link { .. } => "link",
            Command::Fig4 { .. } => "fig4",
            Command::Ubid { .. } => "ubid",
            Command::Scavenge { .. } => "scavenge",
            Command::Beam { .. } => "beam",
            Command::Coverage { frontier: false } => "coverage",
            Command::Coverage { frontier: true } => "frontier",
        }
    }
}

/// Loads the scenario named on the command line and applies flag overrides.
pub fn load_scenario(cli: &Cli) -> anyhow::Result<Scenario> {
    let mut s = match &cli.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::builtin(),
    };
    if let Some(seed) = cli.seed {
        s.network.seed = seed;
    }
    Ok(s)
}

pub fn build_table(cli: &Cli, s: &Scenario) -> anyhow::Result<ResultTable> {
    if cli.threads == Some(0) {
        bail!("--threads: must be at least 1");
    }
    match &cli.command {
        Command::Link { distance, device } => commands::link(s, distance, device.as_deref()),
        Command::Fig4 { powers, reference } => commands::fig4(s, powers, reference),
        Command::Ubid { distances } => commands::ubid(s, distances),
        Command::Scavenge { area } => commands::scavenge(s, *area),
        Command::Beam { incoherent } => commands::beam(s, s.beam.synchronized && !incoherent),
        Command::Coverage { frontier: false } => commands::coverage(s, cli.threads),
        Command::Coverage { frontier: true } => commands::frontier(s, cli.threads),
    }
}

/// Runs the command and returns the rendered output.
pub fn render(cli: &Cli) -> anyhow::Result<String> {
    let s = load_scenario(cli)?;
    let table = build_table(cli, &s)?;
    let meta = Meta {
        command: cli.command.name().to_string(),
        seed: s.network.seed,
        scenario_hash: s.hash.clone(),
    };
    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    table.render(format, &meta)
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let text = render(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("{}: cannot write output", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes()).context("stdout")
        }
    }
}
