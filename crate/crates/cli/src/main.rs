//! `nbiot-sim`: runs link-level campaigns and threshold calibration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use nbiot_core::config::KeyValues;
use nbiot_core::harness::{calibrate, run_campaign, write_csv, CampaignConfig, ChannelKind};
use nbiot_core::threshold::ThresholdTable;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// NPRACH detection campaign.
    Nprach,
    /// NPUSCH format 1 throughput campaign.
    F1,
    /// NPUSCH format 2 ACK/DTX campaign.
    F2,
    /// Calibrates detection thresholds; the config's `channel` key selects
    /// nprach or f2.
    Calibrate,
}

#[derive(Debug, Parser)]
#[command(name = "nbiot-sim", version, about = "NB-IoT uplink link-level simulator")]
struct Cli {
    command: Command,
    /// `key = value` campaign file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated SNR points in dB, overriding the file.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV for campaigns, threshold table for calibration. Campaign output
    /// defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut kv = KeyValues::load(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    if let Some(s) = &cli.snr_db {
        kv.set("snr_db", s);
    }
    if let Some(t) = cli.trials {
        kv.set("trials", t);
    }
    if let Some(s) = cli.seed {
        kv.set("seed", s);
    }
    if let Some(o) = &cli.out {
        kv.set("out", o.display());
    }

    let kind = match cli.command {
        Command::Nprach => Some(ChannelKind::Nprach),
        Command::F1 => Some(ChannelKind::F1),
        Command::F2 => Some(ChannelKind::F2),
        Command::Calibrate => None,
    };

    if let Command::Calibrate = cli.command {
        let out: PathBuf = kv
            .get::<String>("out")?
            .map(PathBuf::from)
            .context("calibration needs --out or an `out` key")?;
        let mut table = if out.exists() {
            ThresholdTable::load(&out)?
        } else {
            ThresholdTable::default()
        };
        for th in calibrate(&kv, kind, &mut table)? {
            eprintln!("R={} n_rx={} epsilon={:e} ({} trials)", th.reps, th.n_rx, th.epsilon, th.trials);
        }
        table.save(&out)?;
        return Ok(());
    }

    let cfg = CampaignConfig::from_kv(&kv, kind)?;
    let rows = run_campaign(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write_csv(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}
