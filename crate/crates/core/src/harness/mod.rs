//! Monte Carlo campaigns: transmitter, channel and receiver in a loop, one
//! statistics row per SNR point.

mod campaign;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::{epa, etu, ChannelProfile};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::numerology::{NprachConfig, NpuschF1Config, NpuschF2Config};

pub use campaign::{calibrate, run_campaign, run_f1_campaign, run_f2_campaign, run_nprach_campaign, trial_stream};
pub use report::{read_csv, write_csv, CSV_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Nprach,
    F1,
    F2,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Nprach => "nprach",
            ChannelKind::F1 => "npusch-f1",
            ChannelKind::F2 => "npusch-f2",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nprach" => Ok(ChannelKind::Nprach),
            "f1" | "npusch-f1" => Ok(ChannelKind::F1),
            "f2" | "npusch-f2" => Ok(ChannelKind::F2),
            _ => Err(Error::config("channel", format!("unknown channel {s:?}"))),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Awgn,
    Epa1,
    Epa5,
    Etu1,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Awgn => "awgn",
            ChannelModel::Epa1 => "epa1",
            ChannelModel::Epa5 => "epa5",
            ChannelModel::Etu1 => "etu1",
        }
    }

    /// Fading profile, `None` for a static channel.
    pub fn profile(self) -> Option<ChannelProfile> {
        match self {
            ChannelModel::Awgn => None,
            ChannelModel::Epa1 => Some(epa(1.0)),
            ChannelModel::Epa5 => Some(epa(5.0)),
            ChannelModel::Etu1 => Some(etu(1.0)),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelModel::Awgn),
            "epa1" => Ok(ChannelModel::Epa1),
            "epa5" => Ok(ChannelModel::Epa5),
            "etu1" => Ok(ChannelModel::Etu1),
            _ => Err(Error::config("model", format!("unknown channel model {s:?}"))),
        }
    }
}

/// Waveform configuration of the channel under test.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Nprach(NprachConfig),
    F1(NpuschF1Config),
    F2(NpuschF2Config),
}

impl Waveform {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Waveform::Nprach(_) => ChannelKind::Nprach,
            Waveform::F1(_) => ChannelKind::F1,
            Waveform::F2(_) => ChannelKind::F2,
        }
    }

    pub fn repetitions(&self) -> usize {
        match self {
            Waveform::Nprach(c) => c.repetitions,
            Waveform::F1(c) => c.n_rep,
            Waveform::F2(c) => c.repetitions,
        }
    }

    pub fn tones(&self) -> usize {
        match self {
            Waveform::F1(c) => c.tones,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub waveform: Waveform,
    pub model: ChannelModel,
    pub snr_db: Vec<f64>,
    pub cfo_hz: f64,
    /// Round-trip delay applied to NPRACH trials.
    pub timing_offset_us: f64,
    pub n_rx: usize,
    pub trials: usize,
    pub seed: u64,
    /// NPRACH start subcarrier under test.
    pub rho: usize,
    /// Threshold table; calibrated on the fly when absent.
    pub thresholds: Option<PathBuf>,
    pub calibration_trials: usize,
    pub target_fa: f64,
    /// Noise-only trials interleaved with signal trials.
    pub dtx_trials: bool,
    /// Format 1 retransmissions after a CRC failure.
    pub max_retx: usize,
    /// Format 2 data-only decision metric.
    pub data_only: bool,
    /// Adds wall-clock time to each row, which breaks byte-identical output.
    pub report_wall: bool,
    pub out: Option<PathBuf>,
}

const CAMPAIGN_KEYS: &[&str] = &[
    "channel",
    "model",
    "snr_db",
    "cfo_hz",
    "timing_offset_us",
    "n_rx",
    "trials",
    "seed",
    "rho",
    "thresholds",
    "calibration_trials",
    "target_fa",
    "dtx_trials",
    "max_retx",
    "data_only",
    "report_wall",
    "out",
];

const NPRACH_KEYS: &[&str] = &[
    "periodicity_ms",
    "repetitions",
    "subcarrier_offset",
    "num_subcarriers",
    "start_time_ms",
    "cell_id",
    "preamble_format",
];

const F1_KEYS: &[&str] = &[
    "tones",
    "subcarrier_spacing_hz",
    "tone_offset",
    "n_ru",
    "repetitions",
    "tbs_bits",
    "modulation",
    "rnti",
];

const F2_KEYS: &[&str] = &["tone", "subcarrier_spacing_hz", "repetitions", "rnti"];

impl CampaignConfig {
    /// Parses a campaign; `kind` overrides the file's `channel` key.
    pub fn from_kv(kv: &KeyValues, kind: Option<ChannelKind>) -> Result<Self> {
        let kind = match kind {
            Some(k) => k,
            None => kv
                .raw("channel")
                .ok_or_else(|| Error::config("channel", "missing"))?
                .parse()?,
        };
        let waveform_keys = match kind {
            ChannelKind::Nprach => NPRACH_KEYS,
            ChannelKind::F1 => F1_KEYS,
            ChannelKind::F2 => F2_KEYS,
        };
        if let Some(k) = kv
            .keys()
            .find(|k| !CAMPAIGN_KEYS.contains(k) && !waveform_keys.contains(k))
        {
            return Err(Error::config(k, format!("unknown key for a {} campaign", kind.name())));
        }
        let waveform = match kind {
            ChannelKind::Nprach => Waveform::Nprach(NprachConfig::from_kv(kv)?),
            ChannelKind::F1 => Waveform::F1(NpuschF1Config::from_kv(kv)?),
            ChannelKind::F2 => Waveform::F2(NpuschF2Config::from_kv(kv)?),
        };
        let default_cal = match kind {
            ChannelKind::Nprach => 100_000,
            _ => 10_000,
        };
        let cfg = CampaignConfig {
            waveform,
            model: kv.get_or("model", ChannelModel::Awgn)?,
            snr_db: kv.get_list("snr_db")?.unwrap_or_default(),
            cfo_hz: kv.get_or("cfo_hz", 0.0)?,
            timing_offset_us: kv.get_or("timing_offset_us", 0.0)?,
            n_rx: kv.get_or("n_rx", 2)?,
            trials: kv.get_or("trials", 1000)?,
            seed: kv.get_or("seed", 1)?,
            rho: kv.get_or("rho", 0)?,
            thresholds: kv.get::<String>("thresholds")?.map(PathBuf::from),
            calibration_trials: kv.get_or("calibration_trials", default_cal)?,
            target_fa: kv.get_or("target_fa", 0.001)?,
            dtx_trials: kv.get_or("dtx_trials", true)?,
            max_retx: kv.get_or("max_retx", 1)?,
            data_only: kv.get_or("data_only", false)?,
            report_wall: kv.get_or("report_wall", false)?,
            out: kv.get::<String>("out")?.map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "needs at least one value"));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::config("snr_db", "NaN"));
        }
        if ![1, 2, 4].contains(&self.n_rx) {
            return Err(Error::config("n_rx", "must be 1, 2 or 4"));
        }
        if !(self.timing_offset_us >= 0.0 && self.timing_offset_us.is_finite()) {
            return Err(Error::config("timing_offset_us", "must be finite and non-negative"));
        }
        if !(self.target_fa > 0.0 && self.target_fa < 1.0) {
            return Err(Error::config("target_fa", "must lie in (0, 1)"));
        }
        if let Waveform::Nprach(c) = &self.waveform {
            if self.rho >= c.num_subcarriers {
                return Err(Error::config("rho", "outside the configured subcarriers"));
            }
        }
        Ok(())
    }
}

/// One CSV row. Fields that do not apply to the channel stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub channel: ChannelKind,
    pub model: ChannelModel,
    pub snr_db: f64,
    pub reps: usize,
    pub tones: usize,
    pub trials: usize,
    /// NPRACH detection rate, F1 delivered-TB rate, or F2 ACK detection rate.
    pub detect_or_pass: Option<f64>,
    pub false_alarm: Option<f64>,
    pub ack_miss: Option<f64>,
    pub timing_err_us: Option<f64>,
    pub cfo_err_hz: Option<f64>,
    pub throughput_frac: Option<f64>,
    pub wall_s: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_campaign() {
        let kv = KeyValues::parse("channel = nprach\nrepetitions = 32\nsnr_db = -10,-9\nmodel = EPA1\ntrials = 50").unwrap();
        let c = CampaignConfig::from_kv(&kv, None).unwrap();
        assert_eq!(c.waveform.kind(), ChannelKind::Nprach);
        assert_eq!(c.waveform.repetitions(), 32);
        assert_eq!(c.model, ChannelModel::Epa1);
        assert_eq!(c.snr_db, vec![-10.0, -9.0]);
        assert_eq!(c.n_rx, 2);
        assert_eq!(c.calibration_trials, 100_000);
    }

    #[test]
    fn rejects_bad_campaigns() {
        let kv = KeyValues::parse("snr_db = 0\ntbs_bit = 32").unwrap();
        assert!(matches!(
            CampaignConfig::from_kv(&kv, Some(ChannelKind::F1)),
            Err(Error::Config { key, .. }) if key == "tbs_bit"
        ));
        let kv = KeyValues::parse("tones = 3").unwrap();
        assert!(CampaignConfig::from_kv(&kv, Some(ChannelKind::F1)).is_err());
        let kv = KeyValues::parse("snr_db = 0\ntrials = 0").unwrap();
        assert!(CampaignConfig::from_kv(&kv, Some(ChannelKind::F2)).is_err());
        let kv = KeyValues::parse("snr_db = 0\nmodel = rician").unwrap();
        assert!(CampaignConfig::from_kv(&kv, Some(ChannelKind::F2)).is_err());
        let kv = KeyValues::parse("snr_db = 0\ntone = 2").unwrap();
        assert!(CampaignConfig::from_kv(&kv, Some(ChannelKind::Nprach)).is_err());
    }
}
