use std::path::Path;

use crate::dsp::db_to_lin;
use crate::error::{Error, Result};

const EPA_TABLE: &str = include_str!("../../data/epa.txt");
const ETU_TABLE: &str = include_str!("../../data/etu.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntennaCorrelation {
    Low,
}

/// Tapped delay line with linear tap powers summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    pub name: String,
    /// `(delay_ns, linear power)` in ascending delay.
    pub taps: Vec<(f64, f64)>,
    pub doppler_hz: f64,
    pub antenna_correlation: AntennaCorrelation,
}

impl ChannelProfile {
    /// Parses `delay_ns power_db` lines; `#` starts a comment.
    pub fn from_table(name: &str, text: &str, doppler_hz: f64) -> Result<Self> {
        let bad = |reason: String| Error::DataFile {
            path: name.to_string(),
            reason,
        };
        let mut taps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(d)), Some(Ok(p)), None) if d >= 0.0 && p.is_finite() => taps.push((d, db_to_lin(p))),
                _ => return Err(bad(format!("line {}: expected `delay_ns power_db`", i + 1))),
            }
        }
        if taps.is_empty() {
            return Err(bad("no taps".into()));
        }
        if taps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(bad("delays must be strictly ascending".into()));
        }
        if !(doppler_hz >= 0.0 && doppler_hz.is_finite()) {
            return Err(Error::config("doppler_hz", "must be finite and non-negative"));
        }
        let total: f64 = taps.iter().map(|t| t.1).sum();
        taps.iter_mut().for_each(|t| t.1 /= total);
        Ok(ChannelProfile {
            name: name.to_string(),
            taps,
            doppler_hz,
            antenna_correlation: AntennaCorrelation::Low,
        })
    }

    pub fn load(path: &Path, doppler_hz: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::DataFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_table(&path.display().to_string(), &text, doppler_hz)
    }

    pub fn epa(doppler_hz: f64) -> Self {
        Self::from_table("epa", EPA_TABLE, doppler_hz).expect("embedded EPA table")
    }

    pub fn etu(doppler_hz: f64) -> Self {
        Self::from_table("etu", ETU_TABLE, doppler_hz).expect("embedded ETU table")
    }

    /// Single unit tap at zero delay.
    pub fn flat(doppler_hz: f64) -> Self {
        ChannelProfile {
            name: "flat".into(),
            taps: vec![(0.0, 1.0)],
            doppler_hz,
            antenna_correlation: AntennaCorrelation::Low,
        }
    }

    pub fn max_delay_ns(&self) -> f64 {
        self.taps.last().map_or(0.0, |t| t.0)
    }
}

pub fn epa(doppler_hz: f64) -> ChannelProfile {
    ChannelProfile::epa(doppler_hz)
}

pub fn etu(doppler_hz: f64) -> ChannelProfile {
    ChannelProfile::etu(doppler_hz)
}
