//! `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Parsing errors name the key.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerology::{Modulation, NprachConfig, NpuschF1Config, NpuschF2Config};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), "expected key = value")
            })?;
            let key = k.trim().to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::config(key, "duplicate key"));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::DataFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::config(key, format!("cannot parse {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|_| {
                Error::config(key, format!("cannot parse list {v:?}"))
            }),
        }
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, ()> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| ()))
        .collect()
}

impl FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" | "pi2-bpsk" | "pi/2-bpsk" => Ok(Modulation::Bpsk),
            "qpsk" | "pi4-qpsk" | "pi/4-qpsk" => Ok(Modulation::Qpsk),
            _ => Err(Error::config("modulation", format!("unknown {s:?}"))),
        }
    }
}

impl NprachConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = NprachConfig::default();
        let cfg = NprachConfig {
            periodicity_ms: kv.get_or("periodicity_ms", d.periodicity_ms)?,
            repetitions: kv.get_or("repetitions", d.repetitions)?,
            subcarrier_offset: kv.get_or("subcarrier_offset", d.subcarrier_offset)?,
            num_subcarriers: kv.get_or("num_subcarriers", d.num_subcarriers)?,
            start_time_ms: kv.get_or("start_time_ms", d.start_time_ms)?,
            cell_id: kv.get_or("cell_id", d.cell_id)?,
        };
        if let Some(fmt) = kv.raw("preamble_format") {
            if fmt != "0" {
                return Err(Error::config("preamble_format", "only format 0 is supported"));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NpuschF1Config {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = NpuschF1Config::default();
        let tones = kv.get_or("tones", d.tones)?;
        let default_mod = if tones > 1 { Modulation::Qpsk } else { d.modulation };
        let cfg = NpuschF1Config {
            tones,
            subcarrier_spacing_hz: kv.get_or("subcarrier_spacing_hz", d.subcarrier_spacing_hz)?,
            tone_offset: kv.get_or("tone_offset", d.tone_offset)?,
            n_ru: kv.get_or("n_ru", d.n_ru)?,
            n_rep: kv.get_or("repetitions", d.n_rep)?,
            tbs_bits: kv.get_or("tbs_bits", d.tbs_bits)?,
            modulation: match kv.raw("modulation") {
                Some(m) => m.parse()?,
                None => default_mod,
            },
            rnti: kv.get_or("rnti", d.rnti)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NpuschF2Config {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = NpuschF2Config::default();
        let cfg = NpuschF2Config {
            tone: kv.get_or("tone", d.tone)?,
            subcarrier_spacing_hz: kv.get_or("subcarrier_spacing_hz", d.subcarrier_spacing_hz)?,
            repetitions: kv.get_or("repetitions", d.repetitions)?,
            rnti: kv.get_or("rnti", d.rnti)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
