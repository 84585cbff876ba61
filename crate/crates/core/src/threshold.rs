//! Detection thresholds calibrated on noise-only input.
//!
//! Text format, one entry per line: `R n_rx epsilon trials seed`, where `R`
//! is the repetition count. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub reps: usize,
    pub n_rx: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThresholdTable {
    pub entries: Vec<Threshold>,
}

impl ThresholdTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::DataFile {
                path: "<thresholds>".into(),
                reason: format!("line {}: expected `R n_rx epsilon trials seed`", i + 1),
            };
            if f.len() != 5 {
                return Err(bad());
            }
            entries.push(Threshold {
                reps: f[0].parse().map_err(|_| bad())?,
                n_rx: f[1].parse().map_err(|_| bad())?,
                epsilon: f[2].parse().map_err(|_| bad())?,
                trials: f[3].parse().map_err(|_| bad())?,
                seed: f[4].parse().map_err(|_| bad())?,
            });
        }
        Ok(ThresholdTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::DataFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.entries {
            // `{:e}` round-trips f64 exactly.
            let _ = writeln!(s, "{} {} {:e} {} {}", t.reps, t.n_rx, t.epsilon, t.trials, t.seed);
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Replaces any entry with the same `(reps, n_rx)`.
    pub fn insert(&mut self, t: Threshold) {
        self.entries.retain(|e| (e.reps, e.n_rx) != (t.reps, t.n_rx));
        self.entries.push(t);
        self.entries.sort_by_key(|e| (e.reps, e.n_rx));
    }

    pub fn get(&self, reps: usize, n_rx: usize) -> Result<&Threshold> {
        self.entries
            .iter()
            .find(|e| e.reps == reps && e.n_rx == n_rx)
            .ok_or_else(|| Error::MissingCalibration(format!("R={reps}, n_rx={n_rx}")))
    }
}

/// Element at index `⌊q·n⌋` (clamped) of the ascending sort of `values`.
pub fn empirical_quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let idx = ((q * values.len() as f64).floor() as usize).min(values.len() - 1);
    values[idx]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut t = ThresholdTable::default();
        t.insert(Threshold {
            reps: 32,
            n_rx: 2,
            epsilon: 1.234567890123e-3,
            trials: 100000,
            seed: 7,
        });
        t.insert(Threshold {
            reps: 8,
            n_rx: 2,
            epsilon: 17.5,
            trials: 20000,
            seed: 7,
        });
        let back = ThresholdTable::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.entries[0].reps, 8);
        assert!(back.get(8, 1).is_err());
    }

    #[test]
    fn malformed() {
        assert!(ThresholdTable::parse("8 2 1.0 100").is_err());
        assert!(ThresholdTable::parse("8 2 x 100 1").is_err());
        assert!(ThresholdTable::parse("# only a comment\n\n").unwrap().entries.is_empty());
    }

    #[test]
    fn quantile_index() {
        let mut v: Vec<f64> = (0..100_000).rev().map(|i| i as f64).collect();
        assert_eq!(empirical_quantile(&mut v, 0.999), 99_900.0);
    }
}
