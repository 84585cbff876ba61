//! NPRACH format 0 preamble generation at 240 ksps.

use std::f64::consts::PI;

use crate::dsp::cis;
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{NprachConfig, NprachNumerology, SampleRate};
use crate::sequence::gold;

/// Subcarrier index of every symbol group relative to the configured
/// subcarrier offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopSequence {
    pub indices: Vec<usize>,
    pub subcarrier_offset: usize,
    pub start_subcarrier: usize,
}

impl HopSequence {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn repetitions(&self) -> usize {
        self.indices.len() / 4
    }

    /// Signed tone frequency of group `m` in units of 3.75 kHz, measured from
    /// the carrier centre (48 NPRACH subcarriers span ±24).
    pub fn bin(&self, m: usize) -> i64 {
        (self.subcarrier_offset + self.indices[m]) as i64 - 24
    }

    /// `H_m = n(m+1) − n(m)` within each repetition, with the last group
    /// wrapping to the first of the same repetition.
    pub fn deltas(&self) -> Vec<i64> {
        (0..self.len())
            .map(|m| {
                let r = m / 4;
                let next = 4 * r + (m % 4 + 1) % 4;
                self.indices[next] as i64 - self.indices[m] as i64
            })
            .collect()
    }
}

/// Outer hop offsets `f(t)` for `t = 0..reps`.
fn outer_hops(cell_id: u32, reps: usize) -> Vec<usize> {
    const N_SC: usize = 12;
    let c = gold(cell_id, 10 * reps + 10);
    let mut f = Vec::with_capacity(reps);
    let mut prev = 0usize;
    for t in 0..reps {
        let word: usize = (0..9)
            .map(|i| (c[10 * t + 1 + i] as usize) << i)
            .sum();
        prev = (prev + word % (N_SC - 1) + 1) % N_SC;
        f.push(prev);
    }
    f
}

/// Hopping pattern for start subcarrier `rho`.
///
/// Inside a repetition the groups step by ±1, ±6, ∓1 subcarriers inside a
/// 12-subcarrier block; each repetition's first group is displaced by a
/// cell-specific pseudo-random offset.
pub fn nprach_hop_sequence(config: &NprachConfig, rho: usize, reps: usize) -> Result<HopSequence> {
    if rho >= config.num_subcarriers {
        return Err(Error::config(
            "start_subcarrier",
            format!("{rho} outside [0, {})", config.num_subcarriers),
        ));
    }
    if reps == 0 {
        return Err(Error::config("repetitions", "must be positive"));
    }
    let block = (rho / 12) * 12;
    let f = outer_hops(config.cell_id, reps);
    let n0 = rho % 12;
    let mut tilde = Vec::with_capacity(4 * reps);
    for i in 0..4 * reps {
        let v = if i == 0 {
            n0
        } else {
            let prev = tilde[i - 1];
            match i % 4 {
                0 => (n0 + f[i / 4]) % 12,
                1 | 3 => {
                    if prev % 2 == 0 {
                        prev + 1
                    } else {
                        prev - 1
                    }
                }
                _ => {
                    if prev < 6 {
                        prev + 6
                    } else {
                        prev - 6
                    }
                }
            }
        };
        tilde.push(v);
    }
    Ok(HopSequence {
        indices: tilde.into_iter().map(|t| block + t).collect(),
        subcarrier_offset: config.subcarrier_offset,
        start_subcarrier: rho,
    })
}

/// One unit-amplitude tone per symbol group: a 16-sample cyclic prefix and
/// five identical 64-sample symbols.
pub fn nprach_waveform(hop: &HopSequence) -> ComplexGrid {
    let num = NprachNumerology::format0(SampleRate::NPRACH);
    let mut out = Vec::with_capacity(hop.len() * num.group_len);
    for m in 0..hop.len() {
        let w = 2.0 * PI * hop.bin(m) as f64 / num.fft_size as f64;
        let table: Vec<C64> = (0..num.fft_size).map(|n| cis(w * n as f64)).collect();
        for n in 0..num.group_len {
            let idx = (n + num.fft_size - num.cp_len) % num.fft_size;
            out.push(table[idx]);
        }
    }
    ComplexGrid::single(SampleRate::NPRACH, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Twiddles;

    #[test]
    fn inner_hops_follow_pattern() {
        let cfg = NprachConfig {
            num_subcarriers: 48,
            ..Default::default()
        };
        for rho in 0..48 {
            let hop = nprach_hop_sequence(&cfg, rho, 8).unwrap();
            let h = hop.deltas();
            for r in 0..8 {
                assert_eq!(h[4 * r].abs(), 1);
                assert_eq!(h[4 * r + 1].abs(), 6);
                assert_eq!(h[4 * r + 2], -h[4 * r]);
                assert_eq!(h[4 * r + 3], -h[4 * r + 1]);
                let block = rho / 12;
                for i in 0..4 {
                    assert_eq!(hop.indices[4 * r + i] / 12, block);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_sized() {
        let cfg = NprachConfig::default();
        let a = nprach_hop_sequence(&cfg, 3, 4).unwrap();
        assert_eq!(a, nprach_hop_sequence(&cfg, 3, 4).unwrap());
        assert_eq!(nprach_hop_sequence(&cfg, 3, 1).unwrap().len(), 4);
        assert!(nprach_hop_sequence(&cfg, 12, 1).is_err());
        let other = NprachConfig {
            cell_id: 7,
            ..Default::default()
        };
        assert_ne!(a, nprach_hop_sequence(&other, 3, 4).unwrap());
    }

    #[test]
    fn waveform_structure() {
        let cfg = NprachConfig::default();
        let hop = nprach_hop_sequence(&cfg, 0, 1).unwrap();
        let w = nprach_waveform(&hop);
        assert_eq!(w.len(), 1344);
        let x = w.antenna(0);
        assert!(x.iter().all(|v| (v.norm() - 1.0).abs() < 1e-9));
        for n in 0..64 {
            assert!((x[336 - 64 + n] - x[336 - 128 + n]).norm() < 1e-9);
        }
        let tw = Twiddles::new(64);
        let sym = &x[16..80];
        let target = tw.bin(sym, hop.bin(0));
        assert!((target.norm() - 64.0).abs() < 1e-9);
        let leak: f64 = (0..64i64)
            .filter(|&b| b.rem_euclid(64) != hop.bin(0).rem_euclid(64))
            .map(|b| tw.bin(sym, b).norm())
            .sum();
        assert!(leak < 1e-9);
    }
}
