//! Demodulation reference symbols.
//!
//! Any unit-modulus sequence works as long as transmitter and receiver use
//! the same [`PilotSource`]. The default uses a Gold-sequence QPSK pattern on
//! single-tone allocations and a quadratic-phase (Zadoff-Chu style) base
//! sequence across the tones of multi-tone allocations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::dsp::cis;
use crate::grid::C64;
use crate::sequence::gold;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotFormat {
    F1,
    F2,
}

const F1_PILOTS: [usize; 1] = [3];
const F2_PILOTS: [usize; 3] = [2, 3, 4];

/// Pilot symbol indices within a slot.
pub fn pilot_symbols(format: PilotFormat) -> &'static [usize] {
    match format {
        PilotFormat::F1 => &F1_PILOTS,
        PilotFormat::F2 => &F2_PILOTS,
    }
}

/// Data symbol indices within a slot.
pub fn data_symbols(format: PilotFormat) -> Vec<usize> {
    (0..7).filter(|l| !pilot_symbols(format).contains(l)).collect()
}

pub trait PilotSource: Send + Sync {
    /// Pilot tones for `slots` transmitted slots: indexed
    /// `[slot][pilot symbol][tone]`.
    fn generate(&self, format: PilotFormat, tones: usize, slots: usize) -> Vec<Vec<Vec<C64>>>;
}

#[derive(Debug, Clone, Copy)]
pub struct DefaultPilots {
    pub c_init: u32,
    /// Root of the multi-tone base sequence.
    pub root: usize,
}

impl Default for DefaultPilots {
    fn default() -> Self {
        DefaultPilots { c_init: 35, root: 1 }
    }
}

impl PilotSource for DefaultPilots {
    fn generate(&self, format: PilotFormat, tones: usize, slots: usize) -> Vec<Vec<Vec<C64>>> {
        let per_slot = pilot_symbols(format).len();
        if tones == 1 {
            let c = gold(self.c_init, slots * per_slot);
            let base = C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
            (0..slots)
                .map(|s| {
                    (0..per_slot)
                        .map(|j| vec![base * (1.0 - 2.0 * c[s * per_slot + j] as f64)])
                        .collect()
                })
                .collect()
        } else {
            let m = tones as f64;
            let q = self.root as f64;
            let seq: Vec<C64> = (0..tones)
                .map(|k| cis(PI * q * (k * (k + 1)) as f64 / m))
                .collect();
            vec![vec![seq; per_slot]; slots]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_modulus() {
        assert_eq!(pilot_symbols(PilotFormat::F1).len(), 1);
        assert_eq!(pilot_symbols(PilotFormat::F2).len(), 3);
        assert_eq!(data_symbols(PilotFormat::F2), vec![0, 1, 5, 6]);
        let p = DefaultPilots::default();
        for tones in [1, 3, 6, 12] {
            for format in [PilotFormat::F1, PilotFormat::F2] {
                let g = p.generate(format, tones, 20);
                assert_eq!(g.len(), 20);
                for slot in &g {
                    assert_eq!(slot.len(), pilot_symbols(format).len());
                    for sym in slot {
                        assert_eq!(sym.len(), tones);
                        assert!(sym.iter().all(|v| (v.norm_sqr() - 1.0).abs() < 1e-12));
                    }
                }
            }
        }
    }
}
