//! Modulation-dependent phase rotation of single-tone transmissions.
//!
//! Symbol `l̃` of a contiguous transmission carries
//! `φ(l̃) = ρ(l̃ mod 2) + φ̂(l̃)` where `ρ` is 0 on even symbols and π/2
//! (BPSK) or π/4 (QPSK) on odd ones, and `φ̂` accumulates
//! `2π·bin·N_cp(l̃)/N` so the tone stays phase-continuous across cyclic
//! prefixes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::numerology::{Modulation, NPUSCH_FFT};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRotation {
    pub phases: Vec<f64>,
}

fn rho(modulation: Modulation, l: usize) -> f64 {
    if l % 2 == 0 {
        0.0
    } else {
        match modulation {
            Modulation::Bpsk => FRAC_PI_2,
            Modulation::Qpsk => FRAC_PI_4,
        }
    }
}

/// Rotation of symbol `l_tilde` counted from the start of a contiguous
/// transmission that begins on symbol 0 of a slot.
pub fn rotation_phase(modulation: Modulation, l_tilde: usize, bin: i64) -> f64 {
    // Σ_{i=1..l̃} N_cp(i mod 7) with N_cp = 10 on symbol 0, 9 elsewhere.
    let cp_sum = 9 * l_tilde + l_tilde / 7;
    let turns = (bin * cp_sum as i64).rem_euclid(NPUSCH_FFT as i64) as f64 / NPUSCH_FFT as f64;
    rho(modulation, l_tilde) + 2.0 * PI * turns
}

pub fn phase_rotation_sequence(modulation: Modulation, symbol_count: usize, bin: i64) -> PhaseRotation {
    PhaseRotation {
        phases: (0..symbol_count)
            .map(|l| rotation_phase(modulation, l, bin))
            .collect(),
    }
}
