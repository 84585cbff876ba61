use std::f64::consts::FRAC_1_SQRT_2;

use crate::grid::C64;
use crate::numerology::Modulation;

/// Constellation mapping; bit 0 lands on the negative axis of its component.
///
/// BPSK places both components on the same axis, `(2b−1)(1+j)/√2`; QPSK maps
/// bit pairs to `((2b0−1) + j(2b1−1))/√2`.
pub fn map_bits(bits: &[u8], modulation: Modulation) -> Vec<C64> {
    let s = |b: u8| (2.0 * b as f64 - 1.0) * FRAC_1_SQRT_2;
    match modulation {
        Modulation::Bpsk => bits.iter().map(|&b| C64::new(s(b), s(b))).collect(),
        Modulation::Qpsk => bits.chunks(2).map(|p| C64::new(s(p[0]), s(p[1]))).collect(),
    }
}
