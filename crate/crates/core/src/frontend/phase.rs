use std::f64::consts::PI;

use crate::dsp::cis;
use crate::grid::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    pub fn half(self) -> f64 {
        match self {
            ShiftSign::Plus => 0.5,
            ShiftSign::Minus => -0.5,
        }
    }
}

/// Multiplies by `e^{j2π(±Δf/2)n/fs}`.
pub fn half_tone_shift(samples: &[C64], delta_f_hz: f64, rate_hz: f64, sign: ShiftSign) -> Vec<C64> {
    let w = 2.0 * PI * sign.half() * delta_f_hz / rate_hz;
    samples
        .iter()
        .enumerate()
        .map(|(n, &x)| x * cis(w * n as f64))
        .collect()
}

/// Position of the NB-IoT carrier inside a wideband front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InbandPlacement {
    /// Carrier separation in subcarriers, `f_o = N_0·Δf`.
    pub n0: i64,
    /// Samples from the start of the frequency shift to the symbol.
    pub m0: u64,
    /// Front-end transform size.
    pub n: usize,
    pub sign: ShiftSign,
}

/// `e^{-j2π(N_0 ± ½)M_0/N}`.
pub fn common_phase_correction(p: &InbandPlacement) -> C64 {
    let turns = (p.n0 as f64 + p.sign.half()) * p.m0 as f64 / p.n as f64;
    cis(-2.0 * PI * turns.fract())
}

/// Per-symbol corrections, advancing `M_0` by each symbol's CP + data length.
pub fn symbol_corrections(start: &InbandPlacement, symbol_lengths: &[usize]) -> Vec<C64> {
    let mut p = *start;
    symbol_lengths
        .iter()
        .map(|&len| {
            let c = common_phase_correction(&p);
            p.m0 += len as u64;
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{wrap_phase, FftPair};

    #[test]
    fn shift_round_trip_and_empty() {
        let x: Vec<C64> = (0..50).map(|i| cis(0.1 * i as f64)).collect();
        let y = half_tone_shift(&half_tone_shift(&x, 15e3, 1.92e6, ShiftSign::Plus), 15e3, 1.92e6, ShiftSign::Minus);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(half_tone_shift(&[], 15e3, 1.92e6, ShiftSign::Plus).is_empty());
    }

    #[test]
    fn half_tone_lands_on_integer_bin() {
        let n = 128;
        let x: Vec<C64> = (0..n).map(|i| cis(2.0 * PI * 5.5 * i as f64 / n as f64)).collect();
        let mut y = half_tone_shift(&x, 15e3, 1.92e6, ShiftSign::Minus);
        FftPair::new(n).forward(&mut y);
        let peak = (0..n).max_by(|&a, &b| y[a].norm().total_cmp(&y[b].norm())).unwrap();
        assert_eq!(peak, 5);
        assert!((y[5].norm() - n as f64).abs() < 1e-9);
    }

    #[test]
    fn correction_formula() {
        assert_eq!(
            common_phase_correction(&InbandPlacement { n0: 0, m0: 0, n: 2048, sign: ShiftSign::Plus }),
            C64::new(1.0, 0.0)
        );
        let c = common_phase_correction(&InbandPlacement { n0: 100, m0: 144, n: 2048, sign: ShiftSign::Plus });
        let want = wrap_phase(-2.0 * PI * 100.5 * 144.0 / 2048.0);
        assert!((c.arg() - want).abs() < 1e-12);
        assert!((c.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inband_loopback_restores_phase() {
        // NB-IoT symbols generated with a per-symbol time origin and moved to
        // (N_0 + ½)Δf by a mixer that runs continuously from sample 0.
        let n = 2048;
        let cp = [160usize, 144, 144, 144, 144, 144, 144];
        let (n0, k) = (100i64, 3i64);
        let data = cis(0.7);
        let start = InbandPlacement { n0, m0: 0, n, sign: ShiftSign::Plus };
        let lens: Vec<usize> = cp.iter().map(|c| c + n).collect();
        let corr = symbol_corrections(&start, &lens);
        let fft = FftPair::new(n);
        let mut m0 = 0usize;
        for (l, &c) in cp.iter().enumerate() {
            let f_nb = (k as f64) / n as f64;
            let f_mix = (n0 as f64 + 0.5) / n as f64;
            let mut rx: Vec<C64> = (0..c + n)
                .map(|i| {
                    let sym = data * cis(2.0 * PI * f_nb * (i as f64 - c as f64));
                    let wide = sym * cis(2.0 * PI * f_mix * (m0 + i) as f64);
                    // Receiver brings the carrier back to baseband with a
                    // per-symbol origin at the start of the symbol.
                    wide * cis(-2.0 * PI * f_mix * i as f64)
                })
                .collect::<Vec<_>>()[c..]
                .to_vec();
            fft.forward(&mut rx);
            let raw = rx[k as usize] / n as f64;
            let fixed = raw * corr[l];
            let err = wrap_phase(fixed.arg() - data.arg()).abs().to_degrees();
            assert!(err < 0.5, "symbol {l}: {err} deg");
            m0 += c + n;
        }
    }
}
