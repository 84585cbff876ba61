//! Block-level estimators shared by both NPUSCH receivers.

use std::f64::consts::PI;
use std::ops::Range;

use crate::dsp::{cis, quadratic_peak, FftPair, Twiddles};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{Modulation, SampleRate, NPUSCH_FFT, SLOT_SAMPLES, SYMBOLS_PER_SLOT};
use crate::tx::NpuschLayout;

/// Floor applied to noise estimates.
pub const SIGMA2_FLOOR: f64 = 1e-12;

/// Assigned tones of every transmitted symbol, normalized so a unit-amplitude
/// transmitted tone reads back as one.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    pub bins: Vec<i64>,
    pub slots: usize,
    /// `[rx][(slot·7 + l)·tones + k]`
    pub y: Vec<Vec<C64>>,
    /// First sample of the transform window of `(slot, l)`.
    pub sample: Vec<usize>,
}

impl FreqGrid {
    pub fn tones(&self) -> usize {
        self.bins.len()
    }

    pub fn n_rx(&self) -> usize {
        self.y.len()
    }

    fn idx(&self, s: usize, l: usize) -> usize {
        (s * SYMBOLS_PER_SLOT + l) * self.tones()
    }

    pub fn symbol(&self, rx: usize, s: usize, l: usize) -> &[C64] {
        let i = self.idx(s, l);
        &self.y[rx][i..i + self.tones()]
    }

    pub fn symbol_mut(&mut self, rx: usize, s: usize, l: usize) -> &mut [C64] {
        let i = self.idx(s, l);
        let n = self.tones();
        &mut self.y[rx][i..i + n]
    }

    pub fn sample_index(&self, s: usize, l: usize) -> usize {
        self.sample[s * SYMBOLS_PER_SLOT + l]
    }
}

/// Strips cyclic prefixes and evaluates the assigned tones of every symbol.
pub fn grid_demod(wave: &ComplexGrid, layout: &NpuschLayout, bins: &[i64]) -> Result<FreqGrid> {
    if wave.rate != SampleRate::NPUSCH {
        return Err(Error::Numerology(format!("NPUSCH receiver expects 1.92 MHz, got {}", wave.rate.hz())));
    }
    if wave.len() < layout.total_samples {
        return Err(Error::Length {
            expected: layout.total_samples,
            actual: wave.len(),
        });
    }
    let tw = &Twiddles::new(NPUSCH_FFT);
    let scale = 1.0 / NPUSCH_FFT as f64;
    let sample: Vec<usize> = (0..layout.slots.len())
        .flat_map(|s| (0..SYMBOLS_PER_SLOT).map(move |l| (s, l)))
        .map(|(s, l)| layout.symbol_sample(s, l))
        .collect();
    let y = wave
        .antennas
        .iter()
        .map(|a| {
            sample
                .iter()
                .flat_map(|&n| {
                    let w = &a[n..n + NPUSCH_FFT];
                    bins.iter().map(move |&b| tw.bin(w, b) * scale).collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    Ok(FreqGrid {
        bins: bins.to_vec(),
        slots: layout.slots.len(),
        y,
        sample,
    })
}

/// Pilot observations of a block: `h[rx][slot][k] = r*·Y`, averaged over the
/// pilot symbols of each slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObs {
    pub h: Vec<Vec<Vec<C64>>>,
    /// Phase reference sample of each slot's (averaged) pilot.
    pub sample: Vec<usize>,
}

/// `reference` is `[slot][pilot symbol][tone]` over all transmitted slots.
pub fn demod_pilots(grid: &FreqGrid, slots: Range<usize>, pilot_l: &[usize], reference: &[Vec<Vec<C64>>]) -> PilotObs {
    let n = grid.tones();
    let h = (0..grid.n_rx())
        .map(|rx| {
            slots
                .clone()
                .map(|s| {
                    let mut acc = vec![C64::new(0.0, 0.0); n];
                    for (j, &l) in pilot_l.iter().enumerate() {
                        for (k, (a, &y)) in acc.iter_mut().zip(grid.symbol(rx, s, l)).enumerate() {
                            *a += reference[s][j][k].conj() * y;
                        }
                    }
                    acc.iter_mut().for_each(|v| *v /= pilot_l.len() as f64);
                    acc
                })
                .collect()
        })
        .collect();
    let mid = pilot_l[pilot_l.len() / 2];
    PilotObs {
        h,
        sample: slots.map(|s| grid.sample_index(s, mid)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoEstimate {
    /// Timing offset in samples.
    pub delta_t: f64,
    /// Unit phasor of the accumulated adjacent-tone product.
    pub phasor: C64,
}

/// Timing offset from the phase step between adjacent pilot tones.
pub fn estimate_sto(obs: &PilotObs) -> Result<StoEstimate> {
    let mut q = C64::new(0.0, 0.0);
    for rx in &obs.h {
        for slot in rx {
            if slot.len() < 2 {
                return Err(Error::config("tones", "timing estimation needs more than one tone"));
            }
            for w in slot.windows(2) {
                q += w[0] * w[1].conj();
            }
        }
    }
    if !(q.norm() > 0.0) {
        return Err(Error::Degenerate("zero-energy pilots"));
    }
    Ok(StoEstimate {
        delta_t: q.arg() * NPUSCH_FFT as f64 / (2.0 * PI),
        phasor: q / q.norm(),
    })
}

/// Removes the timing ramp from every symbol of `slots`.
pub fn correct_sto(grid: &mut FreqGrid, slots: Range<usize>, sto: &StoEstimate) {
    let fix: Vec<C64> = grid
        .bins
        .iter()
        .map(|&b| cis(2.0 * PI * b as f64 * sto.delta_t / NPUSCH_FFT as f64))
        .collect();
    for rx in 0..grid.n_rx() {
        for s in slots.clone() {
            for l in 0..SYMBOLS_PER_SLOT {
                for (v, f) in grid.symbol_mut(rx, s, l).iter_mut().zip(&fix) {
                    *v *= f;
                }
            }
        }
    }
}

/// Tone average of each slot's pilots, `[rx][slot]`.
pub fn smooth_freq(obs: &PilotObs) -> Vec<Vec<C64>> {
    obs.h
        .iter()
        .map(|rx| rx.iter().map(|k| k.iter().sum::<C64>() / k.len() as f64).collect())
        .collect()
}

pub const SLOT_RATE_HZ: f64 = crate::numerology::NPUSCH_RATE_HZ as f64 / SLOT_SAMPLES as f64;

/// Frequency offset from the slot-rate pilot sequence of a block:
/// zero-padded `n_fft`-point transform, power summed over antennas, peak
/// searched within `±max_hz` and refined quadratically.
pub fn estimate_cfo_block(smoothed: &[Vec<C64>], fft: &FftPair, max_hz: f64) -> Result<f64> {
    let len = smoothed.first().map_or(0, Vec::len);
    if len < 2 {
        return Err(Error::Degenerate("frequency estimation needs two pilot slots"));
    }
    let n = fft.n;
    let mut power = vec![0.0; n];
    for rx in smoothed {
        let mut buf = vec![C64::new(0.0, 0.0); n];
        buf[..rx.len()].copy_from_slice(rx);
        fft.forward(&mut buf);
        for (p, v) in power.iter_mut().zip(&buf) {
            *p += v.norm_sqr();
        }
    }
    let step = SLOT_RATE_HZ / n as f64;
    let reach = ((max_hz / step).floor() as i64).min(n as i64 / 2 - 1);
    let at = |k: i64| power[k.rem_euclid(n as i64) as usize];
    let mut best = 0i64;
    for k in -reach..=reach {
        if at(k) > at(best) || (at(k) == at(best) && k.abs() < best.abs()) {
            best = k;
        }
    }
    let (p, _) = quadratic_peak(at(best - 1), at(best), at(best + 1));
    Ok((best as f64 + p) * step)
}

fn derotation(cfo_hz: f64, sample: usize) -> C64 {
    cis(-2.0 * PI * cfo_hz * sample as f64 / SampleRate::NPUSCH.as_f64())
}

/// Offset-corrected time average of the smoothed pilots, per antenna.
pub fn estimate_channel(smoothed: &[Vec<C64>], sample: &[usize], cfo_hz: f64) -> Vec<C64> {
    smoothed
        .iter()
        .map(|rx| {
            rx.iter().zip(sample).map(|(&h, &n)| h * derotation(cfo_hz, n)).sum::<C64>() / rx.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Per-tone pilot deviations.
    PerTone,
    /// Deviations of the tone-averaged pilots, scaled back to one tone.
    FreqAveraged,
}

impl NoiseMode {
    /// Per-tone unless the block has fewer than 32 pilot observations.
    pub fn for_block(tones: usize, slots: usize) -> Self {
        if tones * slots < 32 && tones > 1 {
            NoiseMode::FreqAveraged
        } else {
            NoiseMode::PerTone
        }
    }
}

/// Per-resource-element noise variance from pilot deviations around `h_b`.
pub fn estimate_noise(obs: &PilotObs, smoothed: &[Vec<C64>], h_b: &[C64], cfo_hz: f64, mode: NoiseMode) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (rx, &hb) in h_b.iter().enumerate() {
        for (s, &n) in obs.sample.iter().enumerate() {
            let rot = derotation(cfo_hz, n);
            match mode {
                NoiseMode::PerTone => {
                    for &h in &obs.h[rx][s] {
                        acc += (h * rot - hb).norm_sqr();
                        count += 1;
                    }
                }
                NoiseMode::FreqAveraged => {
                    acc += (smoothed[rx][s] * rot - hb).norm_sqr() * obs.h[rx][s].len() as f64;
                    count += 1;
                }
            }
        }
    }
    (acc / count.max(1) as f64).max(SIGMA2_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimate {
    pub slots: Range<usize>,
    pub sto: Option<StoEstimate>,
    pub cfo_hz: f64,
    pub h: Vec<C64>,
    pub sigma2: f64,
    /// MMSE taps `ĥ*/σ²` per antenna.
    pub w: Vec<C64>,
    pub snr: f64,
}

impl BlockEstimate {
    pub fn new(slots: Range<usize>, sto: Option<StoEstimate>, cfo_hz: f64, h: Vec<C64>, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Degenerate("non-positive noise variance"));
        }
        let w: Vec<C64> = h.iter().map(|v| v.conj() / sigma2).collect();
        let snr = block_snr(&w, &h);
        Ok(BlockEstimate {
            slots,
            sto,
            cfo_hz,
            h,
            sigma2,
            w,
            snr,
        })
    }
}

/// `Σ_rx w·ĥ`, real by construction.
pub fn block_snr(w: &[C64], h: &[C64]) -> f64 {
    w.iter().zip(h).map(|(a, b)| (a * b).re).sum()
}

/// Offset-corrected, antenna-combined tones of symbol `(s, l)`.
pub fn equalize(grid: &FreqGrid, s: usize, l: usize, est: &BlockEstimate) -> Vec<C64> {
    let rot = derotation(est.cfo_hz, grid.sample_index(s, l));
    let mut e = vec![C64::new(0.0, 0.0); grid.tones()];
    for (rx, &w) in est.w.iter().enumerate() {
        for (o, &y) in e.iter_mut().zip(grid.symbol(rx, s, l)) {
            *o += w * y * rot;
        }
    }
    e
}

/// Inverse of the transmit precoder; single tone passes through.
pub fn despread_idft(e: &[C64]) -> Vec<C64> {
    if e.len() == 1 {
        e.to_vec()
    } else {
        crate::dsp::unitary_dft(e, true)
    }
}

/// LLRs (positive favours bit 0) of MMSE-combined symbols `e = ĥ*y/σ²`.
pub fn compute_llrs(e: &[C64], modulation: Modulation) -> Vec<f64> {
    let k = 2.0 * std::f64::consts::SQRT_2;
    match modulation {
        Modulation::Bpsk => e.iter().map(|v| -k * (v.re + v.im)).collect(),
        Modulation::Qpsk => e.iter().flat_map(|v| [-k * v.re, -k * v.im]).collect(),
    }
}
