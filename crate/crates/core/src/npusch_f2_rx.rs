//! NPUSCH format 2 (ACK/NACK) receiver.
//!
//! Every symbol is stripped of its scrambling cover and phase rotation, so
//! pilots read `h` and data reads `h·u` with `u = ±1`. The three pilots of a
//! slot are averaged into one observation and handed to the format 1 block
//! estimators; noise comes from differences of adjacent data symbols.

use std::ops::Range;

use rayon::prelude::*;

use crate::channel::complex_noise;
use crate::dsp::{cis, FftPair};
use crate::error::{Error, Result};
use crate::frontend::segment_blocks;
use crate::grid::{ComplexGrid, C64};
use crate::npusch_f1_rx::estimate::SIGMA2_FLOOR;
use crate::npusch_f1_rx::{estimate_cfo_block, estimate_channel, grid_demod, smooth_freq, BlockEstimate, PilotObs};
use crate::numerology::{Modulation, NpuschF2Config, SampleRate, SYMBOLS_PER_SLOT};
use crate::rng::trial_rng;
use crate::threshold::Threshold;
use crate::tx::pilots::data_symbols;
use crate::tx::{f2_cover, pilot_reference, pilot_symbols, rotation_phase, tone_bin, DefaultPilots, NpuschLayout, PilotFormat, PilotSource};

pub type F2Threshold = Threshold;

/// Adjacent data symbol pairs of a slot.
const DATA_PAIRS: [(usize, usize); 2] = [(0, 1), (5, 6)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2Verdict {
    Ack,
    Nack,
    Dtx,
}

/// Derotated symbols `Z[rx][slot][l]` with their transform window samples.
#[derive(Debug, Clone, PartialEq)]
pub struct F2Accumulators {
    pub z: Vec<Vec<[C64; SYMBOLS_PER_SLOT]>>,
    pub sample: Vec<[usize; SYMBOLS_PER_SLOT]>,
}

impl F2Accumulators {
    pub fn n_rx(&self) -> usize {
        self.z.len()
    }

    pub fn slots(&self) -> usize {
        self.sample.len()
    }

    /// Pilot observation of each slot: the mean of its three pilots,
    /// referenced to the middle pilot.
    pub fn pilot_obs(&self, slots: Range<usize>) -> PilotObs {
        let pl = pilot_symbols(PilotFormat::F2);
        let h = self
            .z
            .iter()
            .map(|rx| {
                slots
                    .clone()
                    .map(|s| vec![pl.iter().map(|&l| rx[s][l]).sum::<C64>() / pl.len() as f64])
                    .collect()
            })
            .collect();
        PilotObs {
            h,
            sample: slots.map(|s| self.sample[s][pl[pl.len() / 2]]).collect(),
        }
    }
}

/// Noise variance from differences of adjacent data symbols, which carry the
/// same `h·u` and cancel to noise alone.
pub fn estimate_noise_f2(acc: &F2Accumulators, slots: Range<usize>) -> f64 {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for rx in &acc.z {
        for s in slots.clone() {
            for &(a, b) in &DATA_PAIRS {
                sum += (rx[s][a] - rx[s][b]).norm_sqr();
                pairs += 1;
            }
        }
    }
    // Each difference carries twice the per-symbol variance.
    (sum / (2 * pairs.max(1)) as f64).max(SIGMA2_FLOOR)
}

fn derotation(cfo_hz: f64, sample: usize) -> C64 {
    cis(-2.0 * std::f64::consts::PI * cfo_hz * sample as f64 / SampleRate::NPUSCH.as_f64())
}

/// Decision metric `J(u)` for `u = +1` and `u = −1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F2Metric {
    pub ack: f64,
    pub nack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F2Report {
    pub verdict: F2Verdict,
    /// Sum of the block SNRs, linear.
    pub snr_t: f64,
    pub metric: F2Metric,
}

/// `ACK` iff `J(+1) > J(−1)`; ties go to `NACK`. `DTX` iff `snr_t ≤ ε`.
pub fn decide(metric: F2Metric, snr_t: f64, epsilon: f64) -> F2Report {
    let verdict = if snr_t <= epsilon {
        F2Verdict::Dtx
    } else if metric.ack > metric.nack {
        F2Verdict::Ack
    } else {
        F2Verdict::Nack
    };
    F2Report { verdict, snr_t, metric }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F2Options {
    pub block_ms: usize,
    pub cfo_fft_size: usize,
    pub max_cfo_hz: f64,
    /// Decide on `Re(Σ u·Z^d·w)` alone; the taps still carry the pilot
    /// channel estimate, which resolves the sign.
    pub data_only: bool,
}

impl Default for F2Options {
    fn default() -> Self {
        F2Options {
            block_ms: 4,
            cfo_fft_size: 256,
            max_cfo_hz: 250.0,
            data_only: false,
        }
    }
}

pub struct F2Receiver {
    pub config: NpuschF2Config,
    pub options: F2Options,
    layout: NpuschLayout,
    bin: i64,
    pilots: Vec<Vec<Vec<C64>>>,
    /// Conjugate data derotation `[slot][l]`, zero on pilot symbols.
    data_ref: Vec<[C64; SYMBOLS_PER_SLOT]>,
    fft: FftPair,
}

impl F2Receiver {
    pub fn new(config: NpuschF2Config) -> Result<Self> {
        Self::with_pilots(config, &DefaultPilots::default())
    }

    pub fn with_pilots(config: NpuschF2Config, source: &dyn PilotSource) -> Result<Self> {
        let layout = NpuschLayout::f2(&config)?;
        let bin = tone_bin(config.tone);
        let pilots = pilot_reference(&layout, PilotFormat::F2, &[bin], Some(Modulation::Bpsk), source);
        let data_l = data_symbols(PilotFormat::F2);
        let covers: Vec<Vec<C64>> = (0..layout.cycles)
            .map(|c| f2_cover(config.rnti, layout.cycle_start_slot(c)))
            .collect();
        let data_ref = layout
            .slots
            .iter()
            .map(|info| {
                let mut r = [C64::new(0.0, 0.0); SYMBOLS_PER_SLOT];
                for (d, &l) in data_l.iter().enumerate() {
                    let t = covers[info.cycle][info.cw_slot * data_l.len() + d];
                    let phi = rotation_phase(Modulation::Bpsk, info.symbol_counter + l, bin);
                    r[l] = (t * cis(phi)).conj();
                }
                r
            })
            .collect();
        let options = F2Options::default();
        Ok(F2Receiver {
            fft: FftPair::new(options.cfo_fft_size),
            config,
            options,
            layout,
            bin,
            pilots,
            data_ref,
        })
    }

    pub fn with_options(mut self, options: F2Options) -> Self {
        self.fft = FftPair::new(options.cfo_fft_size);
        self.options = options;
        self
    }

    pub fn layout(&self) -> &NpuschLayout {
        &self.layout
    }

    /// Processing blocks as transmitted-slot ranges.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let ms: Vec<u64> = self.layout.slots.iter().map(|s| s.subframe()).collect();
        segment_blocks(&ms, 2 * self.options.block_ms)
    }

    /// Removes scrambling and phase rotation from every symbol.
    pub fn derotate(&self, wave: &ComplexGrid) -> Result<F2Accumulators> {
        let grid = grid_demod(wave, &self.layout, &[self.bin])?;
        let pl = pilot_symbols(PilotFormat::F2);
        let z = (0..grid.n_rx())
            .map(|rx| {
                (0..grid.slots)
                    .map(|s| {
                        let mut out = [C64::new(0.0, 0.0); SYMBOLS_PER_SLOT];
                        for (l, o) in out.iter_mut().enumerate() {
                            let y = grid.symbol(rx, s, l)[0];
                            *o = match pl.iter().position(|&p| p == l) {
                                Some(j) => y * self.pilots[s][j][0].conj(),
                                None => y * self.data_ref[s][l],
                            };
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let sample = (0..grid.slots)
            .map(|s| std::array::from_fn(|l| grid.sample_index(s, l)))
            .collect();
        Ok(F2Accumulators { z, sample })
    }

    /// Format 1 offset and channel estimators over the averaged pilots, with
    /// the data-difference noise estimate.
    pub fn estimate_blocks(&self, acc: &F2Accumulators) -> Result<Vec<BlockEstimate>> {
        self.blocks()
            .into_iter()
            .map(|range| {
                let obs = acc.pilot_obs(range.clone());
                let smoothed = smooth_freq(&obs);
                let cfo = estimate_cfo_block(&smoothed, &self.fft, self.options.max_cfo_hz)?;
                let h = estimate_channel(&smoothed, &obs.sample, cfo);
                let sigma2 = estimate_noise_f2(acc, range.clone());
                BlockEstimate::new(range, None, cfo, h, sigma2)
            })
            .collect()
    }

    /// `J_r(u) = Σ (Z^p + u·Z^d)·w·e^{−j2πξ̂n}` with each symbol corrected at
    /// its own sample, and `J(u) = Σ_r |J_r(u)|²`.
    pub fn metric(&self, acc: &F2Accumulators, blocks: &[BlockEstimate]) -> F2Metric {
        let pl = pilot_symbols(PilotFormat::F2);
        let mut m = F2Metric { ack: 0.0, nack: 0.0 };
        for (rx, zr) in acc.z.iter().enumerate() {
            let mut p = C64::new(0.0, 0.0);
            let mut d = C64::new(0.0, 0.0);
            for b in blocks {
                let w = b.w[rx];
                for s in b.slots.clone() {
                    for l in 0..SYMBOLS_PER_SLOT {
                        let v = zr[s][l] * w * derotation(b.cfo_hz, acc.sample[s][l]);
                        if pl.contains(&l) {
                            p += v;
                        } else {
                            d += v;
                        }
                    }
                }
            }
            if self.options.data_only {
                m.ack += d.re;
                m.nack -= d.re;
            } else {
                m.ack += (p + d).norm_sqr();
                m.nack += (p - d).norm_sqr();
            }
        }
        m
    }

    /// Accumulators, block estimates, metric and `SNR_t`.
    pub fn analyse(&self, wave: &ComplexGrid) -> Result<(F2Metric, f64)> {
        let acc = self.derotate(wave)?;
        let blocks = self.estimate_blocks(&acc)?;
        let snr_t = blocks.iter().map(|b| b.snr).sum();
        Ok((self.metric(&acc, &blocks), snr_t))
    }

    pub fn receive(&self, wave: &ComplexGrid, epsilon: f64) -> Result<F2Report> {
        let (metric, snr_t) = self.analyse(wave)?;
        Ok(decide(metric, snr_t, epsilon))
    }

    /// As [`Self::receive`], also returning the block estimates.
    pub fn receive_with_blocks(&self, wave: &ComplexGrid, epsilon: f64) -> Result<(F2Report, Vec<BlockEstimate>)> {
        let acc = self.derotate(wave)?;
        let blocks = self.estimate_blocks(&acc)?;
        let snr_t = blocks.iter().map(|b| b.snr).sum();
        Ok((decide(self.metric(&acc, &blocks), snr_t, epsilon), blocks))
    }
}

/// Noise-only calibration statistic: `SNR_t` when the metric favours ACK,
/// zero otherwise, so its upper quantile sets the DTX→ACK rate directly.
pub fn dtx_statistics(rx: &F2Receiver, n_rx: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let len = rx.layout().total_samples;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let antennas = (0..n_rx).map(|_| complex_noise(&mut rng, 1.0, len)).collect();
            let (m, snr_t) = rx.analyse(&ComplexGrid::time(SampleRate::NPUSCH, antennas))?;
            Ok(if m.ack > m.nack { snr_t } else { 0.0 })
        })
        .collect()
}

/// `ε` at index `⌈0.99·trials⌉` of the sorted noise-only statistic, which
/// holds DTX→ACK to 1%.
pub fn calibrate_dtx_threshold(rx: &F2Receiver, n_rx: usize, trials: usize, seed: u64) -> Result<F2Threshold> {
    if trials < 1000 {
        return Err(Error::InsufficientTrials {
            needed: 1000,
            got: trials,
        });
    }
    let mut stats = dtx_statistics(rx, n_rx, trials, seed)?;
    stats.sort_by(f64::total_cmp);
    let idx = ((0.99 * trials as f64).ceil() as usize).min(trials - 1);
    Ok(Threshold {
        reps: rx.config.repetitions,
        n_rx,
        epsilon: stats[idx],
        trials,
        seed,
    })
}
