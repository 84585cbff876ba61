//! NPRACH format 0 receiver.
//!
//! Per start subcarrier hypothesis the receiver
//! 1. demodulates every symbol group at its hopped tone,
//! 2. forms differentials between consecutive groups of a repetition,
//! 3. estimates the frequency offset from the ±1 hops in a way that cancels
//!    the delay-dependent terms, and removes it,
//! 4. folds all hops onto the fixed pattern (−1, +6, +1, −6), places them in
//!    an `N_τ`-point vector and reads the delay off an FFT peak,
//! 5. normalizes the peak by the squared noise level and compares against a
//!    calibrated threshold.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::channel::complex_noise;
use crate::dsp::{cis, quadratic_peak, Twiddles};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{NprachConfig, NprachNumerology, SampleRate};
use crate::rng::trial_rng;
use crate::threshold::{empirical_quantile, Threshold};
use crate::tx::{nprach_hop_sequence, HopSequence};

pub type NprachThreshold = Threshold;

/// Hop pattern onto which every repetition is folded.
const ALPHA: [i64; 4] = [-1, 6, 1, -6];
/// Repetitions combined coherently before non-coherent accumulation.
const COHERENT_REPS: usize = 64;
/// Extra delay allowed beyond the cyclic prefix, in seconds.
const TIMING_MARGIN_S: f64 = 7.0 * 16.0 / 30.72e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGroupObs {
    /// `[rx][group]`: sum of the five symbol transforms.
    pub y: Vec<Vec<C64>>,
    /// `[rx][group]`: `|Y0 − Y1|² + |Y3 − Y4|²`.
    pub noise: Vec<Vec<f64>>,
}

impl SymbolGroupObs {
    pub fn n_rx(&self) -> usize {
        self.y.len()
    }

    pub fn mean_noise(&self) -> f64 {
        let n: usize = self.noise.iter().map(Vec::len).sum();
        self.noise.iter().flatten().sum::<f64>() / n as f64
    }
}

/// Demodulates the groups of `hop` from a 240 ksps grid whose first sample is
/// the nominal preamble start.
pub fn demod_symbol_groups(wave: &ComplexGrid, hop: &HopSequence) -> Result<SymbolGroupObs> {
    if wave.rate != SampleRate::NPRACH {
        return Err(Error::Numerology(format!("NPRACH receiver expects 240 kHz, got {}", wave.rate.hz())));
    }
    let num = NprachNumerology::format0(SampleRate::NPRACH);
    let needed = hop.len() * num.group_len;
    if wave.len() < needed {
        return Err(Error::Length {
            expected: needed,
            actual: wave.len(),
        });
    }
    let tw = Twiddles::new(num.fft_size);
    let mut y = Vec::with_capacity(wave.n_antennas());
    let mut noise = Vec::with_capacity(wave.n_antennas());
    for a in &wave.antennas {
        let mut ya = Vec::with_capacity(hop.len());
        let mut na = Vec::with_capacity(hop.len());
        for m in 0..hop.len() {
            let base = m * num.group_len + num.cp_len;
            let s: Vec<C64> = (0..num.symbols_per_group)
                .map(|i| {
                    let o = base + i * num.fft_size;
                    tw.bin(&a[o..o + num.fft_size], hop.bin(m))
                })
                .collect();
            ya.push(s.iter().sum());
            na.push((s[0] - s[1]).norm_sqr() + (s[3] - s[4]).norm_sqr());
        }
        y.push(ya);
        noise.push(na);
    }
    Ok(SymbolGroupObs { y, noise })
}

/// Differentials `Z_m = Y_m·Y*_{next}` with the next group taken cyclically
/// inside each repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialSet {
    /// `[rx][group]`
    pub z: Vec<Vec<C64>>,
    /// Hop `H_m` from group `m` to its successor.
    pub hops: Vec<i64>,
}

pub fn differentials(obs: &SymbolGroupObs, hop: &HopSequence) -> DifferentialSet {
    let z = obs
        .y
        .iter()
        .map(|y| {
            (0..y.len())
                .map(|m| {
                    let next = 4 * (m / 4) + (m % 4 + 1) % 4;
                    y[m] * y[next].conj()
                })
                .collect()
        })
        .collect();
    DifferentialSet { z, hops: hop.deltas() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CfoMode {
    #[default]
    Full,
    /// Uses only the cosine-weighted sum; adequate when the offset is small.
    W1Only,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoEstimate {
    /// Offset in cycles per sample.
    pub xi: f64,
    pub hz: f64,
    /// `e^{j2πξ̂N_g}`
    pub phasor: C64,
    pub w1: C64,
    pub w2: C64,
    pub w: C64,
}

pub fn estimate_cfo(diff: &DifferentialSet, mode: CfoMode) -> Result<CfoEstimate> {
    let num = NprachNumerology::format0(SampleRate::NPRACH);
    let mut w1 = C64::new(0.0, 0.0);
    let mut w2 = C64::new(0.0, 0.0);
    for z in &diff.z {
        for r in 0..z.len() / 4 {
            let (z0, z2) = (z[4 * r], z[4 * r + 2]);
            w1 += z0 + z2;
            w2 += if diff.hops[4 * r] > 0 { z0 - z2 } else { z2 - z0 };
        }
    }
    let w = match mode {
        CfoMode::Full => w1 * w1.norm() - C64::i() * w2 * w2.norm(),
        CfoMode::W1Only => w1,
    };
    if !(w.norm() > 0.0) {
        return Err(Error::Degenerate("zero-energy NPRACH differentials"));
    }
    let xi = -w.arg() / (2.0 * PI * num.group_len as f64);
    Ok(CfoEstimate {
        xi,
        hz: xi * SampleRate::NPRACH.as_f64(),
        phasor: cis(2.0 * PI * xi * num.group_len as f64),
        w1,
        w2,
        w,
    })
}

/// Removes the offset from each differential; the wrap-around differential
/// of a repetition spans three groups the other way.
pub fn correct_cfo(diff: &DifferentialSet, phasor: C64) -> Vec<Vec<C64>> {
    let back = (phasor.conj()).powi(3);
    diff.z
        .iter()
        .map(|z| {
            z.iter()
                .enumerate()
                .map(|(m, &v)| if m % 4 == 3 { v * back } else { v * phasor })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtdEstimate {
    pub tau_s: f64,
    pub tau_us: f64,
    pub peak_bin: usize,
    pub frac: f64,
    /// Interpolated normalized peak.
    pub g_star: f64,
    /// Normalized spectrum with bins outside the search window zeroed.
    pub spectrum: Vec<f64>,
}

/// Largest admissible delay bin for an `n_tau`-point search.
pub fn max_delay_bin(n_tau: usize) -> usize {
    let num = NprachNumerology::format0(SampleRate::NPRACH);
    let cp_s = num.cp_len as f64 / SampleRate::NPRACH.as_f64();
    ((cp_s + TIMING_MARGIN_S) * n_tau as f64 * num.subcarrier_spacing_hz as f64).floor() as usize
}

/// Delay estimate from CFO-corrected differentials `v` (`[rx][group]`).
pub fn rtd_estimate(v: &[Vec<C64>], hops: &[i64], n_tau: usize) -> Result<RtdEstimate> {
    if n_tau < 16 || !n_tau.is_power_of_two() {
        return Err(Error::config("n_tau", "must be a power of two of at least 16"));
    }
    let fft = FftPlanner::new().plan_fft_forward(n_tau);
    let groups = v.first().map_or(0, Vec::len);
    let reps = groups / 4;
    let block = reps.min(COHERENT_REPS);
    let n_blocks = reps.div_ceil(block.max(1));
    let mut g = vec![0.0; n_tau];
    for va in v {
        for b in 0..n_blocks {
            let mut t = [C64::new(0.0, 0.0); 4];
            for r in b * block..((b + 1) * block).min(reps) {
                for (l, tl) in t.iter_mut().enumerate() {
                    let m = 4 * r + l;
                    *tl += if hops[m] == ALPHA[l] { va[m] } else { va[m].conj() };
                }
            }
            let mut f = vec![C64::new(0.0, 0.0); n_tau];
            for (l, tl) in t.iter().enumerate() {
                f[ALPHA[l].rem_euclid(n_tau as i64) as usize] += tl;
            }
            fft.process(&mut f);
            for (gv, q) in g.iter_mut().zip(&f) {
                *gv += q.norm_sqr();
            }
        }
    }
    let norm = (v.len() * n_blocks) as f64 * (4 * block) as f64 * (4 * block) as f64;
    g.iter_mut().for_each(|x| *x /= norm);
    let hi = max_delay_bin(n_tau).min(n_tau - 1);
    let mut idx = 0;
    for k in 1..=hi {
        if g[k] > g[idx] {
            idx = k;
        }
    }
    if !(g[idx] > 0.0) {
        return Err(Error::Degenerate("empty delay spectrum"));
    }
    let (p, g_star) = quadratic_peak(g[(idx + n_tau - 1) % n_tau], g[idx], g[(idx + 1) % n_tau]);
    let tau_s = (idx as f64 + p) / (n_tau as f64 * NprachNumerology::format0(SampleRate::NPRACH).subcarrier_spacing_hz as f64);
    let mut spectrum = g;
    spectrum.iter_mut().skip(hi + 1).for_each(|x| *x = 0.0);
    Ok(RtdEstimate {
        tau_s,
        tau_us: tau_s * 1e6,
        peak_bin: idx,
        frac: p,
        g_star,
        spectrum,
    })
}

/// Detection statistic `λ = G*/N̄²`, invariant to the received level.
pub fn detection_metric(g_star: f64, obs: &SymbolGroupObs) -> Result<f64> {
    let n = obs.mean_noise();
    let n2 = n * n;
    if !(n2 > 1e-24 * g_star) || n2 == 0.0 {
        return Err(Error::Degenerate("zero NPRACH noise estimate"));
    }
    Ok(g_star / n2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Nprach,
    Dtx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NprachReport {
    pub verdict: Verdict,
    pub rho: usize,
    pub rtd_us: f64,
    pub cfo_hz: f64,
    /// Detection statistic λ, reported as the SNR measure.
    pub snr: f64,
}

/// Everything the receiver computes for one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct NprachAnalysis {
    pub obs: SymbolGroupObs,
    pub cfo: CfoEstimate,
    pub rtd: RtdEstimate,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NprachReceiver {
    pub config: NprachConfig,
    pub n_tau: usize,
    pub cfo_mode: CfoMode,
}

impl NprachReceiver {
    pub fn new(config: NprachConfig) -> Self {
        NprachReceiver {
            config,
            n_tau: 256,
            cfo_mode: CfoMode::Full,
        }
    }

    pub fn analyse(&self, wave: &ComplexGrid, rho: usize) -> Result<NprachAnalysis> {
        let hop = nprach_hop_sequence(&self.config, rho, self.config.repetitions)?;
        let obs = demod_symbol_groups(wave, &hop)?;
        let diff = differentials(&obs, &hop);
        let cfo = estimate_cfo(&diff, self.cfo_mode)?;
        let v = correct_cfo(&diff, cfo.phasor);
        let rtd = rtd_estimate(&v, &diff.hops, self.n_tau)?;
        let lambda = detection_metric(rtd.g_star, &obs)?;
        Ok(NprachAnalysis { obs, cfo, rtd, lambda })
    }

    pub fn detect(&self, wave: &ComplexGrid, rho: usize, epsilon: f64) -> Result<NprachReport> {
        let a = self.analyse(wave, rho)?;
        Ok(NprachReport {
            verdict: if a.lambda >= epsilon { Verdict::Nprach } else { Verdict::Dtx },
            rho,
            rtd_us: a.rtd.tau_us,
            cfo_hz: a.cfo.hz,
            snr: a.lambda,
        })
    }

    /// Evaluates every start subcarrier of the configured resource.
    pub fn detect_all(&self, wave: &ComplexGrid, epsilon: f64) -> Result<Vec<NprachReport>> {
        (0..self.config.num_subcarriers)
            .map(|rho| self.detect(wave, rho, epsilon))
            .collect()
    }

    /// Samples per antenna covered by one preamble.
    pub fn preamble_len(&self) -> usize {
        self.config.num_groups() * NprachNumerology::format0(SampleRate::NPRACH).group_len
    }
}

/// Noise-only detection statistics for `trials` independent trials.
pub fn dtx_statistics(rx: &NprachReceiver, n_rx: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let len = rx.preamble_len();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let antennas = (0..n_rx).map(|_| complex_noise(&mut rng, 1.0, len)).collect();
            let wave = ComplexGrid::time(SampleRate::NPRACH, antennas);
            rx.analyse(&wave, 0).map(|a| a.lambda)
        })
        .collect()
}

/// Threshold at the `1 − target_fa` quantile of the noise-only statistic.
pub fn calibrate_threshold(rx: &NprachReceiver, n_rx: usize, trials: usize, target_fa: f64, seed: u64) -> Result<NprachThreshold> {
    let needed = (10.0 / target_fa).ceil() as usize;
    if trials < needed {
        return Err(Error::InsufficientTrials { needed, got: trials });
    }
    let mut stats = dtx_statistics(rx, n_rx, trials, seed)?;
    Ok(Threshold {
        reps: rx.config.repetitions,
        n_rx,
        epsilon: empirical_quantile(&mut stats, 1.0 - target_fa),
        trials,
        seed,
    })
}
