//! NPUSCH format 1 receiver.
//!
//! Processing runs block by block (8 ms multi-tone, 32 ms single tone, never
//! across a gap): timing offset from adjacent pilot tones, frequency offset
//! from the slot-rate pilot sequence, channel and noise from the corrected
//! pilots, then MMSE combining, despreading and LLRs. LLRs of identical slot
//! copies are summed before descrambling; each repetition cycle is then
//! rate-dematched into the HARQ buffer and decoded.

pub mod estimate;

use crate::coding::{combine_identical, scramble_llrs, HarqBuffer, RateMatcher, SoftBits, TurboCodec};
use crate::dsp::{cis, lin_to_db, FftPair};
use crate::error::{Error, Result};
use crate::frontend::segment_blocks;
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{Modulation, NpuschF1Config, SYMBOLS_PER_SLOT};
use crate::tx::pilots::data_symbols;
use crate::tx::{cycle_rv, pilot_reference, rotation_phase, tone_bin, DefaultPilots, NpuschLayout, PilotFormat, PilotSource};

pub use estimate::{
    block_snr, compute_llrs, correct_sto, demod_pilots, despread_idft, equalize, estimate_cfo_block, estimate_channel,
    estimate_noise, estimate_sto, grid_demod, smooth_freq, BlockEstimate, FreqGrid, NoiseMode, PilotObs, StoEstimate,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Options {
    pub cfo_fft_size: usize,
    pub max_cfo_hz: f64,
    /// Blocks averaged into the reported SNR.
    pub snr_blocks: usize,
    /// Overrides the default block length.
    pub block_ms: Option<usize>,
}

impl Default for F1Options {
    fn default() -> Self {
        F1Options {
            cfo_fft_size: 256,
            max_cfo_hz: 250.0,
            snr_blocks: 4,
            block_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded payload (CRC removed).
    pub bits: Vec<u8>,
    pub crc_pass: bool,
    /// CRC outcome after each repetition cycle.
    pub cycle_crc: Vec<bool>,
    /// Mean SNR of the last blocks, dB.
    pub snr_db: f64,
    pub blocks: Vec<BlockEstimate>,
}

pub struct F1Receiver {
    pub config: NpuschF1Config,
    pub options: F1Options,
    layout: NpuschLayout,
    bins: Vec<i64>,
    reference: Vec<Vec<Vec<C64>>>,
    codec: TurboCodec,
    fft: FftPair,
}

impl F1Receiver {
    pub fn new(config: NpuschF1Config) -> Result<Self> {
        Self::with_pilots(config, &DefaultPilots::default())
    }

    pub fn with_pilots(config: NpuschF1Config, pilots: &dyn PilotSource) -> Result<Self> {
        config.validate()?;
        let layout = NpuschLayout::f1(&config)?;
        let bins: Vec<i64> = (config.tone_offset..config.tone_offset + config.tones).map(tone_bin).collect();
        let rotate = (config.tones == 1).then_some(config.modulation);
        let reference = pilot_reference(&layout, PilotFormat::F1, &bins, rotate, pilots);
        let codec = TurboCodec::new(config.tbs_bits + 24)?;
        let options = F1Options::default();
        Ok(F1Receiver {
            fft: FftPair::new(options.cfo_fft_size),
            config,
            options,
            layout,
            bins,
            reference,
            codec,
        })
    }

    pub fn with_options(mut self, options: F1Options) -> Self {
        self.fft = FftPair::new(options.cfo_fft_size);
        self.options = options;
        self
    }

    pub fn layout(&self) -> &NpuschLayout {
        &self.layout
    }

    pub fn new_harq(&self) -> HarqBuffer {
        HarqBuffer::new(self.codec.k())
    }

    fn block_slots(&self) -> usize {
        let ms = self.options.block_ms.unwrap_or(if self.config.tones == 1 { 32 } else { 8 });
        2 * ms
    }

    /// Processing blocks as transmitted-slot ranges.
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let ms: Vec<u64> = self.layout.slots.iter().map(|s| s.subframe()).collect();
        segment_blocks(&ms, self.block_slots())
    }

    /// Runs the estimators over every block, correcting timing in `grid`.
    pub fn estimate_blocks(&self, grid: &mut FreqGrid) -> Result<Vec<BlockEstimate>> {
        let pilot_l = crate::tx::pilot_symbols(PilotFormat::F1);
        self.blocks()
            .into_iter()
            .map(|range| {
                let mut obs = demod_pilots(grid, range.clone(), pilot_l, &self.reference);
                let sto = if self.config.tones > 1 {
                    let sto = estimate_sto(&obs)?;
                    correct_sto(grid, range.clone(), &sto);
                    obs = demod_pilots(grid, range.clone(), pilot_l, &self.reference);
                    Some(sto)
                } else {
                    None
                };
                let smoothed = smooth_freq(&obs);
                let cfo = estimate_cfo_block(&smoothed, &self.fft, self.options.max_cfo_hz)?;
                let h = estimate_channel(&smoothed, &obs.sample, cfo);
                let mode = NoiseMode::for_block(self.config.tones, range.len());
                let sigma2 = estimate_noise(&obs, &smoothed, &h, cfo, mode);
                BlockEstimate::new(range, sto, cfo, h, sigma2)
            })
            .collect()
    }

    /// Soft bits of every transmitted slot, `[slot][bit]`, in codeword order.
    pub fn slot_llrs(&self, grid: &FreqGrid, blocks: &[BlockEstimate]) -> Vec<Vec<f64>> {
        let data_l = data_symbols(PilotFormat::F1);
        let mut out = vec![Vec::new(); self.layout.slots.len()];
        for b in blocks {
            for s in b.slots.clone() {
                let info = &self.layout.slots[s];
                let mut llrs = Vec::with_capacity(data_l.len() * self.config.tones * self.config.modulation.bits_per_symbol());
                for &l in &data_l {
                    let mut t = despread_idft(&equalize(grid, s, l, b));
                    if self.config.tones == 1 {
                        let ph = rotation_phase(self.config.modulation, info.symbol_counter + l, self.bins[0]);
                        t[0] *= cis(-ph);
                    }
                    llrs.extend(compute_llrs(&t, self.config.modulation));
                }
                out[s] = llrs;
            }
        }
        out
    }

    /// Decodes one transmission that started at redundancy version
    /// `rv_start`, accumulating into `harq`.
    pub fn receive(&self, wave: &ComplexGrid, rv_start: usize, harq: &mut HarqBuffer) -> Result<DecodeResult> {
        if harq.k != self.codec.k() {
            return Err(Error::Length {
                expected: self.codec.k(),
                actual: harq.k,
            });
        }
        let mut grid = grid_demod(wave, &self.layout, &self.bins)?;
        let blocks = self.estimate_blocks(&mut grid)?;
        let slot_llrs = self.slot_llrs(&grid, &blocks);

        let e = self.config.coded_bits();
        let per_slot = e / self.config.codeword_slots();
        let mut copies: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; e]; self.layout.copies]; self.layout.cycles];
        for (info, llrs) in self.layout.slots.iter().zip(&slot_llrs) {
            let dst = &mut copies[info.cycle][info.copy][info.cw_slot * per_slot..(info.cw_slot + 1) * per_slot];
            dst.copy_from_slice(llrs);
        }
        let mut cycle_crc = Vec::with_capacity(self.layout.cycles);
        let mut decoded: Option<Vec<u8>> = None;
        let mut last_bits = Vec::new();
        for (c, sets) in copies.into_iter().enumerate() {
            let soft: Vec<SoftBits> = sets.into_iter().map(SoftBits::new).collect();
            let combined = combine_identical(&soft)?;
            let descrambled = scramble_llrs(&combined.llr, self.config.rnti, self.layout.cycle_start_slot(c) as usize);
            let rm = RateMatcher::new(self.codec.stream_len(), e, cycle_rv(rv_start, c))?;
            harq.combine(&rm.rate_dematch(&descrambled)?)?;
            if decoded.is_none() {
                let r = self.codec.decode(&harq.llr, true)?;
                if r.converged {
                    decoded = Some(r.bits);
                } else {
                    last_bits = r.bits;
                }
            }
            cycle_crc.push(decoded.is_some());
        }
        let crc_pass = decoded.is_some();
        let mut bits = decoded.unwrap_or(last_bits);
        bits.truncate(self.config.tbs_bits);
        let tail = &blocks[blocks.len().saturating_sub(self.options.snr_blocks)..];
        let snr = tail.iter().map(|b| b.snr).sum::<f64>() / tail.len().max(1) as f64;
        Ok(DecodeResult {
            bits,
            crc_pass,
            cycle_crc,
            snr_db: lin_to_db(snr),
            blocks,
        })
    }
}

/// Number of data symbols per slot.
pub const DATA_SYMBOLS_PER_SLOT: usize = SYMBOLS_PER_SLOT - 1;

/// Convenience: data bits carried by one slot.
pub fn bits_per_slot(tones: usize, modulation: Modulation) -> usize {
    DATA_SYMBOLS_PER_SLOT * tones * modulation.bits_per_symbol()
}
