//! NPUSCH format 1 and format 2 transmitters at 1.92 Msps.
//!
//! Tone `k` of the 12-tone carrier sits at `(k − 6)·15 kHz`. Every active
//! tone carries unit average power; the inverse transform is unnormalized so a
//! unit-amplitude tone produces unit-modulus time samples.

use std::f64::consts::PI;

use rand::Rng;

use super::modulation::map_bits;
use super::pilots::{data_symbols, pilot_symbols, DefaultPilots, PilotFormat, PilotSource};
use super::rotation::rotation_phase;
use crate::coding::{crc24_attach, crc24a, f2_repeat, scramble_bits, RateMatcher, TurboCodec};
use crate::dsp::{cis, unitary_dft};
use crate::error::{Error, Result};
use crate::frontend::gaps::{plan_gaps, transmitted_subframes, GapPlan, Timeline};
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{
    Modulation, NpuschF1Config, NpuschF2Config, SampleRate, F2_SLOTS_PER_RU, NPUSCH_FFT,
    SLOT_SAMPLES, SYMBOLS_PER_SLOT,
};

/// Payload bits plus their CRC24A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportBlock {
    pub bits: Vec<u8>,
    pub crc: u32,
}

impl TransportBlock {
    pub fn new(bits: Vec<u8>) -> Self {
        let crc = crc24a(&bits);
        TransportBlock { bits, crc }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, tbs_bits: usize) -> Self {
        Self::new((0..tbs_bits).map(|_| rng.random_range(0..2u8)).collect())
    }

    /// Code block: payload followed by the CRC.
    pub fn code_block(&self) -> Vec<u8> {
        crc24_attach(&self.bits)
    }
}

/// Where one transmitted slot sits and what it carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotInfo {
    /// First sample of the slot in the waveform.
    pub sample_start: usize,
    /// Repetition cycle (format 1) or repetition (format 2).
    pub cycle: usize,
    /// Identical copy within the cycle.
    pub copy: usize,
    /// Slot of the codeword carried.
    pub cw_slot: usize,
    pub abs_slot: u64,
    /// Symbol counter of symbol 0, restarted after every gap.
    pub symbol_counter: usize,
}

impl SlotInfo {
    pub fn subframe(&self) -> u64 {
        self.abs_slot / 2
    }
}

/// Slot-level timeline shared by transmitter and receivers.
#[derive(Debug, Clone, PartialEq)]
pub struct NpuschLayout {
    pub slots: Vec<SlotInfo>,
    pub total_samples: usize,
    pub cycles: usize,
    pub copies: usize,
    pub cw_slots: usize,
    pub gaps: GapPlan,
}

impl NpuschLayout {
    fn build(order: Vec<(usize, usize, usize)>, cycles: usize, copies: usize, cw_slots: usize) -> Result<Self> {
        let total_ms = order.len().div_ceil(2) as u64;
        let timeline = Timeline::contiguous(total_ms);
        let gaps = plan_gaps(&timeline)?;
        let subframes = transmitted_subframes(&timeline, &gaps);
        let mut slots = Vec::with_capacity(order.len());
        for (i, (cycle, copy, cw_slot)) in order.into_iter().enumerate() {
            let abs_slot = 2 * subframes[i / 2] + (i % 2) as u64;
            let symbol_counter = match slots.last() {
                Some(prev @ SlotInfo { .. }) if prev.abs_slot + 1 == abs_slot => {
                    prev.symbol_counter + SYMBOLS_PER_SLOT
                }
                _ => 0,
            };
            slots.push(SlotInfo {
                sample_start: abs_slot as usize * SLOT_SAMPLES,
                cycle,
                copy,
                cw_slot,
                abs_slot,
                symbol_counter,
            });
        }
        let total_samples = slots.last().map_or(0, |s| s.sample_start + SLOT_SAMPLES);
        Ok(NpuschLayout {
            slots,
            total_samples,
            cycles,
            copies,
            cw_slots,
            gaps,
        })
    }

    pub fn f1(cfg: &NpuschF1Config) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.identical_repetitions();
        let spr = cfg.slots_per_ru();
        let cycles = cfg.n_rep / m;
        let mut order = Vec::with_capacity(cfg.total_slots());
        for cycle in 0..cycles {
            for ru in 0..cfg.n_ru {
                for copy in 0..m {
                    for s in 0..spr {
                        order.push((cycle, copy, ru * spr + s));
                    }
                }
            }
        }
        Self::build(order, cycles, m, cfg.codeword_slots())
    }

    pub fn f2(cfg: &NpuschF2Config) -> Result<Self> {
        cfg.validate()?;
        let order = (0..cfg.repetitions)
            .flat_map(|r| (0..F2_SLOTS_PER_RU).map(move |s| (r, 0, s)))
            .collect();
        Self::build(order, cfg.repetitions, 1, F2_SLOTS_PER_RU)
    }

    /// Absolute slot number at which `cycle` starts.
    pub fn cycle_start_slot(&self, cycle: usize) -> u64 {
        self.slots
            .iter()
            .find(|s| s.cycle == cycle)
            .map_or(0, |s| s.abs_slot)
    }

    /// Waveform index of the first data (post-CP) sample of symbol `l`.
    pub fn symbol_sample(&self, slot: usize, l: usize) -> usize {
        self.slots[slot].sample_start + crate::numerology::symbol_data_offset(l)
    }
}

/// Redundancy version of repetition cycle `cycle`.
pub fn cycle_rv(rv_start: usize, cycle: usize) -> usize {
    2 * ((rv_start / 2 + cycle) % 2)
}

/// Signed frequency index of carrier tone `k`.
pub fn tone_bin(k: usize) -> i64 {
    k as i64 - 6
}

struct Synth {
    table: Vec<C64>,
}

impl Synth {
    fn new() -> Self {
        Synth {
            table: (0..NPUSCH_FFT)
                .map(|m| cis(2.0 * PI * m as f64 / NPUSCH_FFT as f64))
                .collect(),
        }
    }

    /// Appends CP + data samples of one symbol with `values` on `bins`.
    fn symbol(&self, out: &mut [C64], cp: usize, bins: &[i64], values: &[C64]) {
        let n = NPUSCH_FFT as i64;
        for (i, o) in out.iter_mut().enumerate().take(cp + NPUSCH_FFT) {
            let t = i as i64 - cp as i64;
            let mut acc = C64::new(0.0, 0.0);
            for (&b, &v) in bins.iter().zip(values) {
                acc += v * self.table[(b * t).rem_euclid(n) as usize];
            }
            *o = acc;
        }
    }
}

fn cp_len(l: usize) -> usize {
    if l == 0 {
        10
    } else {
        9
    }
}

/// Frequency-domain content of every symbol of every transmitted slot.
type SlotSymbols = Vec<[Vec<C64>; SYMBOLS_PER_SLOT]>;

fn synthesize(layout: &NpuschLayout, bins: &[i64], content: &SlotSymbols, rotate: Option<Modulation>) -> Vec<C64> {
    let synth = Synth::new();
    let mut out = vec![C64::new(0.0, 0.0); layout.total_samples];
    for (info, symbols) in layout.slots.iter().zip(content) {
        let mut pos = info.sample_start;
        for (l, values) in symbols.iter().enumerate() {
            let cp = cp_len(l);
            let rotated: Vec<C64>;
            let vals = match rotate {
                Some(m) => {
                    let ph = rotation_phase(m, info.symbol_counter + l, bins[0]);
                    rotated = values.iter().map(|v| v * cis(ph)).collect();
                    &rotated
                }
                None => values,
            };
            synth.symbol(&mut out[pos..pos + cp + NPUSCH_FFT], cp, bins, vals);
            pos += cp + NPUSCH_FFT;
        }
    }
    out
}

/// Pilot values as they appear on air, `[slot][pilot symbol][tone]`,
/// including the single-tone phase rotation when `rotate` is set.
pub fn pilot_reference(
    layout: &NpuschLayout,
    format: PilotFormat,
    bins: &[i64],
    rotate: Option<Modulation>,
    source: &dyn PilotSource,
) -> Vec<Vec<Vec<C64>>> {
    let mut table = source.generate(format, bins.len(), layout.slots.len());
    if let Some(m) = rotate {
        for (info, slot) in layout.slots.iter().zip(table.iter_mut()) {
            for (&l, sym) in pilot_symbols(format).iter().zip(slot.iter_mut()) {
                let r = cis(rotation_phase(m, info.symbol_counter + l, bins[0]));
                sym.iter_mut().for_each(|v| *v *= r);
            }
        }
    }
    table
}

/// Modulated, scrambled codeword of one repetition cycle.
pub fn f1_cycle_symbols(block: &[u8], cfg: &NpuschF1Config, rv: usize, abs_slot: u64) -> Result<Vec<C64>> {
    let codec = TurboCodec::new(block.len())?;
    let coded = codec.encode(block)?;
    let rm = RateMatcher::new(codec.stream_len(), cfg.coded_bits(), rv)?;
    let e = rm.rate_match(&coded)?;
    let scrambled = scramble_bits(&e, cfg.rnti, abs_slot as usize);
    map_codeword(&scrambled, cfg)
}

/// Maps a rate-matched, scrambled codeword onto constellation points.
pub fn map_codeword(bits: &[u8], cfg: &NpuschF1Config) -> Result<Vec<C64>> {
    if bits.len() != cfg.coded_bits() {
        return Err(Error::Length {
            expected: cfg.coded_bits(),
            actual: bits.len(),
        });
    }
    Ok(map_bits(bits, cfg.modulation))
}

#[derive(Debug, Clone)]
pub struct F1Transmission {
    pub grid: ComplexGrid,
    pub layout: NpuschLayout,
}

/// Format 1 transmission starting at redundancy version `rv_start`.
pub fn build_f1(tb: &TransportBlock, cfg: &NpuschF1Config, rv_start: usize, pilots: &dyn PilotSource) -> Result<F1Transmission> {
    cfg.validate()?;
    if tb.bits.len() != cfg.tbs_bits {
        return Err(Error::Length {
            expected: cfg.tbs_bits,
            actual: tb.bits.len(),
        });
    }
    let layout = NpuschLayout::f1(cfg)?;
    let block = tb.code_block();
    let cycles: Vec<Vec<C64>> = (0..layout.cycles)
        .map(|c| f1_cycle_symbols(&block, cfg, cycle_rv(rv_start, c), layout.cycle_start_slot(c)))
        .collect::<Result<_>>()?;
    let pilot_table = pilots.generate(PilotFormat::F1, cfg.tones, layout.slots.len());
    let data_l = data_symbols(PilotFormat::F1);
    let n = cfg.tones;
    let content: SlotSymbols = layout
        .slots
        .iter()
        .enumerate()
        .map(|(i, info)| {
            let syms = &cycles[info.cycle];
            let mut slot: [Vec<C64>; SYMBOLS_PER_SLOT] = Default::default();
            for (d, &l) in data_l.iter().enumerate() {
                let start = (info.cw_slot * data_l.len() + d) * n;
                slot[l] = unitary_dft(&syms[start..start + n], false);
            }
            slot[pilot_symbols(PilotFormat::F1)[0]] = pilot_table[i][0].clone();
            slot
        })
        .collect();
    let bins: Vec<i64> = (cfg.tone_offset..cfg.tone_offset + n).map(tone_bin).collect();
    let rotate = (n == 1).then_some(cfg.modulation);
    let samples = synthesize(&layout, &bins, &content, rotate);
    Ok(F1Transmission {
        grid: ComplexGrid::single(SampleRate::NPUSCH, samples),
        layout,
    })
}

pub fn build_f1_transmission(tb: &TransportBlock, cfg: &NpuschF1Config) -> Result<ComplexGrid> {
    Ok(build_f1(tb, cfg, 0, &DefaultPilots::default())?.grid)
}

/// Scrambling cover `t_l` of the 16 data symbols of one format 2 repetition.
pub fn f2_cover(rnti: u32, abs_slot: u64) -> Vec<C64> {
    let zeros = vec![0u8; 4 * F2_SLOTS_PER_RU];
    map_bits(&scramble_bits(&zeros, rnti, abs_slot as usize), Modulation::Bpsk)
        .into_iter()
        .map(|v| -v)
        .collect()
}

#[derive(Debug, Clone)]
pub struct F2Transmission {
    pub grid: ComplexGrid,
    pub layout: NpuschLayout,
}

/// Format 2 (ACK/NACK) transmission; `ack = 1` sends ACK.
pub fn build_f2(ack: u8, cfg: &NpuschF2Config, pilots: &dyn PilotSource) -> Result<F2Transmission> {
    if ack > 1 {
        return Err(Error::config("ack", "must be 0 or 1"));
    }
    let layout = NpuschLayout::f2(cfg)?;
    let pilot_table = pilots.generate(PilotFormat::F2, 1, layout.slots.len());
    let data_l = data_symbols(PilotFormat::F2);
    let pilot_l = pilot_symbols(PilotFormat::F2);
    let reps: Vec<Vec<C64>> = (0..layout.cycles)
        .map(|c| {
            let start = layout.cycle_start_slot(c);
            let bits = scramble_bits(&f2_repeat(ack, F2_SLOTS_PER_RU), cfg.rnti, start as usize);
            map_bits(&bits, Modulation::Bpsk)
        })
        .collect();
    let content: SlotSymbols = layout
        .slots
        .iter()
        .enumerate()
        .map(|(i, info)| {
            let mut slot: [Vec<C64>; SYMBOLS_PER_SLOT] = Default::default();
            for (d, &l) in data_l.iter().enumerate() {
                slot[l] = vec![reps[info.cycle][info.cw_slot * data_l.len() + d]];
            }
            for (j, &l) in pilot_l.iter().enumerate() {
                slot[l] = pilot_table[i][j].clone();
            }
            slot
        })
        .collect();
    let samples = synthesize(&layout, &[tone_bin(cfg.tone)], &content, Some(Modulation::Bpsk));
    Ok(F2Transmission {
        grid: ComplexGrid::single(SampleRate::NPUSCH, samples),
        layout,
    })
}

pub fn build_f2_transmission(ack: u8, cfg: &NpuschF2Config) -> Result<ComplexGrid> {
    Ok(build_f2(ack, cfg, &DefaultPilots::default())?.grid)
}
