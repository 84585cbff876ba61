//! Timing constants, higher-layer configurations and resource-unit geometry.
//!
//! NPUSCH paths run at 1.92 Msps with 15 kHz tones (128-point symbols, one
//! 0.5 ms slot = 960 samples). The NPRACH path runs natively at 240 ksps with
//! 3.75 kHz tones (64-point symbols, 16-sample cyclic prefix, 336-sample
//! symbol group). Only NPRACH preamble format 0 is encoded.

use crate::error::{Error, Result};

pub const NPUSCH_RATE_HZ: u32 = 1_920_000;
pub const NPRACH_RATE_HZ: u32 = 240_000;

pub const NPUSCH_SPACING_HZ: u32 = 15_000;
pub const NPRACH_SPACING_HZ: u32 = 3_750;

/// Symbols per NPUSCH slot.
pub const SYMBOLS_PER_SLOT: usize = 7;
/// Samples in one 0.5 ms slot at 1.92 Msps.
pub const SLOT_SAMPLES: usize = 960;
/// Transform length of a 15 kHz symbol at 1.92 Msps.
pub const NPUSCH_FFT: usize = 128;
/// Slots per millisecond subframe.
pub const SLOTS_PER_MS: usize = 2;

/// Supported sample rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleRate(u32);

impl SampleRate {
    pub const NPUSCH: SampleRate = SampleRate(NPUSCH_RATE_HZ);
    pub const NPRACH: SampleRate = SampleRate(NPRACH_RATE_HZ);

    pub fn new(hz: u32) -> Result<Self> {
        match hz {
            NPUSCH_RATE_HZ | NPRACH_RATE_HZ => Ok(SampleRate(hz)),
            _ => Err(Error::Numerology(format!("sample rate {hz} Hz"))),
        }
    }

    pub fn hz(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

/// Cyclic prefix and data lengths of one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolShape {
    pub l: usize,
    pub cp_len: usize,
    pub data_len: usize,
}

impl SymbolShape {
    pub fn total(&self) -> usize {
        self.cp_len + self.data_len
    }
}

/// CP and data sample counts for symbol `l`.
///
/// For 15 kHz at 1.92 Msps `l` indexes the seven symbols of a slot. For the
/// 3.75 kHz NPRACH numerology `l` indexes the five symbols of a symbol group;
/// only the first carries the group's cyclic prefix.
pub fn symbol_sample_counts(l: usize, spacing_hz: u32, rate: SampleRate) -> Result<SymbolShape> {
    match (spacing_hz, rate.hz()) {
        (NPUSCH_SPACING_HZ, NPUSCH_RATE_HZ) => {
            if l >= SYMBOLS_PER_SLOT {
                return Err(Error::Numerology(format!("symbol index {l} outside slot")));
            }
            Ok(SymbolShape {
                l,
                cp_len: if l == 0 { 10 } else { 9 },
                data_len: NPUSCH_FFT,
            })
        }
        (NPRACH_SPACING_HZ, NPRACH_RATE_HZ) | (NPRACH_SPACING_HZ, NPUSCH_RATE_HZ) => {
            let num = NprachNumerology::format0(rate);
            if l >= num.symbols_per_group {
                return Err(Error::Numerology(format!("symbol index {l} outside group")));
            }
            Ok(SymbolShape {
                l,
                cp_len: if l == 0 { num.cp_len } else { 0 },
                data_len: num.fft_size,
            })
        }
        (s, r) => Err(Error::Numerology(format!("spacing {s} Hz at {r} Hz"))),
    }
}

/// Offset of the data part of symbol `l` from the start of its slot (1.92 Msps).
pub fn symbol_data_offset(l: usize) -> usize {
    (0..l).map(|i| if i == 0 { 138 } else { 137 }).sum::<usize>() + if l == 0 { 10 } else { 9 }
}

/// Offset of the cyclic prefix of symbol `l` from the start of its slot.
pub fn symbol_start_offset(l: usize) -> usize {
    (0..l).map(|i| if i == 0 { 138 } else { 137 }).sum()
}

/// NPRACH format 0 constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NprachNumerology {
    pub rate: SampleRate,
    /// Samples per symbol, N.
    pub fft_size: usize,
    /// Cyclic prefix samples, N_cp.
    pub cp_len: usize,
    /// Samples per symbol group, N_g = N_cp + 5N.
    pub group_len: usize,
    pub symbols_per_group: usize,
    pub groups_per_rep: usize,
    pub subcarrier_spacing_hz: u32,
}

impl NprachNumerology {
    pub fn format0(rate: SampleRate) -> Self {
        let scale = (rate.hz() / NPRACH_RATE_HZ) as usize;
        NprachNumerology {
            rate,
            fft_size: 64 * scale,
            cp_len: 16 * scale,
            group_len: 336 * scale,
            symbols_per_group: 5,
            groups_per_rep: 4,
            subcarrier_spacing_hz: NPRACH_SPACING_HZ,
        }
    }

    /// Duration of one preamble repetition (four symbol groups) in seconds.
    pub fn preamble_seconds(&self) -> f64 {
        (self.groups_per_rep * self.group_len) as f64 / self.rate.as_f64()
    }

    pub fn group_seconds(&self) -> f64 {
        self.group_len as f64 / self.rate.as_f64()
    }
}

/// Allowed NPRACH periodicities in ms.
pub const NPRACH_PERIODICITIES: [u32; 8] = [40, 80, 160, 240, 320, 640, 1280, 2560];
pub const NPRACH_REPETITIONS: [usize; 8] = [1, 2, 4, 8, 16, 32, 64, 128];
pub const NPRACH_SUBCARRIER_OFFSETS: [usize; 7] = [0, 12, 24, 36, 2, 18, 34];
pub const NPRACH_NUM_SUBCARRIERS: [usize; 4] = [12, 24, 36, 48];
pub const NPRACH_START_TIMES: [u32; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];

/// Higher-layer NPRACH resource configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NprachConfig {
    pub periodicity_ms: u32,
    pub repetitions: usize,
    pub subcarrier_offset: usize,
    pub num_subcarriers: usize,
    pub start_time_ms: u32,
    pub cell_id: u32,
}

impl Default for NprachConfig {
    fn default() -> Self {
        NprachConfig {
            periodicity_ms: 80,
            repetitions: 8,
            subcarrier_offset: 0,
            num_subcarriers: 12,
            start_time_ms: 8,
            cell_id: 0,
        }
    }
}

impl NprachConfig {
    pub fn validate(&self) -> Result<()> {
        check_in("periodicity_ms", self.periodicity_ms, &NPRACH_PERIODICITIES)?;
        check_in("repetitions", self.repetitions, &NPRACH_REPETITIONS)?;
        check_in("subcarrier_offset", self.subcarrier_offset, &NPRACH_SUBCARRIER_OFFSETS)?;
        check_in("num_subcarriers", self.num_subcarriers, &NPRACH_NUM_SUBCARRIERS)?;
        check_in("start_time_ms", self.start_time_ms, &NPRACH_START_TIMES)?;
        if self.subcarrier_offset + self.num_subcarriers > 48 {
            return Err(Error::config(
                "num_subcarriers",
                format!(
                    "offset {} + {} subcarriers exceeds 48",
                    self.subcarrier_offset, self.num_subcarriers
                ),
            ));
        }
        Ok(())
    }

    /// Total symbol groups in one preamble transmission.
    pub fn num_groups(&self) -> usize {
        4 * self.repetitions
    }
}

/// Whether radio frame `n_f` opens an NPRACH window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NprachWindow {
    pub active: bool,
    /// Absolute subframe index (ms) of the preamble start, when active.
    pub start_subframe: u64,
}

pub fn nprach_window(config: &NprachConfig, n_f: u64) -> NprachWindow {
    let period_frames = (config.periodicity_ms / 10) as u64;
    let active = n_f % period_frames == 0;
    NprachWindow {
        active,
        start_subframe: if active {
            n_f * 10 + config.start_time_ms as u64
        } else {
            0
        },
    }
}

/// Data modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    /// pi/2-BPSK
    Bpsk,
    /// QPSK (pi/4-QPSK on single-tone allocations)
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }
}

pub const F1_TONES: [usize; 4] = [1, 3, 6, 12];
pub const F1_RESOURCE_UNITS: [usize; 8] = [1, 2, 3, 4, 5, 6, 8, 10];
pub const NPUSCH_REPETITIONS: [usize; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

/// Slots per NPUSCH format 1 resource unit at 15 kHz.
pub fn f1_slots_per_ru(tones: usize) -> Result<usize> {
    match tones {
        1 => Ok(16),
        3 => Ok(8),
        6 => Ok(4),
        12 => Ok(2),
        t => Err(Error::config("tones", format!("{t} tones not allowed at 15 kHz"))),
    }
}

/// Slots per NPUSCH format 2 resource unit (2 ms).
pub const F2_SLOTS_PER_RU: usize = 4;

/// NPUSCH format 1 allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct NpuschF1Config {
    pub tones: usize,
    pub subcarrier_spacing_hz: u32,
    pub tone_offset: usize,
    pub n_ru: usize,
    pub n_rep: usize,
    pub tbs_bits: usize,
    pub modulation: Modulation,
    pub rnti: u32,
}

impl Default for NpuschF1Config {
    fn default() -> Self {
        NpuschF1Config {
            tones: 1,
            subcarrier_spacing_hz: NPUSCH_SPACING_HZ,
            tone_offset: 0,
            n_ru: 2,
            n_rep: 1,
            tbs_bits: 32,
            modulation: Modulation::Bpsk,
            rnti: 0x1234,
        }
    }
}

impl NpuschF1Config {
    pub fn validate(&self) -> Result<()> {
        check_in("tones", self.tones, &F1_TONES)?;
        if self.subcarrier_spacing_hz != NPUSCH_SPACING_HZ {
            return Err(Error::config(
                "subcarrier_spacing_hz",
                "only 15 kHz NPUSCH is supported",
            ));
        }
        if self.tone_offset + self.tones > 12 {
            return Err(Error::config(
                "tone_offset",
                format!("offset {} with {} tones leaves the 12-tone carrier", self.tone_offset, self.tones),
            ));
        }
        check_in("n_ru", self.n_ru, &F1_RESOURCE_UNITS)?;
        check_in("n_rep", self.n_rep, &NPUSCH_REPETITIONS)?;
        if self.tones > 1 && self.modulation != Modulation::Qpsk {
            return Err(Error::config("modulation", "multi-tone allocations use QPSK"));
        }
        if self.tbs_bits == 0 {
            return Err(Error::config("tbs_bits", "must be positive"));
        }
        Ok(())
    }

    pub fn slots_per_ru(&self) -> usize {
        f1_slots_per_ru(self.tones).expect("validated tone count")
    }

    /// Slots carrying one codeword (one repetition).
    pub fn codeword_slots(&self) -> usize {
        self.n_ru * self.slots_per_ru()
    }

    /// Coded bits per repetition: six data symbols per slot on every tone.
    pub fn coded_bits(&self) -> usize {
        self.codeword_slots() * (SYMBOLS_PER_SLOT - 1) * self.tones * self.modulation.bits_per_symbol()
    }

    pub fn total_slots(&self) -> usize {
        self.n_rep * self.codeword_slots()
    }

    pub fn identical_repetitions(&self) -> usize {
        identical_repetitions(self.n_rep, self.tones)
    }
}

/// NPUSCH format 2 (ACK/NACK) allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct NpuschF2Config {
    pub tone: usize,
    pub subcarrier_spacing_hz: u32,
    pub repetitions: usize,
    pub rnti: u32,
}

impl Default for NpuschF2Config {
    fn default() -> Self {
        NpuschF2Config {
            tone: 0,
            subcarrier_spacing_hz: NPUSCH_SPACING_HZ,
            repetitions: 1,
            rnti: 0x1234,
        }
    }
}

impl NpuschF2Config {
    pub fn validate(&self) -> Result<()> {
        if self.tone >= 12 {
            return Err(Error::config("tone", format!("{} outside [0, 12)", self.tone)));
        }
        if self.subcarrier_spacing_hz != NPUSCH_SPACING_HZ {
            return Err(Error::config(
                "subcarrier_spacing_hz",
                "only 15 kHz NPUSCH is supported",
            ));
        }
        check_in("repetitions", self.repetitions, &NPUSCH_REPETITIONS)?;
        Ok(())
    }

    pub fn total_slots(&self) -> usize {
        self.repetitions * F2_SLOTS_PER_RU
    }
}

/// Number of back-to-back identical slot repetitions.
///
/// Multi-tone allocations repeat each resource unit `min(N_rep / 2, 4)`
/// times; `N_rep = 1` has nothing to repeat and yields 1.
pub fn identical_repetitions(n_rep: usize, tones: usize) -> usize {
    if tones > 1 {
        (n_rep / 2).clamp(1, 4)
    } else {
        1
    }
}

fn check_in<T: PartialEq + std::fmt::Display>(key: &str, value: T, allowed: &[T]) -> Result<()> {
    if allowed.contains(&value) {
        Ok(())
    } else {
        let list: Vec<String> = allowed.iter().map(|v| v.to_string()).collect();
        Err(Error::config(key, format!("{value} not in {{{}}}", list.join(","))))
    }
}
