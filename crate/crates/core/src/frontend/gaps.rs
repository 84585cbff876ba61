//! Uplink gap scheduling and block segmentation.
//!
//! Time is counted in 1 ms subframes. A transmission needs a number of
//! transmitted subframes; the planner walks forward from the start and
//! records every interval in which the UE does not transmit.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerology::NprachConfig;

/// Transmission length after which a long-uplink gap is inserted.
pub const LONG_UL_PERIOD_MS: u64 = 256;
pub const LONG_UL_GAP_MS: u64 = 40;
/// NPRACH format 0 preamble repetition (four symbol groups).
pub const NPRACH_PREAMBLE_US: u64 = 5_600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GapCause {
    LongUplink,
    NprachOverlap,
    InvalidSubframe,
}

impl fmt::Display for GapCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapCause::LongUplink => "long-ul-256",
            GapCause::NprachOverlap => "nprach-overlap",
            GapCause::InvalidSubframe => "invalid-subframe",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub start_ms: u64,
    pub length_ms: u64,
    pub cause: GapCause,
}

impl Gap {
    pub fn end_ms(&self) -> u64 {
        self.start_ms + self.length_ms
    }

    pub fn contains(&self, ms: u64) -> bool {
        ms >= self.start_ms && ms < self.end_ms()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapPlan {
    pub gaps: Vec<Gap>,
}

impl GapPlan {
    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// `start_ms,length_ms,cause` rows with header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("start_ms,length_ms,cause\n");
        for g in &self.gaps {
            s.push_str(&format!("{},{},{}\n", g.start_ms, g.length_ms, g.cause));
        }
        s
    }

    fn covering(&self, ms: u64) -> Option<&Gap> {
        self.gaps.iter().find(|g| g.contains(ms))
    }
}

/// Inputs to the gap planner.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeline {
    pub start_ms: u64,
    /// Subframes the transmission needs on air.
    pub duration_ms: u64,
    /// NPRACH opportunities as `(start_ms, length_ms)`.
    pub nprach_windows: Vec<(u64, u64)>,
    pub invalid_subframes: Vec<u64>,
    /// Gaps already present in the timeline; kept as they are.
    pub reserved: Vec<Gap>,
}

impl Timeline {
    pub fn contiguous(duration_ms: u64) -> Self {
        Timeline {
            duration_ms,
            ..Default::default()
        }
    }
}

fn validate(t: &Timeline) -> Result<()> {
    let mut windows = t.nprach_windows.clone();
    windows.sort_unstable();
    for w in windows.windows(2) {
        if w[0].0 + w[0].1 > w[1].0 {
            return Err(Error::GapPlan(format!(
                "NPRACH windows at {} ms and {} ms overlap",
                w[0].0, w[1].0
            )));
        }
    }
    let mut reserved = t.reserved.clone();
    reserved.sort_by_key(|g| g.start_ms);
    for w in reserved.windows(2) {
        if w[0].end_ms() > w[1].start_ms {
            return Err(Error::GapPlan(format!(
                "reserved gaps at {} ms and {} ms overlap",
                w[0].start_ms, w[1].start_ms
            )));
        }
    }
    let mut inv = t.invalid_subframes.clone();
    inv.sort_unstable();
    if inv.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::GapPlan("duplicate invalid subframe".into()));
    }
    Ok(())
}

/// Plans the gaps of one NPUSCH transmission.
///
/// A 40 ms gap follows every 256 ms of transmission, transmission is
/// postponed while an NPRACH window is open, and invalid subframes are
/// skipped. Planning a timeline whose `reserved` gaps are a previous plan
/// reproduces that plan.
pub fn plan_gaps(t: &Timeline) -> Result<GapPlan> {
    validate(t)?;
    let reserved = GapPlan {
        gaps: t.reserved.clone(),
    };
    let mut marks: Vec<(u64, GapCause)> = Vec::new();
    let mut sent = 0u64;
    let mut run = 0u64;
    let mut ms = t.start_ms;
    while sent < t.duration_ms {
        if let Some(g) = reserved.covering(ms) {
            if g.cause == GapCause::LongUplink {
                run = 0;
            }
            marks.push((ms, g.cause));
        } else if t.invalid_subframes.contains(&ms) {
            marks.push((ms, GapCause::InvalidSubframe));
        } else if t
            .nprach_windows
            .iter()
            .any(|&(s, l)| ms >= s && ms < s + l)
        {
            marks.push((ms, GapCause::NprachOverlap));
        } else {
            sent += 1;
            run += 1;
            if run == LONG_UL_PERIOD_MS && sent < t.duration_ms {
                let end = ms + 1 + LONG_UL_GAP_MS;
                for g in ms + 1..end {
                    let cause = reserved.covering(g).map_or(GapCause::LongUplink, |r| r.cause);
                    marks.push((g, cause));
                }
                run = 0;
                ms = end;
                continue;
            }
        }
        ms += 1;
    }
    let mut gaps: Vec<Gap> = Vec::new();
    for (ms, cause) in marks {
        match gaps.last_mut() {
            Some(g) if g.end_ms() == ms && g.cause == cause => g.length_ms += 1,
            _ => gaps.push(Gap {
                start_ms: ms,
                length_ms: 1,
                cause,
            }),
        }
    }
    Ok(GapPlan { gaps })
}

/// Absolute subframe index of every transmitted subframe.
pub fn transmitted_subframes(t: &Timeline, plan: &GapPlan) -> Vec<u64> {
    let mut out = Vec::with_capacity(t.duration_ms as usize);
    let mut ms = t.start_ms;
    while (out.len() as u64) < t.duration_ms {
        if plan.covering(ms).is_none() {
            out.push(ms);
        }
        ms += 1;
    }
    out
}

/// Gap after an NPRACH opportunity whose preamble spans at least 64
/// repetitions. Returned as `(start_ms, length_ms)` relative to the
/// opportunity start.
pub fn nprach_gap(config: &NprachConfig) -> Option<Gap> {
    let duration_us = config.repetitions as u64 * NPRACH_PREAMBLE_US;
    (duration_us >= 64 * NPRACH_PREAMBLE_US).then(|| Gap {
        start_ms: duration_us.div_ceil(1000),
        length_ms: LONG_UL_GAP_MS,
        cause: GapCause::LongUplink,
    })
}

/// Splits transmitted slots into processing blocks of at most `block_slots`
/// that never straddle a gap. `slot_ms[i]` is the absolute subframe of
/// transmitted slot `i` (two slots per subframe). Returns slot ranges.
pub fn segment_blocks(slot_ms: &[u64], block_slots: usize) -> Vec<std::ops::Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=slot_ms.len() {
        let boundary = i == slot_ms.len() || slot_ms[i] > slot_ms[i - 1] + 1;
        if boundary || i - start == block_slots {
            blocks.push(start..i);
            start = i;
        }
    }
    blocks
}
