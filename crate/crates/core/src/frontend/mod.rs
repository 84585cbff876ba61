//! Shared front-end pieces: half-tone shift and common phase correction for
//! in-band placement, NPRACH decimation, and uplink gap scheduling.

pub mod decimate;
pub mod gaps;
pub mod phase;

pub use decimate::{decimate_to_240k, Decimator};
pub use gaps::{
    nprach_gap, plan_gaps, segment_blocks, transmitted_subframes, Gap, GapCause, GapPlan, Timeline,
};
pub use phase::{common_phase_correction, half_tone_shift, InbandPlacement, ShiftSign};
