//! UE-side waveform generation.

pub mod modulation;
pub mod nprach;
pub mod npusch;
pub mod pilots;
pub mod rotation;

pub use modulation::map_bits;
pub use nprach::{nprach_hop_sequence, nprach_waveform, HopSequence};
pub use npusch::{
    build_f1, build_f1_transmission, build_f2, build_f2_transmission, cycle_rv, f2_cover,
    pilot_reference, tone_bin, F1Transmission, F2Transmission, NpuschLayout, SlotInfo,
    TransportBlock,
};
pub use pilots::{pilot_symbols, DefaultPilots, PilotFormat, PilotSource};
pub use rotation::{phase_rotation_sequence, rotation_phase, PhaseRotation};
