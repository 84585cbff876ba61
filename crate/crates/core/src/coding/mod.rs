//! CRC attachment, turbo coding, rate matching, scrambling and soft-bit
//! combining for the uplink shared channel.

pub mod crc;
pub mod qpp;
pub mod rate_match;
pub mod scramble;
pub mod soft;
pub mod turbo;

pub use crc::{crc24_attach, crc24_check, crc24a};
pub use rate_match::RateMatcher;
pub use scramble::{scramble_bits, scramble_llrs, scrambling_seed};
pub use soft::{combine_identical, f2_repeat, HarqBuffer, SoftBits};
pub use turbo::{TurboCodec, TurboDecodeResult};
