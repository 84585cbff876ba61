//! Impairments between transmitter and receiver, applied in the fixed order
//! delay → fading → CFO → AWGN.

pub mod fading;
pub mod impair;
pub mod profile;

use rand::Rng;

pub use fading::{apply_fading, FadingState};
pub use impair::{apply_awgn, apply_cfo, apply_timing_offset, complex_noise, noise_variance};
pub use profile::{epa, etu, AntennaCorrelation, ChannelProfile};

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentConfig {
    /// Per receive antenna, per resource element.
    pub snr_db: f64,
    pub cfo_hz: f64,
    pub timing_offset_samples: f64,
    pub n_rx: usize,
    /// Resource element width used to define the SNR.
    pub spacing_hz: f64,
}

impl ImpairmentConfig {
    pub fn new(snr_db: f64, n_rx: usize, spacing_hz: f64) -> Self {
        ImpairmentConfig {
            snr_db,
            cfo_hz: 0.0,
            timing_offset_samples: 0.0,
            n_rx,
            spacing_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![1, 2, 4].contains(&self.n_rx) {
            return Err(Error::config("n_rx", "must be 1, 2 or 4"));
        }
        if !self.cfo_hz.is_finite() {
            return Err(Error::config("cfo_hz", "must be finite"));
        }
        if !(self.timing_offset_samples >= 0.0 && self.timing_offset_samples.is_finite()) {
            return Err(Error::config("timing_offset", "must be finite and non-negative"));
        }
        if self.snr_db.is_nan() || !(self.spacing_hz > 0.0) {
            return Err(Error::config("snr_db", "invalid SNR definition"));
        }
        Ok(())
    }
}

/// Copies antenna 0 onto `n_rx` antennas.
pub fn replicate(wave: &ComplexGrid, n_rx: usize) -> ComplexGrid {
    ComplexGrid::time(wave.rate, vec![wave.antenna(0).to_vec(); n_rx])
}

/// Full impairment chain. Without a profile every antenna sees the same
/// unit-gain channel; with one, a fresh fading realization is drawn from
/// `rng` before the noise.
pub fn apply_channel<R: Rng + ?Sized>(
    wave: &ComplexGrid,
    cfg: &ImpairmentConfig,
    profile: Option<&ChannelProfile>,
    rng: &mut R,
) -> Result<ComplexGrid> {
    cfg.validate()?;
    let delayed = apply_timing_offset(wave, cfg.timing_offset_samples);
    let faded = match profile {
        Some(p) => {
            let state = FadingState::new(p, cfg.n_rx, rng);
            apply_fading(&delayed, p, &state)
        }
        None => replicate(&delayed, cfg.n_rx),
    };
    let shifted = apply_cfo(&faded, cfg.cfo_hz);
    Ok(apply_awgn(&shifted, cfg.snr_db, cfg.spacing_hz, rng))
}
