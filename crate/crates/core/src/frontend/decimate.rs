//! 1.92 Msps → 240 ksps decimation for the NPRACH input path.
//!
//! Single-stage Kaiser-windowed lowpass (passband ±90 kHz, stopband from
//! 150 kHz, 60 dB design attenuation) evaluated only at the retained output
//! phases. The filter's group delay is removed so output sample `m` is aligned
//! with input sample `8m`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::dsp::bessel_i0;
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, C64};
use crate::numerology::{SampleRate, NPRACH_RATE_HZ, NPUSCH_RATE_HZ};

pub const FACTOR: usize = (NPUSCH_RATE_HZ / NPRACH_RATE_HZ) as usize;
const TAPS: usize = 129;
const CUTOFF_HZ: f64 = 120_000.0;
const KAISER_BETA: f64 = 5.65;

#[derive(Debug, Clone)]
pub struct Decimator {
    taps: Vec<f64>,
}

impl Default for Decimator {
    fn default() -> Self {
        Self::new()
    }
}

impl Decimator {
    pub fn new() -> Self {
        static TAPS_CACHE: OnceLock<Vec<f64>> = OnceLock::new();
        Decimator {
            taps: TAPS_CACHE.get_or_init(design).clone(),
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn process(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() % FACTOR != 0 {
            return Err(Error::Length {
                expected: x.len().div_ceil(FACTOR) * FACTOR,
                actual: x.len(),
            });
        }
        let half = (TAPS / 2) as isize;
        let n = x.len() as isize;
        Ok((0..x.len() / FACTOR)
            .map(|m| {
                let centre = (m * FACTOR) as isize;
                let mut acc = C64::new(0.0, 0.0);
                for (i, &h) in self.taps.iter().enumerate() {
                    let idx = centre + half - i as isize;
                    if idx >= 0 && idx < n {
                        acc += x[idx as usize] * h;
                    }
                }
                acc
            })
            .collect())
    }

    /// Magnitude response in dB at `freq_hz` (input rate).
    pub fn response_db(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / NPUSCH_RATE_HZ as f64;
        let h: C64 = self
            .taps
            .iter()
            .enumerate()
            .map(|(i, &t)| C64::from_polar(t, -w * i as f64))
            .sum();
        20.0 * h.norm().log10()
    }
}

fn design() -> Vec<f64> {
    let fc = CUTOFF_HZ / NPUSCH_RATE_HZ as f64;
    let mid = (TAPS - 1) as f64 / 2.0;
    let norm = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..TAPS)
        .map(|i| {
            let t = i as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let r = t / mid;
            sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Decimates every antenna of a 1.92 Msps grid to 240 ksps.
pub fn decimate_to_240k(grid: &ComplexGrid) -> Result<ComplexGrid> {
    if grid.rate != SampleRate::NPUSCH {
        return Err(Error::Numerology(format!(
            "decimator expects {} Hz input, got {}",
            NPUSCH_RATE_HZ,
            grid.rate.hz()
        )));
    }
    let d = Decimator::new();
    let antennas = grid
        .antennas
        .iter()
        .map(|a| d.process(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexGrid::time(SampleRate::NPRACH, antennas))
}
