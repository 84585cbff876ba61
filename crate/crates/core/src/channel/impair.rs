use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{bessel_i0, cis, db_to_lin};
use crate::grid::{ComplexGrid, C64};

/// Half-width of the fading tap kernels.
pub(crate) const HALF_SPAN: i64 = 15;

/// Hann-windowed sinc evaluated at `t` samples from its centre.
pub(crate) fn windowed_sinc(t: f64) -> f64 {
    let w = HALF_SPAN as f64 + 1.0;
    if t.abs() >= w {
        return 0.0;
    }
    let sinc = if t.abs() < 1e-12 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    };
    sinc * 0.5 * (1.0 + (PI * t / w).cos())
}

const DELAY_HALF_SPAN: i64 = 48;
const DELAY_BETA: f64 = 13.0;

/// Kaiser-windowed sinc for the timing-offset interpolator; flat to about
/// 1e-6 up to 0.4 of the sample rate.
fn delay_kernel(frac: f64) -> Vec<f64> {
    let w = DELAY_HALF_SPAN as f64 + 1.0;
    let norm = bessel_i0(DELAY_BETA);
    (-DELAY_HALF_SPAN..=DELAY_HALF_SPAN)
        .map(|k| {
            let t = k as f64 - frac;
            let sinc = if t.abs() < 1e-12 { 1.0 } else { (PI * t).sin() / (PI * t) };
            let r = (1.0 - (t / w).powi(2)).max(0.0);
            sinc * bessel_i0(DELAY_BETA * r.sqrt()) / norm
        })
        .collect()
}

/// Multiplies sample `n` by `e^{j2π·cfo·n/rate}`.
pub fn apply_cfo(wave: &ComplexGrid, cfo_hz: f64) -> ComplexGrid {
    if cfo_hz == 0.0 {
        return wave.clone();
    }
    let w = 2.0 * PI * cfo_hz / wave.rate.as_f64();
    let antennas = wave
        .antennas
        .iter()
        .map(|a| a.iter().enumerate().map(|(n, &v)| v * cis(w * n as f64)).collect())
        .collect();
    ComplexGrid {
        antennas,
        ..wave.clone()
    }
}

/// Delays by `tau` samples: whole samples by shifting, the remainder by
/// band-limited interpolation. The output grows by `ceil(tau)` samples.
pub fn apply_timing_offset(wave: &ComplexGrid, tau: f64) -> ComplexGrid {
    assert!(tau >= 0.0 && tau.is_finite(), "timing offset must be finite and non-negative");
    let whole = tau.floor() as usize;
    let frac = tau - whole as f64;
    let grow = tau.ceil() as usize;
    let kernel = delay_kernel(frac);
    let antennas = wave
        .antennas
        .iter()
        .map(|a| {
            let n_in = a.len() as i64;
            let mut out = vec![C64::new(0.0, 0.0); a.len() + grow];
            for (n, o) in out.iter_mut().enumerate() {
                let base = n as i64 - whole as i64;
                if frac == 0.0 {
                    if (0..n_in).contains(&base) {
                        *o = a[base as usize];
                    }
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for (i, &h) in kernel.iter().enumerate() {
                    let idx = base - (i as i64 - DELAY_HALF_SPAN);
                    if (0..n_in).contains(&idx) {
                        acc += a[idx as usize] * h;
                    }
                }
                *o = acc;
            }
            out
        })
        .collect();
    ComplexGrid {
        antennas,
        ..wave.clone()
    }
}

/// Per-sample noise variance giving `snr_db` per resource element of width
/// `spacing_hz`, for unit-power tones.
pub fn noise_variance(rate_hz: f64, spacing_hz: f64, snr_db: f64) -> f64 {
    rate_hz / spacing_hz / db_to_lin(snr_db)
}

/// Circularly-symmetric complex Gaussian samples of variance `var`.
pub fn complex_noise<R: Rng + ?Sized>(rng: &mut R, var: f64, len: usize) -> Vec<C64> {
    let s = (var / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * s, im * s)
        })
        .collect()
}

/// Adds white noise at `snr_db` per resource element; `+∞` adds nothing.
pub fn apply_awgn<R: Rng + ?Sized>(wave: &ComplexGrid, snr_db: f64, spacing_hz: f64, rng: &mut R) -> ComplexGrid {
    if snr_db == f64::INFINITY {
        return wave.clone();
    }
    let var = noise_variance(wave.rate.as_f64(), spacing_hz, snr_db);
    let antennas = wave
        .antennas
        .iter()
        .map(|a| {
            let noise = complex_noise(rng, var, a.len());
            a.iter().zip(noise).map(|(&x, w)| x + w).collect()
        })
        .collect();
    ComplexGrid {
        antennas,
        ..wave.clone()
    }
}
