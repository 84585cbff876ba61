//! Sum-of-sinusoids Rayleigh fading on a tapped delay line.
//!
//! Each tap on each receive antenna is an independent process
//! `g(t) = √(P/M) Σ_k e^{j(2π f_d cos α_k t + φ_k)}` with random arrival
//! angles and phases, whose ensemble autocorrelation is `P·J0(2π f_d τ)`.
//! Gains are held for [`CHUNK`] samples; tap delays are realised with
//! windowed-sinc kernels so sub-sample delays are honoured.

use std::f64::consts::PI;

use rand::Rng;

use super::impair::{windowed_sinc, HALF_SPAN};
use super::profile::ChannelProfile;
use crate::dsp::cis;
use crate::grid::{ComplexGrid, C64};

pub const SINUSOIDS: usize = 32;
pub const CHUNK: usize = 16;

#[derive(Debug, Clone)]
struct TapProcess {
    amp: f64,
    /// Angular Doppler frequency of each sinusoid, rad/s.
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl TapProcess {
    fn gain(&self, t: f64) -> C64 {
        self.omega
            .iter()
            .zip(&self.phase)
            .map(|(&w, &p)| cis(w * t + p))
            .sum::<C64>()
            * self.amp
    }
}

/// Random draw of all tap processes for every receive antenna.
#[derive(Debug, Clone)]
pub struct FadingState {
    /// `[antenna][tap]`
    taps: Vec<Vec<TapProcess>>,
}

impl FadingState {
    pub fn new<R: Rng + ?Sized>(profile: &ChannelProfile, n_rx: usize, rng: &mut R) -> Self {
        let taps = (0..n_rx)
            .map(|_| {
                profile
                    .taps
                    .iter()
                    .map(|&(_, p)| {
                        let omega = (0..SINUSOIDS)
                            .map(|_| 2.0 * PI * profile.doppler_hz * (2.0 * PI * rng.random::<f64>()).cos())
                            .collect();
                        let phase = (0..SINUSOIDS).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
                        TapProcess {
                            amp: (p / SINUSOIDS as f64).sqrt(),
                            omega,
                            phase,
                        }
                    })
                    .collect()
            })
            .collect();
        FadingState { taps }
    }

    pub fn n_rx(&self) -> usize {
        self.taps.len()
    }

    /// Complex gain of `tap` on antenna `ant` at time `t` seconds.
    pub fn gain(&self, ant: usize, tap: usize, t: f64) -> C64 {
        self.taps[ant][tap].gain(t)
    }
}

/// Passes antenna 0 of `wave` through the faded delay line once per receive
/// antenna of `state`.
pub fn apply_fading(wave: &ComplexGrid, profile: &ChannelProfile, state: &FadingState) -> ComplexGrid {
    let rate = wave.rate.as_f64();
    let x = wave.antenna(0);
    let delays: Vec<f64> = profile.taps.iter().map(|t| t.0 * 1e-9 * rate).collect();
    let k_min = -HALF_SPAN;
    let k_max = delays.iter().fold(0.0f64, |m, &d| m.max(d)).ceil() as i64 + HALF_SPAN;
    let span = (k_max - k_min + 1) as usize;
    let kernels: Vec<Vec<f64>> = delays
        .iter()
        .map(|&d| (k_min..=k_max).map(|k| windowed_sinc(k as f64 - d)).collect())
        .collect();
    let n = x.len();
    let chunks = n.div_ceil(CHUNK);
    let dt = CHUNK as f64 / rate;
    let t0 = (CHUNK as f64 - 1.0) / 2.0 / rate;
    let antennas = (0..state.n_rx())
        .map(|a| {
            let procs = &state.taps[a];
            // Rotating phasors of every sinusoid, advanced chunk by chunk.
            let mut phasors: Vec<Vec<C64>> = procs
                .iter()
                .map(|p| p.omega.iter().zip(&p.phase).map(|(&w, &ph)| cis(w * t0 + ph)).collect())
                .collect();
            let steps: Vec<Vec<C64>> = procs.iter().map(|p| p.omega.iter().map(|&w| cis(w * dt)).collect()).collect();
            let mut out = vec![C64::new(0.0, 0.0); n];
            let mut filt = vec![C64::new(0.0, 0.0); span];
            for c in 0..chunks {
                filt.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                for (p, proc_) in procs.iter().enumerate() {
                    let g = phasors[p].iter().sum::<C64>() * proc_.amp;
                    for (f, &h) in filt.iter_mut().zip(&kernels[p]) {
                        *f += g * h;
                    }
                    for (ph, st) in phasors[p].iter_mut().zip(&steps[p]) {
                        *ph *= st;
                    }
                }
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(n);
                for (i, o) in out[lo..hi].iter_mut().enumerate() {
                    let m = (lo + i) as i64;
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, &f) in filt.iter().enumerate() {
                        let idx = m - (k_min + j as i64);
                        if idx >= 0 && (idx as usize) < n {
                            acc += f * x[idx as usize];
                        }
                    }
                    *o = acc;
                }
            }
            out
        })
        .collect();
    ComplexGrid::time(wave.rate, antennas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::SampleRate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Bessel J0 by trapezoidal quadrature of its integral form.
    fn j0(x: f64) -> f64 {
        let n = 2000;
        (0..n)
            .map(|i| {
                let th = PI * (i as f64 + 0.5) / n as f64;
                (x * th.sin()).cos()
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn static_unit_tap_is_identity() {
        let mut p = ChannelProfile::flat(0.0);
        let x: Vec<C64> = (0..200).map(|i| cis(0.37 * i as f64)).collect();
        let g = ComplexGrid::single(SampleRate::NPRACH, x.clone());
        let mut st = FadingState::new(&p, 1, &mut ChaCha8Rng::seed_from_u64(1));
        // Force a unit gain: all sinusoids at zero frequency and phase.
        st.taps[0][0].phase.iter_mut().for_each(|v| *v = 0.0);
        st.taps[0][0].amp = 1.0 / SINUSOIDS as f64;
        p.doppler_hz = 0.0;
        let y = apply_fading(&g, &p, &st);
        for (a, b) in y.antenna(0).iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_follows_bessel() {
        let p = ChannelProfile::flat(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lags = [0.0, 0.1, 0.179, 0.3, 0.423];
        let trials = 4000;
        let mut acc = vec![C64::new(0.0, 0.0); lags.len()];
        let mut env = 0.0;
        let mut env_sq = 0.0;
        let mut env_lag = 0.0;
        for _ in 0..trials {
            let st = FadingState::new(&p, 1, &mut rng);
            let g0 = st.gain(0, 0, 0.0);
            for (a, &l) in acc.iter_mut().zip(&lags) {
                *a += g0 * st.gain(0, 0, l).conj();
            }
            let e0 = g0.norm_sqr();
            env += e0;
            env_sq += e0 * e0;
            env_lag += e0 * st.gain(0, 0, 0.179).norm_sqr();
        }
        for (a, &l) in acc.iter().zip(&lags) {
            let r = a.re / trials as f64;
            assert!((r - j0(2.0 * PI * l)).abs() < 0.06, "lag {l}: {r}");
        }
        // Power-envelope correlation coefficient falls to one half at 0.179/f_d.
        let m = env / trials as f64;
        let rho = (env_lag / trials as f64 - m * m) / (env_sq / trials as f64 - m * m);
        assert!((rho - 0.5).abs() < 0.08, "{rho}");
    }

    #[test]
    fn epa_mean_power_over_ten_seconds() {
        let p = ChannelProfile::epa(5.0);
        let g = ComplexGrid::single(SampleRate::NPRACH, vec![C64::new(1.0, 0.0); 2_400_000]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut total = 0.0;
        let runs = 2;
        for _ in 0..runs {
            let st = FadingState::new(&p, 2, &mut rng);
            let y = apply_fading(&g, &p, &st);
            for a in 0..2 {
                total += y.antenna(a)[100..].iter().map(|v| v.norm_sqr()).sum::<f64>() / (y.len() - 100) as f64;
            }
        }
        let mean = total / (2 * runs) as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn antennas_independent_and_reproducible() {
        let p = ChannelProfile::etu(1.0);
        let a = FadingState::new(&p, 2, &mut ChaCha8Rng::seed_from_u64(5));
        let b = FadingState::new(&p, 2, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.gain(1, 3, 0.2), b.gain(1, 3, 0.2));
        assert_ne!(a.gain(0, 3, 0.2), a.gain(1, 3, 0.2));
    }
}
