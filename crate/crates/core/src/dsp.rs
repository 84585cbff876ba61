use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::grid::C64;

#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..50 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Three-point parabolic peak refinement around `beta`.
///
/// Returns the fractional offset `p` in (-0.5, 0.5) and the interpolated
/// peak value. A flat neighbourhood yields `p = 0`.
pub fn quadratic_peak(alpha: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let denom = alpha - 2.0 * beta + gamma;
    if denom.abs() < f64::MIN_POSITIVE || !denom.is_finite() {
        return (0.0, beta);
    }
    let p = (0.5 * (alpha - gamma) / denom).clamp(-0.5, 0.5);
    (p, beta - 0.25 * (alpha - gamma) * p)
}

/// Table of `e^{-j2πn/N}` for evaluating single DFT bins.
#[derive(Debug, Clone)]
pub struct Twiddles {
    table: Vec<C64>,
}

impl Twiddles {
    pub fn new(n: usize) -> Self {
        Twiddles {
            table: (0..n).map(|i| cis(-2.0 * PI * i as f64 / n as f64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `Σ x[n] e^{-j2π·bin·n/N}` over `x.len() == N` samples.
    pub fn bin(&self, x: &[C64], bin: i64) -> C64 {
        let n = self.table.len();
        debug_assert_eq!(x.len(), n);
        let step = bin.rem_euclid(n as i64) as usize;
        let mut idx = 0usize;
        let mut acc = C64::new(0.0, 0.0);
        for &v in x {
            acc += v * self.table[idx];
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
        acc
    }
}

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct FftPair {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
    }
}

/// Orthonormal DFT of order `x.len()` (used for SC-FDMA precoding).
pub fn unitary_dft(x: &[C64], inverse: bool) -> Vec<C64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    let mut buf = x.to_vec();
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    plan.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

pub fn energy(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Wrap a phase into (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}
